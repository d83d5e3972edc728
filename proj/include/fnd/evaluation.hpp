#pragma once

#include <filesystem>
#include <iosfwd>
#include <span>
#include <vector>

#include "fnd/corpus.hpp"

namespace fnd {

/// 2x2 counts with Fake (rumor) as the positive class.
struct ConfusionMatrix {
  std::size_t tp = 0;
  std::size_t fp = 0;
  std::size_t tn = 0;
  std::size_t fn = 0;

  std::size_t total() const { return tp + fp + tn + fn; }
  bool operator==(const ConfusionMatrix&) const = default;
};

/// Throws std::invalid_argument on length mismatch or empty input.
ConfusionMatrix confusion(std::span<const Label> preds, std::span<const Label> golds);

struct ClassMetrics {
  Label label = Label::Fake;
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  std::size_t support = 0;
};

/// Undefined ratios (zero denominators) are reported as 0.
double f1_score(double precision, double recall);

/// Metrics of `label`, treating it as the positive class (roles of the
/// off-diagonal cells swap for Real).
ClassMetrics class_metrics(const ConfusionMatrix& cm, Label label);

struct ClassReport {
  // Real (non-rumor) first, then Fake (rumor).
  std::vector<ClassMetrics> per_class;
  double accuracy = 0.0;
  // Unweighted mean of the per-class F1 values.
  double macro_f1 = 0.0;
};

ClassReport report(const ConfusionMatrix& cm);
ClassReport report(std::span<const Label> preds, std::span<const Label> golds);

/// `class,precision,recall,f1,support` to `report_path` and
/// `tp,fp,tn,fn` to `confusion_path`, 4 decimal places.
void export_report(const ClassReport& report, const ConfusionMatrix& cm,
                   const std::filesystem::path& report_path,
                   const std::filesystem::path& confusion_path);

/// Fixed-width table in the column order class, precision, recall, f1, support.
void print_report(std::ostream& out, const ClassReport& report);

}  // namespace fnd
