#include "fnd/evaluation.hpp"

#include <cstdio>
#include <fstream>
#include <ostream>
#include <stdexcept>

#include "fnd/error.hpp"

namespace fnd {

ConfusionMatrix confusion(std::span<const Label> preds, std::span<const Label> golds) {
  if (preds.size() != golds.size()) throw std::invalid_argument("confusion: prediction/gold length mismatch");
  if (preds.empty()) throw std::invalid_argument("confusion: no examples");
  ConfusionMatrix cm;
  for (std::size_t i = 0; i < preds.size(); ++i) {
    const bool pred_fake = preds[i] == Label::Fake;
    const bool gold_fake = golds[i] == Label::Fake;
    if (pred_fake && gold_fake) ++cm.tp;
    else if (pred_fake) ++cm.fp;
    else if (gold_fake) ++cm.fn;
    else ++cm.tn;
  }
  return cm;
}

double f1_score(double precision, double recall) {
  const double denom = precision + recall;
  return denom > 0.0 ? 2.0 * precision * recall / denom : 0.0;
}

ClassMetrics class_metrics(const ConfusionMatrix& cm, Label label) {
  const bool fake = label == Label::Fake;
  const auto tp = static_cast<double>(fake ? cm.tp : cm.tn);
  const auto fp = static_cast<double>(fake ? cm.fp : cm.fn);
  const auto fn = static_cast<double>(fake ? cm.fn : cm.fp);
  ClassMetrics m;
  m.label = label;
  m.precision = tp + fp > 0 ? tp / (tp + fp) : 0.0;
  m.recall = tp + fn > 0 ? tp / (tp + fn) : 0.0;
  m.f1 = f1_score(m.precision, m.recall);
  m.support = fake ? cm.tp + cm.fn : cm.tn + cm.fp;
  return m;
}

ClassReport report(const ConfusionMatrix& cm) {
  ClassReport r;
  r.per_class = {class_metrics(cm, Label::Real), class_metrics(cm, Label::Fake)};
  const auto total = static_cast<double>(cm.total());
  r.accuracy = total > 0 ? static_cast<double>(cm.tp + cm.tn) / total : 0.0;
  r.macro_f1 = 0.5 * (r.per_class[0].f1 + r.per_class[1].f1);
  return r;
}

ClassReport report(std::span<const Label> preds, std::span<const Label> golds) {
  return report(confusion(preds, golds));
}

void export_report(const ClassReport& report, const ConfusionMatrix& cm,
                   const std::filesystem::path& report_path,
                   const std::filesystem::path& confusion_path) {
  std::ofstream out(report_path, std::ios::binary);
  if (!out) throw DataError("cannot write " + report_path.string());
  out << "class,precision,recall,f1,support\n";
  char line[160];
  for (const auto& m : report.per_class) {
    std::snprintf(line, sizeof line, "%s,%.4f,%.4f,%.4f,%zu\n", std::string(label_name(m.label)).c_str(),
                  m.precision, m.recall, m.f1, m.support);
    out << line;
  }

  std::ofstream conf(confusion_path, std::ios::binary);
  if (!conf) throw DataError("cannot write " + confusion_path.string());
  conf << "tp,fp,tn,fn\n" << cm.tp << ',' << cm.fp << ',' << cm.tn << ',' << cm.fn << '\n';
}

void print_report(std::ostream& out, const ClassReport& report) {
  char line[160];
  std::snprintf(line, sizeof line, "%-8s %9s %9s %9s %9s\n", "class", "precision", "recall", "f1", "support");
  out << line;
  for (const auto& m : report.per_class) {
    std::snprintf(line, sizeof line, "%-8s %9.4f %9.4f %9.4f %9zu\n", std::string(label_name(m.label)).c_str(),
                  m.precision, m.recall, m.f1, m.support);
    out << line;
  }
  std::snprintf(line, sizeof line, "accuracy %.4f  macro_f1 %.4f\n", report.accuracy, report.macro_f1);
  out << line;
}

}  // namespace fnd
