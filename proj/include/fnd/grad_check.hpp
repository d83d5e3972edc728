#pragma once

#include <functional>

#include "fnd/autograd.hpp"

namespace fnd::ad {

struct GradCheckResult {
  double max_relative_error = 0.0;
  std::string worst_parameter;
  Eigen::Index worst_index = -1;
  double analytic = 0.0;
  double numeric = 0.0;
};

/// Compares backward() against central differences for every coordinate of
/// every parameter. `loss` must rebuild the graph from the current parameter
/// values on each call and return a 1x1 node. Relative error per coordinate
/// is |a - n| / max(1e-8, |a| + |n|). Parameter gradients are zeroed on exit.
GradCheckResult grad_check(const std::function<Node()>& loss, ParameterSet& params, double eps);

}  // namespace fnd::ad
