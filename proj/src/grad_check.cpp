#include "fnd/grad_check.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include "fnd/error.hpp"

namespace fnd::ad {

namespace {

double eval(const std::function<Node()>& loss) {
  const double v = loss().item();
  if (!std::isfinite(v)) throw std::domain_error("grad_check: loss is not finite");
  return v;
}

}  // namespace

GradCheckResult grad_check(const std::function<Node()>& loss, ParameterSet& params, double eps) {
  if (!(eps >= 1e-7 && eps <= 1e-3)) throw std::invalid_argument("grad_check: eps must be in [1e-7, 1e-3]");

  params.zero_grad();
  const Node out = loss();
  if (!std::isfinite(out.item())) throw std::domain_error("grad_check: loss is not finite");
  backward(out);

  GradCheckResult result;
  for (auto& [name, node] : params) {
    const Matrix analytic = node.grad();
    Matrix& value = node.mutable_value();
    for (Eigen::Index i = 0; i < value.size(); ++i) {
      const double saved = value.data()[i];
      value.data()[i] = saved + eps;
      const double up = eval(loss);
      value.data()[i] = saved - eps;
      const double down = eval(loss);
      value.data()[i] = saved;

      const double numeric = (up - down) / (2.0 * eps);
      const double a = analytic.data()[i];
      const double err = std::abs(a - numeric) / std::max(1e-8, std::abs(a) + std::abs(numeric));
      if (err > result.max_relative_error || result.worst_index < 0) {
        result.max_relative_error = std::max(result.max_relative_error, err);
        if (err >= result.max_relative_error) {
          result.worst_parameter = name;
          result.worst_index = i;
          result.analytic = a;
          result.numeric = numeric;
        }
      }
    }
  }
  params.zero_grad();
  return result;
}

}  // namespace fnd::ad
