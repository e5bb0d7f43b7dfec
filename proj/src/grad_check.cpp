#include "vrap/grad_check.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "vrap/error.hpp"

namespace vrap::losses {

GradCheckReport grad_check(const ScalarFunction& f, std::span<const double> point, std::span<const double> analytic,
                           double eps, double tolerance, double abs_floor) {
  if (!(eps >= 1e-7 && eps <= 1e-3)) throw Error(ErrorKind::InvalidArgument, "eps must lie in [1e-7, 1e-3]");
  if (point.size() > kGradCheckMaxParameters) {
    throw Error(ErrorKind::InvalidArgument,
                std::to_string(point.size()) + " parameters exceeds the grad-check limit of " +
                    std::to_string(kGradCheckMaxParameters));
  }
  if (analytic.size() != point.size()) throw Error(ErrorKind::InvalidArgument, "gradient size mismatch");

  std::vector<double> x(point.begin(), point.end());
  auto eval = [&] {
    const double v = f(x);
    if (!std::isfinite(v)) throw Error(ErrorKind::NonFiniteLoss, "loss evaluated to a non-finite value");
    return v;
  };
  eval();

  GradCheckReport report;
  report.n_parameters = x.size();
  report.eps = eps;
  report.tolerance = tolerance;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double saved = x[i];
    x[i] = saved + eps;
    const double plus = eval();
    x[i] = saved - eps;
    const double minus = eval();
    x[i] = saved;

    const double numeric = (plus - minus) / (2.0 * eps);
    const double a = analytic[i];
    const double rel = std::isfinite(a)
                           ? std::abs(a - numeric) / std::max({std::abs(a), std::abs(numeric), abs_floor})
                           : std::numeric_limits<double>::infinity();
    if (i == 0 || rel > report.max_rel_error) {
      report.max_rel_error = rel;
      report.worst_index = i;
      report.analytic_at_worst = a;
      report.numeric_at_worst = numeric;
    }
  }
  report.passed = report.max_rel_error < tolerance;
  return report;
}

}  // namespace vrap::losses
