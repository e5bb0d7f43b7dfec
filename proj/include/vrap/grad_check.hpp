#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

namespace vrap::losses {

inline constexpr std::size_t kGradCheckMaxParameters = 2000;

struct GradCheckReport {
  std::size_t n_parameters = 0;
  double max_rel_error = 0.0;
  std::size_t worst_index = 0;
  double analytic_at_worst = 0.0;
  double numeric_at_worst = 0.0;
  double eps = 0.0;
  double tolerance = 0.0;
  bool passed = false;
};

using ScalarFunction = std::function<double(std::span<const double>)>;

/// Central differences (f(x + eps e_i) - f(x - eps e_i)) / 2 eps against
/// `analytic`, parameter by parameter. The relative error of one entry is
/// |a - n| / max(|a|, |n|, abs_floor); abs_floor keeps entries whose true
/// gradient is ~0 from reporting round-off as relative error.
///
/// Throws InvalidArgument (eps outside [1e-7, 1e-3], more than
/// kGradCheckMaxParameters parameters, size mismatch) and NonFiniteLoss.
GradCheckReport grad_check(const ScalarFunction& f, std::span<const double> point, std::span<const double> analytic,
                           double eps = 1e-5, double tolerance = 1e-4, double abs_floor = 1e-6);

}  // namespace vrap::losses
