#pragma once

#include <span>
#include <vector>

namespace homog {

struct Estimate {
  double value = 0.0;
  double standard_error = 0.0;
};

double sample_mean(std::span<const double> x);
/// Unbiased (n - 1) standard deviation; 0 for fewer than two samples.
double sample_stddev(std::span<const double> x);
/// Mean with standard error sd / sqrt(n).
Estimate mean_estimate(std::span<const double> x);
double median(std::vector<double> x);

struct LineFit {
  double slope = 0.0;
  double intercept = 0.0;
};
/// Least squares y = intercept + slope * x; needs two distinct x.
LineFit fit_line(std::span<const double> x, std::span<const double> y);

/// Two-sided 95% normal quantile.
inline constexpr double z95 = 1.959963984540054;

}  // namespace homog
