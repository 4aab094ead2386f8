#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

namespace pytype::stats {

struct Moments {
  std::size_t count = 0;
  double mean = 0.0;
  double mean_se = 0.0;
  double variance = 0.0;      // unbiased
  double variance_se = 0.0;   // jackknife
};

Moments moments(std::span<const double> x);

/// Jackknife standard error of the unbiased sample variance.
double jackknife_variance_se(std::span<const double> x);

/// Kolmogorov-Smirnov distance between the empirical law of x and N(0,1).
double ks_normal(std::vector<double> x);

/// Asymptotic KS critical value at level 0.01 for sample size R.
double ks_critical_01(std::size_t R);

double median(std::vector<double> x);
double quantile(std::vector<double> x, double q);
/// Standard error of the sample median from the distribution-free order-statistic
/// 95% interval, (x_(k) − x_(j))/(2·1.96).
double median_se(std::vector<double> x);

struct LinearFit {
  double slope = 0.0;
  double intercept = 0.0;
  double slope_se = 0.0;
};

/// Ordinary least squares y = a + b x. Needs at least two distinct x.
LinearFit linear_fit(std::span<const double> x, std::span<const double> y);

/// Runs body(i) for i in [0, count) on up to `threads` workers. Results must be written
/// by index so the outcome never depends on scheduling. The first exception (lowest
/// index) is rethrown after all workers stop.
void parallel_for(std::size_t count, unsigned threads, const std::function<void(std::size_t)>& body);

}  // namespace pytype::stats
