#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace polaron {

/// A Monte Carlo estimate with an autocorrelation-aware error bar.
struct EstimateWithError {
  double value = 0.0;
  double std_error = 0.0;
  double n_effective = 0.0;
  /// Set when n_effective < 10.
  bool low_ess = false;
};

/// Batch-means estimate of the mean of a (possibly autocorrelated) series.
/// Uses min(batches, n) equal batches; trailing samples that do not fill a
/// batch are dropped from the error estimate but kept in the mean.
EstimateWithError batch_means(std::span<const double> series, std::size_t batches = 32);

/// Mean and standard error of an i.i.d. sample.
EstimateWithError iid_mean(std::span<const double> sample);

/// Joint standard error of a difference of two independent estimates.
double joint_se(const EstimateWithError& a, const EstimateWithError& b);

double normal_cdf(double x);
double normal_pdf(double x);

/// Two-sample-free KS distance between the empirical CDF of `sample` and a model CDF.
template <class Cdf>
double ks_distance(std::vector<double> sample, Cdf&& cdf);

/// Asymptotic KS critical value at level 1% for n effective samples.
double ks_critical_1pct(double n_effective);

/// Least-squares slope of y against x.
double ls_slope(std::span<const double> x, std::span<const double> y);

}  // namespace polaron

#include <algorithm>
#include <cmath>

template <class Cdf>
double polaron::ks_distance(std::vector<double> sample, Cdf&& cdf) {
  std::sort(sample.begin(), sample.end());
  const double n = static_cast<double>(sample.size());
  double d = 0.0;
  for (std::size_t i = 0; i < sample.size(); ++i) {
    const double f = cdf(sample[i]);
    d = std::max(d, std::max(std::abs(f - i / n), std::abs((i + 1) / n - f)));
  }
  return d;
}
