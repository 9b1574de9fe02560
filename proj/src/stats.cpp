#include "polaron/stats.hpp"

#include <cmath>
#include <cstdlib>
#include <numeric>
#include <string>

#include "polaron/error.hpp"
#include "polaron/parallel.hpp"

namespace polaron {

EstimateWithError batch_means(std::span<const double> series, std::size_t batches) {
  require(!series.empty(), "batch_means: empty series");
  const std::size_t n = series.size();
  EstimateWithError est;
  est.value = std::accumulate(series.begin(), series.end(), 0.0) / static_cast<double>(n);

  batches = std::min(batches, n);
  if (batches < 2) {
    est.n_effective = 1.0;
    est.low_ess = true;
    return est;
  }
  const std::size_t len = n / batches;
  std::vector<double> means(batches);
  for (std::size_t b = 0; b < batches; ++b) {
    double s = 0.0;
    for (std::size_t i = b * len; i < (b + 1) * len; ++i) s += series[i];
    means[b] = s / static_cast<double>(len);
  }
  const double mb = std::accumulate(means.begin(), means.end(), 0.0) / static_cast<double>(batches);
  double var_b = 0.0;
  for (double m : means) var_b += (m - mb) * (m - mb);
  var_b /= static_cast<double>(batches - 1);
  est.std_error = std::sqrt(var_b / static_cast<double>(batches));

  double var_raw = 0.0;
  for (double x : series) var_raw += (x - est.value) * (x - est.value);
  var_raw /= static_cast<double>(n > 1 ? n - 1 : 1);

  if (est.std_error > 0.0) {
    est.n_effective = std::min(static_cast<double>(n), var_raw / (est.std_error * est.std_error));
  } else {
    // Constant series: no information about the spread, every sample counts.
    est.n_effective = static_cast<double>(n);
  }
  est.low_ess = est.n_effective < 10.0;
  return est;
}

EstimateWithError iid_mean(std::span<const double> sample) {
  require(!sample.empty(), "iid_mean: empty sample");
  const double n = static_cast<double>(sample.size());
  EstimateWithError est;
  est.value = std::accumulate(sample.begin(), sample.end(), 0.0) / n;
  double var = 0.0;
  for (double x : sample) var += (x - est.value) * (x - est.value);
  var /= std::max(1.0, n - 1.0);
  est.std_error = std::sqrt(var / n);
  est.n_effective = n;
  est.low_ess = n < 10.0;
  return est;
}

double joint_se(const EstimateWithError& a, const EstimateWithError& b) {
  return std::hypot(a.std_error, b.std_error);
}

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

double normal_pdf(double x) { return std::exp(-0.5 * x * x) / std::sqrt(2.0 * M_PI); }

double ks_critical_1pct(double n_effective) { return 1.6276 / std::sqrt(n_effective); }

double ls_slope(std::span<const double> x, std::span<const double> y) {
  require(x.size() == y.size() && x.size() >= 2, "ls_slope: need >= 2 matching points");
  const double n = static_cast<double>(x.size());
  const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
  const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
  double sxy = 0.0, sxx = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
  }
  return sxy / sxx;
}

std::size_t resolve_threads(std::size_t requested) {
  if (requested > 0) return requested;
  if (const char* env = std::getenv("POLARON_THREADS")) {
    try {
      const long v = std::stol(env);
      if (v > 0) return static_cast<std::size_t>(v);
    } catch (...) {
    }
  }
  const auto hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : hw;
}

}  // namespace polaron
