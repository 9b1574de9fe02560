#include "polaron/gaussref.hpp"

#include <algorithm>
#include <cmath>

#include "polaron/error.hpp"
#include "polaron/random.hpp"

namespace polaron {

namespace {

std::size_t integer_ratio(double a, double b, const char* what) {
  const double q = a / b;
  const double r = std::round(q);
  require(r >= 1.0 && std::abs(q - r) <= 1e-9 * std::max(1.0, q), what);
  return static_cast<std::size_t>(r);
}

}  // namespace

std::size_t BlockGaussianSpec::steps() const { return steps_per_block() * blocks(); }
std::size_t BlockGaussianSpec::steps_per_block() const {
  return integer_ratio(block_length, dt, "gaussref: l/dt must be a positive integer");
}
std::size_t BlockGaussianSpec::blocks() const {
  return integer_ratio(horizon, block_length, "gaussref: T/l must be a positive integer");
}

void BlockGaussianSpec::validate() const {
  require(std::isfinite(beta) && beta >= 0.0, "gaussref: beta must be >= 0");
  require(dt > 0.0 && block_length > 0.0 && horizon > 0.0, "gaussref: dt, l, T must be positive");
  (void)steps();
}

double BandMatrix::get(std::size_t i, std::size_t j) const {
  if (i < j) std::swap(i, j);
  return i - j > bandwidth ? 0.0 : at(i, j);
}

std::vector<double> block_penalty_matrix(double beta, double dt, std::size_t points) {
  std::vector<double> p(points * points);
  const double c = 2.0 * beta * dt * dt;
  for (std::size_t i = 0; i < points; ++i)
    for (std::size_t j = 0; j < points; ++j) p[i * points + j] = c * ((i == j ? double(points) : 0.0) - 1.0);
  return p;
}

PrecisionFactor::PrecisionFactor(const BlockGaussianSpec& spec) : spec_(spec) {
  spec.validate();
  const std::size_t n = spec.steps();
  const std::size_t m = spec.steps_per_block();
  const double dt = spec.dt;
  // Unknowns are x_1..x_N at rows 0..N-1; x_0 = 0 drops out.
  precision_ = BandMatrix(n, std::max<std::size_t>(m, 1));
  for (std::size_t i = 0; i < n; ++i) {
    precision_.at(i, i) = (i + 1 < n ? 2.0 : 1.0) / dt;
    if (i > 0) precision_.at(i, i - 1) = -1.0 / dt;
  }
  // Density exponent -1/2 x^T P x, so P carries twice the penalty matrix.
  const double c = 4.0 * spec.beta * dt * dt;
  const double nb = static_cast<double>(m + 1);
  if (c > 0.0) {
    for (std::size_t b = 0; b < spec.blocks(); ++b) {
      const std::size_t g0 = b * m, g1 = (b + 1) * m;
      for (std::size_t gi = std::max<std::size_t>(g0, 1); gi <= g1; ++gi) {
        precision_.at(gi - 1, gi - 1) += c * (nb - 1.0);
        for (std::size_t gj = std::max<std::size_t>(g0, 1); gj < gi; ++gj) precision_.at(gi - 1, gj - 1) -= c;
      }
    }
  }

  factor_ = precision_;
  const std::size_t w = factor_.bandwidth;
  for (std::size_t j = 0; j < n; ++j) {
    double djj = factor_.at(j, j);
    const std::size_t k0 = j > w ? j - w : 0;
    for (std::size_t k = k0; k < j; ++k) djj -= factor_.at(j, k) * factor_.at(j, k);
    if (!(djj > 0.0)) throw Error(ErrorKind::internal, "gaussref: precision is not positive definite");
    const double ljj = std::sqrt(djj);
    factor_.at(j, j) = ljj;
    for (std::size_t i = j + 1; i <= std::min(n - 1, j + w); ++i) {
      double s = factor_.at(i, j);
      const std::size_t kk = std::max(k0, i > w ? i - w : 0);
      for (std::size_t k = kk; k < j; ++k) s -= factor_.at(i, k) * factor_.at(j, k);
      factor_.at(i, j) = s / ljj;
    }
  }
}

double PrecisionFactor::cholesky_residual() const {
  const std::size_t n = precision_.n, w = precision_.bandwidth;
  double worst = 0.0, scale = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i > w ? i - w : 0; j <= i; ++j) {
      double s = 0.0;
      for (std::size_t k = i > w ? i - w : 0; k <= j; ++k) s += factor_.at(i, k) * factor_.at(j, k);
      worst = std::max(worst, std::abs(s - precision_.at(i, j)));
      scale = std::max(scale, std::abs(precision_.at(i, j)));
    }
  }
  return worst / scale;
}

void PrecisionFactor::forward(std::span<double> b) const {
  const std::size_t n = factor_.n, w = factor_.bandwidth;
  for (std::size_t i = 0; i < n; ++i) {
    double s = b[i];
    for (std::size_t k = i > w ? i - w : 0; k < i; ++k) s -= factor_.at(i, k) * b[k];
    b[i] = s / factor_.at(i, i);
  }
}

void PrecisionFactor::backward(std::span<double> b) const {
  const std::size_t n = factor_.n, w = factor_.bandwidth;
  for (std::size_t ii = n; ii-- > 0;) {
    double s = b[ii];
    for (std::size_t k = ii + 1; k <= std::min(n - 1, ii + w); ++k) s -= factor_.at(k, ii) * b[k];
    b[ii] = s / factor_.at(ii, ii);
  }
}

double PrecisionFactor::quadratic_inverse(std::span<const double> u) const {
  std::vector<double> y(u.begin(), u.end());
  forward(y);
  double s = 0.0;
  for (double v : y) s += v * v;
  return s;
}

double PrecisionFactor::covariance(std::size_t i, std::size_t j) const {
  if (i == 0 || j == 0) return 0.0;
  std::vector<double> a(factor_.n, 0.0), b(factor_.n, 0.0);
  a[i - 1] = 1.0;
  b[j - 1] = 1.0;
  forward(a);
  forward(b);
  double s = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) s += a[k] * b[k];
  return s;
}

DiscretePath sample_exact(const PrecisionFactor& factor, int d, std::uint64_t seed) {
  const auto& spec = factor.spec();
  const std::size_t n = spec.steps();
  DiscretePath path(d, n, spec.dt);
  Rng rng(seed);
  NormalSource normal(rng);
  std::vector<double> g(n);
  for (int c = 0; c < d; ++c) {
    for (auto& v : g) v = normal();
    factor.backward(g);
    for (std::size_t i = 0; i < n; ++i) path.point(i + 1)[c] = g[i];
  }
  return path;
}

BlockVariance block_variance(const PrecisionFactor& factor) {
  const auto& spec = factor.spec();
  const std::size_t n = spec.steps(), m = spec.steps_per_block();
  BlockVariance v;
  std::vector<double> u(n, 0.0);
  u[m - 1] = 1.0;
  v.first_block = factor.quadratic_inverse(u);
  const std::size_t b = spec.blocks() / 2;
  std::fill(u.begin(), u.end(), 0.0);
  u[(b + 1) * m - 1] += 1.0;
  if (b > 0) u[b * m - 1] -= 1.0;
  v.middle_block = factor.quadratic_inverse(u);
  return v;
}

BlockVariance block_variance(const BlockGaussianSpec& spec) { return block_variance(PrecisionFactor(spec)); }

}  // namespace polaron
