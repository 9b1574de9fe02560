#include "polaron/action.hpp"

#include <algorithm>

#include "polaron/error.hpp"

namespace polaron {

LagKernel::LagKernel(const PairKernel& kernel, double dt, std::size_t max_lag, double r_max, std::size_t n_r)
    : dt_(dt), max_lag_(max_lag) {
  require(dt > 0.0 && r_max > 0.0 && n_r >= 2, "lag kernel: dt, r_max must be positive and n_r >= 2");
  if (kernel.family() == KernelFamily::gaussian_omega1) {
    closed_form_ = true;
    inv_4s2_ = 1.0 / (4.0 * kernel.width() * kernel.width());
    lag_factor_.resize(max_lag + 1);
    for (std::size_t k = 0; k <= max_lag; ++k) lag_factor_[k] = kernel.eval(0.0, static_cast<double>(k) * dt);
    return;
  }
  n_r_ = n_r;
  inv_dr_ = static_cast<double>(n_r) / r_max;
  table_.resize((max_lag + 1) * (n_r + 1));
  for (std::size_t k = 0; k <= max_lag; ++k)
    for (std::size_t i = 0; i <= n_r; ++i)
      table_[k * (n_r + 1) + i] = kernel.eval(static_cast<double>(i) / inv_dr_, static_cast<double>(k) * dt);
}

LagKernel::LagKernel(const KernelGrid& grid, double dt, std::size_t max_lag, std::size_t n_r)
    : dt_(dt), max_lag_(max_lag), n_r_(n_r) {
  require(dt > 0.0 && n_r >= 2, "lag kernel: dt must be positive and n_r >= 2");
  inv_dr_ = static_cast<double>(n_r) / grid.r_max();
  table_.resize((max_lag + 1) * (n_r + 1));
  for (std::size_t k = 0; k <= max_lag; ++k)
    for (std::size_t i = 0; i <= n_r; ++i)
      table_[k * (n_r + 1) + i] = grid.eval(static_cast<double>(i) / inv_dr_, static_cast<double>(k) * dt);
}

PathAction::PathAction(ExternalPotential potential, std::shared_ptr<const LagKernel> pair)
    : potential_(std::move(potential)), pair_(std::move(pair)) {}

double PathAction::row_sum(const double* xi, const DiscretePath& path, std::size_t i, std::size_t j0,
                           std::size_t j1) const {
  const int d = path.dim();
  const std::size_t n = path.steps();
  const double* x = path.data();
  const LagKernel& w = *pair_;
  double s = 0.0;
  for (std::size_t j = j0; j < j1; ++j) {
    double r2 = 0.0;
    for (int c = 0; c < d; ++c) {
      const double diff = xi[c] - x[j * d + c];
      r2 += diff * diff;
    }
    s += trapezoid_weight(j, n) * w(r2, i > j ? i - j : j - i);
  }
  return s;
}

ActionValue PathAction::evaluate(const DiscretePath& path) const {
  const std::size_t n = path.steps();
  const double dt = path.dt();
  ActionValue a;
  for (std::size_t i = 0; i <= n; ++i) a.v_part += trapezoid_weight(i, n) * potential_.eval(path.point(i));
  a.v_part *= dt;
  if (!pair_) return a;
  require(std::abs(pair_->dt() - dt) <= 1e-12 * dt, "action: lag kernel dt does not match path dt");
  double w = 0.0;
  for (std::size_t i = 0; i <= n; ++i) {
    const double wi = trapezoid_weight(i, n);
    w += wi * (wi * (*pair_)(0.0, 0) + 2.0 * row_sum(path.point(i).data(), path, i, i + 1, n + 1));
  }
  a.w_part = w * dt * dt;
  return a;
}

ActionValue PathAction::delta(const DiscretePath& path, std::size_t first, std::size_t count,
                              std::span<const double> proposed, bool with_pair) const {
  const int d = path.dim();
  const std::size_t n = path.steps();
  require(count >= 1 && first + count <= n + 1, "action delta: block outside path");
  require(proposed.size() == count * static_cast<std::size_t>(d), "action delta: proposed size mismatch");
  const double dt = path.dt();
  const std::size_t last = first + count;
  ActionValue delta;
  for (std::size_t k = 0; k < count; ++k) {
    const std::size_t i = first + k;
    delta.v_part += trapezoid_weight(i, n) * (potential_.eval(proposed.subspan(k * d, d)) - potential_.eval(path.point(i)));
  }
  delta.v_part *= dt;
  if (!pair_ || !with_pair) return delta;

  const LagKernel& w = *pair_;
  double dw = 0.0;
  for (std::size_t k = 0; k < count; ++k) {
    const std::size_t i = first + k;
    const double* xn = &proposed[k * d];
    const double* xo = path.point(i).data();
    double outside = row_sum(xn, path, i, 0, first) + row_sum(xn, path, i, last, n + 1);
    outside -= row_sum(xo, path, i, 0, first) + row_sum(xo, path, i, last, n + 1);
    double inside = 0.0;
    for (std::size_t q = k + 1; q < count; ++q) {
      const std::size_t j = first + q;
      const double* yn = &proposed[q * d];
      const double* yo = path.point(j).data();
      double rn = 0.0, ro = 0.0;
      for (int c = 0; c < d; ++c) {
        rn += (xn[c] - yn[c]) * (xn[c] - yn[c]);
        ro += (xo[c] - yo[c]) * (xo[c] - yo[c]);
      }
      inside += trapezoid_weight(j, n) * (w(rn, q - k) - w(ro, q - k));
    }
    dw += 2.0 * trapezoid_weight(i, n) * (outside + inside);
  }
  delta.w_part = dw * dt * dt;
  return delta;
}

}  // namespace polaron
