#include "polaron/pair_kernel.hpp"

#include <algorithm>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <cmath>
#include <sstream>

#include "polaron/error.hpp"
#include "polaron/random.hpp"

namespace polaron {

namespace {

double sinc(double x) {
  if (std::abs(x) < 1e-4) return 1.0 - x * x / 6.0;
  return std::sin(x) / x;
}

}  // namespace

PairKernel PairKernel::gaussian_omega1(int dimension, double width) {
  require(dimension >= 1 && dimension <= 3, "gaussian-omega1: dimension must be 1, 2 or 3");
  require(std::isfinite(width) && width > 0.0, "gaussian-omega1: width must be positive");
  PairKernel k;
  k.family_ = KernelFamily::gaussian_omega1;
  k.dimension_ = dimension;
  k.width_ = width;
  k.amplitude_ = std::pow(M_PI * width * width, 0.5 * dimension) / 4.0;
  return k;
}

PairKernel PairKernel::nelson3d(double gamma_width, double t_min) {
  require(std::isfinite(gamma_width) && gamma_width > 0.0, "nelson3d: width must be positive");
  require(std::isfinite(t_min) && t_min >= 0.0, "nelson3d: t_min must be non-negative");
  PairKernel k;
  k.family_ = KernelFamily::nelson3d;
  k.dimension_ = 3;
  k.width_ = gamma_width;
  k.t_min_ = t_min;
  k.amplitude_ = k.eval_nelson(0.0, t_min);
  return k;
}

PairKernel PairKernel::custom_grid(int dimension, double r_max, double t_max, std::size_t n_r, std::size_t n_t,
                                   std::vector<double> values) {
  require(dimension >= 1, "custom-grid: dimension must be positive");
  for (double v : values) require(std::isfinite(v) && v >= 0.0, "custom-grid: values must be finite and >= 0");
  PairKernel k;
  k.family_ = KernelFamily::custom_grid;
  k.dimension_ = dimension;
  k.table_ = std::make_shared<const KernelGrid>(r_max, t_max, n_r, n_t, std::move(values));
  k.amplitude_ = k.table_->node(0, 0);
  return k;
}

double PairKernel::eval(double r, double t) const {
  if (!std::isfinite(r) || !std::isfinite(t)) throw ValidationError("kernel evaluated at non-finite (r, t)");
  r = std::abs(r);
  switch (family_) {
    case KernelFamily::gaussian_omega1:
      return amplitude_ * std::exp(-std::abs(t) - r * r / (4.0 * width_ * width_));
    case KernelFamily::nelson3d:
      if (t < 0.0) throw ValidationError("nelson3d: negative time");
      return eval_nelson(r, std::max(t, t_min_));
    case KernelFamily::custom_grid:
      return table_->eval(r, t);
  }
  throw Error(ErrorKind::internal, "unknown kernel family");
}

double PairKernel::eval_nelson(double r, double t) const {
  const double g2 = width_ * width_;
  const double g6 = g2 * g2 * g2;
  const double k_max = std::sqrt(60.0) / width_;
  auto f = [&](double k) { return k * k * std::exp(-g2 * k * k - t * k) * sinc(k * r); };
  double error = 0.0, l1 = 0.0;
  const double value =
      boost::math::quadrature::gauss_kronrod<double, 31>::integrate(f, 0.0, k_max, 12, 1e-11, &error, &l1);
  if (!(error <= 1e-8 * std::max(l1, 1e-300)) && error > 1e-14) {
    throw NumericError("nelson3d quadrature did not converge", error);
  }
  return std::max(0.0, M_PI * g6 * value);
}

std::string PairKernel::name() const {
  std::ostringstream os;
  switch (family_) {
    case KernelFamily::gaussian_omega1:
      os << "gaussian-omega1(d=" << dimension_ << ",s=" << width_ << ")";
      break;
    case KernelFamily::nelson3d:
      os << "nelson3d(g=" << width_ << ",t_min=" << t_min_ << ")";
      break;
    case KernelFamily::custom_grid:
      os << "custom-grid(" << table_->n_r() << "x" << table_->n_t() << ")";
      break;
  }
  return os.str();
}

KernelGrid::KernelGrid(const PairKernel& kernel, double r_max, double t_max, std::size_t n_r, std::size_t n_t)
    : r_max_(r_max), t_max_(t_max), n_r_(n_r), n_t_(n_t) {
  require(std::isfinite(r_max) && r_max > 0.0, "kernel grid: r_max must be positive");
  require(std::isfinite(t_max) && t_max > 0.0, "kernel grid: t_max must be positive");
  require(n_r >= 2 && n_t >= 2, "kernel grid: need at least 2 nodes per axis");
  dr_ = r_max / static_cast<double>(n_r - 1);
  dt_ = t_max / static_cast<double>(n_t - 1);
  values_.resize(n_r * n_t);
  for (std::size_t i = 0; i < n_r; ++i)
    for (std::size_t j = 0; j < n_t; ++j) values_[i * n_t + j] = kernel.eval(i * dr_, j * dt_);

  // Probe up to ~4096 cell midpoints spread over the grid.
  const std::size_t stride_r = std::max<std::size_t>(1, (n_r - 1) / 64);
  const std::size_t stride_t = std::max<std::size_t>(1, (n_t - 1) / 64);
  for (std::size_t i = 0; i + 1 < n_r; i += stride_r) {
    for (std::size_t j = 0; j + 1 < n_t; j += stride_t) {
      const double r = (i + 0.5) * dr_, t = (j + 0.5) * dt_;
      interp_error_ = std::max(interp_error_, std::abs(eval(r, t) - kernel.eval(r, t)));
    }
  }
}

KernelGrid::KernelGrid(double r_max, double t_max, std::size_t n_r, std::size_t n_t, std::vector<double> values)
    : r_max_(r_max), t_max_(t_max), n_r_(n_r), n_t_(n_t), values_(std::move(values)) {
  require(std::isfinite(r_max) && r_max > 0.0, "kernel grid: r_max must be positive");
  require(std::isfinite(t_max) && t_max > 0.0, "kernel grid: t_max must be positive");
  require(n_r >= 2 && n_t >= 2, "kernel grid: need at least 2 nodes per axis");
  require(values_.size() == n_r * n_t, "kernel grid: value count must equal n_r * n_t");
  dr_ = r_max / static_cast<double>(n_r - 1);
  dt_ = t_max / static_cast<double>(n_t - 1);
}

double KernelGrid::eval(double r, double t) const {
  r = std::abs(r);
  t = std::abs(t);
  if (r > r_max_ || t > t_max_) return 0.0;
  const double fr = r / dr_, ft = t / dt_;
  const std::size_t i = std::min(static_cast<std::size_t>(fr), n_r_ - 2);
  const std::size_t j = std::min(static_cast<std::size_t>(ft), n_t_ - 2);
  const double u = fr - static_cast<double>(i), v = ft - static_cast<double>(j);
  const double* row0 = &values_[i * n_t_ + j];
  const double* row1 = row0 + n_t_;
  return (1.0 - u) * ((1.0 - v) * row0[0] + v * row0[1]) + u * ((1.0 - v) * row1[0] + v * row1[1]);
}

AssumptionReport validate_assumptions(const PairKernel& kernel, const AssumptionQuery& q) {
  require(q.xi > 0.0 && q.R > 0.0 && q.l_star >= 0.0, "validate_assumptions: xi, R must be positive");
  const KernelGrid grid(kernel, q.r_max, q.t_max, q.n_r, q.n_t);
  AssumptionReport rep;
  rep.xi = q.xi;
  rep.R = q.R;
  rep.l_star = q.l_star;

  const double scale = std::max(grid.node(0, 0), 1e-300);
  for (std::size_t j = 0; j < grid.n_t(); ++j) {
    for (std::size_t i = 0; i + 1 < grid.n_r(); ++i) {
      rep.a2_worst_violation = std::max(rep.a2_worst_violation, grid.node(i + 1, j) - grid.node(i, j));
    }
  }
  rep.a2_monotone_ok = rep.a2_worst_violation <= q.tolerance * scale;

  for (std::size_t j = 0; j < grid.n_t() && j * grid.dt() <= q.l_star + 1e-12; ++j) {
    for (std::size_t i = 0; i + 1 < grid.n_r() && (i + 1) * grid.dr() <= q.R + 1e-12; ++i) {
      const double r0 = i * grid.dr(), r1 = (i + 1) * grid.dr();
      const double step = grid.node(i + 1, j) - grid.node(i, j) + (r1 * r1 - r0 * r0) / q.xi;
      rep.b_worst_violation = std::max(rep.b_worst_violation, step);
    }
  }
  rep.b_ok = rep.b_worst_violation <= q.tolerance * scale;

  // C_I: int_0^T ds int_T^{T+t_max} dt W(|x_t - x_s|, t - s) along one Brownian path, T = t_max.
  const std::size_t n = q.n_t - 1;
  const double h = q.t_max / static_cast<double>(n);
  const int d = kernel.dimension();
  Rng rng(derive_seed(q.seed, {0xC1}));
  NormalSource normal(rng);
  std::vector<double> x((2 * n + 1) * d, 0.0);
  for (std::size_t k = 1; k <= 2 * n; ++k)
    for (int c = 0; c < d; ++c) x[k * d + c] = x[(k - 1) * d + c] + std::sqrt(h) * normal();
  double c_i = 0.0;
  for (std::size_t s = 0; s <= n; ++s) {
    const double ws = (s == 0 || s == n) ? 0.5 : 1.0;
    for (std::size_t t = n; t <= 2 * n; ++t) {
      const double wt = (t == n || t == 2 * n) ? 0.5 : 1.0;
      double r2 = 0.0;
      for (int c = 0; c < d; ++c) r2 += (x[t * d + c] - x[s * d + c]) * (x[t * d + c] - x[s * d + c]);
      c_i += ws * wt * grid.eval(std::sqrt(r2), (t - s) * h);
    }
  }
  rep.time_decay_C_I = c_i * h * h;
  return rep;
}

}  // namespace polaron
