#include "polaron/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "polaron/error.hpp"

namespace polaron {

double sphere_area(int d) {
  switch (d) {
    case 1: return 2.0;
    case 2: return 2.0 * M_PI;
    case 3: return 4.0 * M_PI;
    default: return 2.0 * std::pow(M_PI, 0.5 * d) / std::tgamma(0.5 * d);
  }
}

double RadialGrid::volume(std::size_t i) const {
  const double a = static_cast<double>(i) * h(), b = a + h();
  return sphere_area(d) * (std::pow(b, d) - std::pow(a, d)) / d;
}

void RadialGrid::validate() const {
  require(d >= 1 && d <= 3, "radial grid: dimension must be 1, 2 or 3");
  require(std::isfinite(r_max) && r_max > 0.0, "radial grid: r_max must be positive");
  require(n >= 64, "radial grid: need at least 64 cells");
}

namespace {

/// Volume-weighted cell average of V over [a, b].
double cell_average(const ExternalPotential& v, int d, double a, double b) {
  const auto shell = [d](double lo, double hi) { return std::pow(hi, d) - std::pow(lo, d); };
  if (v.family() == PotentialFamily::well) {
    const double r = v.support_radius();
    if (r >= b) return 1.0;
    if (r <= a) return 0.0;
    return shell(a, r) / shell(a, b);
  }
  constexpr int k = 16;
  double num = 0.0, den = 0.0;
  for (int q = 0; q < k; ++q) {
    const double r = a + (q + 0.5) * (b - a) / k;
    const double w = std::pow(r, d - 1);
    num += w * v.radial(r);
    den += w;
  }
  return num / den;
}

/// Solves (diag + off-diagonal) x = b for a symmetric tridiagonal system (no pivoting).
void thomas(const std::vector<double>& diag, const std::vector<double>& off, std::vector<double>& b) {
  const std::size_t n = diag.size();
  std::vector<double> c(n);
  double piv = diag[0];
  b[0] /= piv;
  for (std::size_t i = 1; i < n; ++i) {
    c[i - 1] = off[i - 1] / piv;
    piv = diag[i] - off[i - 1] * c[i - 1];
    b[i] = (b[i] - off[i - 1] * b[i - 1]) / piv;
  }
  for (std::size_t i = n - 1; i-- > 0;) b[i] -= c[i] * b[i + 1];
}

}  // namespace

double lowest_eigenvalue(const RadialOperator& op) {
  double lo = std::numeric_limits<double>::infinity(), hi = -lo;
  const std::size_t n = op.diag.size();
  for (std::size_t i = 0; i < n; ++i) {
    const double r = (i > 0 ? std::abs(op.off[i - 1]) : 0.0) + (i + 1 < n ? std::abs(op.off[i]) : 0.0);
    lo = std::min(lo, op.diag[i] - r);
    hi = std::max(hi, op.diag[i] + r);
  }
  for (int it = 0; it < 200 && hi - lo > 1e-15 * std::max(1.0, std::abs(lo)); ++it) {
    const double mid = 0.5 * (lo + hi);
    if (op.count_below(mid) >= 1) hi = mid;
    else lo = mid;
  }
  return 0.5 * (lo + hi);
}

RadialOperator::RadialOperator(const ExternalPotential& potential, double delta, const RadialGrid& g) : grid(g) {
  g.validate();
  require(std::isfinite(delta) && delta >= 0.0, "radial operator: delta must be >= 0");
  const std::size_t n = g.n;
  const double h = g.h();
  const double area = sphere_area(g.d);
  std::vector<double> flux(n + 1, 0.0);
  for (std::size_t j = 1; j <= n; ++j) flux[j] = 0.5 * area * std::pow(j * h, g.d - 1) / h;
  std::vector<double> vol(n);
  sqrt_volume.resize(n);
  diag.resize(n);
  off.assign(n > 0 ? n - 1 : 0, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    vol[i] = g.volume(i);
    sqrt_volume[i] = std::sqrt(vol[i]);
  }
  for (std::size_t i = 0; i < n; ++i) {
    const double right = (i + 1 == n) ? 2.0 * flux[n] : flux[i + 1];
    const double v = cell_average(potential, g.d, i * h, (i + 1) * h);
    diag[i] = (flux[i] + right) / vol[i] - delta * v;
    if (i + 1 < n) off[i] = -flux[i + 1] / (sqrt_volume[i] * sqrt_volume[i + 1]);
  }
}

void RadialOperator::apply(const std::vector<double>& x, std::vector<double>& y) const {
  const std::size_t n = diag.size();
  y.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    double s = diag[i] * x[i];
    if (i > 0) s += off[i - 1] * x[i - 1];
    if (i + 1 < n) s += off[i] * x[i + 1];
    y[i] = s;
  }
}

std::size_t RadialOperator::count_below(double e) const {
  std::size_t count = 0;
  double q = diag[0] - e;
  for (std::size_t i = 0;;) {
    if (q == 0.0) q = -1e-300;
    if (q < 0.0) ++count;
    if (++i == diag.size()) break;
    q = diag[i] - e - off[i - 1] * off[i - 1] / q;
  }
  return count;
}

namespace {

struct Eigenpair {
  double value = 0.0;
  std::vector<double> vector;
  double residual = 0.0;
};

Eigenpair lowest_pair(const RadialOperator& op) {
  Eigenpair p;
  p.value = lowest_eigenvalue(op);
  const std::size_t n = op.diag.size();
  const double sigma = p.value - std::max(1e-10, 1e-9 * std::abs(p.value));
  std::vector<double> shifted(op.diag);
  for (double& v : shifted) v -= sigma;
  std::vector<double> x(n, 1.0), y;
  for (int it = 0; it < 50; ++it) {
    thomas(shifted, op.off, x);
    double norm = 0.0;
    for (double v : x) norm += v * v;
    norm = std::sqrt(norm);
    for (double& v : x) v /= norm;
    op.apply(x, y);
    double rq = 0.0;
    for (std::size_t i = 0; i < n; ++i) rq += x[i] * y[i];
    double res = 0.0;
    for (std::size_t i = 0; i < n; ++i) res += (y[i] - rq * x[i]) * (y[i] - rq * x[i]);
    p.residual = std::sqrt(res);
    if (p.residual <= 1e-9) {
      p.value = rq;
      break;
    }
  }
  if (p.residual > 1e-6) throw NumericError("inverse iteration did not converge", p.residual);
  if (x[0] < 0.0)
    for (double& v : x) v = -v;
  p.vector = std::move(x);
  return p;
}

}  // namespace

SpectralResult ground_state(const ExternalPotential& potential, double delta, int d,
                            const GroundStateOptions& options) {
  require(std::isfinite(delta) && delta >= 0.0, "ground_state: delta must be >= 0");
  require(d >= 1 && d <= 3, "ground_state: dimension must be 1, 2 or 3");
  const double a = potential.support_radius();
  double cells = std::max(options.cells_per_unit, 16.0 / a);
  double r_max = options.r_max > 0.0 ? options.r_max : 8.0 * std::max(a, 2.0);

  SpectralResult result;
  for (int attempt = 0;; ++attempt) {
    RadialGrid grid{d, r_max, static_cast<std::size_t>(std::ceil(r_max * cells))};
    grid.n = std::max<std::size_t>(grid.n, 64);
    const RadialOperator op(potential, delta, grid);
    Eigenpair pair = lowest_pair(op);
    RadialGrid fine = grid;
    fine.n *= 2;
    const double refined = lowest_eigenvalue(RadialOperator(potential, delta, fine));

    result.grid = grid;
    result.lowest = pair.value;
    result.lowest_refined = refined;
    result.residual = pair.residual;
    result.bound = pair.value < -1e-8 && refined < -1e-8;
    result.E0 = result.bound ? pair.value : 0.0;
    result.radius.resize(grid.n);
    result.profile.resize(grid.n);
    for (std::size_t i = 0; i < grid.n; ++i) {
      result.radius[i] = grid.centre(i);
      result.profile[i] = pair.vector[i] / op.sqrt_volume[i];
    }
    if (!result.bound || options.r_max > 0.0) break;
    const double needed = 8.0 * std::max(a, 1.0 / std::sqrt(-pair.value));
    if (r_max >= needed) break;
    if (attempt >= options.max_enlargements) throw NumericError("ground_state: r_max enlargement limit reached");
    r_max = std::max(needed, 2.0 * r_max);
  }
  return result;
}

double energy_fraction_crossover(const ExternalPotential& potential, int d, double fraction, double lo, double hi,
                                 const GroundStateOptions& options) {
  require(fraction > 0.0 && lo >= 0.0 && hi > lo, "energy_fraction_crossover: need fraction > 0 and 0 <= lo < hi");
  const auto gap = [&](double delta) { return ground_state(potential, delta, d, options).E0 + fraction * delta; };
  if (gap(hi) >= 0.0) throw ValidationError("energy_fraction_crossover: no crossover below the upper bracket");
  if (gap(lo) < 0.0) return lo;
  while (hi - lo > 1e-4 * hi) {
    const double mid = 0.5 * (lo + hi);
    if (gap(mid) < 0.0) hi = mid;
    else lo = mid;
  }
  return hi;
}

namespace {

/// Bound-state count of u'' = -2 m delta V(r) u at zero energy (RK4 to the support edge).
int zero_energy_count(const ExternalPotential& potential, double mass, double delta) {
  const double edge = potential.support_radius();
  const int steps = 20000;
  const double h = edge / steps;
  const auto k2 = [&](double r) { return 2.0 * mass * delta * potential.radial(std::min(r, edge * (1 - 1e-15))); };
  double u = 0.0, du = 1.0, r = 0.0;
  int nodes = 0;
  for (int s = 0; s < steps; ++s) {
    const double a1 = du, b1 = -k2(r) * u;
    const double a2 = du + 0.5 * h * b1, b2 = -k2(r + 0.5 * h) * (u + 0.5 * h * a1);
    const double a3 = du + 0.5 * h * b2, b3 = -k2(r + 0.5 * h) * (u + 0.5 * h * a2);
    const double a4 = du + h * b3, b4 = -k2(r + h) * (u + h * a3);
    const double un = u + h / 6.0 * (a1 + 2 * a2 + 2 * a3 + a4);
    du += h / 6.0 * (b1 + 2 * b2 + 2 * b3 + b4);
    if (s > 0 && (un > 0.0) != (u > 0.0)) ++nodes;
    u = un;
    r += h;
  }
  return nodes + ((u * du < 0.0) ? 1 : 0);
}

}  // namespace

double well_threshold(const ExternalPotential& potential, double mass, int d) {
  require(d == 3, "well_threshold: only d = 3 is supported");
  require(std::isfinite(mass) && mass > 0.0, "well_threshold: mass must be positive");
  const double a = potential.support_radius();
  double lo = 0.0, hi = 1.0 / (mass * a * a);
  int grow = 0;
  while (zero_energy_count(potential, mass, hi) < 1) {
    lo = hi;
    hi *= 2.0;
    if (++grow > 60) throw ValidationError("well_threshold: could not bracket the threshold");
  }
  while (hi - lo > 1e-6 * hi) {
    const double mid = 0.5 * (lo + hi);
    if (zero_energy_count(potential, mass, mid) >= 1) hi = mid;
    else lo = mid;
  }
  return 0.5 * (lo + hi);
}

std::vector<std::vector<double>> semigroup_apply(const ExternalPotential& potential, double delta,
                                                 const RadialGrid& grid, const std::vector<double>& profile,
                                                 const std::vector<double>& times, double shift) {
  require(profile.size() == grid.n, "semigroup_apply: profile size must match grid");
  require(std::is_sorted(times.begin(), times.end()) && (times.empty() || times.front() >= 0.0),
          "semigroup_apply: times must be sorted and non-negative");
  const RadialOperator op(potential, delta, grid);
  const std::size_t n = grid.n;
  const double h = grid.h();
  std::vector<double> phi(n);
  for (std::size_t i = 0; i < n; ++i) phi[i] = profile[i] * op.sqrt_volume[i];

  std::vector<std::vector<double>> out;
  out.reserve(times.size());
  double now = 0.0;
  std::vector<double> lhs(n), rhs(n), y;
  const auto norm = [](const std::vector<double>& v) {
    double s = 0.0;
    for (double x : v) s += x * x;
    return std::sqrt(s);
  };
  for (double t : times) {
    const double span = t - now;
    if (span > 0.0) {
      const std::size_t steps = static_cast<std::size_t>(std::ceil(span / (h * h) - 1e-9));
      const double tau = span / static_cast<double>(steps);
      for (std::size_t i = 0; i < n; ++i) lhs[i] = 1.0 + 0.5 * tau * (op.diag[i] - shift);
      std::vector<double> off_l(op.off), off_r(op.off);
      for (double& v : off_l) v *= 0.5 * tau;
      for (double& v : off_r) v *= -0.5 * tau;
      const double before = norm(phi);
      for (std::size_t s = 0; s < steps; ++s) {
        for (std::size_t i = 0; i < n; ++i) {
          double v = (1.0 - 0.5 * tau * (op.diag[i] - shift)) * phi[i];
          if (i > 0) v += off_r[i - 1] * phi[i - 1];
          if (i + 1 < n) v += off_r[i] * phi[i + 1];
          rhs[i] = v;
        }
        thomas(lhs, off_l, rhs);
        phi.swap(rhs);
      }
      if (delta == 0.0 && shift <= 0.0 && norm(phi) > before * (1.0 + 1e-10))
        throw NumericError("semigroup_apply: norm growth in free evolution", norm(phi) / before - 1.0);
      now = t;
    }
    std::vector<double> psi(n);
    for (std::size_t i = 0; i < n; ++i) psi[i] = phi[i] / op.sqrt_volume[i];
    out.push_back(std::move(psi));
  }
  return out;
}

double radial_inner(const RadialGrid& grid, const std::vector<double>& f, const std::vector<double>& g) {
  double s = 0.0;
  for (std::size_t i = 0; i < grid.n; ++i) s += grid.volume(i) * f[i] * g[i];
  return s;
}

std::vector<double> radial_profile(const RadialGrid& grid, const std::function<double(double)>& f) {
  std::vector<double> out(grid.n);
  for (std::size_t i = 0; i < grid.n; ++i) out[i] = f(grid.centre(i));
  return out;
}

}  // namespace polaron
