#pragma once

// Independent reference values. Nothing here calls into the library.

#include <cmath>
#include <functional>
#include <numbers>
#include <stdexcept>

namespace oracle {

inline constexpr double pi = std::numbers::pi;

/// Composite Simpson rule with n (even) panels.
inline double simpson(const std::function<double(double)>& f, double a, double b, int n = 4000) {
  if (n % 2) ++n;
  const double h = (b - a) / n;
  double s = f(a) + f(b);
  for (int i = 1; i < n; ++i) s += (i % 2 ? 4.0 : 2.0) * f(a + i * h);
  return s * h / 3.0;
}

inline double phi(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

/// (1/4) e^{-t} (g * g)(r) for g(x) = exp(-x^2/2) in d = 1, by trapezoid on [-30, 30].
inline double gaussian_kernel_1d(double r, double t) {
  const int n = 60000;
  const double a = -30.0, h = 60.0 / n;
  double s = 0.0;
  for (int i = 0; i <= n; ++i) {
    const double x = a + i * h;
    const double w = (i == 0 || i == n) ? 0.5 : 1.0;
    s += w * std::exp(-0.5 * x * x) * std::exp(-0.5 * (r - x) * (r - x));
  }
  return 0.25 * std::exp(-std::abs(t)) * s * h;
}

/// Direct-space value at r = 0 of the d = 3 kernel with Gamma(x) = exp(-|x|^2/(2 g^2)) and omega = |k|:
/// (Gamma * Gamma)(y) = (pi g^2)^{3/2} e^{-|y|^2/(4 g^2)} against the time factor (4 pi^2 t^3)^{-1} (1 + |y|^2/t^2)^{-2}.
inline double nelson_direct_origin(double t, double g = 1.0) {
  const double amp = std::pow(pi * g * g, 1.5);
  const auto f = [&](double y) {
    const double q = 1.0 + y * y / (t * t);
    return y * y / (q * q) * std::exp(-y * y / (4.0 * g * g));
  };
  const double integral = simpson(f, 0.0, 40.0 * g, 40000);
  return amp * 4.0 * pi / (4.0 * pi * pi * t * t * t) * integral;
}

/// P(|X| <= rho) for X ~ N(0, s2 I_d), d in {1, 3}.
inline double radial_gaussian_cdf(int d, double s2, double rho) {
  const double z = rho / std::sqrt(s2);
  if (d == 1) return std::erf(z / std::sqrt(2.0));
  if (d == 3) return std::erf(z / std::sqrt(2.0)) - std::sqrt(2.0 / pi) * z * std::exp(-0.5 * z * z);
  throw std::invalid_argument("radial_gaussian_cdf: d must be 1 or 3");
}

/// P(|X| <= rho | |X| <= M).
inline double truncated_radial_cdf(int d, double s2, double rho, double M) {
  if (!std::isfinite(M)) return radial_gaussian_cdf(d, s2, rho);
  return radial_gaussian_cdf(d, s2, std::min(rho, M)) / radial_gaussian_cdf(d, s2, M);
}

/// Lowest even/s-wave energy of -1/2 u'' - delta 1_{r<=a}, unit mass, by bisection on the matching condition.
/// d = 3: k cot(k a) = -kappa; d = 1: k tan(k a) = kappa. Returns 0 when unbound.
inline double well_ground_energy(int d, double delta, double a = 1.0) {
  const auto mismatch = [&](double E) {
    const double kappa = std::sqrt(-2.0 * E), k = std::sqrt(2.0 * (delta + E));
    return d == 3 ? k * std::cos(k * a) + kappa * std::sin(k * a) : k * std::sin(k * a) - kappa * std::cos(k * a);
  };
  double lo = -delta * (1.0 - 1e-14), hi = -1e-14;
  // Restrict to the first branch: k a < pi (d = 3) or k a < pi/2 (d = 1).
  const double kmax = (d == 3 ? pi : pi / 2.0) / a;
  hi = std::min(hi, 0.5 * kmax * kmax - delta - 1e-14);
  if (lo >= hi) return 0.0;
  double flo = mismatch(lo), fhi = mismatch(hi);
  if (flo * fhi > 0.0) return 0.0;
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    const double fm = mismatch(mid);
    if ((fm > 0.0) == (flo > 0.0)) {
      lo = mid;
      flo = fm;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

/// (1/T) int_0^T P(|B_s| <= K) ds in d = 1.
inline double brownian_occupation_1d(double T, double K) {
  return simpson([&](double s) { return s <= 0.0 ? 1.0 : std::erf(K / std::sqrt(2.0 * s)); }, 0.0, T, 20000) / T;
}

/// (psi, e^{t Delta/2} psi) for psi = 1_{[-1,1]}: int_{-2}^{2} (2 - |u|) p_t(u) du.
inline double free_overlap_1d(double t) {
  const auto f = [&](double u) { return (2.0 - u) * std::exp(-u * u / (2.0 * t)) / std::sqrt(2.0 * pi * t); };
  return 2.0 * simpson(f, 0.0, 2.0, 4000);
}

inline double free_gamma_1d(double t) { return free_overlap_1d(t) / std::sqrt(free_overlap_1d(2.0 * t)); }

/// P(|N(0, l)| >= R).
inline double normal_two_sided_tail(double l, double R) { return 2.0 * (1.0 - phi(R / std::sqrt(l))); }

/// P(sup_{s<=l} |B_s| < R) in d = 1 via the eigenfunction series of the Dirichlet Laplacian on (-R, R).
inline double sup_stay_series(double l, double R) {
  double s = 0.0;
  for (int k = 0; k < 200; ++k) {
    const double n = 2.0 * k + 1.0;
    s += (k % 2 ? -1.0 : 1.0) / n * std::exp(-n * n * pi * pi * l / (8.0 * R * R));
  }
  return 4.0 / pi * s;
}

}  // namespace oracle
