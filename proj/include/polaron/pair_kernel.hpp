#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <string>
#include <vector>

namespace polaron {

enum class KernelFamily { gaussian_omega1, nelson3d, custom_grid };

class KernelGrid;

/// Attractive pair weight W(r, t) >= 0 (the negated two-time field correlation).
///
/// gaussian-omega1: phi(x) = exp(-|x|^2 / (2 s^2)), omega = 1,
///   W = (1/4) e^{-|t|} (phi * phi)(r) = (pi s^2)^{d/2} / 4 * e^{-|t|} e^{-r^2 / (4 s^2)}.
/// nelson3d: Gamma(x) = exp(-|x|^2 / (2 g^2)), omega(k) = |k|,
///   W = (1/4) int_0^inf 4 pi k^2 Gamma_hat(k)^2 sinc(k r) e^{-t k} dk, t clamped below by t_min.
/// custom-grid: bilinear interpolation in a user table.
class PairKernel {
 public:
  static PairKernel gaussian_omega1(int dimension, double width = 1.0);
  static PairKernel nelson3d(double gamma_width = 1.0, double t_min = 1e-3);
  /// values is row-major over (r_i, t_j), i < n_r, j < n_t, uniform nodes on [0,r_max]x[0,t_max].
  static PairKernel custom_grid(int dimension, double r_max, double t_max, std::size_t n_r, std::size_t n_t,
                                std::vector<double> values);

  /// W(r, t). gaussian-omega1 and custom-grid use |t|; nelson3d rejects t < 0.
  double eval(double r, double t) const;

  KernelFamily family() const { return family_; }
  int dimension() const { return dimension_; }
  double width() const { return width_; }
  double t_min() const { return t_min_; }
  /// Prefactor of the Gaussian family: W(0, 0).
  double amplitude() const { return amplitude_; }
  std::string name() const;

 private:
  PairKernel() = default;
  double eval_nelson(double r, double t) const;

  KernelFamily family_ = KernelFamily::gaussian_omega1;
  int dimension_ = 1;
  double width_ = 1.0;
  double t_min_ = 0.0;
  double amplitude_ = 0.0;
  std::shared_ptr<const KernelGrid> table_;
};

/// Immutable tabulation of a kernel on a uniform (r, t) grid.
class KernelGrid {
 public:
  KernelGrid(const PairKernel& kernel, double r_max, double t_max, std::size_t n_r, std::size_t n_t);
  KernelGrid(double r_max, double t_max, std::size_t n_r, std::size_t n_t, std::vector<double> values);

  /// Bilinear interpolation; 0 beyond r_max or t_max. Uses |t|.
  double eval(double r, double t) const;
  double node(std::size_t i, std::size_t j) const { return values_[i * n_t_ + j]; }

  double r_max() const { return r_max_; }
  double t_max() const { return t_max_; }
  std::size_t n_r() const { return n_r_; }
  std::size_t n_t() const { return n_t_; }
  double dr() const { return dr_; }
  double dt() const { return dt_; }
  /// Max |interpolated - direct| over cell midpoints, measured at construction (0 for table-built grids).
  double interpolation_error() const { return interp_error_; }

 private:
  double r_max_, t_max_;
  std::size_t n_r_, n_t_;
  double dr_, dt_;
  std::vector<double> values_;
  double interp_error_ = 0.0;
};

struct AssumptionQuery {
  double xi = 1e3;
  double R = 1.0;
  double l_star = 0.5;
  double r_max = 8.0;
  double t_max = 8.0;
  std::size_t n_r = 256;
  std::size_t n_t = 64;
  double tolerance = 1e-9;
  std::uint64_t seed = 1;
};

struct AssumptionReport {
  bool a2_monotone_ok = false;
  double a2_worst_violation = 0.0;
  double time_decay_C_I = 0.0;
  bool b_ok = false;
  double b_worst_violation = 0.0;
  double xi = 0.0, R = 0.0, l_star = 0.0;
};

/// Grid checks of radial monotonicity, of r -> W(r,t) + r^2/xi on [0,R] for t <= l*, and a
/// sampled-path estimate of the cross-horizon constant C_I. Violations are reported, not thrown.
AssumptionReport validate_assumptions(const PairKernel& kernel, const AssumptionQuery& query);

}  // namespace polaron
