#pragma once

#include <cstddef>
#include <functional>
#include <vector>

#include "polaron/potential.hpp"

namespace polaron {

/// Cell-centred radial grid: cells [i h, (i+1) h], centres (i + 1/2) h, h n = r_max.
struct RadialGrid {
  int d = 3;
  double r_max = 20.0;
  std::size_t n = 2000;

  double h() const { return r_max / static_cast<double>(n); }
  double centre(std::size_t i) const { return (static_cast<double>(i) + 0.5) * h(); }
  /// Radial measure of cell i including the unit-sphere area: |S^{d-1}| (r_{i+1}^d - r_i^d) / d.
  double volume(std::size_t i) const;
  void validate() const;
};

/// Surface area of the unit sphere in R^d (2, 2 pi, 4 pi for d = 1, 2, 3).
double sphere_area(int d);

/// Symmetrised finite-volume operator  H~ = M^{-1/2} (-1/2 Delta - delta V) M^{-1/2}
/// with zero flux at r = 0 and Dirichlet at r_max; tridiagonal.
struct RadialOperator {
  RadialGrid grid;
  std::vector<double> diag;
  std::vector<double> off;  // off[i] couples i and i+1
  std::vector<double> sqrt_volume;

  RadialOperator(const ExternalPotential& potential, double delta, const RadialGrid& grid);
  /// y = H~ x
  void apply(const std::vector<double>& x, std::vector<double>& y) const;
  /// Number of eigenvalues below e (Sturm sequence count).
  std::size_t count_below(double e) const;
};

/// Lowest eigenvalue by Sturm-sequence bisection.
double lowest_eigenvalue(const RadialOperator& op);

struct SpectralResult {
  bool bound = false;
  double E0 = 0.0;
  /// Lowest eigenvalue of the discretised operator (positive when unbound).
  double lowest = 0.0;
  /// Lowest eigenvalue at half spacing (Richardson confirmation).
  double lowest_refined = 0.0;
  double residual = 0.0;
  RadialGrid grid;
  std::vector<double> radius;
  /// Ground-state profile psi(r_i), normalised so that sum_i volume_i psi_i^2 = 1.
  std::vector<double> profile;
};

struct GroundStateOptions {
  /// Cells per unit length; the grid always has >= 16 cells inside the potential support.
  double cells_per_unit = 64.0;
  double r_max = 0.0;  // 0: automatic
  int max_enlargements = 8;
};

SpectralResult ground_state(const ExternalPotential& potential, double delta, int d,
                            const GroundStateOptions& options = {});

/// Smallest delta in [lo, hi] with E0(delta) < -fraction * delta, by bisection to 1e-4 relative.
/// Throws ValidationError when the sign does not change over the bracket.
double energy_fraction_crossover(const ExternalPotential& potential, int d, double fraction, double lo, double hi,
                                 const GroundStateOptions& options = {});
/// Zero-energy s-wave threshold in d = 3 by RK4 shooting and bisection (1e-6 relative).
double well_threshold(const ExternalPotential& potential, double mass = 1.0, int d = 3);

/// Crank-Nicolson propagation of a radial profile under exp(-t (H - shift)).
/// Returns the profile at each requested time (sorted ascending, >= 0).
std::vector<std::vector<double>> semigroup_apply(const ExternalPotential& potential, double delta,
                                                 const RadialGrid& grid, const std::vector<double>& profile,
                                                 const std::vector<double>& times, double shift = 0.0);

/// (f, g) in L^2(R^d) for radial profiles on the grid.
double radial_inner(const RadialGrid& grid, const std::vector<double>& f, const std::vector<double>& g);

/// Samples a radial function at cell centres.
std::vector<double> radial_profile(const RadialGrid& grid, const std::function<double(double)>& f);

}  // namespace polaron
