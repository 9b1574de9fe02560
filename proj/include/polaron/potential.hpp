#pragma once

#include <span>
#include <string>
#include <vector>

namespace polaron {

enum class PotentialFamily { well, custom };

/// Radial confining weight V = -U >= 0. Immutable after construction.
class ExternalPotential {
 public:
  /// Indicator of the closed ball of the given radius.
  static ExternalPotential well(double radius);
  /// Piecewise-linear radial table; r must start at 0 and increase strictly,
  /// V must be >= 0, non-increasing and positive at the origin. V = 0 beyond r.back().
  static ExternalPotential custom(std::vector<double> r, std::vector<double> v);

  double radial(double r) const;
  double eval(std::span<const double> x) const;

  PotentialFamily family() const { return family_; }
  /// Radius beyond which V vanishes.
  double support_radius() const { return radius_; }
  const std::vector<double>& table_r() const { return table_r_; }
  const std::vector<double>& table_v() const { return table_v_; }
  std::string describe() const;

 private:
  ExternalPotential() = default;
  PotentialFamily family_ = PotentialFamily::well;
  double radius_ = 1.0;
  std::vector<double> table_r_;
  std::vector<double> table_v_;
};

}  // namespace polaron
