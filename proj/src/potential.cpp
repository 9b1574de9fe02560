#include "polaron/potential.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "polaron/error.hpp"

namespace polaron {

ExternalPotential ExternalPotential::well(double radius) {
  require(std::isfinite(radius) && radius > 0.0, "well radius must be positive");
  ExternalPotential p;
  p.family_ = PotentialFamily::well;
  p.radius_ = radius;
  return p;
}

ExternalPotential ExternalPotential::custom(std::vector<double> r, std::vector<double> v) {
  require(r.size() >= 2 && r.size() == v.size(), "custom potential: need >= 2 matching (r, V) samples");
  require(r.front() == 0.0, "custom potential: table must start at r = 0");
  require(v.front() > 0.0, "custom potential: V(0) must be positive");
  for (std::size_t i = 0; i < r.size(); ++i) {
    require(std::isfinite(r[i]) && std::isfinite(v[i]), "custom potential: non-finite entry");
    require(v[i] >= 0.0, "custom potential: V must be non-negative");
    if (i > 0) {
      require(r[i] > r[i - 1], "custom potential: radii must increase strictly");
      require(v[i] <= v[i - 1] + 1e-9 * std::abs(v[i - 1]),
              "custom potential: V must be non-increasing (quasi-convex U)");
    }
  }
  ExternalPotential p;
  p.family_ = PotentialFamily::custom;
  p.radius_ = r.back();
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (v[i] == 0.0) {
      p.radius_ = r[i];
      break;
    }
  }
  p.table_r_ = std::move(r);
  p.table_v_ = std::move(v);
  return p;
}

double ExternalPotential::radial(double r) const {
  if (!std::isfinite(r)) throw ValidationError("potential evaluated at non-finite radius");
  r = std::abs(r);
  if (family_ == PotentialFamily::well) return r <= radius_ ? 1.0 : 0.0;
  if (r >= table_r_.back()) return 0.0;
  const auto it = std::upper_bound(table_r_.begin(), table_r_.end(), r);
  const std::size_t j = static_cast<std::size_t>(it - table_r_.begin());
  const double r0 = table_r_[j - 1], r1 = table_r_[j];
  const double u = (r - r0) / (r1 - r0);
  return (1.0 - u) * table_v_[j - 1] + u * table_v_[j];
}

double ExternalPotential::eval(std::span<const double> x) const {
  double s = 0.0;
  for (double c : x) {
    if (!std::isfinite(c)) throw ValidationError("potential evaluated at non-finite point");
    s += c * c;
  }
  return radial(std::sqrt(s));
}

std::string ExternalPotential::describe() const {
  std::ostringstream os;
  if (family_ == PotentialFamily::well) {
    os << "well(r=" << radius_ << ")";
  } else {
    os << "custom(" << table_r_.size() << " samples, support " << radius_ << ")";
  }
  return os.str();
}

}  // namespace polaron
