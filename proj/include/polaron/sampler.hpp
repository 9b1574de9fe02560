#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <limits>
#include <memory>
#include <vector>

#include "polaron/action.hpp"
#include "polaron/path.hpp"
#include "polaron/potential.hpp"
#include "polaron/random.hpp"

namespace polaron {

/// Discretised target measure: exp(delta V + alpha W) 1_B(x_T) times Wiener from x_0 = start.
struct ModelSpec {
  int d = 3;
  double delta = 0.0;
  double alpha = 0.0;
  double horizon = 1.0;
  std::size_t steps = 64;
  ExternalPotential potential = ExternalPotential::well(1.0);
  /// Required when alpha > 0.
  std::shared_ptr<const LagKernel> pair;
  /// Endpoint ball radius M; infinity for an unconstrained endpoint.
  double endpoint_radius = std::numeric_limits<double>::infinity();
  double K_radius = 1.0;
  /// Pinned start point; empty means the origin.
  std::vector<double> start;

  double dt() const { return horizon / static_cast<double>(steps); }
  bool start_at_origin() const;
  void validate() const;
};

struct ProposalMix {
  double bridge = 0.6;
  double endpoint = 0.3;
  double reflect = 0.1;
};

struct ChainConfig {
  std::size_t sweeps = 10000;
  /// Defaults to 20% of sweeps.
  std::size_t burn_in = std::numeric_limits<std::size_t>::max();
  std::size_t thin = 10;
  ProposalMix mix;
  std::size_t min_block = 2;
  /// 0 means N/4.
  std::size_t max_block = 0;
  std::uint64_t seed = 1;
  std::size_t calibration_sweeps = 50;
  std::size_t recompute_every = 100;
  bool keep_paths = false;

  std::size_t resolved_burn_in() const;
  void validate() const;
};

struct ProposalStats {
  std::uint64_t proposed = 0;
  std::uint64_t accepted = 0;
  double rate() const { return proposed ? static_cast<double>(accepted) / static_cast<double>(proposed) : 0.0; }
};

/// Functionals of one retained path.
struct SampleRecord {
  std::size_t sweep = 0;
  ActionValue action;
  double midpoint_radius = 0.0;
  double endpoint_radius = 0.0;
  /// (1/T) int_0^T 1_K(x_s) ds by the trapezoid rule.
  double occupation = 0.0;
  std::vector<double> midpoint;
};

struct ChainOutput {
  int d = 0;
  double horizon = 0.0;
  double K_radius = 0.0;
  std::size_t burn_in = 0;
  std::size_t thin = 0;
  std::vector<SampleRecord> samples;
  std::vector<DiscretePath> paths;
  /// Running action after every sweep, burn-in included.
  std::vector<ActionValue> trace;
  ProposalStats bridge, endpoint, reflect;
  /// Largest |running - recomputed| total action seen at the periodic full recomputation.
  double max_recompute_drift = 0.0;
  std::uint64_t coverage_misses = 0;

  std::vector<double> v_series() const;
  std::vector<double> w_series() const;
  std::vector<double> occupation_series() const;
  std::vector<double> midpoint_indicator(double K_radius) const;
  std::vector<double> endpoint_radii() const;
};

/// One Metropolis-Hastings chain. Strictly sequential.
class PathChain {
 public:
  PathChain(ModelSpec model, ChainConfig config);

  /// Runs proposals until N points have been resampled (a reflection counts as N).
  void sweep();
  /// MH step replacing points first..first+count-1 by `proposed`; the caller is responsible for
  /// the proposal being prior-reversible. Returns whether it was accepted.
  bool propose(std::size_t first, std::size_t count, std::span<const double> proposed);

  const DiscretePath& path() const { return path_; }
  ActionValue action() const { return current_; }
  const ModelSpec& model() const { return model_; }
  const PathAction& functional() const { return action_; }
  SampleRecord record(std::size_t sweep) const;
  /// Recomputes the action from scratch; returns |running - full| of the total.
  double resync();

  ProposalStats bridge_stats, endpoint_stats, reflect_stats;

 private:
  std::size_t draw_length(std::size_t lo, std::size_t hi);
  std::size_t bridge_move();
  std::size_t endpoint_move();

  ModelSpec model_;
  ChainConfig config_;
  PathAction action_;
  bool with_pair_;
  DiscretePath path_;
  ActionValue current_;
  Rng rng_;
  NormalSource normal_;
  std::vector<double> buffer_;
};

ChainOutput mcmc_run(const ModelSpec& model, const ChainConfig& config);

/// Streaming functionals CSV: sweep,v_part,w_part,midpoint_in_K,occupation_fraction,endpoint_radius.
void write_functionals_csv(std::ostream& os, const ChainOutput& out);

}  // namespace polaron
