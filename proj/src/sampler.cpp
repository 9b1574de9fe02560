#include "polaron/sampler.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ostream>

#include "polaron/error.hpp"

namespace polaron {

bool ModelSpec::start_at_origin() const {
  return std::all_of(start.begin(), start.end(), [](double c) { return c == 0.0; });
}

void ModelSpec::validate() const {
  require(d >= 1 && d <= 3, "model: d must be 1, 2 or 3");
  require(std::isfinite(delta) && delta >= 0.0, "model: delta must be >= 0");
  require(std::isfinite(alpha) && alpha >= 0.0, "model: alpha must be >= 0");
  require(std::isfinite(horizon) && horizon > 0.0, "model: T must be positive");
  require(steps >= 2 && steps % 2 == 0, "model: N must be even and >= 2");
  require(endpoint_radius > 0.0, "model: endpoint radius M must be positive");
  require(K_radius > 0.0, "model: K radius must be positive");
  require(start.empty() || start.size() == static_cast<std::size_t>(d), "model: start point dimension mismatch");
  for (double c : start) require(std::isfinite(c), "model: start point must be finite");
  require(alpha == 0.0 || pair != nullptr, "model: alpha > 0 needs a pair kernel");
  if (pair) require(std::abs(pair->dt() - dt()) <= 1e-12 * dt(), "model: pair kernel dt must equal T/N");
}

std::size_t ChainConfig::resolved_burn_in() const {
  return burn_in == std::numeric_limits<std::size_t>::max() ? sweeps / 5 : burn_in;
}

void ChainConfig::validate() const {
  require(sweeps >= 1, "chain: sweeps must be positive");
  require(resolved_burn_in() < sweeps, "chain: burn-in must be below the sweep count");
  require(thin >= 1, "chain: thinning must be >= 1");
  require(mix.bridge >= 0.0 && mix.endpoint >= 0.0 && mix.reflect >= 0.0, "chain: proposal weights must be >= 0");
  require(std::abs(mix.bridge + mix.endpoint + mix.reflect - 1.0) <= 1e-9, "chain: proposal weights must sum to 1");
  require(min_block >= 2, "chain: min block length must be >= 2");
}

PathChain::PathChain(ModelSpec model, ChainConfig config)
    : model_(std::move(model)),
      config_(config),
      action_(model_.potential, model_.alpha != 0.0 ? model_.pair : nullptr),
      with_pair_(model_.alpha != 0.0),
      path_(model_.d, model_.steps, model_.dt()),
      rng_(config.seed),
      normal_(rng_) {
  model_.validate();
  config_.validate();
  const std::size_t n = model_.steps;
  const int d = model_.d;
  // Straight line from the start point to the origin.
  if (!model_.start.empty()) {
    for (std::size_t i = 0; i <= n; ++i)
      for (int c = 0; c < d; ++c)
        path_.point(i)[c] = model_.start[c] * (1.0 - static_cast<double>(i) / static_cast<double>(n));
  }
  if (!model_.start_at_origin()) config_.mix.reflect = 0.0;
  const double total = config_.mix.bridge + config_.mix.endpoint + config_.mix.reflect;
  require(total > 0.0, "chain: no usable proposal");
  config_.mix.bridge /= total;
  config_.mix.endpoint /= total;
  config_.mix.reflect /= total;
  current_ = action_.evaluate(path_);
  buffer_.resize((n + 1) * d);
}

std::size_t PathChain::draw_length(std::size_t lo, std::size_t hi) {
  if (hi <= lo) return lo;
  const double a = std::log(static_cast<double>(lo)), b = std::log(static_cast<double>(hi) + 1.0);
  const auto len = static_cast<std::size_t>(std::exp(a + uniform01(rng_) * (b - a)));
  return std::clamp(len, lo, hi);
}

bool PathChain::propose(std::size_t first, std::size_t count, std::span<const double> proposed) {
  const ActionValue d = action_.delta(path_, first, count, proposed, with_pair_);
  const double di = d.total(model_.delta, model_.alpha);
  const bool accept = di >= 0.0 || uniform01(rng_) < std::exp(di);
  if (accept) {
    std::copy(proposed.begin(), proposed.end(), path_.point(first).begin());
    current_ += d;
  }
  return accept;
}

std::size_t PathChain::bridge_move() {
  const std::size_t n = model_.steps;
  const std::size_t hi = config_.max_block ? std::min(config_.max_block, n) : std::max<std::size_t>(n / 4, 2);
  const std::size_t len = draw_length(std::min(config_.min_block, n), std::min(hi, n));
  const std::size_t a = std::uniform_int_distribution<std::size_t>(0, n - len)(rng_);
  const int d = model_.d;
  std::copy(path_.point(a).begin(), path_.point(a).end(), buffer_.begin());
  std::copy(path_.point(a + len).begin(), path_.point(a + len).end(), buffer_.begin() + len * d);
  fill_bridge(buffer_.data(), d, len, path_.dt(), normal_);
  ++bridge_stats.proposed;
  if (propose(a + 1, len - 1, std::span<const double>(buffer_.data() + d, (len - 1) * d))) ++bridge_stats.accepted;
  return len - 1;
}

std::size_t PathChain::endpoint_move() {
  const std::size_t n = model_.steps;
  const std::size_t len = draw_length(1, std::max<std::size_t>(n / 4, 1));
  const int d = model_.d;
  const std::size_t a = n - len;
  std::copy(path_.point(a).begin(), path_.point(a).end(), buffer_.begin());
  fill_wiener(buffer_.data(), d, len, path_.dt(), normal_);
  ++endpoint_stats.proposed;
  double r2 = 0.0;
  for (int c = 0; c < d; ++c) r2 += buffer_[len * d + c] * buffer_[len * d + c];
  if (std::sqrt(r2) > model_.endpoint_radius) return len;
  if (propose(a + 1, len, std::span<const double>(buffer_.data() + d, len * d))) ++endpoint_stats.accepted;
  return len;
}

void PathChain::sweep() {
  const std::size_t n = model_.steps;
  std::size_t moved = 0;
  while (moved < n) {
    const double u = uniform01(rng_);
    if (u < config_.mix.bridge) {
      moved += bridge_move();
    } else if (u < config_.mix.bridge + config_.mix.endpoint) {
      moved += endpoint_move();
    } else {
      for (std::size_t i = 0; i <= n; ++i)
        for (double& c : path_.point(i)) c = -c;
      ++reflect_stats.proposed;
      ++reflect_stats.accepted;
      moved += n;
    }
  }
}

double PathChain::resync() {
  const ActionValue full = action_.evaluate(path_);
  const double drift = std::abs(full.total(model_.delta, model_.alpha) - current_.total(model_.delta, model_.alpha));
  current_ = full;
  return drift;
}

SampleRecord PathChain::record(std::size_t sweep) const {
  SampleRecord rec;
  const std::size_t n = model_.steps;
  rec.sweep = sweep;
  rec.action = current_;
  const auto mid = path_.point(n / 2);
  rec.midpoint.assign(mid.begin(), mid.end());
  rec.midpoint_radius = path_.norm(n / 2);
  rec.endpoint_radius = path_.norm(n);
  double occ = 0.0;
  for (std::size_t i = 0; i <= n; ++i)
    if (path_.norm(i) <= model_.K_radius) occ += trapezoid_weight(i, n);
  rec.occupation = occ / static_cast<double>(n);
  return rec;
}

ChainOutput mcmc_run(const ModelSpec& model, const ChainConfig& config) {
  PathChain chain(model, config);
  ChainOutput out;
  out.d = model.d;
  out.horizon = model.horizon;
  out.K_radius = model.K_radius;
  out.burn_in = config.resolved_burn_in();
  out.thin = config.thin;
  out.trace.reserve(config.sweeps);
  for (std::size_t s = 0; s < config.sweeps; ++s) {
    chain.sweep();
    if (s + 1 == config.calibration_sweeps &&
        chain.bridge_stats.accepted + chain.endpoint_stats.accepted == 0) {
      throw NumericError("tuning error: zero acceptance over the calibration window (bridge " +
                         std::to_string(chain.bridge_stats.proposed) + " and endpoint " +
                         std::to_string(chain.endpoint_stats.proposed) + " proposals)");
    }
    if (config.recompute_every && (s + 1) % config.recompute_every == 0)
      out.max_recompute_drift = std::max(out.max_recompute_drift, chain.resync());
    out.trace.push_back(chain.action());
    if (s >= out.burn_in && (s - out.burn_in) % config.thin == 0) {
      out.samples.push_back(chain.record(s));
      if (config.keep_paths) out.paths.push_back(chain.path());
    }
  }
  out.bridge = chain.bridge_stats;
  out.endpoint = chain.endpoint_stats;
  out.reflect = chain.reflect_stats;
  if (const LagKernel* w = chain.functional().pair()) out.coverage_misses = w->coverage_misses();
  return out;
}

std::vector<double> ChainOutput::v_series() const {
  std::vector<double> v;
  v.reserve(samples.size());
  for (const auto& s : samples) v.push_back(s.action.v_part);
  return v;
}

std::vector<double> ChainOutput::w_series() const {
  std::vector<double> v;
  v.reserve(samples.size());
  for (const auto& s : samples) v.push_back(s.action.w_part);
  return v;
}

std::vector<double> ChainOutput::occupation_series() const {
  std::vector<double> v;
  v.reserve(samples.size());
  for (const auto& s : samples) v.push_back(s.occupation);
  return v;
}

std::vector<double> ChainOutput::midpoint_indicator(double k) const {
  std::vector<double> v;
  v.reserve(samples.size());
  for (const auto& s : samples) v.push_back(s.midpoint_radius <= k ? 1.0 : 0.0);
  return v;
}

std::vector<double> ChainOutput::endpoint_radii() const {
  std::vector<double> v;
  v.reserve(samples.size());
  for (const auto& s : samples) v.push_back(s.endpoint_radius);
  return v;
}

void write_functionals_csv(std::ostream& os, const ChainOutput& out) {
  os << "sweep,v_part,w_part,midpoint_in_K,occupation_fraction,endpoint_radius\n";
  char buf[256];
  for (const auto& s : out.samples) {
    std::snprintf(buf, sizeof buf, "%zu,%.12g,%.12g,%d,%.12g,%.12g\n", s.sweep, s.action.v_part, s.action.w_part,
                  s.midpoint_radius <= out.K_radius ? 1 : 0, s.occupation, s.endpoint_radius);
    os << buf;
  }
}

}  // namespace polaron
