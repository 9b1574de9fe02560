#include "commands.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <json.hpp>
#include <map>
#include <set>
#include <sstream>

#include "polaron/error.hpp"
#include "polaron/estimators.hpp"
#include "polaron/gaussref.hpp"
#include "polaron/inequalities.hpp"
#include "polaron/scan.hpp"
#include "polaron/spectral.hpp"
#include "polaron/stats.hpp"

namespace polaron {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

json parse(const std::string& text) {
  if (text.empty()) return json::object();
  try {
    json j = json::parse(text);
    require(j.is_object(), "request: expected a JSON object");
    return j;
  } catch (const json::exception& e) {
    throw ValidationError(std::string("request: ") + e.what());
  }
}

void only(const json& j, std::initializer_list<const char*> keys) {
  const std::set<std::string> ok(keys.begin(), keys.end());
  for (const auto& [k, _] : j.items())
    if (!ok.count(k)) throw ValidationError("request: unknown key '" + k + "'");
}

template <class T>
T get(const json& j, const char* key, T fallback) {
  if (!j.contains(key) || j[key].is_null()) return fallback;
  try {
    if constexpr (std::is_same_v<T, double>) {
      if (j[key].is_string() && (j[key] == "inf" || j[key] == "infinity"))
        return std::numeric_limits<double>::infinity();
    }
    return j[key].get<T>();
  } catch (const json::exception& e) {
    throw ValidationError(std::string("request.") + key + ": " + e.what());
  }
}

std::vector<double> list(const json& j, const char* key, std::vector<double> fallback) {
  if (!j.contains(key)) return fallback;
  if (j[key].is_number()) return {j[key].get<double>()};
  return get<std::vector<double>>(j, key, fallback);
}

RunConfig config_of(const json& req) {
  return run_config_from_json(req.contains("config") ? req["config"].dump() : "{}");
}

json estimate(const EstimateWithError& e) {
  return {{"value", e.value}, {"std_error", e.std_error}, {"n_effective", e.n_effective}, {"low_ess", e.low_ess}};
}

json finite(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

void write_file(const std::string& path, const std::string& text) {
  const fs::path p(path);
  if (p.has_parent_path()) fs::create_directories(p.parent_path());
  std::ofstream out(p, std::ios::binary);
  require(static_cast<bool>(out), "cannot write " + path);
  out << text;
}

CommandResult kernel_eval(const json& req) {
  only(req, {"config", "r", "t"});
  const auto cfg = config_of(req);
  const auto kernel = cfg.kernel.build(cfg.d);
  const auto r = list(req, "r", {0.0}), t = list(req, "t", {0.0});
  require(r.size() == t.size() || r.size() == 1 || t.size() == 1, "kernel eval: r and t must broadcast");
  const std::size_t n = std::max(r.size(), t.size());
  json values = json::array();
  for (std::size_t i = 0; i < n; ++i)
    values.push_back(kernel.eval(r[r.size() == 1 ? 0 : i], t[t.size() == 1 ? 0 : i]));
  return {0, json{{"kernel", kernel.name()}, {"r", r}, {"t", t}, {"values", values}}.dump(2)};
}

CommandResult kernel_validate(const json& req) {
  only(req, {"config", "xi", "R", "l_star", "r_max", "t_max", "n_r", "n_t", "seed"});
  const auto cfg = config_of(req);
  AssumptionQuery q = cfg.experiment.assumptions;
  q.xi = get(req, "xi", q.xi);
  q.R = get(req, "R", q.R);
  q.l_star = get(req, "l_star", q.l_star);
  q.r_max = get(req, "r_max", q.r_max);
  q.t_max = get(req, "t_max", q.t_max);
  q.n_r = get(req, "n_r", q.n_r);
  q.n_t = get(req, "n_t", q.n_t);
  q.seed = get<std::uint64_t>(req, "seed", cfg.seed);
  const auto kernel = cfg.kernel.build(cfg.d);
  const auto rep = validate_assumptions(kernel, q);
  return {0, json{{"kernel", kernel.name()},
                  {"a2_monotone_ok", rep.a2_monotone_ok},
                  {"a2_worst_violation", rep.a2_worst_violation},
                  {"time_decay_C_I", rep.time_decay_C_I},
                  {"b_ok", rep.b_ok},
                  {"b_worst_violation", rep.b_worst_violation},
                  {"xi", rep.xi},
                  {"R", rep.R},
                  {"l_star", rep.l_star}}
                 .dump(2)};
}

CommandResult sample(const json& req) {
  only(req, {"config", "delta", "alpha", "horizon", "functionals"});
  const auto cfg = config_of(req);
  const ModelSpec model = cfg.model(get(req, "delta", cfg.resolved_deltas().front()),
                                    get(req, "alpha", cfg.experiment.alpha.front()),
                                    get(req, "horizon", cfg.experiment.horizon.front()));
  ChainConfig chain = cfg.chain;
  chain.seed = cfg.seed;
  const auto out = mcmc_run(model, chain);
  std::vector<double> sq;
  for (const auto& s : out.samples) {
    double acc = 0.0;
    for (double c : s.midpoint) acc += c * c;
    sq.push_back(acc / model.d);
  }
  json res = {{"delta", model.delta},
              {"alpha", model.alpha},
              {"horizon", model.horizon},
              {"steps", model.steps},
              {"samples", out.samples.size()},
              {"burn_in", out.burn_in},
              {"thin", out.thin},
              {"acceptance", {{"bridge", out.bridge.rate()}, {"endpoint", out.endpoint.rate()},
                              {"reflect", out.reflect.rate()}}},
              {"occupation_fraction", estimate(occupation_fraction(out, model.K_radius))},
              {"midpoint_mass", estimate(midpoint_mass(out, model.K_radius))},
              {"midpoint_variance", estimate(batch_means(sq))},
              {"max_recompute_drift", out.max_recompute_drift},
              {"coverage_misses", out.coverage_misses}};
  const auto path = get<std::string>(req, "functionals", "");
  if (!path.empty()) {
    std::ostringstream csv;
    csv << "# schema=" << kCsvSchema << "\n";
    write_functionals_csv(csv, out);
    write_file(path, csv.str());
    res["functionals"] = path;
  }
  return {0, res.dump(2)};
}

CommandResult scan(const json& req) {
  only(req, {"config"});
  const auto result = run_scan(config_of(req));
  return {0, json{{"csv", result.csv_path},
                  {"manifest", result.manifest_path},
                  {"cells", result.rows.size()},
                  {"failed", result.failed},
                  {"assumptions_ok", result.assumptions_ok},
                  {"table", format_report(result.rows)}}
                 .dump(2)};
}

CommandResult spectral(const json& req) {
  only(req, {"config", "delta", "cells_per_unit", "r_max", "gamma", "crossover"});
  const auto cfg = config_of(req);
  const auto V = cfg.potential.build();
  json res = json::object();
  double star = std::numeric_limits<double>::quiet_NaN();
  try {
    star = well_threshold(V, 1.0, 3);
  } catch (const ValidationError&) {
  }
  res["threshold_d3"] = finite(star);
  res["d"] = cfg.d;
  const double delta = get(req, "delta", cfg.resolved_deltas().front());
  GroundStateOptions opt;
  opt.cells_per_unit = get(req, "cells_per_unit", opt.cells_per_unit);
  opt.r_max = get(req, "r_max", opt.r_max);
  const auto gs = ground_state(V, delta, cfg.d, opt);
  res["delta"] = delta;
  res["bound"] = gs.bound;
  res["E0"] = gs.bound ? json(gs.E0) : json(nullptr);
  res["lowest"] = gs.lowest;
  res["lowest_refined"] = gs.lowest_refined;
  res["residual"] = gs.residual;
  res["r_max"] = gs.grid.r_max;
  if (req.contains("crossover")) {
    const auto& cq = req["crossover"];
    only(cq, {"fraction", "lo", "hi"});
    const double fraction = get(cq, "fraction", 0.75);
    const double lo = get(cq, "lo", 0.0), hi = get(cq, "hi", 200.0);
    res["crossover"] = {{"fraction", fraction},
                        {"delta", energy_fraction_crossover(V, cfg.d, fraction, lo, hi, opt)}};
  }
  if (req.contains("gamma")) {
    const auto& gq = req["gamma"];
    only(gq, {"t", "engine", "psi_radius", "samples", "dt"});
    const auto t = list(gq, "t", {1, 2, 4, 8, 16, 30});
    const auto engine = get<std::string>(gq, "engine", "spectral");
    const double rho = get(gq, "psi_radius", 1.0);
    GammaCurve curve;
    if (engine == "spectral") {
      curve = gamma_ratio_spectral(V, delta, cfg.d, rho, t);
    } else if (engine == "mc") {
      GammaMcOptions mo;
      mo.samples = get(gq, "samples", mo.samples);
      mo.dt = get(gq, "dt", mo.dt);
      mo.seed = cfg.seed;
      mo.threads = cfg.threads;
      curve = gamma_ratio_mc(V, delta, cfg.d, rho, t, mo);
    } else {
      throw ValidationError("spectral: gamma engine must be 'spectral' or 'mc'");
    }
    res["gamma"] = {{"engine", engine},           {"t", curve.t},
                    {"gamma", curve.gamma},       {"gamma_se", curve.gamma_se},
                    {"trend_slope", curve.trend_slope}, {"bound_signal", curve.bound_signal},
                    {"insufficient_signal", curve.insufficient_signal}, {"psi_norm", curve.psi_norm}};
  }
  return {0, res.dump(2)};
}

CommandResult gaussref(const json& req) {
  only(req, {"beta", "block_length", "horizon", "dt", "sample_d", "seed", "out", "csv"});
  const auto betas = list(req, "beta", {100.0, 1000.0, 10000.0});
  BlockGaussianSpec spec;
  spec.block_length = get(req, "block_length", 1.0);
  spec.horizon = get(req, "horizon", 4.0 * spec.block_length);
  spec.dt = get(req, "dt", spec.block_length / 512.0);
  json rows = json::array();
  std::vector<double> lb, lv;
  for (double b : betas) {
    spec.beta = b;
    const PrecisionFactor f(spec);
    const auto v = block_variance(f);
    rows.push_back({{"beta", b}, {"first_block", v.first_block}, {"middle_block", v.middle_block},
                    {"cholesky_residual", f.cholesky_residual()}});
    if (b > 0.0) {
      lb.push_back(std::log(b));
      lv.push_back(std::log(v.first_block));
    }
  }
  json res = {{"block_length", spec.block_length}, {"horizon", spec.horizon}, {"dt", spec.dt}, {"rows", rows}};
  res["loglog_slope"] = lb.size() >= 2 ? json(ls_slope(lb, lv)) : json(nullptr);
  const auto csv_path = get<std::string>(req, "csv", "");
  if (!csv_path.empty()) {
    std::ostringstream csv;
    csv << "# schema=" << kCsvSchema << "\nbeta,l,v2,v2_middle\n";
    csv.precision(17);
    for (const auto& row : rows)
      csv << row["beta"].get<double>() << ',' << spec.block_length << ',' << row["first_block"].get<double>() << ','
          << row["middle_block"].get<double>() << '\n';
    write_file(csv_path, csv.str());
    res["csv"] = csv_path;
  }
  const auto out = get<std::string>(req, "out", "");
  if (!out.empty()) {
    spec.beta = betas.back();
    const auto path = sample_exact(PrecisionFactor(spec), get(req, "sample_d", 3), get<std::uint64_t>(req, "seed", 1));
    std::ostringstream csv;
    path.write_csv(csv);
    write_file(out, csv.str());
    res["sample"] = out;
  }
  return {0, res.dump(2)};
}

CommandResult inequalities(const json& req) {
  only(req, {"suite", "instances", "samples", "seed", "threads", "out"});
  const auto suite = get<std::string>(req, "suite", "all");
  const auto seed = get<std::uint64_t>(req, "seed", 1);
  const auto threads = get<std::size_t>(req, "threads", 0);
  const auto samples = get<std::size_t>(req, "samples", 200000);
  const auto out = get<std::string>(req, "out", "");
  const bool has_n = req.contains("instances");
  const auto n = [&](std::size_t def) { return has_n ? get<std::size_t>(req, "instances", def) : def; };
  std::vector<SuiteSummary> done;
  const bool all = suite == "all";
  require(all || suite == "gci" || suite == "reweight" || suite == "tails" || suite == "inflation",
          "check-inequalities: suite must be gci, reweight, tails, inflation or all");
  if (all || suite == "gci") done.push_back(run_gci_suite(n(200), seed, threads, samples));
  if (all || suite == "reweight") done.push_back(run_reweight_suite(n(50), seed, threads, samples));
  if (all || suite == "tails") done.push_back(run_tail_suite(n(20), seed, threads, samples));
  if (all || suite == "inflation") done.push_back(run_inflation_suite(n(50), seed, threads));
  json list = json::array();
  std::size_t violations = 0;
  for (const auto& s : done) {
    json e = {{"suite", s.suite}, {"instances", s.instances}, {"violations", s.violations}, {"rejected", s.rejected},
              {"worst_exact_margin", finite(s.worst_exact_margin)}};
    if (!out.empty()) {
      const auto path = (fs::path(out) / (s.suite + ".csv")).string();
      write_file(path, "# schema=" + std::to_string(kCsvSchema) + "\n" + s.csv);
      e["csv"] = path;
      if (!s.extra_csv.empty()) {
        const auto extra = (fs::path(out) / (s.suite + "_sup.csv")).string();
        write_file(extra, "# schema=" + std::to_string(kCsvSchema) + "\n" + s.extra_csv);
        e["extra_csv"] = extra;
      }
    }
    violations += s.violations;
    list.push_back(e);
  }
  return {violations ? static_cast<int>(ErrorKind::violation) : 0,
          json{{"suites", list}, {"violations", violations}}.dump(2)};
}

CommandResult free_energy(const json& req) {
  only(req, {"config", "delta_max", "points", "alpha", "horizon", "horizon_difference"});
  const auto cfg = config_of(req);
  const double dmax = get(req, "delta_max", cfg.resolved_deltas().back());
  const auto points = get<std::size_t>(req, "points", cfg.experiment.free_energy_points);
  require(points >= 2 && dmax > 0.0, "free-energy: need delta_max > 0 and >= 2 points");
  std::vector<double> grid(points);
  for (std::size_t i = 0; i < points; ++i) grid[i] = dmax * static_cast<double>(i) / static_cast<double>(points - 1);
  const auto model = cfg.model(0.0, get(req, "alpha", cfg.experiment.alpha.front()),
                               get(req, "horizon", cfg.experiment.horizon.front()));
  ChainConfig chain = cfg.chain;
  chain.seed = cfg.seed;
  FreeEnergyOptions opt;
  opt.horizon_difference = get(req, "horizon_difference", true);
  opt.threads = cfg.threads;
  const auto c = free_energy_rate(model, grid, chain, opt);
  json pts = json::array();
  for (std::size_t i = 0; i < grid.size(); ++i)
    pts.push_back({{"delta", c.delta[i]},
                   {"mean_v", c.mean_v[i].value},
                   {"mean_v_se", c.mean_v[i].std_error},
                   {"rate", c.rate[i]},
                   {"rate_se", c.rate_se[i]},
                   {"rate_plain", c.rate_plain[i]},
                   {"rate_plain_se", c.rate_plain_se[i]}});
  return {0, json{{"alpha", c.alpha}, {"horizon", c.horizon}, {"convexity_flag", c.convexity_flag},
                      {"log_z0", c.log_z0},       {"log_z0_half", c.log_z0_half},      {"curve", pts}}
                 .dump(2)};
}

CommandResult report(const json& req) {
  only(req, {"path", "svg"});
  const auto rows = read_scan_csv(get<std::string>(req, "path", "scan_out"));
  json res = {{"rows", rows.size()}, {"table", format_report(rows)}};
  const auto svg = get<std::string>(req, "svg", "");
  if (!svg.empty()) res["files"] = write_report_plots(rows, svg);
  return {0, res.dump(2)};
}

}  // namespace

CommandResult run_command(const std::string& command, const std::string& request) {
  static const std::map<std::string, std::function<CommandResult(const json&)>> table = {
      {"kernel.eval", kernel_eval},   {"kernel.validate", kernel_validate},
      {"sample", sample},             {"scan", scan},
      {"spectral", spectral},         {"gaussref", gaussref},
      {"check-inequalities", inequalities}, {"free-energy", free_energy},
      {"report", report}};
  const auto it = table.find(command);
  if (it == table.end()) throw ValidationError("unknown command '" + command + "'");
  return it->second(parse(request));
}

}  // namespace polaron
