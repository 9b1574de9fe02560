#include <CLI11.hpp>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <json.hpp>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "polaron/polaron.h"

using nlohmann::json;

namespace {

struct Globals {
  std::string config_file;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> threads;
  std::string out;
};

/// Sets config[a][b]... only when the option was given.
template <class T>
void patch(json& j, std::initializer_list<const char*> path, const std::optional<T>& v) {
  if (!v) return;
  json* node = &j;
  for (const char* key : path) node = &(*node)[key];
  if constexpr (std::is_same_v<T, double>) {
    if (!std::isfinite(*v)) {
      *node = "inf";
      return;
    }
  }
  *node = *v;
}

json load_config(const Globals& g) {
  json cfg = json::object();
  if (!g.config_file.empty()) {
    std::ifstream in(g.config_file);
    if (!in) throw std::runtime_error("cannot read config file " + g.config_file);
    try {
      cfg = json::parse(in);
    } catch (const json::exception& e) {
      throw std::runtime_error(std::string("config file: ") + e.what());
    }
  }
  patch(cfg, {"seed"}, g.seed);
  patch(cfg, {"threads"}, g.threads);
  if (!g.out.empty()) cfg["out"] = g.out;
  return cfg;
}

int call(const char* command, const json& request, bool table_only = false) {
  pl_context* ctx = nullptr;
  if (pl_context_create(&ctx) != PL_OK) {
    std::cerr << "error: cannot create context\n";
    return PL_ERR_INTERNAL;
  }
  char* response = nullptr;
  const pl_status rc = pl_run_command(ctx, command, request.dump().c_str(), &response);
  if (response) {
    const json res = json::parse(response);
    pl_free_string(response);
    if (res.contains("table")) {
      std::cout << res["table"].get<std::string>();
      if (!table_only) {
        json rest = res;
        rest.erase("table");
        std::cout << rest.dump(2) << "\n";
      }
    } else {
      std::cout << res.dump(2) << "\n";
    }
  }
  if (rc != PL_OK) std::cerr << (rc == PL_VIOLATION ? "violation: " : "error: ") << pl_last_error(ctx) << "\n";
  pl_context_destroy(ctx);
  return rc;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Path-measure sampler, spectral and inequality checks for confined polaron-type models"};
  app.require_subcommand(1);
  app.fallthrough();
  Globals g;
  app.add_option("--config", g.config_file, "Run config (JSON)")->check(CLI::ExistingFile);
  app.add_option("--seed", g.seed, "Master seed");
  app.add_option("--threads", g.threads, "Worker threads (0: hardware)")->envname("POLARON_THREADS");
  app.add_option("--out", g.out, "Output directory");
  app.set_version_flag("--version", std::string(pl_version()));

  // Model, kernel and chain overrides shared by several subcommands.
  std::optional<int> d;
  std::optional<double> dt, K, M, width, t_min;
  std::optional<std::string> family;
  std::optional<std::size_t> sweeps, burn_in, thin;
  const auto model_flags = [&](CLI::App* sub) {
    sub->add_option("--d", d, "Spatial dimension");
    sub->add_option("--dt", dt, "Time step");
    sub->add_option("--K", K, "Diagnostic ball radius");
    sub->add_option("--M", M, "Endpoint ball radius (default K)");
    sub->add_option("--kernel", family, "gaussian-omega1 | nelson3d | custom-grid");
    sub->add_option("--width", width, "Kernel cutoff width");
    sub->add_option("--t-min", t_min, "Time floor of singular kernels");
    sub->add_option("--sweeps", sweeps, "Chain sweeps");
    sub->add_option("--burn-in", burn_in, "Burn-in sweeps (default 20%)");
    sub->add_option("--thin", thin, "Thinning interval");
  };
  const auto config = [&] {
    json c = load_config(g);
    patch(c, {"model", "d"}, d);
    patch(c, {"model", "dt"}, dt);
    patch(c, {"model", "K_radius"}, K);
    patch(c, {"model", "endpoint_radius"}, M);
    patch(c, {"kernel", "family"}, family);
    patch(c, {"kernel", "width"}, width);
    patch(c, {"kernel", "t_min"}, t_min);
    patch(c, {"chain", "sweeps"}, sweeps);
    patch(c, {"chain", "burn_in"}, burn_in);
    patch(c, {"chain", "thin"}, thin);
    return c;
  };

  auto* kernel = app.add_subcommand("kernel", "Pair kernel evaluation and assumption checks");
  kernel->require_subcommand(1);
  std::vector<double> r{0.0}, t{0.0};
  auto* keval = kernel->add_subcommand("eval", "Evaluate W(r, t)");
  model_flags(keval);
  keval->add_option("--r", r, "Distances")->delimiter(',');
  keval->add_option("--t", t, "Times")->delimiter(',');
  std::optional<double> xi, R, l_star;
  auto* kval = kernel->add_subcommand("validate", "Grid checks of the kernel assumptions");
  model_flags(kval);
  kval->add_option("--xi", xi);
  kval->add_option("--R", R);
  kval->add_option("--l-star", l_star);

  std::optional<double> delta, alpha, horizon;
  std::string functionals;
  auto* sample = app.add_subcommand("sample", "Run one Metropolis-Hastings chain");
  model_flags(sample);
  sample->add_option("--delta", delta);
  sample->add_option("--alpha", alpha);
  sample->add_option("--T", horizon, "Horizon");
  sample->add_option("--functionals", functionals, "Per-sample functionals CSV");

  bool override_assumptions = false;
  auto* scan = app.add_subcommand("scan", "Run the (delta, alpha, T) scan of the config");
  model_flags(scan);
  scan->add_flag("--override-assumptions", override_assumptions, "Run even if kernel checks fail (recorded)");

  std::optional<std::string> engine;
  std::vector<double> gamma_t;
  auto* spectral = app.add_subcommand("spectral", "Radial ground state, threshold and gamma-ratio curve");
  model_flags(spectral);
  spectral->add_option("--delta", delta);
  spectral->add_option("--gamma", engine, "spectral | mc");
  spectral->add_option("--t", gamma_t, "Gamma-ratio times")->delimiter(',');
  std::optional<double> crossover;
  spectral->add_option("--crossover", crossover, "Report the smallest delta with E0 < -fraction * delta");

  std::vector<double> betas;
  std::optional<double> block_length, g_horizon, g_dt;
  std::string sample_out, gauss_csv;
  auto* gaussref = app.add_subcommand("gaussref", "Block Gaussian reference measure");
  gaussref->add_option("--beta", betas)->delimiter(',');
  gaussref->add_option("--block-length", block_length);
  gaussref->add_option("--T", g_horizon);
  gaussref->add_option("--dt", g_dt);
  gaussref->add_option("--sample-out", sample_out, "Write one exact path sample (CSV)");
  gaussref->add_option("--csv", gauss_csv, "Write (beta, l, v2) rows (default <out>/gaussref.csv)");

  std::string suite = "all";
  std::optional<std::size_t> instances, samples;
  auto* ineq = app.add_subcommand("check-inequalities", "Randomised inequality suites");
  ineq->add_option("--suite", suite)->check(CLI::IsMember({"gci", "reweight", "tails", "inflation", "all"}));
  ineq->add_option("--instances", instances);
  ineq->add_option("--samples", samples);

  std::optional<double> delta_max;
  std::optional<std::size_t> points;
  auto* fe = app.add_subcommand("free-energy", "Thermodynamic-integration free-energy curve");
  model_flags(fe);
  fe->add_option("--delta-max", delta_max);
  fe->add_option("--points", points);
  fe->add_option("--alpha", alpha);
  fe->add_option("--T", horizon);

  std::string report_path, svg;
  auto* report = app.add_subcommand("report", "Summary table of a scan");
  report->add_option("path", report_path, "Scan directory or scan.csv")->required();
  report->add_option("--svg", svg, "Directory for SVG plots");

  CLI11_PARSE(app, argc, argv);

  try {
    if (keval->parsed()) return call("kernel.eval", {{"config", config()}, {"r", r}, {"t", t}});
    if (kval->parsed()) {
      json req = {{"config", config()}};
      patch(req, {"xi"}, xi);
      patch(req, {"R"}, R);
      patch(req, {"l_star"}, l_star);
      return call("kernel.validate", req);
    }
    if (sample->parsed()) {
      json req = {{"config", config()}};
      patch(req, {"delta"}, delta);
      patch(req, {"alpha"}, alpha);
      patch(req, {"horizon"}, horizon);
      if (functionals.empty() && !g.out.empty()) functionals = g.out + "/functionals.csv";
      if (!functionals.empty()) req["functionals"] = functionals;
      return call("sample", req);
    }
    if (scan->parsed()) {
      json c = config();
      if (override_assumptions) c["experiment"]["override_assumptions"] = true;
      return call("scan", {{"config", c}});
    }
    if (spectral->parsed()) {
      json req = {{"config", config()}};
      patch(req, {"delta"}, delta);
      if (crossover) req["crossover"] = {{"fraction", *crossover}};
      if (engine) {
        req["gamma"] = {{"engine", *engine}};
        if (!gamma_t.empty()) req["gamma"]["t"] = gamma_t;
      }
      return call("spectral", req);
    }
    if (gaussref->parsed()) {
      json req = json::object();
      if (!betas.empty()) req["beta"] = betas;
      patch(req, {"block_length"}, block_length);
      patch(req, {"horizon"}, g_horizon);
      patch(req, {"dt"}, g_dt);
      if (!sample_out.empty()) req["out"] = sample_out;
      if (gauss_csv.empty() && !g.out.empty()) gauss_csv = g.out + "/gaussref.csv";
      if (!gauss_csv.empty()) req["csv"] = gauss_csv;
      if (g.seed) req["seed"] = *g.seed;
      return call("gaussref", req);
    }
    if (ineq->parsed()) {
      json req = {{"suite", suite}};
      patch(req, {"instances"}, instances);
      patch(req, {"samples"}, samples);
      if (g.seed) req["seed"] = *g.seed;
      if (g.threads) req["threads"] = *g.threads;
      if (!g.out.empty()) req["out"] = g.out;
      return call("check-inequalities", req);
    }
    if (fe->parsed()) {
      json req = {{"config", config()}};
      patch(req, {"delta_max"}, delta_max);
      patch(req, {"points"}, points);
      patch(req, {"alpha"}, alpha);
      patch(req, {"horizon"}, horizon);
      return call("free-energy", req);
    }
    if (report->parsed()) {
      json req = {{"path", report_path}};
      if (!svg.empty()) req["svg"] = svg;
      return call("report", req, true);
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return PL_ERR_VALIDATION;
  }
  return PL_ERR_INTERNAL;
}
