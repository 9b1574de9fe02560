#include <doctest.h>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <json.hpp>
#include <sstream>

#include "../oracles.hpp"
#include "polaron/error.hpp"
#include "polaron/scan.hpp"

using namespace polaron;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

fs::path scratch(const std::string& name) {
  const auto p = fs::temp_directory_path() / ("polaron_unit_" + name);
  fs::remove_all(p);
  return p;
}

std::size_t lines(const std::string& s) { return static_cast<std::size_t>(std::count(s.begin(), s.end(), '\n')); }

}  // namespace

TEST_CASE("config parsing is strict") {
  CHECK_THROWS_AS(run_config_from_json(R"({"modle": {}})"), ValidationError);
  CHECK_THROWS_AS(run_config_from_json(R"({"model": {"dd": 3}})"), ValidationError);
  CHECK_THROWS_AS(run_config_from_json(R"({"model": {"d": "three"}})"), ValidationError);
  CHECK_THROWS_AS(run_config_from_json("{not json"), ValidationError);
  CHECK_THROWS_AS(run_config_from_json(R"({"experiment": {"alpha": []}})"), ValidationError);
  CHECK_THROWS_AS(run_config_from_json(R"({"experiment": {"delta": [-1]}})"), ValidationError);
  CHECK_THROWS_AS(run_config_from_json(R"({"experiment": {"delta_units": "kelvin"}})"), ValidationError);

  const auto c = run_config_from_json(R"({"seed": 18446744073709551557, "model": {"endpoint_radius": "inf"}})");
  CHECK(c.seed == 18446744073709551557ULL);
  CHECK(std::isinf(c.endpoint_radius));
  const auto back = run_config_from_json(run_config_to_json(c));
  CHECK(run_config_to_json(back) == run_config_to_json(c));
}

TEST_CASE("threshold units resolve against the d = 3 threshold") {
  const auto c = run_config_from_json(R"({"experiment": {"delta": [0.5, 2], "delta_units": "threshold"}})");
  const auto d = c.resolved_deltas();
  CHECK(d[0] == doctest::Approx(0.5 * oracle::pi * oracle::pi / 8.0).epsilon(1e-4));
  CHECK(d[1] == doctest::Approx(2.0 * oracle::pi * oracle::pi / 8.0).epsilon(1e-4));
}

TEST_CASE("sha256 test vectors") {
  CHECK(sha256_hex("abc") == "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
  CHECK(sha256_hex("") == "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
}

TEST_CASE("degenerate scan reproduces the free midpoint law") {
  const auto dir = scratch("free");
  auto c = run_config_from_json(R"({"seed": 5, "model": {"d": 3, "dt": 0.0625, "endpoint_radius": "inf"},
      "chain": {"sweeps": 20000, "thin": 4}, "experiment": {"delta": [0], "alpha": [0], "horizon": [2]}})");
  c.out_dir = dir.string();
  c.threads = 1;
  const auto r = run_scan(c);
  REQUIRE(r.rows.size() == 1);
  CHECK(r.rows[0].ok);
  const double exact = oracle::radial_gaussian_cdf(3, 1.0, 1.0);
  CHECK(std::abs(r.rows[0].midpoint.value - exact) <= 5.0 * r.rows[0].midpoint.std_error);
  CHECK(fs::exists(dir / "cells" / "cell_0_0_0.csv"));
  CHECK(slurp(dir / "scan.csv").rfind("# schema=1\n", 0) == 0);
  fs::remove_all(dir);
}

TEST_CASE("scan reruns are byte-identical and the manifest is complete") {
  const std::string cfg = R"({"seed": 18446744073709551557, "threads": 1,
      "model": {"d": 3, "dt": 0.25, "K_radius": 1.0},
      "chain": {"sweeps": 600, "thin": 2},
      "experiment": {"delta": [0.8], "delta_units": "threshold", "alpha": [0, 5], "horizon": [4, 8]}})";
  auto c = run_config_from_json(cfg);
  const auto a = scratch("rerun_a"), b = scratch("rerun_b");
  c.out_dir = a.string();
  const auto ra = run_scan(c);
  c.out_dir = b.string();
  run_scan(c);
  CHECK(ra.rows.size() == 4);
  CHECK(slurp(a / "scan.csv") == slurp(b / "scan.csv"));
  for (const auto& e : fs::directory_iterator(a / "cells"))
    CHECK(slurp(e.path()) == slurp(b / "cells" / e.path().filename()));

  const auto m = nlohmann::json::parse(slurp(a / "manifest.json"));
  CHECK(m["master_seed"].get<std::uint64_t>() == 18446744073709551557ULL);
  CHECK(m["schema"] == 1);
  CHECK(m["cells"].size() == 4);
  CHECK(m["assumptions"]["b_ok"].is_boolean());
  std::size_t listed = 0;
  for (const auto& f : m["files"]) {
    CHECK(sha256_file((a / f["path"].get<std::string>()).string()) == f["sha256"]);
    ++listed;
  }
  std::size_t on_disk = 0;
  for (const auto& e : fs::recursive_directory_iterator(a))
    if (e.is_regular_file() && e.path().filename() != "manifest.json") ++on_disk;
  CHECK(listed == on_disk);

  const auto rows = read_scan_csv(a.string());
  REQUIRE(rows.size() == 4);
  CHECK(rows[1].alpha == 0.0);
  CHECK(rows[2].alpha == 5.0);
  CHECK(rows[3].midpoint.value == doctest::Approx(ra.rows[3].midpoint.value).epsilon(1e-9));
  fs::remove_all(a);
  fs::remove_all(b);
}

TEST_CASE("failed assumption checks stop the scan unless overridden") {
  auto c = run_config_from_json(R"({"threads": 1, "model": {"d": 1, "dt": 0.25},
      "chain": {"sweeps": 200, "thin": 2},
      "experiment": {"alpha": [1], "horizon": [2], "assumptions": {"xi": 1e-6}}})");
  const auto dir = scratch("override");
  c.out_dir = dir.string();
  CHECK_THROWS_AS(run_scan(c), ValidationError);
  c.experiment.override_assumptions = true;
  const auto r = run_scan(c);
  CHECK_FALSE(r.assumptions_ok);
  const auto m = nlohmann::json::parse(slurp(dir / "manifest.json"));
  CHECK(m["assumptions"]["overridden"] == true);
  fs::remove_all(dir);
}

TEST_CASE("report table") {
  const auto empty = format_report({});
  CHECK(lines(empty) == 1);
  CHECK(empty.find("midpoint_mass") != std::string::npos);

  std::vector<ScanRow> rows(4);
  for (std::size_t i = 0; i < 4; ++i) {
    rows[i].i_alpha = i;
    rows[i].alpha = 5.0 * i;
    rows[i].horizon = 32;
    rows[i].midpoint = {0.1 * i, 0.01, 100.0, false};
    rows[i].occupation = {0.2, 0.02, 100.0, false};
  }
  CHECK(lines(format_report(rows)) == 5);
  rows[2].ok = false;
  rows[2].message = "drift";
  const auto t = format_report(rows);
  CHECK(lines(t) == 5);
  CHECK(std::count(t.begin(), t.end(), 'F') >= 1);
  CHECK(t.find("FAILED") != std::string::npos);
  CHECK(t.find(" - ") != std::string::npos);

  const auto dir = scratch("plots");
  const auto files = write_report_plots(rows, dir.string());
  CHECK(files.size() == 1);
  CHECK(slurp(files[0]).rfind("<svg", 0) == 0);
  fs::remove_all(dir);
}
