#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "doctest.h"
#include "otfs_rach/runner.hpp"

using namespace otfs;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

std::string field_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const ConfigError& e) {
    return e.field();
  }
  return "<no ConfigError>";
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("otfs_rach_test_config_" + name);
  fs::remove_all(p);
  return p;
}

}  // namespace

TEST_CASE("overrides use dotted paths and the last one wins") {
  json c = {{"experiment", "mdp"}};
  apply_overrides(c, {"mdp.cfo_hz=15000", "preamble.F=4", "mdp.cfo_hz=7000", "detector.mode=interpolated",
                      "mdp.snr_db=[0,2]"});
  CHECK(c["mdp"]["cfo_hz"] == 7000);
  CHECK(c["preamble"]["F"] == 4);
  CHECK(c["detector"]["mode"] == "interpolated");
  CHECK(c["mdp"]["snr_db"].size() == 2);
  CHECK(field_of([&] { apply_overrides(c, {"novalue"}); }) == "overrides");
  CHECK(field_of([&] { apply_overrides(c, {"preamble.F.x=1"}); }) == "preamble.F");
  CHECK(field_of([&] { apply_overrides(c, {"mdp..cfo_hz=1"}); }) == "mdp..cfo_hz");
}

TEST_CASE("effective config fills defaults and checks types") {
  const json eff = effective_config({{"experiment", "papr"}, {"seed", 3}});
  CHECK(eff["preamble"]["M"] == 139);
  CHECK(eff["detector"]["p_fa"] == doctest::Approx(1e-3));
  CHECK(eff["seed"] == 3);
  CHECK(eff["mdp"]["snr_db"].size() == 9);

  CHECK(field_of([] { effective_config({{"experiment", "papr"}, {"preamble", {{"MM", 1}}}}); }) == "preamble.MM");
  CHECK(field_of([] { effective_config({{"experiment", "papr"}, {"bogus", 1}}); }) == "bogus");
  CHECK(field_of([] { effective_config({{"experiment", "papr"}, {"preamble", {{"M", "139"}}}}); }) == "preamble.M");
  CHECK(field_of([] { effective_config({{"experiment", "papr"}, {"preamble", {{"M", 2.5}}}}); }) == "preamble.M");
  CHECK(field_of([] { effective_config({{"experiment", "papr"}, {"preamble", {{"M", 138}}}}); }) == "preamble.M");
  CHECK(field_of([] { effective_config({{"experiment", "nope"}}); }) == "experiment");
  CHECK(field_of([] { effective_config(json::object()); }) == "experiment");
  CHECK(field_of([] { effective_config({{"experiment", "mdp"}, {"detector", {{"mode", "fine"}}}}); }) ==
        "detector.mode");
  CHECK(field_of([] { effective_config({{"experiment", "mdp"}, {"seed", -1}}); }) == "seed");
  CHECK(field_of([] { effective_config({{"experiment", "mdp"}, {"mdp", {{"snr_db", {0, "x"}}}}}); }) == "mdp.snr_db");
  // Integral floats are accepted for integer fields.
  CHECK(effective_config({{"experiment", "papr"}, {"preamble", {{"F", 4.0}}}})["preamble"]["F"] == 4);
  // A meta member from a previous run is ignored.
  CHECK_NOTHROW(effective_config({{"experiment", "papr"}, {"meta", {{"version", "x"}}}}));
}

TEST_CASE("seed falls back to the environment") {
  ::unsetenv("OTFS_RACH_SEED");
  CHECK(effective_config({{"experiment", "papr"}})["seed"] == 1);
  ::setenv("OTFS_RACH_SEED", "987", 1);
  CHECK(effective_config({{"experiment", "papr"}})["seed"] == 987);
  CHECK(effective_config({{"experiment", "papr"}, {"seed", 5}})["seed"] == 5);
  ::setenv("OTFS_RACH_SEED", "12x", 1);
  CHECK(field_of([] { effective_config({{"experiment", "papr"}}); }) == "OTFS_RACH_SEED");
  ::unsetenv("OTFS_RACH_SEED");
}

TEST_CASE("typed blocks") {
  json eff = effective_config({{"experiment", "mdp"},
                               {"seed", 9},
                               {"mdp", {{"cfo_hz", 15e3}, {"n_users", 2}}},
                               {"detector", {{"root_table", {3, 5, 7}}, {"num_candidates", 3}}}});
  const MdpConfig m = mdp_from_config(eff);
  CHECK(m.cfo_hz == 15e3);
  CHECK(m.n_users == 2);
  CHECK(m.base_seed == 9);
  REQUIRE(m.root_table);
  CHECK(*m.root_table == std::vector<int>{3, 5, 7});

  eff["detector"]["num_candidates"] = 4;
  CHECK(field_of([&] { mdp_from_config(eff); }) == "detector.root_table");
  eff["detector"]["num_candidates"] = 3;
  eff["detector"]["root_table"] = json::array({3, 3, 7});
  CHECK(field_of([&] { mdp_from_config(eff); }) == "detector.root_table");
  eff["detector"]["root_table"] = "/nonexistent/roots.txt";
  CHECK_THROWS_AS(mdp_from_config(eff), IoError);

  eff = effective_config({{"experiment", "calibrate"}, {"calibrate", {{"p_fa", 0.01}, {"trials", 999}}}});
  CHECK(field_of([&] { calibrate_from_config(eff); }) == "calibrate.trials");
  eff = effective_config({{"experiment", "geometry"}, {"geometry", {{"altitude_m", -1.0}}}});
  CHECK(field_of([&] { geometry_from_config(eff); }).rfind("geometry.", 0) == 0);
}

TEST_CASE("run writes csv and meta into the output directory only") {
  const fs::path dir = scratch("geometry");
  const RunResult r = run_config({{"experiment", "geometry"}, {"output_dir", dir.string()}}, {});
  CHECK(r.experiment == "geometry");
  CHECK(fs::exists(dir / "geometry.csv"));
  CHECK(fs::exists(dir / "geometry.meta.json"));
  CHECK(fs::exists(dir / "geometry.cfo.csv"));
  for (const auto& f : r.files) CHECK(fs::path(f).parent_path() == dir);
  const json meta = json::parse(slurp(dir / "geometry.meta.json"));
  CHECK(meta["meta"]["version"] == OTFS_RACH_VERSION);
  CHECK(meta["experiment"] == "geometry");
  CHECK(r.summary.find("geometry:") == 0);
  fs::remove_all(dir);
}

TEST_CASE("invalid configs fail before anything is written") {
  const fs::path dir = scratch("invalid");
  CHECK_THROWS_AS(run_config({{"experiment", "psd"}, {"output_dir", dir.string()}, {"psd", {{"span_hz", 1e9}}}}, {}),
                  ConfigError);
  CHECK_THROWS_AS(run_config({{"experiment", "detect-demo"},
                              {"output_dir", dir.string()},
                              {"detect_demo", {{"nu_hz", 31e3}}}},
                             {}),
                  InfeasibleError);
  CHECK_FALSE(fs::exists(dir));
}

TEST_CASE("papr with an F override records it in the metadata") {
  const fs::path dir = scratch("papr");
  RunOptions opt;
  opt.overrides = {"preamble.F=4", "output_dir=" + dir.string()};
  run_config({{"experiment", "papr"}}, opt);
  const json meta = json::parse(slurp(dir / "papr.meta.json"));
  CHECK(meta["preamble"]["F"] == 4);
  opt.overrides = {"preamble.F=2", "output_dir=" + dir.string()};
  CHECK(field_of([&] { run_config({{"experiment", "papr"}}, opt); }) == "preamble.F");
  fs::remove_all(dir);
}

TEST_CASE("mdp runs are byte-identical and the meta sidecar reproduces them") {
  const fs::path a = scratch("mdp_a"), b = scratch("mdp_b"), c = scratch("mdp_c");
  const json cfg = {{"experiment", "mdp"}, {"seed", 2024}, {"mdp", {{"trials_per_point", 20}, {"snr_db", {-10, 0}}}}};
  RunOptions opt;
  opt.output_dir = a.string();
  run_config(cfg, opt);
  opt.output_dir = b.string();
  opt.workers = 3;
  run_config(cfg, opt);
  CHECK(slurp(a / "mdp.csv") == slurp(b / "mdp.csv"));

  // Feed the sidecar back as a config.
  const RunResult r = run_file((a / "mdp.meta.json").string(), RunOptions{{}, 1, c.string()});
  CHECK(slurp(a / "mdp.csv") == slurp(c / "mdp.csv"));
  json ma = json::parse(slurp(a / "mdp.meta.json")), mc = json::parse(slurp(c / "mdp.meta.json"));
  ma.erase("output_dir");
  mc.erase("output_dir");
  CHECK(ma == mc);

  // One row per SNR point below the header.
  const std::string csv = slurp(a / "mdp.csv");
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 3);
  CHECK(r.summary.find("mdp: 2 SNR points") == 0);
  for (const auto& p : {a, b, c}) fs::remove_all(p);
}

TEST_CASE("detect-demo") {
  const fs::path dir = scratch("demo");
  RunOptions opt;
  opt.output_dir = dir.string();
  // a0 = M + 3 samples.
  const json base = {{"experiment", "detect-demo"},
                     {"detect_demo", {{"root", 5}, {"tau_s", 142.0 / (139 * 60e3)}, {"nu_hz", 0.0}}}};
  RunResult r = run_config(base, opt);
  CHECK(r.report["outcome"] == "correct");
  CHECK(r.report["decision"]["r_m_hat"] == 3.0);
  CHECK(r.report["decision"]["q_m_hat"] == 1);
  CHECK(r.report["truth"]["r_M"] == 3);
  CHECK(r.report["truth"]["q_M"] == 1);
  CHECK(r.report_text.find("outcome:  correct") != std::string::npos);
  CHECK(fs::exists(dir / "detect-demo.report.json"));
  CHECK(json::parse(slurp(dir / "detect-demo.report.json")) == r.report);

  json noisy = base;
  noisy["detect_demo"]["snr_db"] = -30.0;
  r = run_config(noisy, opt);
  CHECK(r.report["outcome"] == "miss_no_peak");
  CHECK(r.report_text.find("no peak above threshold") != std::string::npos);

  json far = base;
  far["detect_demo"]["nu_hz"] = 31e3;
  try {
    run_config(far, opt);
    FAIL("expected InfeasibleError");
  } catch (const InfeasibleError& e) {
    CHECK(e.bound().find("nu_hz") != std::string::npos);
  }
  fs::remove_all(dir);
}
