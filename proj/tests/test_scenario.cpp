#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <string>

#include "doctest.h"
#include "geomcmp/errors.hpp"
#include "geomcmp/scenario.hpp"

namespace gs = geomcmp::scenario;
namespace fs = std::filesystem;

namespace {

fs::path scratch_dir(const char* leaf) {
  const fs::path dir = fs::temp_directory_path() / "geomcmp-scenario-test" /
                       leaf;
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

gs::Scenario bound_scenario(const std::string& id) {
  gs::Scenario sc;
  sc.id = id;
  sc.kind = "bound";
  sc.params = {{"n", 3.0}, {"k", 0.0}, {"h", 0.5}};
  return sc;
}

}  // namespace

TEST_CASE("config parsing accepts the documented schema") {
  const std::string text = R"({
    "scenarios": [
      {"id": "a", "kind": "bound", "params": {"n": 3, "k": 0, "h": 0.5}},
      {"id": "b", "kind": "riccati-real", "expect": "pass",
       "params": {"n": 3, "k": -1, "h": 1.5, "trials": 2}}
    ]
  })";
  const auto cfg = gs::parse_config(text, ".");
  REQUIRE(cfg.scenarios.size() == 2);
  CHECK(cfg.scenarios[0].id == "a");
  CHECK(cfg.scenarios[1].expect == "pass");
  CHECK(cfg.scenarios[1].params.at("trials") == 2.0);
}

TEST_CASE("config schema violations are refused") {
  auto bad = [](const std::string& text) {
    CHECK_THROWS_AS((void)gs::parse_config(text, "."), geomcmp::ConfigError);
  };

  bad("not json at all");
  bad(R"({"scenario": []})");
  bad(R"({"scenarios": [{"id": "a", "kind": "mystery", "params": {}}]})");
  bad(R"({"scenarios": [{"kind": "bound", "params": {"n": 3}}]})");
  bad(R"({"scenarios": [
        {"id": "a", "kind": "bound", "params": {"n": 3, "k": 0, "h": 1}},
        {"id": "a", "kind": "bound", "params": {"n": 3, "k": 0, "h": 1}}]})");
  bad(R"({"scenarios": [{"id": "a", "kind": "bound",
        "params": {"n": 3, "k": 0, "h": 1, "spin": 2}}]})");
  bad(R"({"scenarios": [{"id": "a", "kind": "bound",
        "params": {"n": "three", "k": 0, "h": 1}}]})");
  bad(R"({"scenarios": [{"id": "a", "kind": "bound", "expect": "maybe",
        "params": {"n": 3, "k": 0, "h": 1}}]})");
  bad(R"({"scenarios": [{"id": "a", "kind": "bound", "frequency": 2,
        "params": {"n": 3, "k": 0, "h": 1}}]})");
}

TEST_CASE("tolerance resolution order") {
  unsetenv("GEOMCMP_TOL");
  CHECK(gs::default_tolerance() == 1e-8);

  setenv("GEOMCMP_TOL", "1e-6", 1);
  CHECK(gs::default_tolerance() == 1e-6);

  setenv("GEOMCMP_TOL", "banana", 1);
  CHECK_THROWS_AS((void)gs::default_tolerance(), geomcmp::ConfigError);
  setenv("GEOMCMP_TOL", "-1e-6", 1);
  CHECK_THROWS_AS((void)gs::default_tolerance(), geomcmp::ConfigError);
  setenv("GEOMCMP_TOL", "1e-6xyz", 1);
  CHECK_THROWS_AS((void)gs::default_tolerance(), geomcmp::ConfigError);

  unsetenv("GEOMCMP_TOL");
}

TEST_CASE("bound scenario evaluates the closed forms") {
  const auto out = gs::run_scenario(bound_scenario("flat"));
  CHECK(out.expectation_met);
  CHECK(out.rep.pass);
  REQUIRE(!out.rep.rows.empty());
  CHECK(out.rep.rows[0].check == "rho_max_real");
  CHECK(out.rep.rows[0].value == doctest::Approx(2.0).epsilon(1e-14));

  // h and Hb are mutually exclusive.
  gs::Scenario both = bound_scenario("both");
  both.params["Hb"] = 6.0;
  CHECK_THROWS_AS((void)gs::run_scenario(both), geomcmp::ConfigError);
}

TEST_CASE("scenario reports are byte-deterministic") {
  gs::Scenario sc;
  sc.id = "det";
  sc.kind = "riccati-real";
  sc.params = {{"n", 3.0}, {"k", -1.0}, {"h", 1.5},
               {"trials", 3.0}, {"seed", 42.0}, {"step", 2e-3}};

  const auto a = gs::run_scenario(sc);
  const auto b = gs::run_scenario(sc);
  CHECK(gs::report_json(a) == gs::report_json(b));
  CHECK(gs::report_csv(a.rep) == gs::report_csv(b.rep));
  CHECK(a.expectation_met);

  // The runtime lives in the sidecar only.
  CHECK(gs::report_json(a).find("runtime") == std::string::npos);
  CHECK(gs::meta_json(a).find("runtime_ms") != std::string::npos);
}

TEST_CASE("negative-control expectation") {
  gs::Scenario sc;
  sc.id = "control";
  sc.kind = "riccati-real";
  sc.expect = "expect-hypothesis-violation";
  sc.params = {{"n", 3.0}, {"k", 0.0}, {"h", 1.0},
               {"trials", 2.0}, {"step", 2e-3}};

  const auto out = gs::run_scenario(sc);
  CHECK(out.rep.hypothesis_violated);
  CHECK(out.expectation_met);

  // Expecting a violation from a run that never produces one is unmet.
  gs::Scenario clean = bound_scenario("clean");
  clean.expect = "expect-hypothesis-violation";
  CHECK_FALSE(gs::run_scenario(clean).expectation_met);
}

TEST_CASE("rigidity scenarios") {
  gs::Scenario model;
  model.id = "rigid-model";
  model.kind = "rigidity";
  model.params = {{"n", 2.0}, {"k", 0.0}, {"R", 0.8}};
  CHECK(gs::run_scenario(model).expectation_met);

  gs::Scenario sweep;
  sweep.id = "rigid-sweep";
  sweep.kind = "rigidity";
  sweep.params = {{"n", 2.0}, {"k", -1.0}, {"R", 0.5},
                  {"trials", 4.0}, {"seed", 3.0}};
  const auto out = gs::run_scenario(sweep);
  CHECK(out.expectation_met);
  CHECK(out.rep.trials.size() == 4);

  gs::Scenario inflated;
  inflated.id = "rigid-inflated";
  inflated.kind = "rigidity";
  inflated.expect = "expect-hypothesis-violation";
  inflated.params = {{"n", 2.0}, {"k", 0.0}, {"R", 1.0}};
  CHECK(gs::run_scenario(inflated).expectation_met);
}

TEST_CASE("module guards surface as config errors") {
  gs::Scenario sc;
  sc.id = "tiny-grid";
  sc.kind = "eigen";
  sc.params = {{"n", 1.0}, {"k", 0.0}, {"h", 1.0}, {"grid", 16.0}};
  CHECK_THROWS_AS((void)gs::run_scenario(sc), geomcmp::ConfigError);

  gs::Scenario dom;
  dom.id = "cusp-bound";
  dom.kind = "bound";
  dom.params = {{"n", 3.0}, {"k", -1.0}, {"h", 1.0}};
  CHECK_THROWS_AS((void)gs::run_scenario(dom), geomcmp::ConfigError);
}

TEST_CASE("outputs and aggregation") {
  const fs::path dir = scratch_dir("agg");

  const auto a = gs::run_scenario(bound_scenario("alpha"));
  gs::Scenario sc_b = bound_scenario("beta");
  sc_b.params = {{"n", 2.0}, {"k", 0.0}, {"Hb", 6.0}};
  const auto b = gs::run_scenario(sc_b);
  gs::write_outputs(b, dir);  // write out of order on purpose
  gs::write_outputs(a, dir);

  CHECK(fs::exists(dir / "alpha.json"));
  CHECK(fs::exists(dir / "alpha.csv"));
  CHECK(fs::exists(dir / "alpha.meta.json"));

  const std::string csv = gs::aggregate_reports(dir);
  const std::string header =
      "scenario_id,kind,n,k,h,pass,max_margin,runtime_ms\n";
  REQUIRE(csv.substr(0, header.size()) == header);
  // Rows sorted by id: alpha before beta.
  const auto alpha_at = csv.find("\nalpha,");
  const auto beta_at = csv.find("\nbeta,");
  REQUIRE(alpha_at != std::string::npos);
  REQUIRE(beta_at != std::string::npos);
  CHECK(alpha_at < beta_at);

  SUBCASE("duplicate ids are refused") {
    fs::copy_file(dir / "alpha.json", dir / "alpha-copy.json");
    CHECK_THROWS_AS((void)gs::aggregate_reports(dir), geomcmp::ConfigError);
  }

  SUBCASE("empty directory yields the bare header") {
    const fs::path empty = scratch_dir("agg-empty");
    CHECK(gs::aggregate_reports(empty) == header);
  }
}

TEST_CASE("run_all writes every report and keeps config order") {
  const fs::path dir = scratch_dir("runall");
  gs::ScenarioConfig cfg;
  cfg.scenarios = {bound_scenario("one"), bound_scenario("two"),
                   bound_scenario("three")};
  const auto outcomes = gs::run_all(cfg, dir, 2);
  REQUIRE(outcomes.size() == 3);
  CHECK(outcomes[0].scenario.id == "one");
  CHECK(outcomes[1].scenario.id == "two");
  CHECK(outcomes[2].scenario.id == "three");
  CHECK(fs::exists(dir / "one.json"));
  CHECK(fs::exists(dir / "two.json"));
  CHECK(fs::exists(dir / "three.json"));
}
