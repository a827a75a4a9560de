// Command-line driver: closed-form bound evaluation, batch scenario
// verification with deterministic report files, the radial eigenvalue
// solvers, and report aggregation.
//
// Exit codes: 0 all expectations met, 1 at least one scenario missed its
// expectation, 2 configuration or domain errors (including usage errors).

#include <clocale>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "geomcmp/bounds.hpp"
#include "geomcmp/errors.hpp"
#include "geomcmp/scenario.hpp"
#include "geomcmp/version.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitExpectation = 1;
constexpr int kExitConfig = 2;

std::string fmt_g(double v) {
  if (v == 0.0) v = 0.0;  // never print the sign of a negative zero
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

struct BoundArgs {
  std::string kind = "real";
  int n = 2;
  double k = 0.0;
  double h = 0.0;
  double Hb = 0.0;
  bool has_h = false, has_Hb = false, json = false;
};

int cmd_bound(const BoundArgs& a) {
  nlohmann::ordered_json out;
  if (a.kind == "real") {
    if (!a.has_h) throw geomcmp::ConfigError("bound --kind real needs --h");
    out["rho_max"] = geomcmp::bounds::rho_max_real(a.n, a.k, a.h);
  } else if (a.kind == "kahler") {
    if (a.has_Hb) {
      out["h"] = geomcmp::bounds::rho_max_kahler(a.n, a.k, a.Hb);
    } else if (a.has_h) {
      const double kh = geomcmp::bounds::model_KH(a.n, a.k, a.h);
      out["KH"] = kh;
      if (kh >= 0.0) {
        out["eigen_lower_bound"] =
            geomcmp::bounds::eigen_lower_bound(a.n, a.k, a.h);
      }
    } else {
      throw geomcmp::ConfigError("bound --kind kahler needs --h or --Hb");
    }
  } else {
    throw geomcmp::ConfigError("bound --kind must be real or kahler");
  }
  if (a.json) {
    std::cout << out.dump(2) << "\n";
  } else {
    for (const auto& [key, val] : out.items()) {
      std::cout << key << " " << fmt_g(val.get<double>()) << "\n";
    }
  }
  return kExitOk;
}

struct VerifyArgs {
  std::string config;
  std::string out_dir = "out";
  int jobs = 1;
  std::uint64_t seed = 0;
  bool has_seed = false;
};

int cmd_verify(const VerifyArgs& a) {
  geomcmp::scenario::ScenarioConfig cfg =
      geomcmp::scenario::load_config(a.config);
  if (a.has_seed) {
    for (auto& sc : cfg.scenarios) {
      sc.params.emplace("seed", static_cast<double>(a.seed));
    }
  }
  const auto outcomes =
      geomcmp::scenario::run_all(cfg, a.out_dir, a.jobs);
  bool all_met = true;
  for (const auto& oc : outcomes) {
    const bool met = oc.expectation_met;
    all_met = all_met && met;
    std::cout << oc.scenario.id << ": " << (met ? "ok" : "EXPECTATION FAILED")
              << " (max_margin " << fmt_g(oc.rep.max_margin) << ", "
              << fmt_g(oc.runtime_ms) << " ms)\n";
  }
  std::cout << outcomes.size() << " scenario(s), reports in " << a.out_dir
            << "\n";
  return all_met ? kExitOk : kExitExpectation;
}

struct EigenArgs {
  int n = 1;
  double k = 0.0;
  double h = 1.0;
  double R = -1.0;
  int grid = 2048;
  std::string out_dir = "out";
};

int cmd_eigen(const EigenArgs& a) {
  geomcmp::scenario::Scenario sc;
  sc.id = "eigen-cli";
  sc.kind = "eigen";
  sc.params = {{"n", static_cast<double>(a.n)},
               {"k", a.k},
               {"h", a.h},
               {"R", a.R > 0.0 ? a.R : a.h},
               {"grid", static_cast<double>(a.grid)}};
  const auto outcome = geomcmp::scenario::run_scenario(sc);
  geomcmp::scenario::write_outputs(outcome, a.out_dir);
  double lambda = 0.0, bound = 0.0;
  for (const auto& row : outcome.rep.rows) {
    if (row.check == "eigen_lower_bound") {
      lambda = row.value;
      bound = row.bound;
    }
  }
  std::cout << "lambda1 " << fmt_g(lambda) << "\nbound " << fmt_g(bound)
            << "\n"
            << (outcome.expectation_met ? "pass" : "FAIL") << "\n";
  return outcome.expectation_met ? kExitOk : kExitExpectation;
}

struct ReportArgs {
  std::string dir;
  std::string out_file;
};

int cmd_report(const ReportArgs& a) {
  const std::string csv = geomcmp::scenario::aggregate_reports(a.dir);
  if (a.out_file.empty()) {
    std::cout << csv;
  } else {
    geomcmp::scenario::write_file_atomic(a.out_file, csv);
    std::cout << "summary written to " << a.out_file << "\n";
  }
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  std::setlocale(LC_ALL, "C");
  CLI::App app{"numerical verification of sharp boundary comparison bounds"};
  app.set_version_flag("--version", std::string(geomcmp::kToolVersion));
  // No -h short flag: it would shadow the --h parameter of bound and eigen.
  app.set_help_flag("--help", "print usage");
  app.require_subcommand(1);

  BoundArgs bound_args;
  auto* bound = app.add_subcommand("bound", "evaluate closed-form bounds");
  bound->set_help_flag("--help", "print usage");
  bound->add_option("--kind", bound_args.kind, "real or kahler");
  bound->add_option("--n", bound_args.n,
                    "dimension (real: manifold, kahler: complex)");
  bound->add_option("--k", bound_args.k, "curvature lower bound");
  auto* opt_h = bound->add_option("--h", bound_args.h,
                                  "boundary curvature (real) or radius "
                                  "parameter (kahler)");
  auto* opt_hb =
      bound->add_option("--Hb", bound_args.Hb, "boundary mean curvature");
  bound->add_flag("--json", bound_args.json, "machine-readable output");

  VerifyArgs verify_args;
  auto* verify =
      app.add_subcommand("verify", "run a scenario config, write reports");
  verify->set_help_flag("--help", "print usage");
  verify->add_option("--config", verify_args.config, "scenario JSON file")
      ->required();
  verify->add_option("--out", verify_args.out_dir, "report directory");
  verify->add_option("--jobs", verify_args.jobs, "worker threads")
      ->check(CLI::PositiveNumber);
  auto* opt_seed = verify->add_option(
      "--seed", verify_args.seed,
      "seed for scenarios that do not pin one in the config");

  EigenArgs eigen_args;
  auto* eig = app.add_subcommand("eigen", "first Dirichlet eigenvalue checks");
  eig->set_help_flag("--help", "print usage");
  eig->add_option("--n", eigen_args.n, "complex dimension")->required();
  eig->add_option("--k", eigen_args.k, "curvature constant")->required();
  eig->add_option("--h", eigen_args.h, "bound parameter")->required();
  eig->add_option("--R", eigen_args.R, "disk radius (default: h)");
  eig->add_option("--grid", eigen_args.grid, "finite-volume cells");
  eig->add_option("--out", eigen_args.out_dir, "report directory");

  ReportArgs report_args;
  auto* rep = app.add_subcommand("report", "aggregate report directory");
  rep->set_help_flag("--help", "print usage");
  rep->add_option("--dir", report_args.dir, "directory of scenario reports")
      ->required();
  rep->add_option("--out", report_args.out_file,
                  "summary CSV path (default: stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitConfig;
  }

  bound_args.has_h = opt_h->count() > 0;
  bound_args.has_Hb = opt_hb->count() > 0;
  verify_args.has_seed = opt_seed->count() > 0;

  try {
    if (bound->parsed()) return cmd_bound(bound_args);
    if (verify->parsed()) return cmd_verify(verify_args);
    if (eig->parsed()) return cmd_eigen(eigen_args);
    if (rep->parsed()) return cmd_report(report_args);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitConfig;
  }
  return kExitConfig;
}
