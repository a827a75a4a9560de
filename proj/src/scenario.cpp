#include "geomcmp/scenario.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <exception>
#include <fstream>
#include <mutex>
#include <set>
#include <sstream>
#include <thread>

#include "json.hpp"

#include "geomcmp/bounds.hpp"
#include "geomcmp/detail/rng.hpp"
#include "geomcmp/eigen.hpp"
#include "geomcmp/jacobi.hpp"
#include "geomcmp/modelfn.hpp"
#include "geomcmp/models.hpp"
#include "geomcmp/version.hpp"

namespace geomcmp::scenario {

namespace {

using nlohmann::ordered_json;

const std::set<std::string> kKinds = {
    "bound",    "riccati-real", "riccati-kahler", "rigidity",
    "eigen",    "cusp",         "index-form"};

const std::set<std::string> kParamNames = {
    "n",     "k",     "h",         "Hb",    "R",    "trials", "seed",
    "step",  "s_grid", "roughness", "tol",   "s_max", "ell",   "amp",
    "grid",  "trace"};

double get(const Scenario& sc, const std::string& name, double fallback) {
  auto it = sc.params.find(name);
  return it == sc.params.end() ? fallback : it->second;
}

double require(const Scenario& sc, const std::string& name) {
  auto it = sc.params.find(name);
  if (it == sc.params.end()) {
    throw ConfigError("scenario '" + sc.id + "': missing parameter '" + name +
                      "'");
  }
  return it->second;
}

int geti(const Scenario& sc, const std::string& name, int fallback) {
  const double v = get(sc, name, fallback);
  return static_cast<int>(std::llround(v));
}

std::string fmt_g(double v) {
  if (v == 0.0) v = 0.0;  // never print the sign of a negative zero
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

// Same zero normalization for numbers that go through the JSON writer.
double json_num(double v) { return v == 0.0 ? 0.0 : v; }

void push_row(report::VerificationReport& rep, int trial, const char* check,
              double x, double value, double bound, double margin, bool pass) {
  report::CheckRow row;
  row.trial = trial;
  row.check = check;
  row.x = x;
  row.value = value;
  row.bound = bound;
  row.margin = margin;
  row.pass = pass;
  rep.rows.push_back(row);
}

// ---------------------------------------------------------------------------
// Kind runners.

report::VerificationReport run_bound(const Scenario& sc, double tol) {
  report::VerificationReport rep;
  rep.kind = "bound";
  rep.tolerance = tol;
  rep.params = sc.params;
  const int n = geti(sc, "n", 0);
  if (n <= 0) throw ConfigError("scenario '" + sc.id + "': needs n >= 1");
  const double k = require(sc, "k");
  const bool has_h = sc.params.count("h") != 0;
  const bool has_Hb = sc.params.count("Hb") != 0;
  if (has_h == has_Hb) {
    throw ConfigError("scenario '" + sc.id +
                      "': bound takes exactly one of h, Hb");
  }
  if (has_h) {
    const double h = require(sc, "h");
    const double rho = bounds::rho_max_real(n, k, h);
    push_row(rep, 0, "rho_max_real", h, rho, rho, 0.0, true);
    // The model principal curvature at the returned radius reproduces h.
    const double back = modelfn::ct(k, rho);
    const double dev = std::fabs(back - h) / std::max(1.0, std::fabs(h));
    push_row(rep, 0, "ct_roundtrip", rho, back, h, dev, dev <= tol);
  } else {
    const double Hb = require(sc, "Hb");
    const double h = bounds::rho_max_kahler(n, k, Hb);
    push_row(rep, 0, "rho_max_kahler", Hb, h, h, 0.0, true);
    const double back = bounds::model_KH(n, k, h);
    const double dev = std::fabs(back - Hb) / std::max(1.0, std::fabs(Hb));
    push_row(rep, 0, "KH_roundtrip", h, back, Hb, dev, dev <= tol);
    const double kh = bounds::model_KH(n, k, h);
    if (kh >= 0.0) {
      const double lb = bounds::eigen_lower_bound(n, k, h);
      push_row(rep, 0, "eigen_lower_bound", h, lb, lb, 0.0, true);
    }
  }
  report::TrialSummary summary;
  for (const auto& row : rep.rows) {
    summary.max_margin = std::max(summary.max_margin, row.margin);
    if (!row.pass) summary.pass = false;
  }
  rep.trials.push_back(summary);
  rep.finalize();
  return rep;
}

report::VerificationReport run_riccati(const Scenario& sc, double tol,
                                       bool kahler) {
  const int n = static_cast<int>(std::llround(require(sc, "n")));
  const double k = require(sc, "k");
  const double h = require(sc, "h");
  jacobi::VerifyOptions opt;
  opt.trials = geti(sc, "trials", 100);
  opt.seed = static_cast<std::uint64_t>(get(sc, "seed", 1));
  opt.s_grid = geti(sc, "s_grid", 64);
  opt.step = get(sc, "step", 1e-3);
  opt.tol = tol;
  opt.roughness = get(sc, "roughness", 0.7);
  opt.trace_shape = get(sc, "trace", 0) != 0;
  opt.negative_control = (sc.expect == "expect-hypothesis-violation");
  auto rep = kahler ? jacobi::verify_kahler_comparison(n, k, h, opt)
                    : jacobi::verify_real_comparison(n, k, h, opt);
  rep.params.insert(sc.params.begin(), sc.params.end());
  return rep;
}

report::VerificationReport run_cusp(const Scenario& sc, double tol) {
  const int n = geti(sc, "n", 2);
  const double s_max = get(sc, "s_max", 50.0);
  const double step = get(sc, "step", 1e-3);
  // Equality-case check; tighter default than the comparison tolerance.
  const double eq_tol = sc.params.count("tol") ? tol : 1e-9;
  return jacobi::verify_cusp(n, s_max, step, eq_tol);
}

report::VerificationReport run_index_form(const Scenario& sc, double tol) {
  const int n = geti(sc, "n", 2);
  const double k = require(sc, "k");
  const double ell = require(sc, "ell");
  const double h = get(sc, "h", 2.0 * ell);
  const int trials = geti(sc, "trials", 50);
  const auto seed = static_cast<std::uint64_t>(get(sc, "seed", 1));
  const double roughness = get(sc, "roughness", 0.3);
  const int m = n - 1;
  if (m < 1) throw ConfigError("scenario '" + sc.id + "': needs n >= 2");
  const jacobi::CurvatureField field = jacobi::random_admissible_field(
      m, k, jacobi::Flavor::kReal, seed, ell, roughness);
  const jacobi::ShapeOperator S =
      jacobi::random_shape_real(m, k, h, seed + 1, roughness);
  auto rep = jacobi::verify_basic_inequality(field, S, ell, trials, seed, tol);
  rep.params.insert(sc.params.begin(), sc.params.end());
  return rep;
}

void rigidity_rows(report::VerificationReport& rep, int trial,
                   const models::WarpProfile& p, double k, double tol,
                   bool expect_model) {
  report::TrialSummary summary;
  summary.trial = trial;
  summary.model = expect_model;
  try {
    const models::RigidityReport diag = models::rigidity_diagnostic(p, k, tol);
    const double verdict = static_cast<double>(diag.verdict);
    push_row(rep, trial, "deficit", p.R, diag.deficit, 0.0, -diag.deficit,
             diag.deficit >= -tol);
    push_row(rep, trial, "classification", p.R, verdict, 1.0, verdict - 1.0,
             diag.verdict != models::RigidityVerdict::kInconsistent);
    const double cross = std::fabs(diag.h - diag.h_per_direction);
    push_row(rep, trial, "normalization_crosscheck", p.R, cross, 0.0, cross,
             cross <= 1e-9 + 10.0 * p.deriv_error);
    if (expect_model) {
      const double dev = std::max(diag.deficit, diag.metric_gap);
      push_row(rep, trial, "model_equality", p.R, dev, tol, dev - tol,
               dev <= tol);
    } else {
      push_row(rep, trial, "metric_gap", p.R, diag.metric_gap, 0.0, 0.0, true);
    }
    for (auto it = rep.rows.end() - 4; it != rep.rows.end(); ++it) {
      summary.max_margin = std::max(summary.max_margin, it->margin);
      if (!it->pass) summary.pass = false;
    }
  } catch (const HypothesisViolated&) {
    summary.hypothesis_ok = false;
    push_row(rep, trial, "hypothesis", p.R, -1.0, 0.0, 1.0, false);
  }
  rep.trials.push_back(summary);
}

report::VerificationReport run_rigidity(const Scenario& sc, double tol) {
  const int n = geti(sc, "n", 3);
  const double k = require(sc, "k");
  report::VerificationReport rep;
  rep.kind = "rigidity";
  rep.tolerance = tol;
  rep.params = sc.params;
  rep.seed = static_cast<std::uint64_t>(get(sc, "seed", 1));
  rep.note = "disk rigidity diagnostic: deficit of the sharp inradius bound "
             "against the warp gap to the constant-curvature model";

  if (sc.expect == "expect-hypothesis-violation") {
    // Inflated model disk: phi = sn(k, r) (1 + c r^2) keeps the disk initial
    // conditions but pushes the radial Ricci curvature below (n-1)k.
    const double R = get(sc, "R", 1.0);
    const double c = 0.05;
    auto p = models::analytic_profile(
        models::ProfileKind::kDisk, n, R,
        [k, c](double r) { return modelfn::sn(k, r) * (1.0 + c * r * r); },
        [k, c](double r) {
          return modelfn::cs(k, r) * (1.0 + c * r * r) +
                 modelfn::sn(k, r) * 2.0 * c * r;
        },
        [k, c](double r) {
          return -k * modelfn::sn(k, r) * (1.0 + c * r * r) +
                 4.0 * c * r * modelfn::cs(k, r) +
                 2.0 * c * modelfn::sn(k, r);
        });
    rigidity_rows(rep, 0, p, k, tol, false);
  } else if (!sc.profile.empty()) {
    const auto p = models::profile_from_csv(n, sc.profile);
    rigidity_rows(rep, 0, p, k, tol, false);
  } else if (sc.params.count("trials")) {
    const int trials = geti(sc, "trials", 100);
    const double R = require(sc, "R");
    const double amp = get(sc, "amp", 0.4);
    for (int t = 0; t < trials; ++t) {
      const auto p = models::random_admissible_disk(
          n, k, R, detail::mix_seed(rep.seed, t), amp);
      rigidity_rows(rep, t, p, k, tol, false);
    }
  } else {
    const double R = require(sc, "R");
    rigidity_rows(rep, 0, models::model_disk(n, k, R), k, tol, true);
  }
  rep.finalize();
  return rep;
}

report::VerificationReport run_eigen(const Scenario& sc, double tol) {
  const int n = geti(sc, "n", 1);
  const double k = require(sc, "k");
  const double h = require(sc, "h");
  const double R = get(sc, "R", h);
  const int grid = geti(sc, "grid", 2048);
  auto rep = eigen::verify_eigen_bound(n, k, h, {R}, grid);
  rep.tolerance = tol;
  rep.params.insert(sc.params.begin(), sc.params.end());
  return rep;
}

}  // namespace

// ---------------------------------------------------------------------------
// Config.

double default_tolerance() {
  const char* env = std::getenv("GEOMCMP_TOL");
  if (env == nullptr || *env == '\0') return 1e-8;
  char* end = nullptr;
  const double v = std::strtod(env, &end);
  if (end == env || *end != '\0' || !(v > 0.0) || !std::isfinite(v)) {
    throw ConfigError("GEOMCMP_TOL must be a positive number");
  }
  return v;
}

ScenarioConfig parse_config(const std::string& text,
                            const std::filesystem::path& base_dir) {
  ordered_json doc;
  try {
    doc = ordered_json::parse(text);
  } catch (const std::exception& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  if (!doc.is_object() || !doc.contains("scenarios") ||
      !doc["scenarios"].is_array()) {
    throw ConfigError("config must be an object with a 'scenarios' array");
  }
  ScenarioConfig cfg;
  std::set<std::string> ids;
  for (const auto& item : doc["scenarios"]) {
    if (!item.is_object()) {
      throw ConfigError("each scenario must be a JSON object");
    }
    Scenario sc;
    for (const auto& [key, val] : item.items()) {
      if (key == "id") {
        if (!val.is_string()) throw ConfigError("scenario id must be a string");
        sc.id = val.get<std::string>();
      } else if (key == "kind") {
        if (!val.is_string()) {
          throw ConfigError("scenario kind must be a string");
        }
        sc.kind = val.get<std::string>();
      } else if (key == "expect") {
        if (!val.is_string()) {
          throw ConfigError("scenario expect must be a string");
        }
        sc.expect = val.get<std::string>();
      } else if (key == "profile") {
        if (!val.is_string()) {
          throw ConfigError("scenario profile must be a string path");
        }
        std::filesystem::path p = val.get<std::string>();
        sc.profile = (p.is_absolute() ? p : base_dir / p).string();
      } else if (key == "params") {
        if (!val.is_object()) {
          throw ConfigError("scenario params must be an object");
        }
        for (const auto& [pk, pv] : val.items()) {
          if (!kParamNames.count(pk)) {
            throw ConfigError("unknown parameter '" + pk + "' in scenario '" +
                              sc.id + "'");
          }
          if (!pv.is_number()) {
            throw ConfigError("parameter '" + pk + "' must be numeric");
          }
          sc.params[pk] = pv.get<double>();
        }
      } else {
        throw ConfigError("unknown scenario key '" + key + "'");
      }
    }
    if (sc.id.empty()) throw ConfigError("every scenario needs an id");
    if (!kKinds.count(sc.kind)) {
      throw ConfigError("scenario '" + sc.id + "': unknown kind '" + sc.kind +
                        "'");
    }
    if (sc.expect != "pass" && sc.expect != "expect-hypothesis-violation") {
      throw ConfigError("scenario '" + sc.id + "': unknown expectation '" +
                        sc.expect + "'");
    }
    if (!ids.insert(sc.id).second) {
      throw ConfigError("duplicate scenario id '" + sc.id + "'");
    }
    cfg.scenarios.push_back(std::move(sc));
  }
  return cfg;
}

ScenarioConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file: " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str(), path.parent_path());
}

// ---------------------------------------------------------------------------
// Running.

ScenarioOutcome run_scenario(const Scenario& sc) {
  const double tol = get(sc, "tol", default_tolerance());
  ScenarioOutcome out;
  out.scenario = sc;
  const auto t0 = std::chrono::steady_clock::now();
  try {
    if (sc.kind == "bound") {
      out.rep = run_bound(sc, tol);
    } else if (sc.kind == "riccati-real") {
      out.rep = run_riccati(sc, tol, false);
    } else if (sc.kind == "riccati-kahler") {
      out.rep = run_riccati(sc, tol, true);
    } else if (sc.kind == "cusp") {
      out.rep = run_cusp(sc, tol);
    } else if (sc.kind == "index-form") {
      out.rep = run_index_form(sc, tol);
    } else if (sc.kind == "rigidity") {
      out.rep = run_rigidity(sc, tol);
    } else {
      out.rep = run_eigen(sc, tol);
    }
  } catch (const ConfigError&) {
    throw;
  } catch (const std::exception& e) {
    // Config invariant: parameters satisfy the target module's
    // preconditions. Anything escaping here breaks that promise.
    throw ConfigError("scenario '" + sc.id + "': " + e.what());
  }
  const auto t1 = std::chrono::steady_clock::now();
  out.runtime_ms =
      std::chrono::duration_cast<std::chrono::duration<double, std::milli>>(
          t1 - t0)
          .count();
  if (sc.expect == "expect-hypothesis-violation") {
    out.expectation_met = out.rep.hypothesis_violated && out.rep.pass;
  } else {
    out.expectation_met = out.rep.pass && !out.rep.hypothesis_violated;
  }
  return out;
}

// ---------------------------------------------------------------------------
// Serialization.

std::string report_json(const ScenarioOutcome& out) {
  const auto& rep = out.rep;
  ordered_json doc;
  doc["id"] = out.scenario.id;
  doc["kind"] = rep.kind;
  doc["version"] = kToolVersion;
  doc["seed"] = rep.seed;
  doc["tolerance"] = rep.tolerance;
  doc["expect"] = out.scenario.expect;
  doc["expectation_met"] = out.expectation_met;
  doc["params"] = ordered_json::object();
  for (const auto& [name, value] : rep.params) doc["params"][name] = value;
  if (!out.scenario.profile.empty()) {
    doc["profile"] = std::filesystem::path(out.scenario.profile)
                         .filename()
                         .string();
  }
  doc["note"] = rep.note;
  doc["summary"] = {{"pass", rep.pass},
                    {"max_margin", rep.max_margin},
                    {"failed_checks", rep.failed_checks},
                    {"hypothesis_violated", rep.hypothesis_violated},
                    {"trials", rep.trials.size()},
                    {"rows", rep.rows.size()}};
  doc["trials"] = ordered_json::array();
  for (const auto& t : rep.trials) {
    ordered_json jt;
    jt["trial"] = t.trial;
    jt["model"] = t.model;
    jt["hypothesis_ok"] = t.hypothesis_ok;
    if (t.focal_s) {
      jt["focal_s"] = *t.focal_s;
    } else {
      jt["focal_s"] = nullptr;
    }
    jt["max_margin"] = t.max_margin;
    jt["pass"] = t.pass;
    doc["trials"].push_back(std::move(jt));
  }
  doc["rows"] = ordered_json::array();
  for (const auto& r : rep.rows) {
    doc["rows"].push_back(ordered_json{{"trial", r.trial},
                                       {"check", r.check},
                                       {"x", json_num(r.x)},
                                       {"value", json_num(r.value)},
                                       {"bound", json_num(r.bound)},
                                       {"margin", json_num(r.margin)},
                                       {"pass", r.pass}});
  }
  return doc.dump(2) + "\n";
}

std::string report_csv(const report::VerificationReport& rep) {
  std::string csv = "trial,check,x,value,bound,margin,pass\n";
  for (const auto& r : rep.rows) {
    csv += std::to_string(r.trial);
    csv += ',';
    csv += r.check;
    csv += ',';
    csv += fmt_g(r.x);
    csv += ',';
    csv += fmt_g(r.value);
    csv += ',';
    csv += fmt_g(r.bound);
    csv += ',';
    csv += fmt_g(r.margin);
    csv += ',';
    csv += r.pass ? "true" : "false";
    csv += '\n';
  }
  return csv;
}

std::string meta_json(const ScenarioOutcome& out) {
  ordered_json doc;
  doc["id"] = out.scenario.id;
  doc["runtime_ms"] = out.runtime_ms;
  return doc.dump(2) + "\n";
}

void write_file_atomic(const std::filesystem::path& path,
                       const std::string& content) {
  const std::filesystem::path tmp = path.string() + ".tmp";
  {
    std::ofstream os(tmp, std::ios::binary | std::ios::trunc);
    if (!os) throw ConfigError("cannot write " + tmp.string());
    os.write(content.data(),
             static_cast<std::streamsize>(content.size()));
    if (!os) throw ConfigError("short write to " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

void write_outputs(const ScenarioOutcome& out,
                   const std::filesystem::path& out_dir) {
  std::filesystem::create_directories(out_dir);
  write_file_atomic(out_dir / (out.scenario.id + ".json"), report_json(out));
  write_file_atomic(out_dir / (out.scenario.id + ".csv"),
                    report_csv(out.rep));
  write_file_atomic(out_dir / (out.scenario.id + ".meta.json"),
                    meta_json(out));
}

std::vector<ScenarioOutcome> run_all(const ScenarioConfig& config,
                                     const std::filesystem::path& out_dir,
                                     int jobs) {
  const std::size_t n = config.scenarios.size();
  std::vector<ScenarioOutcome> outcomes(n);
  std::atomic<std::size_t> next{0};
  std::exception_ptr first_error;
  std::mutex error_mu;

  auto worker = [&]() {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= n) return;
      try {
        outcomes[i] = run_scenario(config.scenarios[i]);
        write_outputs(outcomes[i], out_dir);
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mu);
        if (!first_error) first_error = std::current_exception();
      }
    }
  };

  const int workers =
      std::max(1, std::min<int>(jobs, static_cast<int>(n ? n : 1)));
  if (workers == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (int i = 0; i < workers; ++i) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }
  if (first_error) std::rethrow_exception(first_error);
  return outcomes;
}

// ---------------------------------------------------------------------------
// Aggregation.

std::string aggregate_reports(const std::filesystem::path& dir) {
  struct Row {
    std::string id, kind, n, k, h, pass, max_margin, runtime;
  };
  std::vector<Row> rows;
  std::set<std::string> ids;

  std::vector<std::filesystem::path> files;
  if (std::filesystem::exists(dir)) {
    for (const auto& entry : std::filesystem::directory_iterator(dir)) {
      const auto name = entry.path().filename().string();
      if (entry.path().extension() == ".json" &&
          name.find(".meta.json") == std::string::npos) {
        files.push_back(entry.path());
      }
    }
  }
  std::sort(files.begin(), files.end());

  for (const auto& file : files) {
    std::ifstream in(file);
    if (!in) throw ConfigError("cannot read report " + file.string());
    ordered_json doc;
    try {
      in >> doc;
    } catch (const std::exception& e) {
      throw ConfigError("report " + file.string() + " is not valid JSON: " +
                        e.what());
    }
    Row row;
    row.id = doc.value("id", std::string{});
    if (row.id.empty()) {
      throw ConfigError("report " + file.string() + " carries no id");
    }
    if (!ids.insert(row.id).second) {
      throw ConfigError("duplicate scenario id '" + row.id +
                        "' in report directory");
    }
    row.kind = doc.value("kind", std::string{});
    if (doc.contains("params") && doc["params"].is_object()) {
      const auto& p = doc["params"];
      if (p.contains("n")) row.n = fmt_g(p["n"].get<double>());
      if (p.contains("k")) row.k = fmt_g(p["k"].get<double>());
      if (p.contains("h")) row.h = fmt_g(p["h"].get<double>());
    }
    row.pass = doc.value("expectation_met", false) ? "true" : "false";
    if (doc.contains("summary") && doc["summary"].contains("max_margin")) {
      row.max_margin = fmt_g(doc["summary"]["max_margin"].get<double>());
    }
    const auto meta_path =
        file.parent_path() / (row.id + ".meta.json");
    if (std::filesystem::exists(meta_path)) {
      std::ifstream min(meta_path);
      ordered_json meta;
      try {
        min >> meta;
        if (meta.contains("runtime_ms")) {
          row.runtime = fmt_g(meta["runtime_ms"].get<double>());
        }
      } catch (const std::exception&) {
        // Sidecar is advisory; a damaged one leaves the column empty.
      }
    }
    rows.push_back(std::move(row));
  }
  std::sort(rows.begin(), rows.end(),
            [](const Row& a, const Row& b) { return a.id < b.id; });

  std::string csv = "scenario_id,kind,n,k,h,pass,max_margin,runtime_ms\n";
  for (const auto& r : rows) {
    csv += r.id + ',' + r.kind + ',' + r.n + ',' + r.k + ',' + r.h + ',' +
           r.pass + ',' + r.max_margin + ',' + r.runtime + '\n';
  }
  return csv;
}

}  // namespace geomcmp::scenario
