// Copyright 2026 The measchain Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// measchain: run scenario queries, verify chains against the collapse
// oracle, and run the randomized property suite.
//
// Exit codes: 0 success, 1 usage/parse/validation error (or a failed
// verification), 2 runtime error, 3 property violation.

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "measchain/property_suite.hpp"
#include "measchain/scenario.hpp"
#include "report.hpp"

namespace {

using namespace measchain;
namespace cli = measchain::cli;

enum Exit : int { kOk = 0, kInputError = 1, kRuntimeError = 2, kPropertyViolation = 3 };

constexpr const char* kTolEnv = "MEASCHAIN_TOL";

/// Default tolerance: $MEASCHAIN_TOL if set, else the library default.
std::optional<double> default_tolerance() {
  const char* env = std::getenv(kTolEnv);
  if (!env || !*env) return kEquivalenceTol;
  char* end = nullptr;
  const double v = std::strtod(env, &end);
  if (*end != '\0' || !(v > 0.0) || !std::isfinite(v)) return std::nullopt;
  return v;
}

struct Loaded {
  dsl::Scenario scenario;
  dsl::CompiledScenario compiled;
};

/// Reads, parses, validates and compiles; prints diagnostics and returns nullopt on failure.
std::optional<Loaded> load(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    std::cerr << path << ": cannot read file\n";
    return std::nullopt;
  }
  std::stringstream ss;
  ss << in.rdbuf();
  try {
    auto sc = dsl::parse_scenario(ss.str());
    auto compiled = dsl::compile_scenario(sc);
    return Loaded{std::move(sc), std::move(compiled)};
  } catch (const dsl::ScenarioError& e) {
    for (const auto& d : e.diagnostics()) std::cerr << path << ": " << dsl::to_string(d) << "\n";
  } catch (const Error& e) {
    std::cerr << path << ": " << e.what() << "\n";
  }
  return std::nullopt;
}

std::string scenario_id(const std::string& path) { return std::filesystem::path(path).stem().string(); }

int cmd_run(const std::string& path, const std::string& format, double tol) {
  const auto loaded = load(path);
  if (!loaded) return kInputError;
  const auto start = std::chrono::steady_clock::now();
  dsl::ScenarioRun run;
  try {
    run = dsl::run_scenario(loaded->compiled, scenario_id(path), tol);
  } catch (const Error& e) {
    std::cerr << path << ": " << e.what() << "\n";
    return kRuntimeError;
  }
  const double ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
  if (format == "json") {
    std::cout << cli::run_json(path, run, tol, ms).dump(2) << "\n";
  } else if (format == "csv") {
    std::cout << cli::run_csv(run, tol);
  } else {
    std::cout << cli::run_text(path, run, tol);
  }
  for (const auto& r : run.results)
    if (r.error) std::cerr << path << ": " << r.text << ": " << *r.error << "\n";
  return run.all_ok() ? kOk : kRuntimeError;
}

int cmd_verify(const std::string& path, double tol) {
  const auto loaded = load(path);
  if (!loaded) return kInputError;
  const auto& cs = loaded->compiled;
  bool any = false;
  for (const auto& q : cs.queries) {
    if (q.kind == dsl::QueryKind::equivalence && cs.has_weak_device) {
      std::cerr << path << ": 'query equivalence' needs ideal devices; the collapse oracle has no counterpart "
                           "for a weak device\n";
      return kInputError;
    }
    any = any || q.kind == dsl::QueryKind::equivalence || q.kind == dsl::QueryKind::repeatability;
  }
  if (!any) {
    std::cerr << path << ": nothing to verify; add 'query equivalence' or 'query repeatability'\n";
    return kInputError;
  }

  dsl::CompiledScenario only = cs;
  std::erase_if(only.queries, [](const dsl::QueryDecl& q) {
    return q.kind != dsl::QueryKind::equivalence && q.kind != dsl::QueryKind::repeatability;
  });
  dsl::ScenarioRun run;
  try {
    run = dsl::run_scenario(only, scenario_id(path), tol);
  } catch (const Error& e) {
    std::cerr << path << ": " << e.what() << "\n";
    return kRuntimeError;
  }

  bool pass = true;
  bool errors = false;
  cli::Json reports = cli::Json::array();
  for (const auto& r : run.results) {
    reports.push_back(cli::to_json(r, tol));
    if (r.error) {
      errors = true;
      std::cerr << path << ": " << r.text << ": " << *r.error << "\n";
    } else if (const auto* eq = std::get_if<EquivalenceReport>(&r.value)) {
      pass = pass && eq->pass;
    }
  }
  cli::Json j = cli::header("verify");
  j["scenario"] = path;
  j["tolerance"] = tol;
  j["pass"] = pass && !errors;
  j["reports"] = reports;
  std::cout << j.dump(2) << "\n";
  if (errors) return kRuntimeError;
  return pass ? kOk : kInputError;
}

int cmd_prop(const dsl::PropertyConfig& cfg, const std::string& out_dir) {
  dsl::PropertySummary summary;
  try {
    summary = dsl::run_property_suite(cfg);
  } catch (const Error& e) {
    std::cerr << "prop: " << e.what() << "\n";
    return kRuntimeError;
  }
  std::vector<std::string> reproducers;
  for (const auto& f : summary.failures) {
    const auto file = std::filesystem::path(out_dir) / cli::reproducer_name(f, cfg.seed);
    reproducers.push_back(file.string());
    std::ofstream out(file);
    out << "# measchain prop --seed " << cfg.seed << " --max-dim " << cfg.max_dim << " --max-depth " << cfg.max_depth
        << ", trial " << f.trial << "\n# " << f.check << ": " << f.detail << "\n"
        << f.scenario;
    if (!out) std::cerr << "prop: cannot write " << file.string() << "\n";
    std::cerr << "prop: trial " << f.trial << " " << f.check << ": " << f.detail << " (reproducer " << file.string()
              << ")\n";
  }
  std::cout << cli::prop_json(summary, reproducers).dump(2) << "\n";
  return summary.failed == 0 ? kOk : kPropertyViolation;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Measurement-chain simulator: scenario queries, collapse verification and property checks"};
  app.require_subcommand(1);
  app.set_version_flag("--version", cli::kToolVersion);

  const auto env_tol = default_tolerance();
  if (!env_tol) {
    std::cerr << kTolEnv << " must be a positive number\n";
    return kInputError;
  }
  double tol = *env_tol;

  std::string path;
  std::string format = "json";
  auto* run = app.add_subcommand("run", "Evaluate the queries of a scenario file");
  run->add_option("path", path, "Scenario file")->required();
  run->add_option("--format", format, "Output format")->check(CLI::IsMember({"json", "csv", "text"}));
  run->add_option("--tol", tol, "Tolerance for verification queries (default $MEASCHAIN_TOL or 1e-10)")
      ->check(CLI::PositiveNumber);

  auto* verify = app.add_subcommand("verify", "Run the equivalence and repeatability queries of a scenario");
  verify->add_option("path", path, "Scenario file")->required();
  verify->add_option("--tol", tol, "Tolerance (default $MEASCHAIN_TOL or 1e-10)")->check(CLI::PositiveNumber);

  dsl::PropertyConfig cfg;
  std::string out_dir = ".";
  auto* prop = app.add_subcommand("prop", "Randomized property suite");
  prop->add_option("--seed", cfg.seed, "Seed")->default_val(0);
  prop->add_option("--trials", cfg.trials, "Number of trials")->default_val(100)->check(CLI::Range(1, 1000000));
  prop->add_option("--max-dim", cfg.max_dim, "Largest system dimension")->default_val(6)->check(CLI::Range(2, 12));
  prop->add_option("--max-depth", cfg.max_depth, "Largest number of system devices")
      ->default_val(3)
      ->check(CLI::Range(1, 8));
  prop->add_option("--tol", tol, "Tolerance (default $MEASCHAIN_TOL or 1e-10)")->check(CLI::PositiveNumber);
  prop->add_option("--out-dir", out_dir, "Directory for reproducer files")->check(CLI::ExistingDirectory);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kInputError;
  }

  if (*run) return cmd_run(path, format, tol);
  if (*verify) return cmd_verify(path, tol);
  cfg.tol = tol;
  return cmd_prop(cfg, out_dir);
}
