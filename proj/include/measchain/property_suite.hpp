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

/**
 * @file property_suite.hpp
 * Randomized invariant checks over generated scenarios.
 *
 * Each trial draws a scenario from its own seeded stream, round-trips it
 * through the text format, compiles it and checks: unitarity of every
 * measurement unitary, repeatability of repeated devices, collapse
 * equivalence with reader invariance, the reduced system state against the
 * sequential unknown-result mixture, and total probability for every device
 * that follows another system device.
 */
#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "measchain/born.hpp"
#include "measchain/chain.hpp"
#include "measchain/oracle.hpp"
#include "measchain/scenario.hpp"
#include "measchain/scenario_random.hpp"
#include "measchain/verifier.hpp"

namespace measchain::dsl {

struct PropertyConfig {
  std::uint64_t seed = 0;
  std::size_t trials = 100;
  std::size_t max_dim = 6;
  std::size_t max_depth = 3;
  double tol = kEquivalenceTol;
};

struct PropertyFailure {
  std::size_t trial = 0;
  std::string check;
  std::string detail;
  std::string scenario;  // canonical text reproducing the trial
};

struct PropertySummary {
  PropertyConfig config;
  std::size_t passed = 0;
  std::size_t failed = 0;
  std::map<std::string, std::size_t> checks;  // check name -> evaluations
  double max_deviation = 0.0;
  std::vector<PropertyFailure> failures;
};

inline RandomScenarioOptions property_options(const PropertyConfig& c) {
  RandomScenarioOptions o;
  o.max_dim = c.max_dim;
  o.max_depth = c.max_depth;
  o.allow_weak = false;
  o.probability_queries = false;
  return o;
}

/// The system state after `program` when no result is read: evolutions act by
/// conjugation, ideal devices by the Lüders mixture, readers not at all.
inline DensityState sequential_mixture(const ChainProgram& program) {
  DensityState w = to_density(program.initial);
  for (const auto& ev : program.events) {
    if (const auto* e = std::get_if<EvolveEvent>(&ev)) {
      w = DensityState::normalized(e->unitary * w.matrix() * e->unitary.adjoint());
    } else {
      const auto& a = std::get<AttachEvent>(ev);
      if (std::holds_alternative<attach::Ideal>(a.mode)) w = unknown_result_mixture(w, a.device.observable());
    }
  }
  return w;
}

namespace detail {

class TrialChecker {
 public:
  TrialChecker(PropertySummary& summary, std::size_t trial, const std::string& text)
      : summary_(summary), trial_(trial), text_(text) {}

  void record(const std::string& check, double deviation, const std::string& detail = {}) {
    ++summary_.checks[check];
    summary_.max_deviation = std::max(summary_.max_deviation, deviation);
    if (deviation <= summary_.config.tol) return;
    fail(check, (detail.empty() ? "" : detail + ": ") + "deviation " + format_real(deviation));
  }

  void fail(const std::string& check, const std::string& detail) {
    ++summary_.checks[check];
    failed_ = true;
    summary_.failures.push_back({trial_, check, detail, text_});
  }

  bool failed() const { return failed_; }

 private:
  PropertySummary& summary_;
  std::size_t trial_;
  const std::string& text_;
  bool failed_ = false;
};

inline void check_trial(const Scenario& sc, const std::string& text, TrialChecker& t, double tol) {
  if (!(parse_scenario(text) == sc)) t.fail("round-trip", "parse(format(s)) differs from s");
  const auto cs = compile_scenario(sc);

  for (const auto& ev : cs.program.events) {
    const auto* a = std::get_if<AttachEvent>(&ev);
    if (!a || !std::holds_alternative<attach::Ideal>(a->mode)) continue;
    const auto u = build_ideal_unitary(a->device.observable(), a->device);
    const auto gram = u.adjoint() * u;
    t.record("unitarity", max_deviation(gram, ComplexMatrix::identity(u.rows())), a->device.label());
  }

  const auto chain = run_program(cs.program);
  for (const auto& q : cs.queries) {
    if (q.kind != QueryKind::repeatability) continue;
    const auto rep = repeatability_matrix(chain, q.devices[0].text, q.devices[1].text);
    t.record("repeatability", rep.max_deviation, q.devices[0].text + "/" + q.devices[1].text);
  }

  const auto eq = collapse_equivalence_report(cs.program, {}, tol);
  t.record("equivalence", eq.max_deviation);
  if (eq.reader_max_deviation) t.record("reader-invariance", *eq.reader_max_deviation);

  t.record("partial-trace", max_deviation(reduced_system_state(chain).matrix(), sequential_mixture(cs.program).matrix()));

  std::size_t seen = 0;
  for (const auto& dev : chain.devices()) {
    if (dev.target != kSystemLabel) continue;
    if (seen++ == 0) continue;
    t.record("total-probability", total_probability(chain, dev.spec.label()).max_deviation, dev.spec.label());
  }
}

}  // namespace detail

/// Runs the suite. Trials are independent; results are ordered by trial index.
inline PropertySummary run_property_suite(const PropertyConfig& config) {
  if (config.trials < 1) throw Error("trials must be at least 1");
  if (config.max_dim < 2) throw Error("max-dim must be at least 2");
  if (config.max_depth < 1) throw Error("max-depth must be at least 1");
  PropertySummary summary;
  summary.config = config;
  const auto options = property_options(config);
  for (std::size_t i = 0; i < config.trials; ++i) {
    auto rng = random::trial_engine(config.seed, i);
    const Scenario sc = random_scenario(rng, options);
    const std::string text = format_scenario(sc);
    detail::TrialChecker t(summary, i, text);
    try {
      detail::check_trial(sc, text, t, config.tol);
    } catch (const Error& e) {
      t.fail("exception", e.what());
    }
    ++(t.failed() ? summary.failed : summary.passed);
  }
  return summary;
}

}  // namespace measchain::dsl
