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

// Acceptance suite: one line per criterion, exit status 0 iff all pass.
//
// Reference values are computed here from eigenbases, projectors and
// matrix products directly; the chain side goes through the library's
// compound-state machinery.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include "measchain/born.hpp"
#include "measchain/chain.hpp"
#include "measchain/dsl.hpp"
#include "measchain/random.hpp"
#include "measchain/scenario.hpp"
#include "measchain/scenario_random.hpp"
#include "measchain/verifier.hpp"

using namespace measchain;

namespace {

struct Verdict {
  bool pass = true;
  double max_deviation = 0.0;
  std::size_t trials = 0;
  std::string note;

  void observe(double deviation, double tol) {
    max_deviation = std::max(max_deviation, deviation);
    if (!(deviation <= tol)) pass = false;
  }
};

// Every measurement unitary constructed by the suite, checked under criterion 10.
struct UnitaryLedger {
  std::size_t count = 0;
  std::size_t failures = 0;
  double max_deviation = 0.0;

  void check(const ComplexMatrix& u) {
    ++count;
    const auto gram = u.adjoint() * u;
    max_deviation = std::max(max_deviation, measchain::max_deviation(gram, ComplexMatrix::identity(u.rows())));
    if (!is_unitary(u, 1e-10)) ++failures;
  }

  void check_program(const ChainProgram& p) {
    const ChainState chain = run_program(p);
    for (const auto& ev : p.events) {
      const auto* a = std::get_if<AttachEvent>(&ev);
      if (!a) continue;
      if (const auto* w = std::get_if<attach::Weak>(&a->mode))
        check(build_weak_unitary(a->device.observable(), a->device, w->disturbance));
      else if (std::holds_alternative<attach::Ideal>(a->mode))
        check(build_ideal_unitary(a->device.observable(), a->device));
      else
        check(build_ideal_unitary(pointer_observable(chain.device(std::get<attach::Reader>(a->mode).target).spec),
                                  a->device));
    }
  }
};

UnitaryLedger g_unitaries;

AttachEvent ideal(const std::string& label, const Observable& obs) { return {DeviceSpec(label, obs), attach::Ideal{}}; }

ChainState run(const ChainProgram& p) {
  g_unitaries.check_program(p);
  return run_program(p);
}

// exp(-iHt) by scaling and squaring of a Taylor series, independent of the eigensolver.
ComplexMatrix taylor_exp(const ComplexMatrix& h, double t) {
  const std::size_t n = h.rows();
  ComplexMatrix a = h * Complex(0, -t);
  int squarings = 0;
  while (a.max_abs() * static_cast<double>(n) > 0.5) {
    a *= 0.5;
    ++squarings;
  }
  ComplexMatrix term = ComplexMatrix::identity(n);
  ComplexMatrix sum = term;
  for (int k = 1; k < 30; ++k) {
    term = term * a * Complex(1.0 / k);
    sum += term;
  }
  for (int s = 0; s < squarings; ++s) sum = sum * sum;
  return sum;
}

double overlap2(std::span<const Complex> a, std::span<const Complex> b) { return std::norm(inner(a, b)); }

// ⟨v|ρ|v⟩ for a density matrix.
double expectation(const ComplexMatrix& rho, std::span<const Complex> v) {
  return inner(v, rho.apply(v)).real();
}

// Criteria ------------------------------------------------------------------

Verdict repeatability() {
  Verdict o;
  for (std::uint64_t i = 0; i < 100; ++i, ++o.trials) {
    auto rng = random::trial_engine(1001, i);
    const std::size_t dim = random::uniform_index(rng, 2, 6);
    const auto psi = random::random_state(rng, dim);
    const auto a = random::random_observable(rng, dim, "A");
    const auto chain = run({psi, {ideal("M", a), ideal("M2", a)}});
    for (std::size_t j = 1; j <= dim; ++j) {
      if (joint_probability(chain, {{"M", j}}) <= kZeroProbability) continue;
      for (std::size_t k = 1; k <= dim; ++k)
        o.observe(std::abs(conditional_probability(chain, {"M2", k}, {{"M", j}}) - (j == k ? 1.0 : 0.0)), 1e-10);
    }
  }
  return o;
}

Verdict chain_depth() {
  Verdict o;
  for (std::uint64_t i = 0; i < 20; ++i, ++o.trials) {
    auto rng = random::trial_engine(1002, i);
    const std::size_t dim = random::uniform_index(rng, 2, 6);
    const auto a = random::random_observable(rng, dim, "A");
    const auto chain = run({random::random_state(rng, dim),
                            {ideal("M1", a), ideal("M2", a), ideal("M3", a), ideal("M4", a)}});
    double equal = 0.0;
    for (std::size_t j = 1; j <= dim; ++j) equal += joint_probability(chain, {{"M1", j}, {"M2", j}, {"M3", j}, {"M4", j}});
    o.observe(std::abs(equal - 1.0), 1e-10);
  }
  return o;
}

Verdict collapse_equivalence() {
  Verdict o;
  for (std::uint64_t i = 0; i < 100; ++i, ++o.trials) {
    auto rng = random::trial_engine(1003, i);
    const std::size_t dim = random::uniform_index(rng, 2, 6);
    const auto psi = random::random_state(rng, dim);
    const auto a = random::random_observable(rng, dim, "A");
    const auto b = random::random_observable(rng, dim, "B");
    const auto chain = run({psi, {ideal("M", a), ideal("N", b)}});
    const auto& alpha = *a.eigenbasis();
    const auto& beta = *b.eigenbasis();
    for (std::size_t j = 1; j <= dim; ++j) {
      if (joint_probability(chain, {{"M", j}}) <= kZeroProbability) continue;
      for (std::size_t k = 1; k <= dim; ++k)
        o.observe(std::abs(conditional_probability(chain, {"N", k}, {{"M", j}}) -
                           overlap2(beta[k - 1].amplitudes(), alpha[j - 1].amplitudes())),
                  1e-10);
    }
  }
  return o;
}

Verdict dynamic_equivalence() {
  Verdict o;
  for (std::uint64_t i = 0; i < 50; ++i, ++o.trials) {
    auto rng = random::trial_engine(1004, i);
    const std::size_t dim = random::uniform_index(rng, 2, 6);
    const auto psi = random::random_state(rng, dim);
    const auto a = random::random_observable(rng, dim, "A");
    const auto b = random::random_observable(rng, dim, "B");
    const auto h = random::random_hermitian(rng, dim);
    const double t = random::uniform_real(rng, 0.0, 2 * std::numbers::pi);
    const auto chain = run({psi, {ideal("M", a), EvolveEvent{hermitian_evolution(h, t)}, ideal("N", b)}});
    const auto u = taylor_exp(h, t);
    const auto& alpha = *a.eigenbasis();
    const auto& beta = *b.eigenbasis();
    for (std::size_t j = 1; j <= dim; ++j) {
      if (joint_probability(chain, {{"M", j}}) <= kZeroProbability) continue;
      const auto evolved = u.apply(alpha[j - 1].amplitudes());
      for (std::size_t k = 1; k <= dim; ++k)
        o.observe(std::abs(conditional_probability(chain, {"N", k}, {{"M", j}}) -
                           overlap2(beta[k - 1].amplitudes(), evolved)),
                  1e-9);
    }
  }
  return o;
}

Verdict partial_trace_identity() {
  Verdict o;
  std::size_t mixed = 0, degenerate = 0;
  for (std::uint64_t i = 0; i < 100; ++i, ++o.trials) {
    auto rng = random::trial_engine(1005, i);
    const std::size_t dim = random::uniform_index(rng, 2, 6);
    const bool use_mixed = i % 3 == 1;
    const bool use_degenerate = i % 3 == 2 || i % 5 == 0;
    const SystemState initial = use_mixed ? SystemState(random::random_density(rng, dim, random::uniform_index(rng, 1, dim)))
                                          : SystemState(random::random_state(rng, dim));
    const auto obs = use_degenerate ? random::random_degenerate_observable(rng, dim, random::uniform_index(rng, 1, dim), "D")
                                    : random::random_observable(rng, dim, "A");
    mixed += use_mixed;
    degenerate += use_degenerate;
    const auto chain = run({initial, {ideal("M", obs)}});
    // Σ_j P_j ρ P_j, with ρ assembled from the initial state directly.
    const ComplexMatrix rho = use_mixed ? std::get<DensityState>(initial).matrix()
                                        : std::get<StateVector>(initial).projector();
    ComplexMatrix expected(dim, dim);
    for (std::size_t j = 1; j <= obs.outcome_count(); ++j) expected += obs.projector(j) * rho * obs.projector(j);
    o.observe(max_deviation(reduced_system_state(chain).matrix(), expected), 1e-10);
  }
  o.note = std::to_string(mixed) + " mixed, " + std::to_string(degenerate) + " degenerate";
  return o;
}

Verdict total_probability_identity() {
  Verdict o;
  for (std::uint64_t i = 0; i < 50; ++i, ++o.trials) {
    auto rng = random::trial_engine(1006, i);
    const std::size_t dim = random::uniform_index(rng, 2, 6);
    const auto psi = random::random_state(rng, dim);
    const auto a = random::random_observable(rng, dim, "A");
    const auto b = random::random_observable(rng, dim, "B");
    const auto chain = run({psi, {ideal("M", a), ideal("N", b)}});
    const auto& alpha = *a.eigenbasis();
    const auto& beta = *b.eigenbasis();
    const ComplexMatrix rho = psi.projector();
    ComplexMatrix w(dim, dim);
    for (std::size_t j = 1; j <= dim; ++j) w += a.projector(j) * rho * a.projector(j);
    const auto lib = total_probability(chain, "N", "M");
    o.observe(lib.max_deviation, 1e-10);
    for (std::size_t k = 1; k <= dim; ++k) {
      const double marginal = joint_probability(chain, {{"N", k}});
      double via_conditionals = 0.0;
      for (std::size_t j = 1; j <= dim; ++j)
        via_conditionals += overlap2(beta[k - 1].amplitudes(), alpha[j - 1].amplitudes()) *
                            overlap2(alpha[j - 1].amplitudes(), psi.amplitudes());
      const double via_mixture = expectation(w, beta[k - 1].amplitudes());
      o.observe(std::abs(marginal - via_conditionals), 1e-10);
      o.observe(std::abs(marginal - via_mixture), 1e-10);
    }
  }
  return o;
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Verdict weak_counterexample() {
  Verdict o;
  const std::filesystem::path dir(MEASCHAIN_SCENARIO_DIR);
  const auto weak = dsl::compile_scenario(dsl::parse_scenario(slurp(dir / "weak_z.scenario")));
  const auto ideal_sc = dsl::compile_scenario(dsl::parse_scenario(slurp(dir / "ideal_z.scenario")));
  const auto wc = run(weak.program);
  const auto ic = run(ideal_sc.program);
  const auto rep = repeatability_matrix(wc, "M", "M2");
  const double expected[2][2] = {{1, 0}, {1, 0}};
  for (std::size_t j = 0; j < 2; ++j) {
    if (!rep.rows[j]) {
      o.pass = false;
      continue;
    }
    for (std::size_t k = 0; k < 2; ++k) o.observe(std::abs((*rep.rows[j])[k] - expected[j][k]), 1e-12);
  }
  for (std::size_t k = 1; k <= 2; ++k)
    o.observe(std::abs(joint_probability(wc, {{"M", k}}) - joint_probability(ic, {{"M", k}})), 1e-12);
  o.trials = 1;
  o.note = "rows (" + dsl::format_real((*rep.rows[0])[0]) + "," + dsl::format_real((*rep.rows[0])[1]) + "),(" +
           dsl::format_real((*rep.rows[1])[0]) + "," + dsl::format_real((*rep.rows[1])[1]) + ")";
  return o;
}

Verdict reader_invariance() {
  Verdict o;
  for (std::uint64_t i = 0; i < 30; ++i, ++o.trials) {
    auto rng = random::trial_engine(1008, i);
    const std::size_t dim = random::uniform_index(rng, 2, 5);
    const auto psi = random::random_state(rng, dim);
    const auto a = random::random_observable(rng, dim, "A");
    const auto b = random::random_degenerate_observable(rng, dim, random::uniform_index(rng, 1, dim), "B");
    const auto u = random::random_unitary(rng, dim);
    const DeviceSpec m("M", a);
    const ChainProgram plain{psi, {ideal("M", a), EvolveEvent{u}, ideal("N", b)}};
    ChainProgram read = plain;
    read.events.insert(read.events.begin() + 1, AttachEvent{make_reader("R", m), attach::Reader{"M"}});
    if (i % 2) read.events.push_back(AttachEvent{make_reader("R2", DeviceSpec("N", b)), attach::Reader{"N"}});
    const auto c0 = run(plain);
    const auto c1 = run(read);
    for (std::size_t j = 1; j <= a.outcome_count(); ++j) {
      const double p0 = joint_probability(c0, {{"M", j}});
      o.observe(std::abs(p0 - joint_probability(c1, {{"M", j}})), 1e-12);
      if (p0 <= kZeroProbability) continue;
      for (std::size_t k = 1; k <= b.outcome_count(); ++k)
        o.observe(std::abs(conditional_probability(c0, {"N", k}, {{"M", j}}) -
                           conditional_probability(c1, {"N", k}, {{"M", j}})),
                  1e-12);
    }
  }
  return o;
}

Verdict dsl_round_trip() {
  Verdict o;
  std::size_t corpus = 0;
  for (const auto& e : std::filesystem::directory_iterator(MEASCHAIN_SCENARIO_DIR)) {
    if (e.path().extension() != ".scenario") continue;
    ++corpus;
    const auto s = dsl::parse_scenario(slurp(e.path()));
    if (!dsl::validate_scenario(s).empty() || !(dsl::parse_scenario(dsl::format_scenario(s)) == s)) o.pass = false;
  }
  for (std::uint64_t i = 0; i < 100; ++i) {
    auto rng = random::trial_engine(1009, i);
    const auto s = dsl::random_scenario(rng, dsl::RandomScenarioOptions{});
    if (!dsl::validate_scenario(s).empty() || !(dsl::parse_scenario(dsl::format_scenario(s)) == s)) o.pass = false;
    // Weak devices in the generated scenarios feed the unitarity ledger too.
    g_unitaries.check_program(dsl::compile_scenario(s).program);
  }
  if (corpus < 10) o.pass = false;
  o.trials = corpus + 100;
  o.note = std::to_string(corpus) + " corpus + 100 random";
  return o;
}

Verdict unitarity() {
  // Extra weak devices with random disturbances on top of everything built above.
  for (std::uint64_t i = 0; i < 50; ++i) {
    auto rng = random::trial_engine(1010, i);
    const std::size_t dim = random::uniform_index(rng, 2, 6);
    const auto obs = random::uniform_index(rng, 0, 1) ? random::random_observable(rng, dim, "A")
                                                      : random::random_degenerate_observable(rng, dim, 2, "D");
    std::vector<ComplexMatrix> rs;
    for (std::size_t k = 0; k < obs.outcome_count(); ++k) rs.push_back(random::random_unitary(rng, dim));
    const DeviceSpec dev("W", obs);
    g_unitaries.check(build_weak_unitary(obs, dev, Disturbance(rs)));
    g_unitaries.check(build_ideal_unitary(obs, dev));
  }
  Verdict o;
  o.trials = g_unitaries.count;
  o.max_deviation = g_unitaries.max_deviation;
  o.pass = g_unitaries.failures == 0;
  return o;
}

}  // namespace

int main() {
  struct Criterion {
    int id;
    const char* name;
    double tol;
    std::function<Verdict()> run;
    double time_limit_s = 0.0;
  };
  const std::vector<Criterion> criteria{
      {1, "repeatability", 1e-10, repeatability, 30.0},
      {2, "chain-depth repeatability", 1e-10, chain_depth},
      {3, "collapse equivalence", 1e-10, collapse_equivalence},
      {4, "dynamic equivalence", 1e-9, dynamic_equivalence},
      {5, "partial-trace identity", 1e-10, partial_trace_identity},
      {6, "total probability", 1e-10, total_probability_identity},
      {7, "weak-condition counterexample", 1e-12, weak_counterexample},
      {8, "reader invariance", 1e-12, reader_invariance},
      {9, "DSL round-trip", 0.0, dsl_round_trip},
      {10, "unitarity", 1e-10, unitarity},
  };
  int failed = 0;
  for (const auto& c : criteria) {
    const auto start = std::chrono::steady_clock::now();
    Verdict o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o.pass = false;
      o.note = std::string("exception: ") + e.what();
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (c.time_limit_s > 0 && secs > c.time_limit_s) {
      o.pass = false;
      o.note += (o.note.empty() ? "" : "; ") + std::string("time limit exceeded");
    }
    std::printf("[%s] %2d %-30s trials=%-5zu max_dev=%.3e tol=%.0e time=%.2fs%s%s\n", o.pass ? "PASS" : "FAIL", c.id,
                c.name, o.trials, o.max_deviation, c.tol, secs, o.note.empty() ? "" : "  ", o.note.c_str());
    failed += !o.pass;
  }
  std::printf("%s: %d of %zu criteria passed\n", failed ? "FAILED" : "OK", static_cast<int>(criteria.size()) - failed,
              criteria.size());
  return failed ? 1 : 0;
}
