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
 * @file scenario.hpp
 * Validation of parsed scenarios, compilation to chain programs and query
 * evaluation.
 *
 * Numeric input is accepted within kInputTol of the required structure
 * (normalized states, orthonormal bases, unitary matrices, Hermitian
 * generators) and repaired before the library objects are built.
 */
#pragma once

#include <cstdio>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <variant>
#include <vector>

#include "measchain/born.hpp"
#include "measchain/chain.hpp"
#include "measchain/dsl.hpp"
#include "measchain/linalg.hpp"
#include "measchain/model.hpp"
#include "measchain/verifier.hpp"

namespace measchain::dsl {

inline constexpr double kInputTol = 1e-6;

/// Upper bound on amplitudes (pure) or matrix entries (mixed) of the compound state.
inline constexpr std::size_t kMaxStateEntries = std::size_t{1} << 22;

struct Diagnostic {
  SourcePos pos;
  std::string message;
};

inline std::string to_string(const Diagnostic& d) { return to_string(d.pos) + ": " + d.message; }

/// Thrown by compile_scenario when validation fails.
class ScenarioError : public Error {
 public:
  explicit ScenarioError(std::vector<Diagnostic> diags) : Error(compose(diags)), diags_(std::move(diags)) {}
  const std::vector<Diagnostic>& diagnostics() const { return diags_; }

 private:
  static std::string compose(const std::vector<Diagnostic>& diags) {
    std::string s;
    for (const auto& d : diags) s += (s.empty() ? "" : "\n") + to_string(d);
    return s;
  }
  std::vector<Diagnostic> diags_;
};

namespace detail {

inline std::string sci(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3g", v);
  return buf;
}

inline bool is_square(const CMat& m, std::size_t dim) {
  if (m.size() != dim) return false;
  for (const auto& row : m)
    if (row.size() != dim) return false;
  return true;
}

inline ComplexMatrix to_matrix(const CMat& m) { return ComplexMatrix::from_rows(m); }

inline ComplexMatrix symmetrized(const ComplexMatrix& m) { return 0.5 * (m + m.adjoint()); }

/// max |⟨r_i|r_j⟩ - δ_ij| over the rows.
inline double gram_residual(const CMat& rows) {
  double r = 0.0;
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (std::size_t j = 0; j <= i; ++j) r = std::max(r, std::abs(inner(rows[j], rows[i]) - (i == j ? 1.0 : 0.0)));
  return r;
}

/// Nearest-by-Gram-Schmidt unitary, orthonormalizing the columns in order.
inline ComplexMatrix repaired_unitary(const ComplexMatrix& m) {
  std::vector<std::vector<Complex>> cols(m.cols(), std::vector<Complex>(m.rows()));
  for (std::size_t c = 0; c < m.cols(); ++c)
    for (std::size_t r = 0; r < m.rows(); ++r) cols[c][r] = m(r, c);
  cols = orthonormalize(std::move(cols));
  ComplexMatrix u(m.rows(), m.cols());
  for (std::size_t c = 0; c < m.cols(); ++c)
    for (std::size_t r = 0; r < m.rows(); ++r) u(r, c) = cols[c][r];
  return u;
}

struct SymbolInfo {
  enum class Kind { observable, hamiltonian, device } kind;
  std::size_t outcomes = 0;   // observables and devices
  bool on_system = false;     // devices attached to S
  std::size_t order = 0;      // attachment order for devices
};

class Validator {
 public:
  std::vector<Diagnostic> run(const Scenario& s) {
    for (const auto& st : s.statements) std::visit([&](const auto& b) { check(st.pos, b); }, st.body);
    if (!dim_) report({1, 1}, "missing 'system dim' statement");
    if (!has_state_) report({1, 1}, "missing 'state' statement");
    return std::move(diags_);
  }

 private:
  void report(SourcePos pos, std::string msg) { diags_.push_back({pos, std::move(msg)}); }

  bool need_dim(SourcePos pos) {
    if (dim_) return true;
    if (!dim_missing_reported_) report(pos, "'system dim' must come before this statement");
    dim_missing_reported_ = true;
    return false;
  }

  bool square(const CMat& m, SourcePos pos, const std::string& what) {
    if (is_square(m, *dim_)) return true;
    report(pos, what + " must be " + std::to_string(*dim_) + "x" + std::to_string(*dim_));
    return false;
  }

  void check_unitary(const CMat& m, SourcePos pos, const std::string& what) {
    if (!square(m, pos, what)) return;
    if (!is_unitary(to_matrix(m), kInputTol)) report(pos, what + " is not unitary");
  }

  const SymbolInfo* lookup(const Name& n, SymbolInfo::Kind kind, const char* what) {
    const auto it = symbols_.find(n.text);
    if (it == symbols_.end()) {
      report(n.pos, std::string("undefined ") + what + " '" + n.text + "'");
      return nullptr;
    }
    if (it->second.kind != kind) {
      report(n.pos, "'" + n.text + "' is not " + (what[0] == 'o' ? "an " : "a ") + what);
      return nullptr;
    }
    return &it->second;
  }

  void define(const Name& n, SymbolInfo info) {
    if (n.text == kSystemLabel) report(n.pos, "name '" + n.text + "' is reserved for the system");
    // The parser rejects duplicates; keep the first definition if an AST was built by hand.
    if (!symbols_.emplace(n.text, info).second) report(n.pos, "duplicate name '" + n.text + "'");
  }

  void before_event(SourcePos pos) {
    if (!has_state_) report(pos, "'state' must come before devices and evolutions");
  }

  void grow(SourcePos pos, std::size_t pointer_dim) {
    if (!dim_ || chain_dim_ == 0) return;
    const double next = static_cast<double>(chain_dim_) * static_cast<double>(pointer_dim);
    const double entries = mixed_ ? next * next : next;
    if (entries > static_cast<double>(kMaxStateEntries)) {
      report(pos, "compound state would need " + sci(entries) + " entries (limit " + sci(kMaxStateEntries) + ")");
      chain_dim_ = 0;
      return;
    }
    chain_dim_ *= pointer_dim;
  }

  void check(SourcePos pos, const SystemDecl& d) {
    if (dim_) {
      report(pos, "duplicate 'system dim' statement");
      return;
    }
    if (d.dim < 1) {
      report(pos, "system dimension must be at least 1");
      dim_missing_reported_ = true;
      return;
    }
    dim_ = d.dim;
    chain_dim_ = d.dim;
  }

  void check(SourcePos pos, const PureStateDecl& d) {
    if (has_state_) report(pos, "duplicate 'state' statement");
    has_state_ = true;
    if (!need_dim(pos)) return;
    if (d.amplitudes.size() != *dim_) {
      report(pos, "state has " + std::to_string(d.amplitudes.size()) + " amplitudes, expected " +
                      std::to_string(*dim_));
      return;
    }
    double n2 = 0.0;
    for (const auto& z : d.amplitudes) n2 += std::norm(z);
    if (n2 < 1e-24) report(pos, "state is not normalizable (zero vector)");
  }

  void check(SourcePos pos, const MixedStateDecl& d) {
    if (has_state_) report(pos, "duplicate 'state' statement");
    has_state_ = true;
    mixed_ = true;
    if (!need_dim(pos) || !square(d.matrix, pos, "density matrix")) return;
    const auto m = to_matrix(d.matrix);
    if (!is_hermitian(m, kInputTol)) {
      report(pos, "density matrix is not Hermitian");
      return;
    }
    const double tr = m.trace().real();
    if (tr <= 1e-12) {
      report(pos, "density matrix is not normalizable (trace " + sci(tr) + ")");
      return;
    }
    const auto eig = eigen_hermitian(symmetrized(m));
    if (eig.values.front() < -kInputTol * tr)
      report(pos, "density matrix is not positive semidefinite (eigenvalue " + sci(eig.values.front() / tr) + ")");
    if (static_cast<double>(*dim_) * static_cast<double>(*dim_) > static_cast<double>(kMaxStateEntries))
      report(pos, "density matrix too large");
  }

  void check_eigenvalues(SourcePos pos, const RVec& values) {
    for (std::size_t i = 0; i < values.size(); ++i)
      for (std::size_t j = 0; j < i; ++j)
        if (std::abs(values[i] - values[j]) <= kEigenvalueSeparation) {
          report(pos, "eigenvalues not distinct (" + format_real(values[j]) + " repeated)");
          return;
        }
  }

  void check(SourcePos pos, const ObservableDecl& o) {
    define(o.name, {SymbolInfo::Kind::observable, o.eigenvalues.size(), false, 0});
    if (!need_dim(pos)) return;
    const std::size_t before = diags_.size();
    check_eigenvalues(pos, o.eigenvalues);
    if (o.basis) {
      if (o.eigenvalues.size() != *dim_)
        report(pos, "observable '" + o.name.text + "' needs " + std::to_string(*dim_) + " eigenvalues, got " +
                        std::to_string(o.eigenvalues.size()));
      if (!square(*o.basis, pos, "eigenbasis of '" + o.name.text + "'")) return;
      const double residual = gram_residual(*o.basis);
      if (residual > kInputTol)
        report(pos, "non-orthonormal eigenbasis for '" + o.name.text + "' (residual " + sci(residual) + ")");
      return;
    }
    if (o.projectors.size() != o.eigenvalues.size()) {
      report(pos, "observable '" + o.name.text + "' has " + std::to_string(o.eigenvalues.size()) +
                      " eigenvalues but " + std::to_string(o.projectors.size()) + " projectors");
      return;
    }
    std::vector<ComplexMatrix> ps;
    for (const auto& p : o.projectors) {
      if (!square(p, pos, "projector of '" + o.name.text + "'")) return;
      ps.push_back(to_matrix(p));
    }
    if (diags_.size() != before) return;
    try {
      make_degenerate_observable(o.name.text, kSystemLabel, o.eigenvalues, ps);
    } catch (const Error& e) {
      report(pos, "observable '" + o.name.text + "': " + e.what());
    }
  }

  void check(SourcePos pos, const HamiltonianDecl& h) {
    define(h.name, {SymbolInfo::Kind::hamiltonian, 0, false, 0});
    if (!need_dim(pos) || !square(h.matrix, pos, "hamiltonian '" + h.name.text + "'")) return;
    if (!is_hermitian(to_matrix(h.matrix), kInputTol)) report(pos, "hamiltonian '" + h.name.text + "' is not Hermitian");
  }

  void check(SourcePos pos, const MeasureDecl& m) {
    before_event(pos);
    const SymbolInfo* obs = lookup(m.observable, SymbolInfo::Kind::observable, "observable");
    const std::size_t n = obs ? obs->outcomes : 0;
    define(m.name, {SymbolInfo::Kind::device, n, true, device_count_++});
    grow(pos, n + 1);
    if (m.weak.empty() || !obs || !need_dim(pos)) return;
    if (m.weak.size() != n) {
      report(pos, "weak device '" + m.name.text + "' needs " + std::to_string(n) + " disturbance matrices, got " +
                      std::to_string(m.weak.size()));
      return;
    }
    for (std::size_t k = 0; k < n; ++k)
      check_unitary(m.weak[k], pos, "disturbance " + std::to_string(k + 1) + " of '" + m.name.text + "'");
  }

  void check(SourcePos pos, const ReadDecl& r) {
    before_event(pos);
    const SymbolInfo* target = lookup(r.target, SymbolInfo::Kind::device, "device");
    const std::size_t n = target ? target->outcomes + 1 : 0;
    define(r.name, {SymbolInfo::Kind::device, n, false, device_count_++});
    grow(pos, n + 1);
  }

  void check(SourcePos pos, const EvolveHamiltonian& e) {
    before_event(pos);
    lookup(e.hamiltonian, SymbolInfo::Kind::hamiltonian, "hamiltonian");
  }

  void check(SourcePos pos, const EvolveUnitary& e) {
    before_event(pos);
    if (need_dim(pos)) check_unitary(e.matrix, pos, "evolution");
  }

  const SymbolInfo* event(const Event& ev) {
    const SymbolInfo* d = lookup(ev.device, SymbolInfo::Kind::device, "device");
    if (d && (ev.outcome < 1 || ev.outcome > d->outcomes))
      report(ev.pos, "outcome " + std::to_string(ev.outcome) + " of '" + ev.device.text + "' is out of range 1.." +
                         std::to_string(d->outcomes));
    return d;
  }

  void distinct(const std::vector<Event>& evs) {
    std::set<std::string> seen;
    for (const auto& ev : evs)
      if (!seen.insert(ev.device.text).second) report(ev.pos, "device '" + ev.device.text + "' appears twice");
  }

  void check(SourcePos, const QueryDecl& q) {
    switch (q.kind) {
      case QueryKind::marginal:
        lookup(q.devices.at(0), SymbolInfo::Kind::device, "device");
        break;
      case QueryKind::joint:
        for (const auto& ev : q.events) event(ev);
        distinct(q.events);
        break;
      case QueryKind::conditional: {
        std::vector<Event> all = q.events;
        all.insert(all.end(), q.given.begin(), q.given.end());
        for (const auto& ev : all) event(ev);
        distinct(all);
        break;
      }
      case QueryKind::repeatability: {
        const auto* a = lookup(q.devices.at(0), SymbolInfo::Kind::device, "device");
        const auto* b = lookup(q.devices.at(1), SymbolInfo::Kind::device, "device");
        if (!a || !b) break;
        if (q.devices[0].text == q.devices[1].text)
          report(q.devices[1].pos, "repeatability needs two distinct devices");
        else if (!a->on_system || !b->on_system)
          report(q.devices[0].pos, "repeatability devices must both measure the system");
        else if (a->order > b->order)
          report(q.devices[0].pos, "'" + q.devices[0].text + "' must be attached before '" + q.devices[1].text + "'");
        break;
      }
      case QueryKind::reduced:
      case QueryKind::equivalence:
        break;
    }
  }

  std::vector<Diagnostic> diags_;
  std::optional<std::size_t> dim_;
  bool dim_missing_reported_ = false;
  bool has_state_ = false;
  bool mixed_ = false;
  std::size_t chain_dim_ = 0;
  std::size_t device_count_ = 0;
  std::map<std::string, SymbolInfo> symbols_;
};

}  // namespace detail

/// Empty iff the scenario is well formed and can be compiled.
inline std::vector<Diagnostic> validate_scenario(const Scenario& s) { return detail::Validator{}.run(s); }

// ---------------------------------------------------------------------------
// Compilation

struct CompiledScenario {
  ChainProgram program;
  std::map<std::string, Observable> observables;
  std::map<std::string, ComplexMatrix> hamiltonians;
  std::vector<QueryDecl> queries;
  bool has_weak_device = false;
};

/// Validates and lowers a scenario; throws ScenarioError with the diagnostics.
inline CompiledScenario compile_scenario(const Scenario& s) {
  if (auto diags = validate_scenario(s); !diags.empty()) throw ScenarioError(std::move(diags));
  CompiledScenario out;
  std::map<std::string, DeviceSpec> devices;
  for (const auto& st : s.statements) {
    const auto& b = st.body;
    if (const auto* p = std::get_if<PureStateDecl>(&b)) {
      out.program.initial = StateVector::normalized(p->amplitudes);
    } else if (const auto* m = std::get_if<MixedStateDecl>(&b)) {
      out.program.initial = DensityState::normalized(detail::symmetrized(detail::to_matrix(m->matrix)));
    } else if (const auto* o = std::get_if<ObservableDecl>(&b)) {
      if (o->basis) {
        std::vector<std::vector<Complex>> rows = *o->basis;
        std::vector<StateVector> basis;
        for (auto& r : orthonormalize(std::move(rows))) basis.emplace_back(std::move(r));
        out.observables.emplace(o->name.text, make_observable(o->name.text, kSystemLabel, o->eigenvalues, basis));
      } else {
        std::vector<ComplexMatrix> ps;
        for (const auto& p : o->projectors) ps.push_back(detail::to_matrix(p));
        out.observables.emplace(o->name.text,
                                make_degenerate_observable(o->name.text, kSystemLabel, o->eigenvalues, ps));
      }
    } else if (const auto* h = std::get_if<HamiltonianDecl>(&b)) {
      out.hamiltonians.emplace(h->name.text, detail::symmetrized(detail::to_matrix(h->matrix)));
    } else if (const auto* d = std::get_if<MeasureDecl>(&b)) {
      DeviceSpec spec(d->name.text, out.observables.at(d->observable.text));
      devices.emplace(d->name.text, spec);
      if (d->weak.empty()) {
        out.program.events.push_back(AttachEvent{spec, attach::Ideal{}});
      } else {
        std::vector<ComplexMatrix> rs;
        for (const auto& r : d->weak) rs.push_back(detail::repaired_unitary(detail::to_matrix(r)));
        out.program.events.push_back(AttachEvent{spec, attach::Weak{Disturbance(std::move(rs))}});
        out.has_weak_device = true;
      }
    } else if (const auto* r = std::get_if<ReadDecl>(&b)) {
      auto spec = make_reader(r->name.text, devices.at(r->target.text));
      devices.emplace(r->name.text, spec);
      out.program.events.push_back(AttachEvent{spec, attach::Reader{r->target.text}});
    } else if (const auto* e = std::get_if<EvolveHamiltonian>(&b)) {
      out.program.events.push_back(EvolveEvent{hermitian_evolution(out.hamiltonians.at(e->hamiltonian.text), e->t)});
    } else if (const auto* u = std::get_if<EvolveUnitary>(&b)) {
      out.program.events.push_back(EvolveEvent{detail::repaired_unitary(detail::to_matrix(u->matrix))});
    } else if (const auto* q = std::get_if<QueryDecl>(&b)) {
      out.queries.push_back(*q);
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Query evaluation

struct MarginalValue {
  std::string device;
  std::vector<double> probabilities;  // outcomes 1..n
};

using QueryValue = std::variant<std::monostate, MarginalValue, double, DensityState, RepeatabilityReport,
                                EquivalenceReport>;

/// Exactly one of value or error is set.
struct QueryResult {
  QueryDecl query;
  std::string text;
  QueryValue value;
  std::optional<std::string> error;

  bool ok() const { return !error.has_value(); }
  /// Verification reports only: repeatability passes when the matrix is the identity.
  std::optional<bool> pass(double tol) const {
    if (const auto* r = std::get_if<RepeatabilityReport>(&value)) return r->is_identity(tol);
    if (const auto* e = std::get_if<EquivalenceReport>(&value)) return e->pass;
    return std::nullopt;
  }
};

struct ScenarioRun {
  ChainState chain;
  std::vector<QueryResult> results;
  bool all_ok() const {
    for (const auto& r : results)
      if (!r.ok()) return false;
    return true;
  }
};

namespace detail {

inline std::vector<OutcomeEvent> to_events(const std::vector<Event>& evs) {
  std::vector<OutcomeEvent> out;
  for (const auto& ev : evs) out.push_back({ev.device.text, ev.outcome});
  return out;
}

inline QueryValue evaluate(const CompiledScenario& cs, const ChainState& chain, const QueryDecl& q,
                           const std::string& scenario_id, double tol) {
  switch (q.kind) {
    case QueryKind::marginal: {
      const auto& label = q.devices.at(0).text;
      const auto& dev = chain.device(label);
      MarginalValue mv{label, {}};
      for (std::size_t k = 1; k <= dev.spec.outcome_count(); ++k)
        mv.probabilities.push_back(joint_probability(chain, {{label, k}}));
      return mv;
    }
    case QueryKind::joint: return joint_probability(chain, to_events(q.events));
    case QueryKind::conditional:
      return conditional_probability(chain, to_events(q.events).front(), to_events(q.given));
    case QueryKind::reduced: return reduced_system_state(chain);
    case QueryKind::repeatability: return repeatability_matrix(chain, q.devices.at(0).text, q.devices.at(1).text);
    case QueryKind::equivalence: {
      if (cs.has_weak_device)
        throw ChainError("collapse equivalence is defined for ideal devices only; this scenario attaches a weak device");
      return collapse_equivalence_report(cs.program, scenario_id, tol);
    }
  }
  return std::monostate{};
}

}  // namespace detail

/// Executes the events in order and answers every query on the final chain.
/// Query failures (for example a zero-probability condition) become error records.
inline ScenarioRun run_scenario(const CompiledScenario& cs, const std::string& scenario_id = {},
                                double tol = kEquivalenceTol) {
  ScenarioRun run{run_program(cs.program), {}};
  for (const auto& q : cs.queries) {
    QueryResult r{q, format_query(q), std::monostate{}, std::nullopt};
    try {
      r.value = detail::evaluate(cs, run.chain, q, scenario_id, tol);
    } catch (const Error& e) {
      r.error = e.what();
    }
    run.results.push_back(std::move(r));
  }
  return run;
}

}  // namespace measchain::dsl
