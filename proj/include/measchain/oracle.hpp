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
 * @file oracle.hpp
 * Textbook collapse simulation of the measured system alone.
 *
 * This is the reference side of every equivalence check. It never touches a
 * composite space: a measurement branches the state with the Lüders rule
 * P_k|ψ⟩/‖P_k|ψ⟩‖, an evolution applies U to each branch.
 */
#pragma once

#include <map>
#include <string>
#include <variant>
#include <vector>

#include "measchain/born.hpp"
#include "measchain/linalg.hpp"
#include "measchain/model.hpp"

namespace measchain {

struct Branch {
  std::size_t outcome_index = 0;  // 1-based
  double probability = 0.0;
  SystemState post_state;
};

/// Outcome branches with probability above kZeroProbability.
inline std::vector<Branch> collapse_branches(const SystemState& state, const Observable& obs) {
  if (state_dim(state) != obs.dim())
    throw DimensionError("state dimension " + std::to_string(state_dim(state)) +
                         " does not match observable '" + obs.label() + "'");
  std::vector<Branch> out;
  for (std::size_t k = 1; k <= obs.outcome_count(); ++k) {
    const auto& p = obs.projector(k);
    if (const auto* v = std::get_if<StateVector>(&state)) {
      auto projected = p.apply(v->amplitudes());
      double prob = 0.0;
      for (const auto& z : projected) prob += std::norm(z);
      if (prob <= kZeroProbability) continue;
      out.push_back({k, clamp_probability(prob), StateVector::normalized(std::move(projected))});
    } else {
      const auto& rho = std::get<DensityState>(state).matrix();
      const double prob = (rho * p).trace().real();
      if (prob <= kZeroProbability) continue;
      out.push_back({k, clamp_probability(prob), DensityState::normalized(p * rho * p)});
    }
  }
  return out;
}

/// Σ_k p_k |post_k⟩⟨post_k|: the state of S when the result is not known.
inline DensityState unknown_result_mixture(const SystemState& state, const Observable& obs) {
  ComplexMatrix w(obs.dim(), obs.dim());
  for (const auto& b : collapse_branches(state, obs)) w += b.probability * to_density(b.post_state).matrix();
  return DensityState(std::move(w));
}

namespace oracle {
struct Measure {
  std::string label;  // names the outcome slot in the resulting distribution
  Observable observable;
};
struct Evolve {
  ComplexMatrix unitary;
};
}  // namespace oracle

using OracleStep = std::variant<oracle::Measure, oracle::Evolve>;

namespace detail {

inline SystemState evolve_state(const SystemState& s, const ComplexMatrix& u) {
  if (const auto* v = std::get_if<StateVector>(&s)) return StateVector::normalized(u.apply(v->amplitudes()));
  const auto& rho = std::get<DensityState>(s).matrix();
  return DensityState::normalized(u * rho * u.adjoint());
}

inline void enumerate_branches(const SystemState& state, double weight, std::span<const OracleStep> steps,
                               Distribution::Key& key, std::map<Distribution::Key, double>& out) {
  if (steps.empty()) {
    out[key] += weight;
    return;
  }
  if (const auto* e = std::get_if<oracle::Evolve>(&steps.front())) {
    enumerate_branches(evolve_state(state, e->unitary), weight, steps.subspan(1), key, out);
    return;
  }
  const auto& m = std::get<oracle::Measure>(steps.front());
  for (const auto& b : collapse_branches(state, m.observable)) {
    const double w = weight * b.probability;
    if (w <= kZeroProbability) continue;
    key.push_back(b.outcome_index);
    enumerate_branches(b.post_state, w, steps.subspan(1), key, out);
    key.pop_back();
  }
}

}  // namespace detail

/// Joint outcome distribution of a measure/evolve sequence under collapse.
inline Distribution oracle_sequence_distribution(const SystemState& initial, const std::vector<OracleStep>& steps) {
  std::vector<std::string> labels;
  for (const auto& s : steps) {
    if (const auto* m = std::get_if<oracle::Measure>(&s)) {
      if (m->observable.dim() != state_dim(initial))
        throw DimensionError("observable '" + m->observable.label() + "' does not match the state");
      labels.push_back(m->label.empty() ? m->observable.label() : m->label);
    } else {
      const auto& u = std::get<oracle::Evolve>(s).unitary;
      if (!u.is_square() || u.rows() != state_dim(initial))
        throw DimensionError("evolution does not match the state");
    }
  }
  std::map<Distribution::Key, double> entries;
  Distribution::Key key;
  detail::enumerate_branches(initial, 1.0, steps, key, entries);
  return Distribution(std::move(labels), std::move(entries));
}

}  // namespace measchain
