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
 * @file verifier.hpp
 * Side-by-side comparison of chain predictions with collapse predictions.
 */
#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "measchain/born.hpp"
#include "measchain/chain.hpp"
#include "measchain/oracle.hpp"

namespace measchain {

inline constexpr double kEquivalenceTol = 1e-10;

/// C[j][k] = p(second = k | first = j); rows with p(first = j) = 0 are absent.
struct RepeatabilityReport {
  std::string first;
  std::string second;
  std::vector<std::optional<std::vector<double>>> rows;
  double max_deviation = 0.0;  // max |C - I| over present rows

  bool is_identity(double tol) const { return max_deviation <= tol; }
};

inline RepeatabilityReport repeatability_matrix(const ChainState& chain, const std::string& first,
                                                const std::string& second) {
  if (!chain.has_device(first) || !chain.has_device(second) || first == second)
    throw ChainError("repeatability needs two distinct attached devices, got '" + first + "' and '" +
                     second + "'");
  const auto& a = chain.device(first);
  const auto& b = chain.device(second);
  if (a.target != kSystemLabel || b.target != kSystemLabel)
    throw ChainError("repeatability devices must both measure the system");
  if (a.factor_index > b.factor_index)
    throw ChainError("'" + first + "' must be attached before '" + second + "'");
  if (!a.spec.observable().same_projectors(b.spec.observable()))
    throw ChainError("'" + first + "' and '" + second + "' do not measure the same observable");

  RepeatabilityReport rep{first, second, {}, 0.0};
  const std::size_t n = a.spec.outcome_count();
  for (std::size_t j = 1; j <= n; ++j) {
    if (joint_probability(chain, {{first, j}}) <= kZeroProbability) {
      rep.rows.emplace_back(std::nullopt);
      continue;
    }
    std::vector<double> row;
    for (std::size_t k = 1; k <= n; ++k) {
      row.push_back(conditional_probability(chain, {second, k}, {{first, j}}));
      rep.max_deviation = std::max(rep.max_deviation, std::abs(row.back() - (j == k ? 1.0 : 0.0)));
    }
    rep.rows.emplace_back(std::move(row));
  }
  return rep;
}

struct EquivalenceRecord {
  std::string query;
  double chain_value = 0.0;
  double oracle_value = 0.0;
  double abs_deviation = 0.0;
};

struct EquivalenceReport {
  std::string scenario_id;
  std::vector<EquivalenceRecord> records;
  double max_deviation = 0.0;
  double tol = kEquivalenceTol;
  bool pass = true;
  /// Largest change of any system-device prediction caused by pointer readers.
  std::optional<double> reader_max_deviation;

  void add(std::string query, double chain_value, double oracle_value) {
    const double dev = std::abs(chain_value - oracle_value);
    records.push_back({std::move(query), chain_value, oracle_value, dev});
    max_deviation = std::max(max_deviation, dev);
    pass = max_deviation <= tol;
  }
};

namespace detail {

inline std::string event_text(const std::string& label, std::size_t k) {
  return label + "=" + std::to_string(k);
}

inline std::vector<std::string> system_devices(const ChainState& chain) {
  std::vector<std::string> out;
  for (const auto& d : chain.devices())
    if (d.target == kSystemLabel) out.push_back(d.spec.label());
  return out;
}

// p(labels[j] = k | labels[i] = a) from a joint distribution over `labels`.
inline std::optional<double> conditional_from_joint(const Distribution& joint, std::size_t i, std::size_t a,
                                                    std::size_t j, std::size_t k) {
  double p_cond = 0.0, p_both = 0.0;
  for (const auto& [key, p] : joint.entries()) {
    if (key[i] != a) continue;
    p_cond += p;
    if (key[j] == k) p_both += p;
  }
  if (p_cond <= kZeroProbability) return std::nullopt;
  return p_both / p_cond;
}

inline double marginal_from_joint(const Distribution& joint, std::size_t i, std::size_t a) {
  double s = 0.0;
  for (const auto& [key, p] : joint.entries())
    if (key[i] == a) s += p;
  return s;
}

// Every pairwise conditional between system devices, in attachment order.
inline std::vector<std::pair<std::string, double>> pairwise_conditionals(const ChainState& chain) {
  const auto labels = system_devices(chain);
  std::vector<std::pair<std::string, double>> out;
  for (std::size_t i = 0; i < labels.size(); ++i)
    for (std::size_t j = i + 1; j < labels.size(); ++j) {
      const std::size_t ni = chain.device(labels[i]).spec.outcome_count();
      const std::size_t nj = chain.device(labels[j]).spec.outcome_count();
      for (std::size_t a = 1; a <= ni; ++a) {
        if (joint_probability(chain, {{labels[i], a}}) <= kZeroProbability) continue;
        for (std::size_t k = 1; k <= nj; ++k)
          out.emplace_back("conditional " + event_text(labels[j], k) + " given " + event_text(labels[i], a),
                           conditional_probability(chain, {labels[j], k}, {{labels[i], a}}));
      }
    }
  return out;
}

}  // namespace detail

/**
 * Runs `program` as a measurement chain and as a collapse sequence and
 * compares every joint, marginal and pairwise conditional of the devices that
 * measure the system. Pointer readers are additionally checked to leave all
 * of those predictions unchanged.
 */
inline EquivalenceReport collapse_equivalence_report(const ChainProgram& program, std::string scenario_id = {},
                                                     double tol = kEquivalenceTol) {
  std::vector<OracleStep> steps;
  ChainProgram twin{program.initial, {}};
  bool has_reader = false;
  for (const auto& ev : program.events) {
    if (const auto* a = std::get_if<AttachEvent>(&ev)) {
      if (std::holds_alternative<attach::Weak>(a->mode))
        throw ChainError("device '" + a->device.label() +
                         "' is a weak (disturbing) measurement; collapse equivalence is not claimed for it");
      if (std::holds_alternative<attach::Reader>(a->mode)) {
        has_reader = true;
        continue;
      }
      steps.push_back(oracle::Measure{a->device.label(), a->device.observable()});
    } else {
      steps.push_back(oracle::Evolve{std::get<EvolveEvent>(ev).unitary});
    }
    twin.events.push_back(ev);
  }

  EquivalenceReport rep;
  rep.scenario_id = std::move(scenario_id);
  rep.tol = tol;

  const ChainState chain = run_program(program);
  const auto labels = detail::system_devices(chain);
  const Distribution oracle_joint = oracle_sequence_distribution(program.initial, steps);
  const Distribution chain_joint = joint_distribution(chain, labels);

  for (const auto& [key, p] : chain_joint.entries()) {
    std::string q = "joint";
    for (std::size_t i = 0; i < key.size(); ++i) q += " " + detail::event_text(labels[i], key[i]);
    rep.add(std::move(q), p, oracle_joint.probability(key));
  }
  for (std::size_t i = 0; i < labels.size(); ++i)
    for (std::size_t a = 1; a <= chain.device(labels[i]).spec.outcome_count(); ++a)
      rep.add("marginal " + detail::event_text(labels[i], a), joint_probability(chain, {{labels[i], a}}),
              detail::marginal_from_joint(oracle_joint, i, a));
  for (std::size_t i = 0; i < labels.size(); ++i)
    for (std::size_t j = i + 1; j < labels.size(); ++j)
      for (std::size_t a = 1; a <= chain.device(labels[i]).spec.outcome_count(); ++a) {
        if (joint_probability(chain, {{labels[i], a}}) <= kZeroProbability) continue;
        for (std::size_t k = 1; k <= chain.device(labels[j]).spec.outcome_count(); ++k) {
          const auto oracle_value = detail::conditional_from_joint(oracle_joint, i, a, j, k);
          if (!oracle_value) continue;
          rep.add("conditional " + detail::event_text(labels[j], k) + " given " + detail::event_text(labels[i], a),
                  conditional_probability(chain, {labels[j], k}, {{labels[i], a}}), *oracle_value);
        }
      }

  if (has_reader) {
    const ChainState plain = run_program(twin);
    const auto with = detail::pairwise_conditionals(chain);
    const auto without = detail::pairwise_conditionals(plain);
    double worst = 0.0;
    if (with.size() != without.size()) worst = 1.0;
    for (std::size_t i = 0; i < std::min(with.size(), without.size()); ++i) {
      rep.add("reader-invariance " + with[i].first, with[i].second, without[i].second);
      worst = std::max(worst, std::abs(with[i].second - without[i].second));
    }
    for (std::size_t i = 0; i < labels.size(); ++i) {
      const auto a = marginal_distribution(chain, labels[i]).as_vector();
      const auto b = marginal_distribution(plain, labels[i]).as_vector();
      for (std::size_t k = 0; k < a.size(); ++k) worst = std::max(worst, std::abs(a[k] - b[k]));
    }
    rep.reader_max_deviation = worst;
    if (worst > rep.tol) rep.pass = false;
  }
  return rep;
}

/// Reduced state of S after one ideal device versus the collapse mixture.
inline EquivalenceReport partial_trace_check(const ChainState& chain, std::string scenario_id = {},
                                             double tol = kEquivalenceTol) {
  if (chain.devices().size() != 1 || chain.devices().front().target != kSystemLabel ||
      chain.devices().front().kind != DeviceKind::ideal)
    throw ChainError("partial-trace check needs exactly one ideal device on the system");
  const auto& obs = chain.devices().front().spec.observable();
  const auto reduced = reduced_system_state(chain).matrix();
  // The initial state is what S held before the device unless an evolution intervened.
  const auto& before = *chain.devices().front().system_before;
  const SystemState& initial = chain.initial_system_state();
  const bool evolved = max_deviation(before.matrix(), to_density(initial).matrix()) > 1e-12;
  const auto mixture = unknown_result_mixture(evolved ? SystemState(before) : initial, obs).matrix();
  EquivalenceReport rep;
  rep.scenario_id = std::move(scenario_id);
  rep.tol = tol;
  for (std::size_t i = 0; i < reduced.rows(); ++i)
    for (std::size_t j = 0; j < reduced.cols(); ++j) {
      const std::string at = "[" + std::to_string(i) + "," + std::to_string(j) + "]";
      rep.add("reduced" + at + ".re", reduced(i, j).real(), mixture(i, j).real());
      rep.add("reduced" + at + ".im", reduced(i, j).imag(), mixture(i, j).imag());
    }
  return rep;
}

}  // namespace measchain
