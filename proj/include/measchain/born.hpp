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
 * @file born.hpp
 * Born-rule queries on a chain state.
 *
 * Every pointer projection is diagonal in the product pointer basis, so
 * ⟨Φ|Π|Φ⟩ reduces to summing |Φ_i|² (or ρ_ii) over the flat indices whose
 * device digits match the requested outcomes.
 */
#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <string>
#include <vector>

#include "measchain/chain.hpp"
#include "measchain/error.hpp"
#include "measchain/linalg.hpp"

namespace measchain {

/// Probability excursions beyond [0,1] up to this size are rounding.
inline constexpr double kProbabilityClampTol = 1e-12;
/// Conditions with probability at or below this are treated as impossible.
inline constexpr double kZeroProbability = 1e-12;

struct OutcomeEvent {
  std::string device_label;
  std::size_t outcome_index = 1;  // 1-based; pointer state φ_k
  friend bool operator==(const OutcomeEvent&, const OutcomeEvent&) = default;
};

inline double clamp_probability(double p) {
  if (p < -kProbabilityClampTol || p > 1.0 + kProbabilityClampTol)
    throw ProbabilityRangeError("probability " + std::to_string(p) + " outside [0,1]");
  return std::clamp(p, 0.0, 1.0);
}

/// Finite distribution over outcome tuples of the listed devices.
class Distribution {
 public:
  using Key = std::vector<std::size_t>;

  Distribution() = default;
  Distribution(std::vector<std::string> labels, std::map<Key, double> entries)
      : labels_(std::move(labels)), entries_(std::move(entries)) {
    double total = 0.0;
    for (auto& [k, p] : entries_) {
      if (k.size() != labels_.size()) throw DimensionError("outcome tuple length mismatch");
      p = clamp_probability(p);
      total += p;
    }
    if (std::abs(total - 1.0) > 1e-9)
      throw ProbabilityRangeError("distribution sums to " + std::to_string(total));
  }

  const std::vector<std::string>& labels() const { return labels_; }
  const std::map<Key, double>& entries() const { return entries_; }

  double probability(const Key& k) const {
    auto it = entries_.find(k);
    return it == entries_.end() ? 0.0 : it->second;
  }

  /// Probabilities of a single-device distribution, index 0 ↔ outcome 1.
  std::vector<double> as_vector() const {
    if (labels_.size() != 1) throw DimensionError("as_vector needs a single-device distribution");
    std::vector<double> out;
    for (const auto& [k, p] : entries_) {
      if (out.size() < k[0]) out.resize(k[0], 0.0);
      out[k[0] - 1] = p;
    }
    return out;
  }

 private:
  std::vector<std::string> labels_;
  std::map<Key, double> entries_;
};

namespace detail {

struct DigitReader {
  std::vector<std::size_t> stride;
  std::vector<std::size_t> dim;

  DigitReader(const ChainState& chain, const std::vector<std::string>& labels) {
    const auto strides = chain.space().strides();
    for (const auto& l : labels) {
      const std::size_t f = chain.space().index_of(l);
      stride.push_back(strides[f]);
      dim.push_back(chain.space().factors()[f].dim);
    }
  }
  std::size_t digit(std::size_t flat, std::size_t which) const {
    return (flat / stride[which]) % dim[which];
  }
};

// Diagonal weight of the composite state at a flat basis index.
inline std::vector<double> basis_weights(const ChainState& chain) {
  std::vector<double> w(chain.space().total_dim());
  if (const auto* v = std::get_if<StateVector>(&chain.state())) {
    for (std::size_t i = 0; i < w.size(); ++i) w[i] = std::norm((*v)[i]);
  } else {
    const auto& rho = std::get<DensityState>(chain.state()).matrix();
    for (std::size_t i = 0; i < w.size(); ++i) w[i] = rho(i, i).real();
  }
  return w;
}

inline void check_event(const ChainState& chain, const OutcomeEvent& ev) {
  const auto& dev = chain.device(ev.device_label);
  if (ev.outcome_index == 0)
    throw ChainError("outcome 0 of '" + ev.device_label + "' is the ready state, not a measurement outcome");
  if (ev.outcome_index > dev.spec.outcome_count())
    throw ChainError("outcome " + std::to_string(ev.outcome_index) + " out of range for '" +
                     ev.device_label + "' (" + std::to_string(dev.spec.outcome_count()) + " outcomes)");
}

inline void check_distinct(const std::vector<OutcomeEvent>& evs) {
  for (std::size_t i = 0; i < evs.size(); ++i)
    for (std::size_t j = 0; j < i; ++j)
      if (evs[i].device_label == evs[j].device_label)
        throw DuplicateLabelError("device '" + evs[i].device_label + "' appears twice in one event");
}

}  // namespace detail

/// 1 ⊗ … ⊗ |φ_j⟩⟨φ_j| ⊗ … ⊗ 1 for the event's device factor.
inline ComplexMatrix pointer_projection(const ChainState& chain, const OutcomeEvent& ev) {
  detail::check_event(chain, ev);
  const auto& dev = chain.device(ev.device_label);
  const auto proj = StateVector::basis(dev.spec.pointer_dim(), ev.outcome_index).projector();
  return embed_operator(proj, {ev.device_label}, chain.space());
}

/// ⟨Φ| Π_ev A_ev |Φ⟩ (or tr(ρ Π)) for events on distinct devices.
inline double joint_probability(const ChainState& chain, const std::vector<OutcomeEvent>& evs) {
  detail::check_distinct(evs);
  std::vector<std::string> labels;
  for (const auto& ev : evs) {
    detail::check_event(chain, ev);
    labels.push_back(ev.device_label);
  }
  const detail::DigitReader reader(chain, labels);
  const auto w = detail::basis_weights(chain);
  double p = 0.0;
  for (std::size_t i = 0; i < w.size(); ++i) {
    bool match = true;
    for (std::size_t e = 0; e < evs.size() && match; ++e)
      match = reader.digit(i, e) == evs[e].outcome_index;
    if (match) p += w[i];
  }
  return clamp_probability(p);
}

/// p(target | given) = p(target ∧ given) / p(given).
inline double conditional_probability(const ChainState& chain, const OutcomeEvent& target,
                                      const std::vector<OutcomeEvent>& given) {
  const double p_given = joint_probability(chain, given);
  auto all = given;
  all.push_back(target);
  const double p_joint = joint_probability(chain, all);
  if (p_given <= kZeroProbability) {
    std::string what;
    for (const auto& g : given)
      what += (what.empty() ? "" : " ") + g.device_label + "=" + std::to_string(g.outcome_index);
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.3g", p_given);
    throw ZeroProbabilityError("conditioning event '" + what + "' has probability " + buf +
                               "; the conditional is undefined");
  }
  return clamp_probability(p_joint / p_given);
}

/// Joint distribution over every outcome tuple of the listed devices.
inline Distribution joint_distribution(const ChainState& chain, const std::vector<std::string>& labels) {
  std::vector<OutcomeEvent> probe;
  for (const auto& l : labels) probe.push_back({l, 1});
  detail::check_distinct(probe);

  std::vector<std::size_t> counts;
  for (const auto& l : labels) counts.push_back(chain.device(l).spec.outcome_count());
  std::map<Distribution::Key, double> entries;
  Distribution::Key key(labels.size(), 1);
  // Seed every tuple so impossible outcomes are listed with probability 0.
  while (true) {
    entries[key] = 0.0;
    std::size_t pos = labels.size();
    while (pos > 0 && key[pos - 1] == counts[pos - 1]) key[--pos] = 1;
    if (pos == 0) break;
    ++key[pos - 1];
  }
  const detail::DigitReader reader(chain, labels);
  const auto w = detail::basis_weights(chain);
  for (std::size_t i = 0; i < w.size(); ++i) {
    if (w[i] == 0.0) continue;
    bool ready = false;
    for (std::size_t e = 0; e < labels.size(); ++e) {
      key[e] = reader.digit(i, e);
      ready = ready || key[e] == 0;
    }
    // Interacted devices carry no weight on φ_0.
    if (!ready) entries[key] += w[i];
  }
  return Distribution(labels, std::move(entries));
}

inline Distribution marginal_distribution(const ChainState& chain, const std::string& device_label) {
  return joint_distribution(chain, {device_label});
}

/// Marginal of a later device checked against its two decompositions.
struct TotalProbability {
  std::string condition_device;
  Distribution marginal;
  std::vector<double> via_conditionals;  // Σ_j p(B_k | A_j) p(A_j)
  std::vector<double> via_mixture;       // tr(W P_k), W = state of S just before B
  double max_deviation = 0.0;
};

/**
 * Total probability of every outcome of `target_device`, decomposed over the
 * outcomes of `condition_device` (default: the first S-measuring device
 * attached before the target).
 */
inline TotalProbability total_probability(const ChainState& chain, const std::string& target_device,
                                          std::string condition_device = {}) {
  const auto& target = chain.device(target_device);
  if (!target.system_before)
    throw ChainError("total probability needs a target that measures the system; '" + target_device +
                     "' reads a pointer");
  if (condition_device.empty()) {
    for (const auto& d : chain.devices()) {
      if (d.factor_index >= target.factor_index) break;
      if (d.target == kSystemLabel) {
        condition_device = d.spec.label();
        break;
      }
    }
    if (condition_device.empty())
      throw ChainError("no device measured the system before '" + target_device + "'");
  }
  const auto& given = chain.device(condition_device);

  TotalProbability out;
  out.condition_device = condition_device;
  out.marginal = marginal_distribution(chain, target_device);
  const auto& obs = target.spec.observable();
  const auto& w = target.system_before->matrix();
  for (std::size_t k = 1; k <= obs.outcome_count(); ++k) {
    double acc = 0.0;
    for (std::size_t j = 1; j <= given.spec.outcome_count(); ++j) {
      const double pj = joint_probability(chain, {{condition_device, j}});
      if (pj <= kZeroProbability) continue;
      acc += conditional_probability(chain, {target_device, k}, {{condition_device, j}}) * pj;
    }
    out.via_conditionals.push_back(acc);
    out.via_mixture.push_back(clamp_probability((w * obs.projector(k)).trace().real()));
    const double m = out.marginal.probability({k});
    out.max_deviation = std::max({out.max_deviation, std::abs(m - acc),
                                  std::abs(m - out.via_mixture.back())});
  }
  return out;
}

}  // namespace measchain
