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
 * @file model.hpp
 * Observables, mixed states and measurement-device specifications.
 *
 * An observable is stored purely as spectral data: a list of distinct real
 * eigenvalues, each with its eigenprojector. Non-degenerate observables are
 * the special case of rank-1 projectors and additionally remember their
 * eigenbasis.
 */
#pragma once

#include <cmath>
#include <optional>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "measchain/error.hpp"
#include "measchain/linalg.hpp"

namespace measchain {

/// Minimum separation between eigenvalues of one observable.
inline constexpr double kEigenvalueSeparation = 1e-9;

/// Label of the measured system's tensor factor.
inline const std::string kSystemLabel = "S";

struct Outcome {
  double eigenvalue = 0.0;
  ComplexMatrix projector;
  friend bool operator==(const Outcome&, const Outcome&) = default;
};

class Observable {
 public:
  Observable() = default;

  /// Validates the projective-measurement invariants; see make_observable.
  Observable(std::string label, std::string space_label, std::vector<Outcome> outcomes,
             std::optional<std::vector<StateVector>> eigenbasis = std::nullopt)
      : label_(std::move(label)),
        space_label_(std::move(space_label)),
        outcomes_(std::move(outcomes)),
        eigenbasis_(std::move(eigenbasis)) {
    validate();
  }

  const std::string& label() const { return label_; }
  const std::string& space_label() const { return space_label_; }
  const std::vector<Outcome>& outcomes() const { return outcomes_; }
  std::size_t outcome_count() const { return outcomes_.size(); }
  std::size_t dim() const { return outcomes_.front().projector.rows(); }

  /// Projector of the 1-based outcome index.
  const ComplexMatrix& projector(std::size_t outcome) const {
    if (outcome == 0 || outcome > outcomes_.size())
      throw ObservableError("outcome index " + std::to_string(outcome) + " out of range for '" +
                            label_ + "'");
    return outcomes_[outcome - 1].projector;
  }

  double eigenvalue(std::size_t outcome) const {
    projector(outcome);
    return outcomes_[outcome - 1].eigenvalue;
  }

  /// Eigenbasis in outcome order, present only for non-degenerate observables.
  const std::optional<std::vector<StateVector>>& eigenbasis() const { return eigenbasis_; }

  bool is_degenerate() const { return outcomes_.size() != dim(); }

  /// Σ_k a_k P_k
  ComplexMatrix matrix() const {
    ComplexMatrix m(dim(), dim());
    for (const auto& o : outcomes_) m += o.eigenvalue * o.projector;
    return m;
  }

  /// Same projectors, eigenvalues multiplied by `factor`.
  Observable rescaled(double factor, std::string new_label) const {
    auto outs = outcomes_;
    for (auto& o : outs) o.eigenvalue *= factor;
    return Observable(std::move(new_label), space_label_, std::move(outs), eigenbasis_);
  }

  /// Same spectral data under a different name.
  Observable relabeled(std::string new_label) const {
    Observable o = *this;
    o.label_ = std::move(new_label);
    return o;
  }

  /// True when both observables have the same projectors in the same order.
  bool same_projectors(const Observable& other, double tol = kStructuralTol) const {
    if (outcomes_.size() != other.outcomes_.size() || dim() != other.dim()) return false;
    for (std::size_t k = 0; k < outcomes_.size(); ++k)
      if (max_deviation(outcomes_[k].projector, other.outcomes_[k].projector) > tol) return false;
    return true;
  }

 private:
  void validate() const {
    if (outcomes_.empty()) throw ObservableError("observable '" + label_ + "' has no outcomes");
    const std::size_t n = outcomes_.front().projector.rows();
    for (const auto& o : outcomes_)
      if (!o.projector.is_square() || o.projector.rows() != n)
        throw ObservableError("projectors of '" + label_ + "' differ in dimension");
    for (std::size_t j = 0; j < outcomes_.size(); ++j)
      for (std::size_t k = 0; k < j; ++k)
        if (std::abs(outcomes_[j].eigenvalue - outcomes_[k].eigenvalue) <= kEigenvalueSeparation)
          throw ObservableError("eigenvalues not distinct in '" + label_ + "'");
    ComplexMatrix sum(n, n);
    for (std::size_t j = 0; j < outcomes_.size(); ++j) {
      const auto& p = outcomes_[j].projector;
      if (!is_hermitian(p)) throw ObservableError("projector " + std::to_string(j + 1) +
                                                  " of '" + label_ + "' is not Hermitian");
      if (max_deviation(p * p, p) > kStructuralTol)
        throw ObservableError("projector " + std::to_string(j + 1) + " of '" + label_ +
                              "' is not idempotent");
      if (std::abs(p.trace()) < 0.5)
        throw ObservableError("projector " + std::to_string(j + 1) + " of '" + label_ +
                              "' is zero");
      for (std::size_t k = 0; k < j; ++k)
        if ((p * outcomes_[k].projector).max_abs() > kStructuralTol)
          throw ObservableError("projectors of '" + label_ + "' are not mutually orthogonal");
      sum += p;
    }
    if (max_deviation(sum, ComplexMatrix::identity(n)) > kStructuralTol)
      throw ObservableError("projectors of '" + label_ + "' do not sum to the identity");
  }

  std::string label_;
  std::string space_label_;
  std::vector<Outcome> outcomes_;
  std::optional<std::vector<StateVector>> eigenbasis_;
};

/// Non-degenerate observable Σ a_k |α_k⟩⟨α_k| from an orthonormal eigenbasis.
inline Observable make_observable(std::string label, std::string space_label,
                                  const std::vector<double>& eigenvalues,
                                  const std::vector<StateVector>& eigenbasis) {
  if (eigenvalues.size() != eigenbasis.size())
    throw ObservableError("eigenvalue count " + std::to_string(eigenvalues.size()) +
                          " does not match basis size " + std::to_string(eigenbasis.size()));
  if (eigenbasis.empty()) throw ObservableError("empty eigenbasis");
  const std::size_t n = eigenbasis.front().dim();
  if (eigenbasis.size() != n)
    throw ObservableError("eigenbasis of dimension " + std::to_string(n) + " needs " +
                          std::to_string(n) + " vectors");
  for (std::size_t i = 0; i < n; ++i) {
    if (eigenbasis[i].dim() != n) throw ObservableError("eigenbasis vectors differ in dimension");
    for (std::size_t j = 0; j <= i; ++j)
      if (std::abs(inner(eigenbasis[j], eigenbasis[i]) - (i == j ? 1.0 : 0.0)) > kStructuralTol)
        throw ObservableError("non-orthonormal eigenbasis for '" + label + "'");
  }
  std::vector<Outcome> outcomes;
  outcomes.reserve(n);
  for (std::size_t k = 0; k < n; ++k) outcomes.push_back({eigenvalues[k], eigenbasis[k].projector()});
  return Observable(std::move(label), std::move(space_label), std::move(outcomes), eigenbasis);
}

/// Observable with arbitrary-rank eigenprojectors.
inline Observable make_degenerate_observable(std::string label, std::string space_label,
                                             const std::vector<double>& eigenvalues,
                                             const std::vector<ComplexMatrix>& projectors) {
  if (eigenvalues.size() != projectors.size())
    throw ObservableError("eigenvalue count does not match projector count");
  std::vector<Outcome> outcomes;
  outcomes.reserve(projectors.size());
  for (std::size_t k = 0; k < projectors.size(); ++k) outcomes.push_back({eigenvalues[k], projectors[k]});
  return Observable(std::move(label), std::move(space_label), std::move(outcomes));
}

/// A statistical operator: Hermitian, unit trace, positive semidefinite.
class DensityState {
 public:
  DensityState() = default;

  explicit DensityState(ComplexMatrix m) : matrix_(std::move(m)) {
    if (!matrix_.is_square()) throw DimensionError("density matrix must be square");
    if (!is_hermitian(matrix_)) throw NotHermitianError("density matrix is not Hermitian");
    if (std::abs(matrix_.trace() - 1.0) > kStructuralTol)
      throw NormalizationError("density matrix trace is not 1");
    // Exact rank-1 states are common; skip the eigensolver for small matrices only.
    if (matrix_.rows() <= 64) {
      const auto eig = eigen_hermitian(matrix_);
      if (eig.values.front() < -kStructuralTol)
        throw NormalizationError("density matrix has a negative eigenvalue");
    }
  }

  /// Rescales a nonzero positive operator to unit trace.
  static DensityState normalized(ComplexMatrix m) {
    const Complex tr = m.trace();
    if (std::abs(tr) < 1e-300) throw NormalizationError("cannot normalise a traceless operator");
    m *= 1.0 / tr.real();
    return DensityState(std::move(m));
  }

  std::size_t dim() const { return matrix_.rows(); }
  const ComplexMatrix& matrix() const { return matrix_; }

  /// tr(ρ²)
  double purity() const { return (matrix_ * matrix_).trace().real(); }

  friend bool operator==(const DensityState&, const DensityState&) = default;

 private:
  ComplexMatrix matrix_;
};

inline DensityState pure_to_density(const StateVector& v) { return DensityState(v.projector()); }

/// Either description of the measured system's state.
using SystemState = std::variant<StateVector, DensityState>;

inline std::size_t state_dim(const SystemState& s) {
  return std::visit([](const auto& x) { return x.dim(); }, s);
}

inline DensityState to_density(const SystemState& s) {
  if (const auto* v = std::get_if<StateVector>(&s)) return pure_to_density(*v);
  return std::get<DensityState>(s);
}

/// A measuring apparatus with pointer basis φ_0 (ready), φ_1 … φ_n.
class DeviceSpec {
 public:
  DeviceSpec() = default;

  DeviceSpec(std::string label, Observable observable)
      : label_(std::move(label)),
        observable_(std::move(observable)),
        pointer_dim_(observable_.outcome_count() + 1) {
    if (label_.empty()) throw ChainError("device label must not be empty");
    if (label_ == kSystemLabel) throw ChainError("device label '" + label_ + "' is reserved");
  }

  const std::string& label() const { return label_; }
  const Observable& observable() const { return observable_; }
  std::size_t pointer_dim() const { return pointer_dim_; }
  std::size_t outcome_count() const { return observable_.outcome_count(); }
  static constexpr std::size_t ready_index() { return 0; }

 private:
  std::string label_;
  Observable observable_;
  std::size_t pointer_dim_ = 0;
};

/**
 * The pointer-basis observable of `device`, as measured by a reader device.
 *
 * Outcome k (1 ≤ k ≤ n) is the projector onto φ_k, so a reader's outcome
 * indices line up with the device's; the ready state φ_0 is the final
 * outcome n+1 and never fires once the device has interacted.
 */
inline Observable pointer_observable(const DeviceSpec& device) {
  const std::size_t dim = device.pointer_dim();
  const std::size_t n = device.outcome_count();
  std::vector<double> values;
  std::vector<StateVector> basis;
  for (std::size_t k = 1; k <= n; ++k) {
    values.push_back(static_cast<double>(k));
    basis.push_back(StateVector::basis(dim, k));
  }
  values.push_back(0.0);
  basis.push_back(StateVector::basis(dim, 0));
  return make_observable(device.label() + ".pointer", device.label(), values, basis);
}

}  // namespace measchain
