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
 * @file chain.hpp
 * Collapse-free measurement dynamics.
 *
 * A chain starts with the measured system S alone. Each attached device adds
 * one tensor factor, prepared in its ready state φ_0, and interacts with its
 * target (S, or an earlier device for pointer readers) through a unitary.
 * Nothing ever collapses: every later probability is read off the final
 * composite state.
 */
#pragma once

#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "measchain/error.hpp"
#include "measchain/linalg.hpp"
#include "measchain/model.hpp"

namespace measchain {

/// Per-outcome unitaries R_k applied to S after the pointer has moved to φ_k.
class Disturbance {
 public:
  Disturbance() = default;
  explicit Disturbance(std::vector<ComplexMatrix> rotations) : rotations_(std::move(rotations)) {
    for (std::size_t k = 0; k < rotations_.size(); ++k) {
      if (!rotations_[k].is_square() || !is_unitary(rotations_[k]))
        throw NotUnitaryError("disturbance R_" + std::to_string(k + 1) + " is not unitary");
    }
  }
  const std::vector<ComplexMatrix>& rotations() const { return rotations_; }
  std::size_t size() const { return rotations_.size(); }

 private:
  std::vector<ComplexMatrix> rotations_;
};

namespace attach {
struct Ideal {};
struct Weak {
  Disturbance disturbance;
};
struct Reader {
  std::string target;
};
}  // namespace attach

using AttachMode = std::variant<attach::Ideal, attach::Weak, attach::Reader>;

enum class DeviceKind { ideal, weak, reader };

inline const char* to_string(DeviceKind k) {
  switch (k) {
    case DeviceKind::ideal: return "ideal";
    case DeviceKind::weak: return "weak";
    case DeviceKind::reader: return "reader";
  }
  return "?";
}

struct AttachedDevice {
  DeviceSpec spec;
  std::size_t factor_index = 0;
  std::string target;  // kSystemLabel or the label of an earlier device
  DeviceKind kind = DeviceKind::ideal;
  /// Reduced state of S just before the interaction (S-targeting devices only).
  std::optional<DensityState> system_before;
};

namespace detail {

inline void require_matching_device(const Observable& obs, const DeviceSpec& dev) {
  if (!dev.observable().same_projectors(obs))
    throw ChainError("device '" + dev.label() + "' does not measure observable '" + obs.label() + "'");
  if (dev.pointer_dim() != obs.outcome_count() + 1)
    throw ChainError("device '" + dev.label() + "' pointer dimension must be outcome count + 1");
}

// S^k on the pointer basis: |m⟩ ↦ |m + k mod d⟩.
inline ComplexMatrix cyclic_shift(std::size_t dim, std::size_t k) {
  ComplexMatrix s(dim, dim);
  for (std::size_t m = 0; m < dim; ++m) s((m + k) % dim, m) = 1.0;
  return s;
}

}  // namespace detail

/**
 * U = Σ_k P_k ⊗ S^k on H ⊗ H_M, where S shifts the pointer basis by one.
 *
 * Restricted to the ready subspace this is exactly U(v ⊗ φ_0) = v ⊗ φ_k for
 * v in range(P_k); the shift completes it to a unitary on the whole space.
 */
inline ComplexMatrix build_ideal_unitary(const Observable& obs, const DeviceSpec& dev) {
  detail::require_matching_device(obs, dev);
  const std::size_t d = dev.pointer_dim();
  ComplexMatrix u(obs.dim() * d, obs.dim() * d);
  for (std::size_t k = 1; k <= obs.outcome_count(); ++k)
    u += tensor_product(obs.projector(k), detail::cyclic_shift(d, k));
  return u;
}

/// V·U_ideal with V = Σ_k R_k ⊗ |φ_k⟩⟨φ_k| + 1 ⊗ |φ_0⟩⟨φ_0|.
inline ComplexMatrix build_weak_unitary(const Observable& obs, const DeviceSpec& dev,
                                        const Disturbance& dist) {
  detail::require_matching_device(obs, dev);
  if (dist.size() != obs.outcome_count())
    throw ChainError("disturbance needs one unitary per outcome (" +
                     std::to_string(obs.outcome_count()) + "), got " + std::to_string(dist.size()));
  const std::size_t d = dev.pointer_dim();
  const std::size_t n = obs.dim();
  ComplexMatrix v = tensor_product(ComplexMatrix::identity(n), StateVector::basis(d, 0).projector());
  for (std::size_t k = 1; k <= obs.outcome_count(); ++k) {
    const auto& r = dist.rotations()[k - 1];
    if (r.rows() != n) throw DimensionError("disturbance dimension does not match the system");
    v += tensor_product(r, StateVector::basis(d, k).projector());
  }
  return v * build_ideal_unitary(obs, dev);
}

/// Composite state of S and every attached device.
class ChainState {
 public:
  using State = std::variant<StateVector, DensityState>;

  const CompositeSpace& space() const { return space_; }
  const State& state() const { return state_; }
  bool is_pure() const { return std::holds_alternative<StateVector>(state_); }
  const std::vector<AttachedDevice>& devices() const { return devices_; }
  const SystemState& initial_system_state() const { return initial_; }
  std::size_t system_dim() const { return space_.factors().front().dim; }

  const AttachedDevice& device(const std::string& label) const {
    for (const auto& d : devices_)
      if (d.spec.label() == label) return d;
    throw UnknownLabelError("unknown device '" + label + "'");
  }

  bool has_device(const std::string& label) const {
    for (const auto& d : devices_)
      if (d.spec.label() == label) return true;
    return false;
  }

  /// Full density operator (materialises |Φ⟩⟨Φ| for pure states).
  ComplexMatrix density_matrix() const {
    if (const auto* v = std::get_if<StateVector>(&state_)) return v->projector();
    return std::get<DensityState>(state_).matrix();
  }

 private:
  friend ChainState init_chain(const SystemState& system_state);
  friend ChainState attach_device(const ChainState&, const DeviceSpec&, const AttachMode&);
  friend ChainState apply_evolution(const ChainState&, const ComplexMatrix&);

  CompositeSpace space_;
  State state_;
  std::vector<AttachedDevice> devices_;
  SystemState initial_;
};

inline ChainState init_chain(const SystemState& system_state) {
  const std::size_t d = state_dim(system_state);
  if (d == 0) throw DimensionError("system dimension must be positive");
  ChainState c;
  c.space_ = CompositeSpace({{kSystemLabel, d}});
  c.initial_ = system_state;
  if (const auto* v = std::get_if<StateVector>(&system_state))
    c.state_ = *v;
  else
    c.state_ = std::get<DensityState>(system_state);
  return c;
}

/// Reduced state of S, tracing out every device.
inline DensityState reduced_system_state(const ChainState& chain);

/**
 * Appends `dev` in its ready state and applies the interaction selected by
 * `mode` on (target, device).
 */
inline ChainState attach_device(const ChainState& chain, const DeviceSpec& dev, const AttachMode& mode) {
  if (chain.space_.contains(dev.label()))
    throw ChainError("device label '" + dev.label() + "' is already attached");

  AttachedDevice rec{dev, chain.space_.size(), kSystemLabel, DeviceKind::ideal, std::nullopt};
  ComplexMatrix u;
  if (const auto* r = std::get_if<attach::Reader>(&mode)) {
    if (!chain.has_device(r->target))
      throw UnknownLabelError("reader '" + dev.label() + "' targets unknown device '" + r->target + "'");
    const auto pointer_obs = pointer_observable(chain.device(r->target).spec);
    if (dev.observable().dim() != pointer_obs.dim())
      throw DimensionError("reader '" + dev.label() + "' does not match the pointer space of '" +
                           r->target + "'");
    u = build_ideal_unitary(pointer_obs, dev);
    rec.target = r->target;
    rec.kind = DeviceKind::reader;
  } else {
    if (dev.observable().space_label() != kSystemLabel)
      throw ChainError("device '" + dev.label() + "' measures an observable on '" +
                       dev.observable().space_label() + "', not on the system");
    if (dev.observable().dim() != chain.system_dim())
      throw DimensionError("device '" + dev.label() + "' observable dimension " +
                           std::to_string(dev.observable().dim()) + " does not match system dimension " +
                           std::to_string(chain.system_dim()));
    if (const auto* w = std::get_if<attach::Weak>(&mode)) {
      u = build_weak_unitary(dev.observable(), dev, w->disturbance);
      rec.kind = DeviceKind::weak;
    } else {
      u = build_ideal_unitary(dev.observable(), dev);
    }
    rec.system_before = reduced_system_state(chain);
  }

  ChainState next = chain;
  next.space_ = chain.space_.extended({dev.label(), dev.pointer_dim()});
  const std::vector<std::string> targets{rec.target, dev.label()};
  const std::size_t d = dev.pointer_dim();
  if (const auto* v = std::get_if<StateVector>(&chain.state_)) {
    std::vector<Complex> grown(v->dim() * d);
    for (std::size_t i = 0; i < v->dim(); ++i) grown[i * d] = (*v)[i];
    next.state_ = StateVector(apply_local(u, targets, next.space_, grown));
  } else {
    const auto& rho = std::get<DensityState>(chain.state_).matrix();
    ComplexMatrix grown(rho.rows() * d, rho.cols() * d);
    for (std::size_t i = 0; i < rho.rows(); ++i)
      for (std::size_t j = 0; j < rho.cols(); ++j) grown(i * d, j * d) = rho(i, j);
    next.state_ = DensityState(conjugate_local(u, targets, next.space_, grown));
  }
  next.devices_.push_back(std::move(rec));
  return next;
}

/// Isolated evolution of S by `u_system`; device factors are stationary.
inline ChainState apply_evolution(const ChainState& chain, const ComplexMatrix& u_system) {
  if (!u_system.is_square() || u_system.rows() != chain.system_dim())
    throw DimensionError("evolution operator does not match the system dimension");
  if (!is_unitary(u_system)) throw NotUnitaryError("evolution operator is not unitary");
  ChainState next = chain;
  const std::vector<std::string> targets{kSystemLabel};
  if (const auto* v = std::get_if<StateVector>(&chain.state_))
    next.state_ = StateVector(apply_local(u_system, targets, chain.space_, v->amplitudes()));
  else
    next.state_ = DensityState(
        conjugate_local(u_system, targets, chain.space_, std::get<DensityState>(chain.state_).matrix()));
  return next;
}

inline DensityState reduced_system_state(const ChainState& chain) {
  const std::vector<std::string> keep{kSystemLabel};
  ComplexMatrix r = chain.is_pure()
                        ? partial_trace(std::get<StateVector>(chain.state()), chain.space(), keep)
                        : partial_trace(std::get<DensityState>(chain.state()).matrix(), chain.space(), keep);
  return DensityState(std::move(r));
}

/// Device that reads the pointer of `target` (outcome k ↔ φ_k of the target).
inline DeviceSpec make_reader(std::string label, const DeviceSpec& target) {
  return DeviceSpec(std::move(label), pointer_observable(target));
}

/// A device attachment or an evolution of S, in physical order.
struct AttachEvent {
  DeviceSpec device;
  AttachMode mode;
};
struct EvolveEvent {
  ComplexMatrix unitary;
};
using ChainEvent = std::variant<AttachEvent, EvolveEvent>;

/// An initial system state plus the ordered events acting on it.
struct ChainProgram {
  SystemState initial;
  std::vector<ChainEvent> events;
};

inline ChainState run_program(const ChainProgram& program) {
  ChainState c = init_chain(program.initial);
  for (const auto& ev : program.events) {
    if (const auto* a = std::get_if<AttachEvent>(&ev))
      c = attach_device(c, a->device, a->mode);
    else
      c = apply_evolution(c, std::get<EvolveEvent>(ev).unitary);
  }
  return c;
}

}  // namespace measchain
