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

#include <numbers>

#include <gtest/gtest.h>

#include "measchain/born.hpp"
#include "measchain/chain.hpp"
#include "measchain/random.hpp"
#include "test_helpers.hpp"

using namespace measchain;
using namespace measchain::testing;

namespace {

// |s⟩ ⊗ |φ_k⟩ ⊗ ... as a flat vector, built by explicit Kronecker products.
std::vector<Complex> product_ket(const std::vector<std::vector<Complex>>& factors) {
  std::vector<Complex> out{1.0};
  for (const auto& f : factors) out = tensor_product(out, f);
  return out;
}

std::vector<Complex> e(std::size_t dim, std::size_t k) {
  std::vector<Complex> v(dim);
  v[k] = 1.0;
  return v;
}

std::vector<Complex> add(std::vector<Complex> a, const std::vector<Complex>& b, Complex s = 1.0) {
  for (std::size_t i = 0; i < a.size(); ++i) a[i] += s * b[i];
  return a;
}

}  // namespace

TEST(BuildIdealUnitary, EigenstateMovesPointer) {
  const auto z = z_observable();
  const DeviceSpec m("M", z);
  const auto u = build_ideal_unitary(z, m);
  EXPECT_TRUE(VectorNear(u.apply(product_ket({e(2, 1), e(3, 0)})), product_ket({e(2, 1), e(3, 2)}), 0.0));
}

TEST(BuildIdealUnitary, EntangledFinalState) {
  const auto z = z_observable();
  const auto u = build_ideal_unitary(z, DeviceSpec("M", z));
  const auto out = u.apply(product_ket({{kInvSqrt2, kInvSqrt2}, e(3, 0)}));
  const auto expected = add(product_ket({e(2, 0), e(3, 1)}), product_ket({e(2, 1), e(3, 2)}));
  EXPECT_TRUE(VectorNear(out, add(std::vector<Complex>(6), expected, kInvSqrt2), 1e-15));
}

TEST(BuildIdealUnitary, UnitaryAndReadySubspaceCondition) {
  auto rng = random::trial_engine(100, 0);
  for (std::size_t dim = 2; dim <= 5; ++dim) {
    for (const auto& obs : {random::random_observable(rng, dim, "A"),
                            random::random_degenerate_observable(rng, dim, dim - 1, "D")}) {
      const DeviceSpec dev("M", obs);
      const auto u = build_ideal_unitary(obs, dev);
      // Brute-force U†U with an independent product routine.
      EXPECT_TRUE(MatrixNear(naive_product(u.adjoint(), u), ComplexMatrix::identity(u.rows()), 1e-10));
      EXPECT_TRUE(is_unitary(u, 1e-10));
      // Any v in range(P_k): U(v ⊗ φ_0) = v ⊗ φ_k.
      for (std::size_t k = 1; k <= obs.outcome_count(); ++k) {
        const auto v = obs.projector(k).apply(random::gaussian_vector(rng, dim));
        const auto lhs = u.apply(tensor_product(v, e(dev.pointer_dim(), 0)));
        const auto rhs = tensor_product(v, e(dev.pointer_dim(), k));
        EXPECT_TRUE(VectorNear(lhs, rhs, 1e-10));
      }
    }
  }
}

TEST(BuildIdealUnitary, SpecMismatch) {
  EXPECT_THROW(build_ideal_unitary(z_observable(), DeviceSpec("M", x_observable())), ChainError);
}

TEST(BuildWeakUnitary, IdentityDisturbanceIsIdeal) {
  const auto z = z_observable();
  const DeviceSpec m("M", z);
  const Disturbance none({ComplexMatrix::identity(2), ComplexMatrix::identity(2)});
  EXPECT_EQ(build_weak_unitary(z, m, none), build_ideal_unitary(z, m));
}

TEST(BuildWeakUnitary, FlipsSecondBranch) {
  const auto z = z_observable();
  const DeviceSpec m("M", z);
  const Disturbance flip({ComplexMatrix::identity(2), pauli_x()});
  const auto u = build_weak_unitary(z, m, flip);
  EXPECT_TRUE(is_unitary(u, 1e-10));
  EXPECT_TRUE(VectorNear(u.apply(product_ket({e(2, 1), e(3, 0)})), product_ket({e(2, 0), e(3, 2)}), 0.0));
}

TEST(BuildWeakUnitary, RandomDisturbancesStayUnitary) {
  auto rng = random::trial_engine(101, 0);
  for (std::size_t dim = 2; dim <= 5; ++dim) {
    const auto obs = random::random_observable(rng, dim, "A");
    std::vector<ComplexMatrix> rs;
    for (std::size_t k = 0; k < dim; ++k) rs.push_back(random::random_unitary(rng, dim));
    EXPECT_TRUE(is_unitary(build_weak_unitary(obs, DeviceSpec("M", obs), Disturbance(rs)), 1e-10));
  }
}

TEST(BuildWeakUnitary, Errors) {
  const auto z = z_observable();
  EXPECT_THROW(Disturbance({ComplexMatrix::diagonal({1, 0.5})}), NotUnitaryError);
  EXPECT_THROW(build_weak_unitary(z, DeviceSpec("M", z), Disturbance({ComplexMatrix::identity(2)})), ChainError);
}

TEST(InitChain, Examples) {
  const auto c = init_chain(StateVector::basis(2, 0));
  EXPECT_EQ(c.space().total_dim(), 2u);
  EXPECT_TRUE(c.devices().empty());
  const auto mixed = init_chain(DensityState(ComplexMatrix::diagonal({0.3, 0.7})));
  EXPECT_FALSE(mixed.is_pure());
  EXPECT_THROW(init_chain(StateVector(std::vector<Complex>{2, 0})), NormalizationError);
}

TEST(AttachDevice, IdealThenRepeat) {
  const auto z = z_observable();
  auto c = init_chain(ket({1, 1}));
  c = attach_device(c, DeviceSpec("M", z), attach::Ideal{});
  const auto& v1 = std::get<StateVector>(c.state());
  const auto phi = add(product_ket({e(2, 0), e(3, 1)}), product_ket({e(2, 1), e(3, 2)}));
  EXPECT_TRUE(VectorNear(v1.amplitudes(), add(std::vector<Complex>(6), phi, kInvSqrt2), 1e-15));

  c = attach_device(c, DeviceSpec("M2", z), attach::Ideal{});
  const auto& v2 = std::get<StateVector>(c.state());
  const auto phi2 = add(product_ket({e(2, 0), e(3, 1), e(3, 1)}), product_ket({e(2, 1), e(3, 2), e(3, 2)}));
  EXPECT_TRUE(VectorNear(v2.amplitudes(), add(std::vector<Complex>(18), phi2, kInvSqrt2), 1e-15));
  EXPECT_EQ(c.devices().size(), 2u);
  EXPECT_EQ(c.device("M2").factor_index, 2u);
}

TEST(AttachDevice, ReaderCopiesPointerAfterEvolution) {
  const auto z = z_observable();
  const DeviceSpec m("M", z);
  const auto u = hermitian_evolution(pauli_y(), 0.4);
  auto c = init_chain(ket({0.6, 0.8}));
  c = attach_device(c, m, attach::Ideal{});
  c = apply_evolution(c, u);
  c = attach_device(c, make_reader("R", m), attach::Reader{"M"});
  // Σ_k ⟨α_k|ψ⟩ U|α_k⟩ |φ_k⟩ |φ̃_k⟩ with reader pointer dimension 4.
  std::vector<Complex> expected(2 * 3 * 4);
  const std::vector<Complex> amp{0.6, 0.8};
  for (std::size_t k = 0; k < 2; ++k) {
    const auto ak = u.apply(e(2, k));
    expected = add(expected, product_ket({ak, e(3, k + 1), e(4, k + 1)}), amp[k]);
  }
  EXPECT_TRUE(VectorNear(std::get<StateVector>(c.state()).amplitudes(), expected, 1e-14));
}

TEST(AttachDevice, Errors) {
  const auto z = z_observable();
  auto c = attach_device(init_chain(ket({1, 0})), DeviceSpec("M", z), attach::Ideal{});
  EXPECT_THROW(attach_device(c, DeviceSpec("M", z), attach::Ideal{}), ChainError);
  EXPECT_THROW(attach_device(c, DeviceSpec("R", z), attach::Reader{"nope"}), UnknownLabelError);
  EXPECT_THROW(attach_device(c, DeviceSpec("R", z), attach::Reader{"M"}), DimensionError);
  auto rng = random::trial_engine(102, 0);
  EXPECT_THROW(attach_device(c, DeviceSpec("N", random::random_observable(rng, 3, "A")), attach::Ideal{}),
               DimensionError);
  const auto on_m = make_observable("P", "M", {1, 2}, {ket({1, 0}), ket({0, 1})});
  EXPECT_THROW(attach_device(c, DeviceSpec("N", on_m), attach::Ideal{}), ChainError);
}

TEST(ApplyEvolution, IdentityLeavesChainUnchanged) {
  const auto z = z_observable();
  const auto c = attach_device(init_chain(ket({0.6, 0.8})), DeviceSpec("M", z), attach::Ideal{});
  const auto c2 = apply_evolution(c, ComplexMatrix::identity(2));
  EXPECT_TRUE(VectorNear(std::get<StateVector>(c2.state()).amplitudes(),
                         std::get<StateVector>(c.state()).amplitudes(), 0.0));
}

TEST(ApplyEvolution, EvolvesEachBranch) {
  const auto z = z_observable();
  const auto u = hermitian_evolution(pauli_x() * Complex(std::numbers::pi / 2), 1.0);
  auto c = attach_device(init_chain(ket({1, 1})), DeviceSpec("M", z), attach::Ideal{});
  c = apply_evolution(c, u);
  std::vector<Complex> expected(6);
  for (std::size_t k = 0; k < 2; ++k) expected = add(expected, product_ket({u.apply(e(2, k)), e(3, k + 1)}), kInvSqrt2);
  EXPECT_TRUE(VectorNear(std::get<StateVector>(c.state()).amplitudes(), expected, 1e-15));
}

TEST(ApplyEvolution, TwoStepsEqualOneStep) {
  auto rng = random::trial_engine(103, 0);
  const auto h = random::random_hermitian(rng, 3);
  const auto a = random::random_observable(rng, 3, "A");
  const auto c = attach_device(init_chain(random::random_state(rng, 3)), DeviceSpec("M", a), attach::Ideal{});
  const auto twice = apply_evolution(apply_evolution(c, hermitian_evolution(h, 0.25)), hermitian_evolution(h, 0.5));
  const auto once = apply_evolution(c, hermitian_evolution(h, 0.75));
  EXPECT_TRUE(VectorNear(std::get<StateVector>(twice.state()).amplitudes(),
                         std::get<StateVector>(once.state()).amplitudes(), 1e-10));
}

TEST(ApplyEvolution, Errors) {
  const auto c = init_chain(ket({1, 0}));
  EXPECT_THROW(apply_evolution(c, ComplexMatrix::diagonal({1, 0.5})), NotUnitaryError);
  EXPECT_THROW(apply_evolution(c, ComplexMatrix::identity(3)), DimensionError);
}

TEST(ChainProperties, NormPreservedAndRepresentationCommutes) {
  auto rng = random::trial_engine(104, 0);
  for (int trial = 0; trial < 10; ++trial) {
    const std::size_t dim = random::uniform_index(rng, 2, 4);
    const auto a = random::random_observable(rng, dim, "A");
    const auto b = random::random_degenerate_observable(rng, dim, 2, "B");
    const auto psi = random::random_state(rng, dim);
    const auto u = random::random_unitary(rng, dim);
    ChainProgram pure{psi, {AttachEvent{DeviceSpec("M", a), attach::Ideal{}}, EvolveEvent{u},
                            AttachEvent{DeviceSpec("N", b), attach::Ideal{}},
                            AttachEvent{make_reader("R", DeviceSpec("M", a)), attach::Reader{"M"}}}};
    ChainProgram mixed = pure;
    mixed.initial = pure_to_density(psi);
    const auto cp = run_program(pure);
    const auto cm = run_program(mixed);
    double n2 = 0.0;
    for (const auto& z : std::get<StateVector>(cp.state()).amplitudes()) n2 += std::norm(z);
    EXPECT_NEAR(n2, 1.0, 1e-10);
    EXPECT_NEAR(cm.density_matrix().trace().real(), 1.0, 1e-10);
    EXPECT_TRUE(MatrixNear(cp.density_matrix(), cm.density_matrix(), 1e-10));
  }
}

TEST(ChainProperties, DegenerateEigenspacesDoNotMix) {
  auto rng = random::trial_engine(105, 0);
  const auto d = random::random_degenerate_observable(rng, 4, 2, "D");
  const auto psi = random::random_state(rng, 4);
  const auto c = attach_device(init_chain(psi), DeviceSpec("M", d), attach::Ideal{});
  // Expected: Σ_k (P_k ψ) ⊗ φ_k
  std::vector<Complex> expected(4 * 3);
  for (std::size_t k = 1; k <= 2; ++k)
    expected = add(expected, tensor_product(d.projector(k).apply(psi.amplitudes()), e(3, k)));
  EXPECT_TRUE(VectorNear(std::get<StateVector>(c.state()).amplitudes(), expected, 1e-12));
}
