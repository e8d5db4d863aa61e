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

#include <gtest/gtest.h>

#include "measchain/born.hpp"
#include "measchain/oracle.hpp"
#include "measchain/random.hpp"
#include "test_helpers.hpp"

using namespace measchain;
using namespace measchain::testing;

namespace {

ChainState measured(const SystemState& psi, std::initializer_list<std::pair<const char*, Observable>> devices) {
  auto c = init_chain(psi);
  for (const auto& [label, obs] : devices) c = attach_device(c, DeviceSpec(label, obs), attach::Ideal{});
  return c;
}

// ⟨Φ|Π|Φ⟩ with Π the product of embedded projector matrices.
double projector_route(const ChainState& c, const std::vector<OutcomeEvent>& evs) {
  auto pi = ComplexMatrix::identity(c.space().total_dim());
  for (const auto& ev : evs) pi = pi * pointer_projection(c, ev);
  return (c.density_matrix() * pi).trace().real();
}

}  // namespace

TEST(PointerProjection, SingleDevice) {
  const auto c = measured(ket({1, 0}), {{"M", z_observable()}});
  EXPECT_EQ(pointer_projection(c, {"M", 1}), tensor_product(ComplexMatrix::identity(2), ComplexMatrix::diagonal({0, 1, 0})));
}

TEST(PointerProjection, DistinctDevicesCommute) {
  const auto c = measured(ket({1, 1}), {{"M", z_observable()}, {"M2", x_observable()}});
  for (std::size_t j = 1; j <= 2; ++j)
    for (std::size_t k = 1; k <= 2; ++k) {
      const auto a = pointer_projection(c, {"M", j});
      const auto b = pointer_projection(c, {"M2", k});
      EXPECT_LE((a * b - b * a).max_abs(), 1e-12);
      EXPECT_TRUE(MatrixNear(a * a, a, 1e-12));
      EXPECT_TRUE(is_hermitian(a, 1e-12));
    }
}

TEST(PointerProjection, Errors) {
  const auto c = measured(ket({1, 0}), {{"M", z_observable()}});
  EXPECT_THROW(pointer_projection(c, {"M", 0}), ChainError);
  EXPECT_THROW(pointer_projection(c, {"M", 3}), ChainError);
  EXPECT_THROW(pointer_projection(c, {"Q", 1}), UnknownLabelError);
}

TEST(JointProbability, SingleDeviceBornRule) {
  const auto c = measured(ket({0.6, 0.8}), {{"M", z_observable()}});
  EXPECT_NEAR(joint_probability(c, {{"M", 1}}), 0.36, 1e-15);
}

TEST(JointProbability, RepeatedDevicesAgree) {
  const auto c = measured(ket({1, 1}), {{"M", z_observable()}, {"M2", z_observable()}});
  EXPECT_NEAR(joint_probability(c, {{"M", 1}, {"M2", 2}}), 0.0, 1e-15);
  // Brute force over all 9 pointer pairs of the 18-dim state.
  const auto& v = std::get<StateVector>(c.state());
  double brute = 0.0;
  for (std::size_t s = 0; s < 2; ++s) brute += std::norm(v[s * 9 + 1 * 3 + 1]);
  EXPECT_NEAR(joint_probability(c, {{"M", 1}, {"M2", 1}}), brute, 1e-15);
  EXPECT_NEAR(brute, 0.5, 1e-15);
}

TEST(JointProbability, AgreesWithProjectorRouteAndIsOrderFree) {
  auto rng = random::trial_engine(200, 0);
  for (int trial = 0; trial < 5; ++trial) {
    const auto a = random::random_observable(rng, 3, "A");
    const auto b = random::random_observable(rng, 3, "B");
    const auto c = measured(random::random_density(rng, 3, 2), {{"M", a}, {"N", b}});
    for (std::size_t j = 1; j <= 3; ++j)
      for (std::size_t k = 1; k <= 3; ++k) {
        const double fast = joint_probability(c, {{"M", j}, {"N", k}});
        EXPECT_NEAR(fast, projector_route(c, {{"M", j}, {"N", k}}), 1e-12);
        EXPECT_NEAR(fast, projector_route(c, {{"N", k}, {"M", j}}), 1e-12);
        EXPECT_DOUBLE_EQ(fast, joint_probability(c, {{"N", k}, {"M", j}}));
      }
  }
}

TEST(JointProbability, Errors) {
  const auto c = measured(ket({1, 0}), {{"M", z_observable()}});
  EXPECT_THROW(joint_probability(c, {{"M", 1}, {"M", 2}}), DuplicateLabelError);
  EXPECT_THROW(joint_probability(c, {{"Q", 1}}), UnknownLabelError);
}

TEST(ConditionalProbability, RepeatabilityIsKroneckerDelta) {
  const auto c = measured(ket({1, 1}), {{"M", z_observable()}, {"M2", z_observable()}});
  for (std::size_t j = 1; j <= 2; ++j)
    for (std::size_t k = 1; k <= 2; ++k)
      EXPECT_NEAR(conditional_probability(c, {"M2", k}, {{"M", j}}), j == k ? 1.0 : 0.0, 1e-15);
}

TEST(ConditionalProbability, MutuallyUnbiasedBasesGiveOneHalf) {
  auto rng = random::trial_engine(201, 0);
  for (int trial = 0; trial < 5; ++trial) {
    auto psi = random::random_state(rng, 2);
    const auto c = measured(psi, {{"M", z_observable()}, {"M2", x_observable()}});
    for (std::size_t j = 1; j <= 2; ++j)
      for (std::size_t k = 1; k <= 2; ++k) EXPECT_NEAR(conditional_probability(c, {"M2", k}, {{"M", j}}), 0.5, 1e-14);
  }
}

TEST(ConditionalProbability, ZeroProbabilityConditionIsAnError) {
  const auto c = measured(ket({1, 0}), {{"M", z_observable()}, {"M2", z_observable()}});
  EXPECT_THROW(conditional_probability(c, {"M2", 1}, {{"M", 2}}), ZeroProbabilityError);
}

TEST(MarginalDistribution, Examples) {
  const auto c = measured(ket({0.6, 0.8}), {{"M", z_observable()}});
  const auto d = marginal_distribution(c, "M").as_vector();
  ASSERT_EQ(d.size(), 2u);
  EXPECT_NEAR(d[0], 0.36, 1e-15);
  EXPECT_NEAR(d[1], 0.64, 1e-15);

  const auto mixed = measured(DensityState(ComplexMatrix::diagonal({0.5, 0.5})), {{"M", z_observable()}});
  EXPECT_NEAR(marginal_distribution(mixed, "M").probability({1}), 0.5, 1e-15);
  EXPECT_NEAR(marginal_distribution(mixed, "M").probability({2}), 0.5, 1e-15);

  EXPECT_THROW(marginal_distribution(c, "Q"), UnknownLabelError);
}

TEST(MarginalDistribution, WeakDisturbanceLeavesPointerStatistics) {
  const auto z = z_observable();
  auto c = attach_device(init_chain(ket({0.6, 0.8})), DeviceSpec("M", z),
                         attach::Weak{Disturbance({ComplexMatrix::identity(2), pauli_x()})});
  // Full state by hand: 0.6 |0⟩|φ1⟩ + 0.8 |0⟩|φ2⟩ (second branch flipped by σx).
  const auto& v = std::get<StateVector>(c.state());
  EXPECT_NEAR(std::abs(v[1] - 0.6), 0.0, 1e-15);
  EXPECT_NEAR(std::abs(v[2] - 0.8), 0.0, 1e-15);
  const auto d = marginal_distribution(c, "M");
  EXPECT_NEAR(d.probability({1}), 0.36, 1e-15);
  EXPECT_NEAR(d.probability({2}), 0.64, 1e-15);
}

TEST(TotalProbability, ZThenX) {
  const auto c = measured(ket({1, 1}), {{"M", z_observable()}, {"M2", x_observable()}});
  const auto t = total_probability(c, "M2");
  EXPECT_EQ(t.condition_device, "M");
  // tr(W P_β) with W = diag(1/2, 1/2), computed independently.
  const auto w = ComplexMatrix::diagonal({0.5, 0.5});
  for (std::size_t k = 1; k <= 2; ++k) {
    const double independent = (w * x_observable().projector(k)).trace().real();
    EXPECT_NEAR(t.marginal.probability({k}), independent, 1e-10);
    EXPECT_NEAR(t.via_conditionals[k - 1], independent, 1e-10);
    EXPECT_NEAR(t.via_mixture[k - 1], 0.5, 1e-10);
  }
  EXPECT_LE(t.max_deviation, 1e-10);
}

TEST(TotalProbability, SameObservableReproducesFirstMarginal) {
  const auto c = measured(ket({0.6, 0.8}), {{"M", z_observable()}, {"M2", z_observable()}});
  const auto t = total_probability(c, "M2");
  EXPECT_NEAR(t.marginal.probability({1}), 0.36, 1e-15);
  EXPECT_NEAR(t.marginal.probability({2}), 0.64, 1e-15);
}

TEST(TotalProbability, EigenstateInput) {
  const auto c = measured(ket({1, 0}), {{"M", z_observable()}, {"M2", x_observable()}});
  const auto t = total_probability(c, "M2");
  EXPECT_NEAR(t.marginal.probability({1}), 0.5, 1e-15);
  EXPECT_NEAR(t.marginal.probability({2}), 0.5, 1e-15);
  EXPECT_THROW(total_probability(c, "M"), ChainError);
  EXPECT_THROW(total_probability(c, "Q"), UnknownLabelError);
}

TEST(ReducedSystemState, Examples) {
  const auto psi = ket({1, Complex(0, 2)});
  EXPECT_TRUE(MatrixNear(reduced_system_state(init_chain(psi)).matrix(), psi.projector(), 1e-15));
  const auto c = measured(ket({std::sqrt(1.0 / 3), std::sqrt(2.0 / 3)}), {{"M", z_observable()}});
  EXPECT_TRUE(MatrixNear(reduced_system_state(c).matrix(), ComplexMatrix::diagonal({1.0 / 3, 2.0 / 3}), 1e-15));
}

TEST(ReducedSystemState, ZThenXMatchesOracleMixture) {
  auto rng = random::trial_engine(202, 0);
  const auto psi = random::random_state(rng, 2);
  const auto c = measured(psi, {{"M", z_observable()}, {"M2", x_observable()}});
  // Σ over joint outcomes of collapse post-states weighted by joint probability.
  ComplexMatrix w(2, 2);
  for (const auto& b1 : collapse_branches(psi, z_observable()))
    for (const auto& b2 : collapse_branches(b1.post_state, x_observable()))
      w += (b1.probability * b2.probability) * to_density(b2.post_state).matrix();
  EXPECT_TRUE(MatrixNear(reduced_system_state(c).matrix(), w, 1e-12));
}

TEST(BornProperties, LawOfTotalProbabilityAndRepeatability) {
  auto rng = random::trial_engine(203, 0);
  for (int trial = 0; trial < 20; ++trial) {
    const std::size_t dim = random::uniform_index(rng, 2, 6);
    const auto a = random::random_observable(rng, dim, "A");
    const auto b = random::random_observable(rng, dim, "B");
    const auto c = measured(random::random_state(rng, dim), {{"M", a}, {"M2", a}, {"N", b}});
    for (std::size_t k = 1; k <= dim; ++k) {
      double total = 0.0;
      for (std::size_t j = 1; j <= dim; ++j) {
        const double pj = joint_probability(c, {{"M", j}});
        if (pj <= kZeroProbability) continue;
        total += conditional_probability(c, {"N", k}, {{"M", j}}) * pj;
        EXPECT_NEAR(conditional_probability(c, {"M2", k}, {{"M", j}}), j == k ? 1.0 : 0.0, 1e-10);
      }
      EXPECT_NEAR(total, joint_probability(c, {{"N", k}}), 1e-10);
    }
  }
}

TEST(Distribution, Invariants) {
  EXPECT_THROW(Distribution({"M"}, {{{1}, 0.5}, {{2}, 0.4}}), ProbabilityRangeError);
  EXPECT_THROW(Distribution({"M"}, {{{1}, 1.1}, {{2}, -0.1}}), ProbabilityRangeError);
  const Distribution d({"M"}, {{{1}, 1.0 + 5e-13}, {{2}, -5e-13}});
  EXPECT_EQ(d.probability({1}), 1.0);
  EXPECT_EQ(d.probability({2}), 0.0);
}
