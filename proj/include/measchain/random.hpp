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

// Seeded generators for random states, bases and observables. Bases come from
// Gram-Schmidt on complex Gaussian vectors, so they are generic (not aligned
// with the computational basis).
#pragma once

#include <algorithm>
#include <cstdint>
#include <numeric>
#include <random>
#include <string>
#include <vector>

#include "measchain/linalg.hpp"
#include "measchain/model.hpp"

namespace measchain::random {

using Engine = std::mt19937_64;

/// Independent stream for trial `index` of a run seeded with `seed`.
inline Engine trial_engine(std::uint64_t seed, std::uint64_t index) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(index), static_cast<std::uint32_t>(index >> 32)};
  return Engine(seq);
}

inline Complex gaussian_complex(Engine& rng) {
  std::normal_distribution<double> n(0.0, 1.0);
  const double re = n(rng);
  const double im = n(rng);
  return {re, im};
}

inline std::size_t uniform_index(Engine& rng, std::size_t lo, std::size_t hi) {
  return std::uniform_int_distribution<std::size_t>(lo, hi)(rng);
}

inline double uniform_real(Engine& rng, double lo, double hi) {
  return std::uniform_real_distribution<double>(lo, hi)(rng);
}

inline std::vector<Complex> gaussian_vector(Engine& rng, std::size_t dim) {
  std::vector<Complex> v(dim);
  for (auto& z : v) z = gaussian_complex(rng);
  return v;
}

inline ComplexMatrix gaussian_matrix(Engine& rng, std::size_t rows, std::size_t cols) {
  ComplexMatrix m(rows, cols);
  for (auto& z : m.entries()) z = gaussian_complex(rng);
  return m;
}

inline StateVector random_state(Engine& rng, std::size_t dim) {
  return StateVector::normalized(gaussian_vector(rng, dim));
}

inline std::vector<StateVector> random_basis(Engine& rng, std::size_t dim) {
  std::vector<std::vector<Complex>> vs;
  for (std::size_t i = 0; i < dim; ++i) vs.push_back(gaussian_vector(rng, dim));
  std::vector<StateVector> out;
  for (auto& v : orthonormalize(std::move(vs))) out.emplace_back(std::move(v));
  return out;
}

/// Columns are a random orthonormal basis.
inline ComplexMatrix random_unitary(Engine& rng, std::size_t dim) {
  const auto basis = random_basis(rng, dim);
  ComplexMatrix u(dim, dim);
  for (std::size_t c = 0; c < dim; ++c)
    for (std::size_t r = 0; r < dim; ++r) u(r, c) = basis[c][r];
  return u;
}

inline ComplexMatrix random_hermitian(Engine& rng, std::size_t dim) {
  const auto g = gaussian_matrix(rng, dim, dim);
  return 0.5 * (g + g.adjoint());
}

/// G G† / tr(G G†) with G of the given rank.
inline DensityState random_density(Engine& rng, std::size_t dim, std::size_t rank = 0) {
  if (rank == 0 || rank > dim) rank = dim;
  const auto g = gaussian_matrix(rng, dim, rank);
  return DensityState::normalized(g * g.adjoint());
}

/// Distinct eigenvalues drawn from a shuffled integer grid.
inline std::vector<double> random_eigenvalues(Engine& rng, std::size_t count) {
  std::vector<double> grid(4 * count + 4);
  std::iota(grid.begin(), grid.end(), -static_cast<double>(2 * count + 2));
  std::shuffle(grid.begin(), grid.end(), rng);
  grid.resize(count);
  return grid;
}

inline Observable random_observable(Engine& rng, std::size_t dim, std::string label) {
  return make_observable(std::move(label), kSystemLabel, random_eigenvalues(rng, dim), random_basis(rng, dim));
}

/// Groups a random basis into `outcomes` eigenspaces of random sizes.
inline Observable random_degenerate_observable(Engine& rng, std::size_t dim, std::size_t outcomes,
                                               std::string label) {
  outcomes = std::clamp<std::size_t>(outcomes, 1, dim);
  const auto basis = random_basis(rng, dim);
  std::vector<std::size_t> owner(dim);
  for (std::size_t i = 0; i < dim; ++i) owner[i] = i < outcomes ? i : uniform_index(rng, 0, outcomes - 1);
  std::shuffle(owner.begin(), owner.end(), rng);
  std::vector<ComplexMatrix> projectors(outcomes, ComplexMatrix(dim, dim));
  for (std::size_t i = 0; i < dim; ++i) projectors[owner[i]] += basis[i].projector();
  return make_degenerate_observable(std::move(label), kSystemLabel, random_eigenvalues(rng, outcomes), projectors);
}

}  // namespace measchain::random
