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

/// @file scenario_random.hpp
/// Seeded generator of valid scenario ASTs.
#pragma once

#include <string>
#include <vector>

#include "measchain/dsl.hpp"
#include "measchain/random.hpp"

namespace measchain::dsl {

struct RandomScenarioOptions {
  std::size_t max_dim = 4;
  std::size_t max_depth = 3;  // ideal or weak devices on the system, excluding repeats
  bool allow_weak = true;
  bool allow_mixed = true;
  bool allow_readers = true;
  bool allow_repeats = true;
  bool probability_queries = true;     // marginal, joint, conditional
  std::size_t max_pure_dim = 4096;     // compound dimension budget for pure states
  std::size_t max_mixed_dim = 128;     // and for mixed states
};

namespace detail {

inline CMat to_cmat(const ComplexMatrix& m) {
  CMat out(m.rows(), CVec(m.cols()));
  for (std::size_t r = 0; r < m.rows(); ++r)
    for (std::size_t c = 0; c < m.cols(); ++c) out[r][c] = m(r, c);
  return out;
}

class ScenarioBuilder {
 public:
  void add(StatementBody body) {
    statements_.push_back({{statements_.size() + 1, 1}, std::move(body)});
  }
  Scenario take() { return Scenario{std::move(statements_)}; }

 private:
  std::vector<Statement> statements_;
};

inline Name nm(std::string s) { return Name{std::move(s), {}}; }

}  // namespace detail

/// A valid scenario drawn from `rng`. Devices are named D1, D2, …; repeats
/// append `r`, readers are R1, R2, …
inline Scenario random_scenario(random::Engine& rng, const RandomScenarioOptions& opt) {
  using random::uniform_index;
  detail::ScenarioBuilder b;
  const std::size_t dim = uniform_index(rng, 2, std::max<std::size_t>(2, opt.max_dim));
  b.add(SystemDecl{dim});

  const bool mixed = opt.allow_mixed && dim <= 4 && uniform_index(rng, 0, 3) == 0;
  if (mixed) {
    b.add(MixedStateDecl{detail::to_cmat(random::random_density(rng, dim, uniform_index(rng, 1, dim)).matrix())});
  } else {
    const auto psi = random::random_state(rng, dim);
    b.add(PureStateDecl{CVec(psi.amplitudes().begin(), psi.amplitudes().end())});
  }
  const std::size_t budget = mixed ? opt.max_mixed_dim : opt.max_pure_dim;
  std::size_t total = dim;
  auto fits = [&](std::size_t pointer_dim) { return total * pointer_dim <= budget; };

  struct Dev {
    std::string name;
    std::size_t outcomes;
    bool on_system;
  };
  std::vector<Dev> devices;
  std::vector<std::pair<std::string, std::string>> repeat_pairs;
  const std::size_t depth = uniform_index(rng, 1, std::max<std::size_t>(1, opt.max_depth));
  std::size_t readers = 0;

  for (std::size_t d = 1; d <= depth; ++d) {
    if (uniform_index(rng, 0, 2) == 0) {
      if (uniform_index(rng, 0, 1) == 0) {
        const std::string h = "H" + std::to_string(d);
        b.add(HamiltonianDecl{detail::nm(h), detail::to_cmat(random::random_hermitian(rng, dim))});
        b.add(EvolveHamiltonian{detail::nm(h), random::uniform_real(rng, 0.0, 6.283185307179586)});
      } else {
        b.add(EvolveUnitary{detail::to_cmat(random::random_unitary(rng, dim))});
      }
    }
    const std::string obs = "A" + std::to_string(d);
    std::size_t outcomes = dim;
    if (uniform_index(rng, 0, 2) == 0) {
      outcomes = uniform_index(rng, 1, dim);
      const auto o = random::random_degenerate_observable(rng, dim, outcomes, obs);
      ObservableDecl decl{detail::nm(obs), {}, std::nullopt, {}};
      for (std::size_t k = 1; k <= outcomes; ++k) {
        decl.eigenvalues.push_back(o.eigenvalue(k));
        decl.projectors.push_back(detail::to_cmat(o.projector(k)));
      }
      b.add(std::move(decl));
    } else {
      ObservableDecl decl{detail::nm(obs), random::random_eigenvalues(rng, dim), CMat{}, {}};
      for (const auto& v : random::random_basis(rng, dim)) decl.basis->emplace_back(v.amplitudes().begin(), v.amplitudes().end());
      b.add(std::move(decl));
    }
    if (!fits(outcomes + 1)) break;
    const std::string dev = "D" + std::to_string(d);
    MeasureDecl m{detail::nm(dev), detail::nm(obs), {}};
    if (opt.allow_weak && uniform_index(rng, 0, 3) == 0)
      for (std::size_t k = 0; k < outcomes; ++k) m.weak.push_back(detail::to_cmat(random::random_unitary(rng, dim)));
    b.add(std::move(m));
    total *= outcomes + 1;
    devices.push_back({dev, outcomes, true});

    if (opt.allow_repeats && uniform_index(rng, 0, 1) == 0 && fits(outcomes + 1)) {
      b.add(MeasureDecl{detail::nm(dev + "r"), detail::nm(obs), {}});
      total *= outcomes + 1;
      devices.push_back({dev + "r", outcomes, true});
      repeat_pairs.emplace_back(dev, dev + "r");
    }
    if (opt.allow_readers && uniform_index(rng, 0, 2) == 0) {
      const Dev target = devices[uniform_index(rng, 0, devices.size() - 1)];
      if (fits(target.outcomes + 2)) {
        const std::string r = "R" + std::to_string(++readers);
        b.add(ReadDecl{detail::nm(r), detail::nm(target.name)});
        total *= target.outcomes + 2;
        devices.push_back({r, target.outcomes + 1, false});
      }
    }
  }

  if (devices.empty()) return b.take();
  b.add(QueryDecl{QueryKind::reduced, {}, {}, {}});
  for (const auto& [first, second] : repeat_pairs)
    b.add(QueryDecl{QueryKind::repeatability, {detail::nm(first), detail::nm(second)}, {}, {}});
  b.add(QueryDecl{QueryKind::equivalence, {}, {}, {}});
  if (opt.probability_queries) {
    auto pick = [&] { return devices[uniform_index(rng, 0, devices.size() - 1)]; };
    auto event = [&](const Dev& d) { return Event{detail::nm(d.name), uniform_index(rng, 1, d.outcomes), {}}; };
    b.add(QueryDecl{QueryKind::marginal, {detail::nm(pick().name)}, {}, {}});
    b.add(QueryDecl{QueryKind::joint, {}, {event(pick())}, {}});
    if (devices.size() >= 2) {
      const std::size_t i = uniform_index(rng, 0, devices.size() - 1);
      std::size_t j = uniform_index(rng, 0, devices.size() - 2);
      if (j >= i) ++j;
      b.add(QueryDecl{QueryKind::joint, {}, {event(devices[i]), event(devices[j])}, {}});
      b.add(QueryDecl{QueryKind::conditional, {}, {event(devices[j])}, {event(devices[i])}});
    }
  }
  return b.take();
}

}  // namespace measchain::dsl
