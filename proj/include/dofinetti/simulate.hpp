#pragma once

#include <cstdint>
#include <stdexcept>
#include <vector>

#include "dofinetti/dag.hpp"
#include "dofinetti/dataset.hpp"
#include "dofinetti/prior.hpp"
#include "dofinetti/rng.hpp"

namespace dofinetti {

namespace detail {
// Stream labels keep concurrent per-environment sampling reproducible.
inline constexpr std::uint64_t kEnvStreamTag = 0x456e7653;  // "EnvS"
}  // namespace detail

/// Beta-Bernoulli XOR process: per environment draw theta, psi once, then the
/// positions are conditionally i.i.d. according to the graph. Deterministic
/// given the seed; each environment uses its own derived stream.
inline ExchangeableDataset sample_icm_bivariate(BivariateGraph graph, const BetaPrior& prior,
                                                int num_envs, int num_positions,
                                                std::uint64_t seed) {
  if (num_envs < 1 || num_positions < 1) {
    throw std::invalid_argument("sample_icm_bivariate: need num_envs, num_positions >= 1");
  }
  ExchangeableDataset data(num_envs, num_positions, {2, 2});
  for (int e = 0; e < num_envs; ++e) {
    SplitMix64 rng(derive_stream(seed, {detail::kEnvStreamTag, static_cast<std::uint64_t>(e)}));
    const double theta = rng.beta(prior.alpha, prior.beta);
    const double psi = rng.beta(prior.alpha, prior.beta);
    for (int n = 0; n < num_positions; ++n) {
      int x = 0, y = 0;
      switch (graph) {
        case BivariateGraph::kXtoY:
          x = rng.bernoulli(theta);
          y = static_cast<int>(rng.bernoulli(psi)) ^ x;
          break;
        case BivariateGraph::kYtoX:
          y = rng.bernoulli(psi);
          x = static_cast<int>(rng.bernoulli(theta)) ^ y;
          break;
        case BivariateGraph::kIndependent:
          x = rng.bernoulli(theta);
          y = rng.bernoulli(psi);
          break;
      }
      data.set_value(e, n, 0, x);
      data.set_value(e, n, 1, y);
    }
  }
  return data;
}

/// General discrete ICM process: per environment and variable, one conditional
/// probability table row per parent configuration is drawn from a symmetric
/// Dirichlet; positions are then sampled conditionally i.i.d. in topological
/// order.
inline ExchangeableDataset sample_icm_general(const Dag& dag, const std::vector<int>& cardinalities,
                                              double dirichlet_concentration, int num_envs,
                                              int num_positions, std::uint64_t seed) {
  if (num_envs < 1 || num_positions < 1) {
    throw std::invalid_argument("sample_icm_general: need num_envs, num_positions >= 1");
  }
  if (static_cast<int>(cardinalities.size()) != dag.num_vars()) {
    throw std::invalid_argument("sample_icm_general: cardinality count mismatch");
  }
  if (!(dirichlet_concentration > 0.0)) {
    throw std::invalid_argument("sample_icm_general: concentration must be > 0");
  }
  const int d = dag.num_vars();
  ExchangeableDataset data(num_envs, num_positions, cardinalities);

  // Parent-configuration strides per variable.
  std::vector<std::size_t> num_parent_configs(d, 1);
  for (int i = 0; i < d; ++i) {
    for (const int p : dag.parents(i)) {
      num_parent_configs[i] *= static_cast<std::size_t>(cardinalities[p]);
    }
  }

  std::vector<int> tuple(d, 0);
  for (int e = 0; e < num_envs; ++e) {
    SplitMix64 rng(derive_stream(seed, {detail::kEnvStreamTag, static_cast<std::uint64_t>(e)}));
    // cpt[i][parent_config] is a distribution over cardinalities[i] categories.
    std::vector<std::vector<std::vector<double>>> cpt(d);
    for (int i = 0; i < d; ++i) {
      cpt[i].resize(num_parent_configs[i]);
      for (auto& row : cpt[i]) {
        row = rng.dirichlet(dirichlet_concentration, cardinalities[i]);
      }
    }
    for (int n = 0; n < num_positions; ++n) {
      for (const int i : dag.topological_order()) {
        std::size_t pconfig = 0;
        for (const int p : dag.parents(i)) {
          pconfig = pconfig * static_cast<std::size_t>(cardinalities[p]) +
                    static_cast<std::size_t>(tuple[p]);
        }
        const auto& row = cpt[i][pconfig];
        const double u = rng.uniform();
        double acc = 0.0;
        int value = cardinalities[i] - 1;
        for (int c = 0; c < cardinalities[i]; ++c) {
          acc += row[c];
          if (u < acc) {
            value = c;
            break;
          }
        }
        tuple[i] = value;
        data.set_value(e, n, i, value);
      }
    }
  }
  return data;
}

}  // namespace dofinetti
