#pragma once

// Test-side oracles, kept independent of the library's table-operation path:
// the truncated factorizations here are evaluated by direct summation over the
// raw cell array, and the random ICM tables realize per-mechanism finite
// de Finetti mixtures exactly.

#include <algorithm>
#include <cstdint>
#include <span>
#include <vector>

#include "dofinetti/dag.hpp"
#include "dofinetti/joint_table.hpp"
#include "dofinetti/query.hpp"
#include "dofinetti/rng.hpp"

namespace dofinetti::testing {

/// P(child axes = their values in `config` | parent axes = theirs) read off the
/// raw table by two direct sums.
inline double direct_conditional(const JointTable& table, std::span<const int> config,
                                 std::span<const AxisKey> child, std::span<const AxisKey> parents) {
  std::vector<std::size_t> child_idx, parent_idx;
  for (const auto& k : child) child_idx.push_back(table.axis_index(k));
  for (const auto& k : parents) parent_idx.push_back(table.axis_index(k));
  double num = 0.0, den = 0.0;
  std::vector<int> other(table.num_axes(), 0);
  for (std::size_t flat = 0; flat < table.num_cells(); ++flat) {
    table.config_of(flat, other);
    bool parents_match = true;
    for (const std::size_t i : parent_idx) {
      if (other[i] != config[i]) {
        parents_match = false;
        break;
      }
    }
    if (!parents_match) continue;
    den += table[flat];
    bool child_match = true;
    for (const std::size_t i : child_idx) {
      if (other[i] != config[i]) {
        child_match = false;
        break;
      }
    }
    if (child_match) num += table[flat];
  }
  return den > 0.0 ? num / den : 0.0;
}

/// Exchangeable truncated factorization evaluated cell by cell from the raw
/// table (the reference implementation the engine is checked against).
inline JointTable brute_truncated_factorization(const JointTable& table, const Dag& dag,
                                                const InterventionSet& intervention) {
  std::vector<int> positions;
  for (const auto& ax : table.axes()) {
    if (std::find(positions.begin(), positions.end(), ax.pos) == positions.end()) {
      positions.push_back(ax.pos);
    }
  }
  std::sort(positions.begin(), positions.end());

  std::vector<double> out(table.num_cells(), 0.0);
  std::vector<int> config(table.num_axes(), 0);
  for (std::size_t flat = 0; flat < table.num_cells(); ++flat) {
    table.config_of(flat, config);
    bool consistent = true;
    for (const auto& [key, value] : intervention.assignments()) {
      if (config[table.axis_index(key)] != value) {
        consistent = false;
        break;
      }
    }
    if (!consistent) continue;
    double p = 1.0;
    for (int i = 0; i < dag.num_vars(); ++i) {
      std::vector<int> kept = positions;
      const std::vector<int> ni = intervention.positions_of(i);
      kept.erase(std::remove_if(kept.begin(), kept.end(),
                                [&](int n) {
                                  return std::find(ni.begin(), ni.end(), n) != ni.end();
                                }),
                 kept.end());
      if (kept.empty()) continue;
      std::vector<AxisKey> child, parents;
      for (const int n : kept) {
        child.push_back({i, n});
        for (const int par : dag.parents(i)) parents.push_back({par, n});
      }
      p *= direct_conditional(table, config, child, parents);
    }
    out[flat] = p;
  }
  return JointTable(table.axes(), std::move(out));
}

/// Classical i.i.d. truncated factorization (per-position single-variable
/// conditionals), again by direct summation.
inline JointTable brute_iid_truncated_factorization(const JointTable& table, const Dag& dag,
                                                    const InterventionSet& intervention) {
  std::vector<double> out(table.num_cells(), 0.0);
  std::vector<int> config(table.num_axes(), 0);
  for (std::size_t flat = 0; flat < table.num_cells(); ++flat) {
    table.config_of(flat, config);
    bool consistent = true;
    for (const auto& [key, value] : intervention.assignments()) {
      if (config[table.axis_index(key)] != value) {
        consistent = false;
        break;
      }
    }
    if (!consistent) continue;
    double p = 1.0;
    for (const auto& ax : table.axes()) {
      if (intervention.find(ax.key())) continue;
      std::vector<AxisKey> child{ax.key()};
      std::vector<AxisKey> parents;
      for (const int par : dag.parents(ax.var)) parents.push_back({par, ax.pos});
      p *= direct_conditional(table, config, child, parents);
    }
    out[flat] = p;
  }
  return JointTable(table.axes(), std::move(out));
}

/// Strictly positive random table over the given axes, normalized.
inline JointTable random_table(std::vector<Axis> axes, SplitMix64& rng) {
  std::size_t cells = 1;
  for (const auto& ax : axes) cells *= static_cast<std::size_t>(ax.card);
  std::vector<double> probs(cells);
  double total = 0.0;
  for (auto& p : probs) {
    p = rng.uniform_open();
    total += p;
  }
  for (auto& p : probs) p /= total;
  return JointTable(std::move(axes), std::move(probs));
}

/// Random table that is exactly an ICM generative distribution for `dag`:
/// each variable gets an independent finite mixture (1-3 atoms) of CPTs shared
/// across positions, and the joint is the product of the per-mechanism block
/// mixtures. Position-symmetric by construction.
inline JointTable random_icm_table(const Dag& dag, const std::vector<int>& cards,
                                   int num_positions, SplitMix64& rng, int max_atoms = 3) {
  const int d = dag.num_vars();
  struct Mechanism {
    std::vector<double> weights;
    // atoms[k][parent_config][value]
    std::vector<std::vector<std::vector<double>>> atoms;
    std::size_t parent_configs = 1;
  };
  std::vector<Mechanism> mechanisms(d);
  for (int i = 0; i < d; ++i) {
    auto& m = mechanisms[i];
    for (const int par : dag.parents(i)) {
      m.parent_configs *= static_cast<std::size_t>(cards[par]);
    }
    const int atoms = 1 + static_cast<int>(rng.below(static_cast<std::uint64_t>(max_atoms)));
    m.weights = rng.dirichlet(1.0, atoms);
    m.atoms.resize(atoms);
    for (auto& atom : m.atoms) {
      atom.resize(m.parent_configs);
      for (auto& row : atom) row = rng.dirichlet(1.0, cards[i]);
    }
  }

  std::vector<Axis> axes = grid_axes(d, num_positions, cards);
  std::size_t cells = 1;
  for (const auto& ax : axes) cells *= static_cast<std::size_t>(ax.card);
  JointTable shape(axes, std::vector<double>(cells, 0.0));
  std::vector<double> probs(cells, 0.0);
  std::vector<int> config(axes.size(), 0);
  for (std::size_t flat = 0; flat < cells; ++flat) {
    shape.config_of(flat, config);
    double p = 1.0;
    for (int i = 0; i < d; ++i) {
      const auto& m = mechanisms[i];
      double mixture = 0.0;
      for (std::size_t k = 0; k < m.weights.size(); ++k) {
        double atom_prob = 1.0;
        for (int n = 0; n < num_positions; ++n) {
          std::size_t pconfig = 0;
          for (const int par : dag.parents(i)) {
            pconfig = pconfig * static_cast<std::size_t>(cards[par]) +
                      static_cast<std::size_t>(config[static_cast<std::size_t>(n) * d + par]);
          }
          atom_prob *= m.atoms[k][pconfig][static_cast<std::size_t>(
              config[static_cast<std::size_t>(n) * d + i])];
        }
        mixture += m.weights[k] * atom_prob;
      }
      p *= mixture;
    }
    probs[flat] = p;
  }
  return JointTable(std::move(axes), std::move(probs));
}

}  // namespace dofinetti::testing
