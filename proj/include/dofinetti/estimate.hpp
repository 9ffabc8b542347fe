#pragma once

#include <algorithm>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "dofinetti/dag.hpp"
#include "dofinetti/dataset.hpp"
#include "dofinetti/errors.hpp"
#include "dofinetti/joint_table.hpp"
#include "dofinetti/query.hpp"

namespace dofinetti {

/// Histogram estimate of the full d-by-N block distribution: cell probability
/// is the fraction of environments showing that exact block configuration.
/// Optional additive smoothing adds `smoothing` to every cell count before
/// normalizing; the default is the raw histogram.
inline JointTable fit_joint(const ExchangeableDataset& data, double smoothing = 0.0) {
  if (smoothing < 0.0) throw std::invalid_argument("fit_joint: smoothing must be >= 0");
  const int d = data.num_vars();
  const int N = data.num_positions();
  std::vector<Axis> axes = grid_axes(d, N, data.cardinalities());
  std::size_t cells = 1;
  for (const auto& ax : axes) cells *= static_cast<std::size_t>(ax.card);

  std::vector<double> counts(cells, 0.0);
  JointTable shape(axes, std::vector<double>(cells, 0.0));
  std::vector<int> config(axes.size(), 0);
  for (int e = 0; e < data.num_envs(); ++e) {
    for (int n = 0; n < N; ++n) {
      for (int i = 0; i < d; ++i) config[static_cast<std::size_t>(n) * d + i] = data.value(e, n, i);
    }
    counts[shape.flat_of(config)] += 1.0;
  }
  const double denom = static_cast<double>(data.num_envs()) +
                       smoothing * static_cast<double>(cells);
  for (auto& c : counts) c = (c + smoothing) / denom;
  return JointTable(std::move(axes), std::move(counts));
}

namespace detail {

/// One conditional block factor P(x_{i;S} | pa_{i;S}) of the truncated
/// factorization, reduced from the observational table once and then read per
/// configuration.
struct BlockFactor {
  int var = -1;
  std::optional<JointTable> joint;    // marginal over child + parent axes
  std::optional<JointTable> context;  // marginal over parent axes (absent if no parents)
  std::vector<std::size_t> joint_slots;    // full-config slots feeding `joint`
  std::vector<std::size_t> context_slots;  // full-config slots feeding `context`
  std::size_t child_cells = 1;             // lattice size of the child block
};

inline std::vector<int> table_positions(const JointTable& table) {
  std::vector<int> positions;
  for (const auto& ax : table.axes()) {
    if (std::find(positions.begin(), positions.end(), ax.pos) == positions.end()) {
      positions.push_back(ax.pos);
    }
  }
  std::sort(positions.begin(), positions.end());
  return positions;
}

inline void check_block_table(const JointTable& table, const Dag& dag,
                              const std::vector<int>& positions) {
  for (int i = 0; i < dag.num_vars(); ++i) {
    for (const int n : positions) {
      if (!table.has_axis({i, n})) {
        throw DimensionMismatch("expected axis " + to_string(AxisKey{i, n}) +
                                " in the block table");
      }
    }
  }
  if (table.num_axes() != static_cast<std::size_t>(dag.num_vars()) * positions.size()) {
    throw DimensionMismatch("block table has axes outside the d-by-N grid");
  }
}

inline BlockFactor make_block_factor(const JointTable& table, const Dag& dag, int var,
                                     std::span<const int> kept_positions) {
  BlockFactor f;
  f.var = var;
  std::vector<AxisKey> child_keys, parent_keys;
  for (const int n : kept_positions) {
    child_keys.push_back({var, n});
    for (const int p : dag.parents(var)) parent_keys.push_back({p, n});
  }
  std::vector<AxisKey> joint_keys = child_keys;
  joint_keys.insert(joint_keys.end(), parent_keys.begin(), parent_keys.end());
  f.joint = marginalize(table, joint_keys);
  for (const auto& ax : f.joint->axes()) f.joint_slots.push_back(table.axis_index(ax.key()));
  for (const auto& key : child_keys) {
    f.child_cells *= static_cast<std::size_t>(table.axes()[table.axis_index(key)].card);
  }
  if (!parent_keys.empty()) {
    f.context = marginalize(*f.joint, parent_keys);
    for (const auto& ax : f.context->axes()) {
      f.context_slots.push_back(table.axis_index(ax.key()));
    }
  }
  return f;
}

inline double evaluate_factor(const BlockFactor& f, std::span<const int> full_config,
                              ZeroMassPolicy policy, std::size_t* fallback_count) {
  std::vector<int> sub(f.joint_slots.size());
  for (std::size_t k = 0; k < f.joint_slots.size(); ++k) sub[k] = full_config[f.joint_slots[k]];
  const double joint = f.joint->prob(sub);
  double ctx = 1.0;
  if (f.context) {
    sub.resize(f.context_slots.size());
    for (std::size_t k = 0; k < f.context_slots.size(); ++k) {
      sub[k] = full_config[f.context_slots[k]];
    }
    ctx = f.context->prob(sub);
  }
  if (ctx <= 0.0) {
    if (policy == ZeroMassPolicy::kThrow) {
      throw ZeroMassContext("truncated factorization: zero-mass parent context for variable " +
                            std::to_string(f.var));
    }
    if (fallback_count) ++(*fallback_count);
    return 1.0 / static_cast<double>(f.child_cells);
  }
  return joint / ctx;
}

}  // namespace detail

/// Post-interventional block distribution by the exchangeable truncated
/// factorization: intervened variables keep conditional factors only over
/// their non-intervened positions, every other variable keeps its full block
/// conditional, and cells inconsistent with the forced values get zero.
/// Factors are evaluated lazily per cell in topological order, so parent
/// contexts that no consistent configuration reaches are never touched.
inline JointTable truncated_factorization(const JointTable& table, const Dag& dag,
                                          const InterventionSet& intervention,
                                          ZeroMassPolicy policy = ZeroMassPolicy::kThrow,
                                          std::size_t* fallback_count = nullptr) {
  const std::vector<int> positions = detail::table_positions(table);
  detail::check_block_table(table, dag, positions);
  for (const auto& [key, value] : intervention.assignments()) {
    const std::size_t idx = table.axis_index(key);
    if (idx == JointTable::npos) {
      throw DimensionMismatch("truncated_factorization: intervened axis " + to_string(key) +
                              " not in table");
    }
    if (value < 0 || value >= table.axes()[idx].card) {
      throw DimensionMismatch("truncated_factorization: forced value out of range");
    }
  }

  const std::vector<int> intervened_vars = intervention.variable_indices();
  std::vector<detail::BlockFactor> factors;
  for (const int i : dag.topological_order()) {
    std::vector<int> kept = positions;
    if (std::find(intervened_vars.begin(), intervened_vars.end(), i) != intervened_vars.end()) {
      const std::vector<int> ni = intervention.positions_of(i);
      kept.erase(std::remove_if(kept.begin(), kept.end(),
                                [&](int n) {
                                  return std::find(ni.begin(), ni.end(), n) != ni.end();
                                }),
                 kept.end());
    }
    if (kept.empty()) continue;  // fully intervened variable contributes only deltas
    factors.push_back(detail::make_block_factor(table, dag, i, kept));
  }

  std::vector<std::pair<std::size_t, int>> forced;  // axis slot -> value
  for (const auto& [key, value] : intervention.assignments()) {
    forced.push_back({table.axis_index(key), value});
  }

  std::vector<double> result(table.num_cells(), 0.0);
  std::vector<int> config(table.num_axes(), 0);
  for (std::size_t flat = 0; flat < result.size(); ++flat) {
    table.config_of(flat, config);
    bool consistent = true;
    for (const auto& [slot, value] : forced) {
      if (config[slot] != value) {
        consistent = false;
        break;
      }
    }
    if (!consistent) continue;
    double value = 1.0;
    for (const auto& f : factors) {
      value *= detail::evaluate_factor(f, config, policy, fallback_count);
      if (value == 0.0) break;
    }
    result[flat] = value;
  }
  return JointTable(table.axes(), std::move(result));
}

/// Full causal query: truncated factorization, then conditioning on the
/// observed values, then marginalization to the targets.
inline JointTable answer_query(const JointTable& table, const Dag& dag, const Query& query,
                               ZeroMassPolicy policy = ZeroMassPolicy::kThrow,
                               std::size_t* fallback_count = nullptr) {
  query.validate();
  if (query.targets.empty()) throw DimensionMismatch("answer_query: no target axes");
  JointTable post = truncated_factorization(table, dag, query.intervention, policy,
                                            fallback_count);
  if (!query.conditioning.empty()) {
    post = condition(post, query.conditioning, policy, fallback_count);
  }
  return marginalize(post, query.targets);
}

/// Parent adjustment for interventions that cover the same variable set I at
/// every covered position:  sum_pa P(targets | x_hat, pa) P(pa), read directly
/// from the observational table. Agrees with answer_query on the same query.
inline JointTable parent_adjustment(const JointTable& table, const Dag& dag,
                                    const InterventionSet& intervention,
                                    std::span<const AxisKey> targets,
                                    ZeroMassPolicy policy = ZeroMassPolicy::kThrow,
                                    std::size_t* fallback_count = nullptr) {
  if (targets.empty()) throw DimensionMismatch("parent_adjustment: no target axes");
  std::vector<AxisKey> target_keys(targets.begin(), targets.end());
  if (intervention.empty()) {
    return marginalize(table, target_keys);
  }
  const std::vector<int> intervened_vars = intervention.variable_indices();
  const std::vector<int> covered = intervention.covered_positions();
  for (const int n : covered) {
    std::vector<int> vars_here;
    for (const auto& [key, value] : intervention.assignments()) {
      if (key.pos == n) vars_here.push_back(key.var);
    }
    std::sort(vars_here.begin(), vars_here.end());
    if (vars_here != intervened_vars) {
      throw InconsistentInterventionPattern(
          "parent_adjustment: position " + std::to_string(n) +
          " does not intervene the same variable set as the others");
    }
  }
  for (const auto& t : target_keys) {
    if (std::find(covered.begin(), covered.end(), t.pos) == covered.end()) {
      throw DimensionMismatch("parent_adjustment: target " + to_string(t) +
                              " lies outside the intervened positions");
    }
    if (std::find(intervened_vars.begin(), intervened_vars.end(), t.var) !=
        intervened_vars.end()) {
      throw DimensionMismatch("parent_adjustment: target " + to_string(t) + " is intervened");
    }
  }

  // Non-intervened parents of the intervened set, at the covered positions.
  std::vector<int> parent_vars;
  for (const int i : intervened_vars) {
    for (const int p : dag.parents(i)) {
      if (std::find(intervened_vars.begin(), intervened_vars.end(), p) ==
              intervened_vars.end() &&
          std::find(parent_vars.begin(), parent_vars.end(), p) == parent_vars.end()) {
        parent_vars.push_back(p);
      }
    }
  }
  std::vector<AxisKey> parent_keys;
  for (const int n : covered) {
    for (const int p : parent_vars) parent_keys.push_back({p, n});
  }

  std::vector<AxisKey> intervened_keys;
  std::vector<int> forced_values;
  for (const auto& [key, value] : intervention.assignments()) {
    intervened_keys.push_back(key);
    forced_values.push_back(value);
  }

  // Outer lattice: targets and parents together (they may overlap).
  std::vector<AxisKey> outer_keys;
  for (const auto& ax : table.axes()) {
    const AxisKey key = ax.key();
    const bool is_target = std::find(target_keys.begin(), target_keys.end(), key) !=
                           target_keys.end();
    const bool is_parent = std::find(parent_keys.begin(), parent_keys.end(), key) !=
                           parent_keys.end();
    if (is_target || is_parent) outer_keys.push_back(key);
  }

  std::vector<AxisKey> joint_keys = outer_keys;
  joint_keys.insert(joint_keys.end(), intervened_keys.begin(), intervened_keys.end());
  const JointTable joint = marginalize(table, joint_keys);        // P(targets, pa, x)
  std::vector<AxisKey> den_keys = parent_keys;
  den_keys.insert(den_keys.end(), intervened_keys.begin(), intervened_keys.end());
  const JointTable den = marginalize(table, den_keys);            // P(pa, x)
  std::optional<JointTable> weight;                               // P(pa)
  if (!parent_keys.empty()) weight = marginalize(table, parent_keys);

  std::vector<AxisKey> result_keys;
  for (const auto& key : outer_keys) {
    if (std::find(target_keys.begin(), target_keys.end(), key) != target_keys.end()) {
      result_keys.push_back(key);
    }
  }
  std::vector<Axis> result_axes;
  std::size_t result_cells = 1;
  for (const auto& key : result_keys) {
    result_axes.push_back(table.axes()[table.axis_index(key)]);
    result_cells *= static_cast<std::size_t>(result_axes.back().card);
  }
  // Uniform-fallback mass spreads over the target axes not pinned by pa.
  std::size_t free_target_cells = 1;
  for (const auto& key : result_keys) {
    if (std::find(parent_keys.begin(), parent_keys.end(), key) == parent_keys.end()) {
      free_target_cells *= static_cast<std::size_t>(table.axes()[table.axis_index(key)].card);
    }
  }

  std::vector<Axis> outer_axes;
  for (const auto& key : outer_keys) outer_axes.push_back(table.axes()[table.axis_index(key)]);
  std::size_t outer_cells = 1;
  for (const auto& ax : outer_axes) outer_cells *= static_cast<std::size_t>(ax.card);
  JointTable outer_shape(outer_axes, std::vector<double>(outer_cells, 0.0));
  JointTable result_shape(result_axes, std::vector<double>(result_cells, 0.0));

  // marginalize keeps axes in table order, so map each reduced table's axes
  // back to either an outer-config slot or a forced value.
  struct Slot {
    bool from_outer;
    std::size_t outer_index;
    int forced;
  };
  auto slots_for = [&](const JointTable& t) {
    std::vector<Slot> slots;
    for (const auto& ax : t.axes()) {
      const auto it = std::find(outer_keys.begin(), outer_keys.end(), ax.key());
      if (it != outer_keys.end()) {
        slots.push_back({true, static_cast<std::size_t>(std::distance(outer_keys.begin(), it)), 0});
      } else {
        const auto jt = std::find(intervened_keys.begin(), intervened_keys.end(), ax.key());
        slots.push_back({false, 0,
                         forced_values[static_cast<std::size_t>(
                             std::distance(intervened_keys.begin(), jt))]});
      }
    }
    return slots;
  };
  const std::vector<Slot> joint_slots = slots_for(joint);
  const std::vector<Slot> den_slots = slots_for(den);
  const std::vector<Slot> weight_slots = weight ? slots_for(*weight) : std::vector<Slot>{};
  const std::vector<Slot> result_slots = slots_for(result_shape);
  auto eval_at = [](const JointTable& t, const std::vector<Slot>& slots,
                    std::span<const int> outer_config, std::vector<int>& scratch) {
    scratch.clear();
    for (const auto& s : slots) {
      scratch.push_back(s.from_outer ? outer_config[s.outer_index] : s.forced);
    }
    return t.prob(scratch);
  };

  std::vector<double> result(result_cells, 0.0);
  std::vector<int> outer_config(outer_keys.size(), 0);
  std::vector<int> scratch;
  for (std::size_t oflat = 0; oflat < outer_cells; ++oflat) {
    outer_shape.config_of(oflat, outer_config);
    double w = 1.0;
    if (weight) {
      w = eval_at(*weight, weight_slots, outer_config, scratch);
      if (w <= 0.0) continue;  // unreachable parent context
    }
    const double den_mass = eval_at(den, den_slots, outer_config, scratch);

    scratch.clear();
    for (const auto& s : result_slots) scratch.push_back(outer_config[s.outer_index]);
    const std::size_t rflat = result_shape.flat_of(scratch);
    if (den_mass <= 0.0) {
      if (policy == ZeroMassPolicy::kThrow) {
        throw ZeroMassContext("parent_adjustment: zero-mass context under the forced values");
      }
      if (fallback_count) ++(*fallback_count);
      result[rflat] += w / static_cast<double>(free_target_cells);
      continue;
    }
    result[rflat] += w * eval_at(joint, joint_slots, outer_config, scratch) / den_mass;
  }
  return JointTable(std::move(result_axes), std::move(result));
}

}  // namespace dofinetti
