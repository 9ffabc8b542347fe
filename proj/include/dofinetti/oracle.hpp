#pragma once

#include <cmath>
#include <span>
#include <stdexcept>
#include <vector>

#include "dofinetti/dag.hpp"
#include "dofinetti/joint_table.hpp"
#include "dofinetti/prior.hpp"
#include "dofinetti/query.hpp"
#include "dofinetti/special.hpp"

namespace dofinetti {

/// Sufficient statistics of a Bernoulli sequence under a Beta prior.
struct ConjugateCounts {
  int successes = 0;
  int trials = 0;

  double alpha_n(const BetaPrior& prior) const { return prior.alpha + successes; }
  double beta_n(const BetaPrior& prior) const { return prior.beta + (trials - successes); }
};

/// log B(alpha + m, beta + n - m) - log B(alpha, beta): the marginal likelihood
/// of a binary sequence with m successes in n trials under a Beta mixture.
inline double log_marginal_likelihood(const ConjugateCounts& counts, const BetaPrior& prior) {
  if (counts.successes < 0 || counts.successes > counts.trials) {
    throw std::invalid_argument("log_marginal_likelihood: bad counts");
  }
  return log_beta(counts.alpha_n(prior), counts.beta_n(prior)) -
         log_beta(prior.alpha, prior.beta);
}

inline double marginal_likelihood(std::span<const int> z_sequence, const BetaPrior& prior) {
  ConjugateCounts c;
  c.trials = static_cast<int>(z_sequence.size());
  for (const int z : z_sequence) {
    if (z != 0 && z != 1) throw std::invalid_argument("marginal_likelihood: non-binary value");
    c.successes += z;
  }
  return std::exp(log_marginal_likelihood(c, prior));
}

namespace detail {

/// Each bivariate graph factors into two independent Bernoulli mechanisms.
/// `var` names the variable whose intervention removes a position from that
/// mechanism's product; `innovation` maps a cell's (x, y) to the mechanism's
/// Bernoulli outcome at that position.
struct MechanismPair {
  int var_a;
  int var_b;
  int (*innovation_a)(int x, int y);
  int (*innovation_b)(int x, int y);
};

inline MechanismPair mechanisms_of(BivariateGraph graph) {
  const auto pass_x = [](int x, int) { return x; };
  const auto pass_y = [](int, int y) { return y; };
  const auto xor_xy = [](int x, int y) { return x ^ y; };
  switch (graph) {
    case BivariateGraph::kXtoY: return {0, 1, +pass_x, +xor_xy};
    case BivariateGraph::kYtoX: return {1, 0, +pass_y, +xor_xy};
    case BivariateGraph::kIndependent: return {0, 1, +pass_x, +pass_y};
  }
  throw std::invalid_argument("mechanisms_of: bad graph");
}

inline bool position_free(std::span<const int> dropped, int pos) {
  for (const int p : dropped) {
    if (p == pos) return false;
  }
  return true;
}

}  // namespace detail

/// Exact joint over the 2N binary axes of a bivariate block, assembled from
/// the two mechanism marginal likelihoods.
inline JointTable analytic_block_table(BivariateGraph graph, const BetaPrior& prior,
                                       int num_positions) {
  if (num_positions < 1 || 2 * num_positions > 16) {
    throw std::invalid_argument("analytic_block_table: need 1 <= N <= 8");
  }
  const auto mech = detail::mechanisms_of(graph);
  const int cards[2] = {2, 2};
  std::vector<Axis> axes = grid_axes(2, num_positions, cards);
  const std::size_t cells = std::size_t{1} << (2 * num_positions);
  std::vector<double> probs(cells, 0.0);
  JointTable shape(axes, std::vector<double>(cells, 0.0));
  std::vector<int> config(axes.size(), 0);
  for (std::size_t flat = 0; flat < cells; ++flat) {
    shape.config_of(flat, config);
    ConjugateCounts a{0, num_positions}, b{0, num_positions};
    for (int n = 0; n < num_positions; ++n) {
      const int x = config[2 * n];
      const int y = config[2 * n + 1];
      a.successes += mech.innovation_a(x, y);
      b.successes += mech.innovation_b(x, y);
    }
    probs[flat] = std::exp(log_marginal_likelihood(a, prior) +
                           log_marginal_likelihood(b, prior));
  }
  return JointTable(std::move(axes), std::move(probs));
}

/// Same joint, computed by numerically integrating the Beta-weighted mechanism
/// product over a tensor Gauss quadrature grid on (0,1)^2. Independent of the
/// conjugate shortcut above.
inline JointTable quadrature_block_table(BivariateGraph graph, const BetaPrior& prior,
                                         int num_positions, std::size_t nodes = 64) {
  if (nodes < 16) throw std::invalid_argument("quadrature_block_table: nodes >= 16 required");
  if (num_positions < 1 || 2 * num_positions > 16) {
    throw std::invalid_argument("quadrature_block_table: need 1 <= N <= 8");
  }
  const auto mech = detail::mechanisms_of(graph);
  const BetaQuadrature theta = beta_gauss_quadrature(nodes, prior.alpha, prior.beta);
  const BetaQuadrature psi = theta;  // both mechanism priors share (alpha, beta)

  const int cards[2] = {2, 2};
  std::vector<Axis> axes = grid_axes(2, num_positions, cards);
  const std::size_t cells = std::size_t{1} << (2 * num_positions);
  std::vector<double> probs(cells, 0.0);
  JointTable shape(axes, std::vector<double>(cells, 0.0));
  std::vector<int> config(axes.size(), 0);
  for (std::size_t flat = 0; flat < cells; ++flat) {
    shape.config_of(flat, config);
    double total = 0.0;
    for (std::size_t j = 0; j < theta.nodes.size(); ++j) {
      for (std::size_t k = 0; k < psi.nodes.size(); ++k) {
        double term = theta.weights[j] * psi.weights[k];
        for (int n = 0; n < num_positions; ++n) {
          const int x = config[2 * n];
          const int y = config[2 * n + 1];
          const int sa = mech.innovation_a(x, y);
          const int sb = mech.innovation_b(x, y);
          term *= (sa ? theta.nodes[j] : 1.0 - theta.nodes[j]) *
                  (sb ? psi.nodes[k] : 1.0 - psi.nodes[k]);
        }
        total += term;
      }
    }
    probs[flat] = total;
  }
  return JointTable(std::move(axes), std::move(probs));
}

/// Ground-truth post-interventional block table: delta factors replace the
/// intervened positions inside each mechanism's product, everything else
/// integrates out conjugately. Point masses appear on intervened axes.
inline JointTable analytic_post_interventional(BivariateGraph graph, const BetaPrior& prior,
                                               const InterventionSet& intervention,
                                               int num_positions = 2) {
  if (num_positions < 1 || 2 * num_positions > 16) {
    throw std::invalid_argument("analytic_post_interventional: need 1 <= N <= 8");
  }
  const auto mech = detail::mechanisms_of(graph);
  for (const auto& [key, value] : intervention.assignments()) {
    if (key.var < 0 || key.var > 1 || key.pos < 0 || key.pos >= num_positions ||
        value < 0 || value > 1) {
      throw std::invalid_argument("analytic_post_interventional: assignment out of range");
    }
  }
  const std::vector<int> dropped_a = intervention.positions_of(mech.var_a);
  const std::vector<int> dropped_b = intervention.positions_of(mech.var_b);

  const int cards[2] = {2, 2};
  std::vector<Axis> axes = grid_axes(2, num_positions, cards);
  const std::size_t cells = std::size_t{1} << (2 * num_positions);
  std::vector<double> probs(cells, 0.0);
  JointTable shape(axes, std::vector<double>(cells, 0.0));
  std::vector<int> config(axes.size(), 0);
  for (std::size_t flat = 0; flat < cells; ++flat) {
    shape.config_of(flat, config);
    bool consistent = true;
    for (const auto& [key, value] : intervention.assignments()) {
      if (config[2 * key.pos + key.var] != value) {
        consistent = false;
        break;
      }
    }
    if (!consistent) continue;
    ConjugateCounts a{0, 0}, b{0, 0};
    for (int n = 0; n < num_positions; ++n) {
      const int x = config[2 * n];
      const int y = config[2 * n + 1];
      if (detail::position_free(dropped_a, n)) {
        ++a.trials;
        a.successes += mech.innovation_a(x, y);
      }
      if (detail::position_free(dropped_b, n)) {
        ++b.trials;
        b.successes += mech.innovation_b(x, y);
      }
    }
    probs[flat] = std::exp(log_marginal_likelihood(a, prior) +
                           log_marginal_likelihood(b, prior));
  }
  return JointTable(std::move(axes), std::move(probs));
}

/// Quadrature route for the post-interventional table; cross-checks the
/// conjugate construction above.
inline JointTable quadrature_post_interventional(BivariateGraph graph, const BetaPrior& prior,
                                                 const InterventionSet& intervention,
                                                 int num_positions = 2,
                                                 std::size_t nodes = 64) {
  if (nodes < 16) {
    throw std::invalid_argument("quadrature_post_interventional: nodes >= 16 required");
  }
  const auto mech = detail::mechanisms_of(graph);
  const BetaQuadrature grid = beta_gauss_quadrature(nodes, prior.alpha, prior.beta);
  const std::vector<int> dropped_a = intervention.positions_of(mech.var_a);
  const std::vector<int> dropped_b = intervention.positions_of(mech.var_b);

  const int cards[2] = {2, 2};
  std::vector<Axis> axes = grid_axes(2, num_positions, cards);
  const std::size_t cells = std::size_t{1} << (2 * num_positions);
  std::vector<double> probs(cells, 0.0);
  JointTable shape(axes, std::vector<double>(cells, 0.0));
  std::vector<int> config(axes.size(), 0);
  for (std::size_t flat = 0; flat < cells; ++flat) {
    shape.config_of(flat, config);
    bool consistent = true;
    for (const auto& [key, value] : intervention.assignments()) {
      if (config[2 * key.pos + key.var] != value) {
        consistent = false;
        break;
      }
    }
    if (!consistent) continue;
    double total = 0.0;
    for (std::size_t j = 0; j < grid.nodes.size(); ++j) {
      for (std::size_t k = 0; k < grid.nodes.size(); ++k) {
        double term = grid.weights[j] * grid.weights[k];
        for (int n = 0; n < num_positions; ++n) {
          const int x = config[2 * n];
          const int y = config[2 * n + 1];
          if (detail::position_free(dropped_a, n)) {
            term *= mech.innovation_a(x, y) ? grid.nodes[j] : 1.0 - grid.nodes[j];
          }
          if (detail::position_free(dropped_b, n)) {
            term *= mech.innovation_b(x, y) ? grid.nodes[k] : 1.0 - grid.nodes[k];
          }
        }
        total += term;
      }
    }
    probs[flat] = total;
  }
  return JointTable(std::move(axes), std::move(probs));
}

}  // namespace dofinetti
