#pragma once

#include <algorithm>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace dofinetti {

/// The three causal structures over a pair of variables (X = index 0, Y = index 1).
enum class BivariateGraph { kXtoY, kYtoX, kIndependent };

inline std::string to_string(BivariateGraph g) {
  switch (g) {
    case BivariateGraph::kXtoY: return "x->y";
    case BivariateGraph::kYtoX: return "y->x";
    case BivariateGraph::kIndependent: return "indep";
  }
  return "?";
}

inline BivariateGraph parse_bivariate_graph(const std::string& token) {
  if (token == "x->y" || token == "xy") return BivariateGraph::kXtoY;
  if (token == "y->x" || token == "yx") return BivariateGraph::kYtoX;
  if (token == "indep" || token == "x_|_y") return BivariateGraph::kIndependent;
  throw std::invalid_argument("unknown bivariate graph token: " + token);
}

/// Directed acyclic graph over variable indices 0..d-1. Acyclicity is checked
/// on construction; parent sets and a topological order are precomputed.
class Dag {
 public:
  Dag(int num_vars, std::vector<std::pair<int, int>> edges)
      : num_vars_(num_vars), edges_(std::move(edges)), parents_(num_vars) {
    if (num_vars_ <= 0) throw std::invalid_argument("Dag: num_vars must be positive");
    std::sort(edges_.begin(), edges_.end());
    edges_.erase(std::unique(edges_.begin(), edges_.end()), edges_.end());
    for (const auto& [from, to] : edges_) {
      if (from < 0 || from >= num_vars_ || to < 0 || to >= num_vars_ || from == to) {
        throw std::invalid_argument("Dag: edge endpoints out of range");
      }
      parents_[to].push_back(from);
    }
    topo_order_ = compute_topological_order();
  }

  explicit Dag(int num_vars) : Dag(num_vars, {}) {}

  static Dag bivariate(BivariateGraph g) {
    switch (g) {
      case BivariateGraph::kXtoY: return Dag(2, {{0, 1}});
      case BivariateGraph::kYtoX: return Dag(2, {{1, 0}});
      case BivariateGraph::kIndependent: return Dag(2, {});
    }
    throw std::invalid_argument("Dag::bivariate: bad graph");
  }

  int num_vars() const { return num_vars_; }
  const std::vector<std::pair<int, int>>& edges() const { return edges_; }
  const std::vector<int>& parents(int var) const { return parents_.at(var); }
  const std::vector<int>& topological_order() const { return topo_order_; }

  bool operator==(const Dag& other) const {
    return num_vars_ == other.num_vars_ && edges_ == other.edges_;
  }

 private:
  std::vector<int> compute_topological_order() const {
    std::vector<int> indegree(num_vars_, 0);
    for (const auto& [from, to] : edges_) {
      (void)from;
      ++indegree[to];
    }
    std::vector<int> order;
    order.reserve(num_vars_);
    std::vector<int> ready;
    for (int v = 0; v < num_vars_; ++v) {
      if (indegree[v] == 0) ready.push_back(v);
    }
    while (!ready.empty()) {
      // Pop the smallest index so the order is canonical.
      const auto it = std::min_element(ready.begin(), ready.end());
      const int v = *it;
      ready.erase(it);
      order.push_back(v);
      for (const auto& [from, to] : edges_) {
        if (from == v && --indegree[to] == 0) ready.push_back(to);
      }
    }
    if (static_cast<int>(order.size()) != num_vars_) {
      throw std::invalid_argument("Dag: graph contains a cycle");
    }
    return order;
  }

  int num_vars_;
  std::vector<std::pair<int, int>> edges_;
  std::vector<std::vector<int>> parents_;
  std::vector<int> topo_order_;
};

}  // namespace dofinetti
