#pragma once

#include <algorithm>
#include <istream>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "dofinetti/errors.hpp"
#include "dofinetti/joint_table.hpp"

namespace dofinetti {

/// Hard assignments (variable, position) -> forced category. The derived views
/// I_X (intervened variable indices) and N_i (positions per variable) fall out
/// of the assignment list.
class InterventionSet {
 public:
  InterventionSet() = default;

  void add(int var, int pos, int value) {
    const AxisKey key{var, pos};
    if (find(key)) {
      throw DimensionMismatch("InterventionSet: duplicate assignment " + to_string(key));
    }
    assignments_.push_back({key, value});
    std::sort(assignments_.begin(), assignments_.end(),
              [](const auto& a, const auto& b) { return a.first < b.first; });
  }

  bool empty() const { return assignments_.empty(); }
  std::size_t size() const { return assignments_.size(); }
  const std::vector<std::pair<AxisKey, int>>& assignments() const { return assignments_; }

  std::optional<int> find(const AxisKey& key) const {
    for (const auto& [k, v] : assignments_) {
      if (k == key) return v;
    }
    return std::nullopt;
  }

  /// I_X: the set of intervened variable indices, ascending.
  std::vector<int> variable_indices() const {
    std::vector<int> vars;
    for (const auto& [k, v] : assignments_) {
      if (std::find(vars.begin(), vars.end(), k.var) == vars.end()) vars.push_back(k.var);
    }
    std::sort(vars.begin(), vars.end());
    return vars;
  }

  /// N_i: the positions at which variable `var` is intervened, ascending.
  std::vector<int> positions_of(int var) const {
    std::vector<int> out;
    for (const auto& [k, v] : assignments_) {
      if (k.var == var) out.push_back(k.pos);
    }
    std::sort(out.begin(), out.end());
    return out;
  }

  /// All positions touched by any assignment, ascending.
  std::vector<int> covered_positions() const {
    std::vector<int> out;
    for (const auto& [k, v] : assignments_) {
      if (std::find(out.begin(), out.end(), k.pos) == out.end()) out.push_back(k.pos);
    }
    std::sort(out.begin(), out.end());
    return out;
  }

 private:
  std::vector<std::pair<AxisKey, int>> assignments_;
};

/// A causal query P(targets | do(intervention), conditioning).
struct Query {
  std::vector<AxisKey> targets;
  InterventionSet intervention;
  std::vector<std::pair<AxisKey, int>> conditioning;

  /// Targets must not overlap the intervention or the conditioning set; a
  /// conditioning key that contradicts a forced value is rejected here, a
  /// redundant agreement is allowed and dropped downstream.
  void validate() const {
    for (const auto& t : targets) {
      if (intervention.find(t)) {
        throw DimensionMismatch("Query: target " + to_string(t) + " is intervened");
      }
      for (const auto& [k, v] : conditioning) {
        if (k == t) throw DimensionMismatch("Query: target " + to_string(t) + " is conditioned");
      }
    }
    for (std::size_t i = 0; i < conditioning.size(); ++i) {
      for (std::size_t j = i + 1; j < conditioning.size(); ++j) {
        if (conditioning[i].first == conditioning[j].first) {
          throw DimensionMismatch("Query: duplicate conditioning key");
        }
      }
      const auto forced = intervention.find(conditioning[i].first);
      if (forced && *forced != conditioning[i].second) {
        throw ConditioningInconsistent("Query: conditioning " +
                                       to_string(conditioning[i].first) +
                                       " contradicts the intervention");
      }
    }
  }
};

namespace detail {

inline std::vector<std::vector<int>> parse_tuple_list(const std::string& text,
                                                      std::size_t arity,
                                                      const std::string& field) {
  std::vector<std::vector<int>> out;
  const auto open = text.find('[');
  const auto close = text.rfind(']');
  if (open == std::string::npos || close == std::string::npos || close < open) {
    throw DimensionMismatch("query file: field '" + field + "' expects [...]");
  }
  std::string body = text.substr(open + 1, close - open - 1);
  std::size_t at = 0;
  while ((at = body.find('(', at)) != std::string::npos) {
    const auto end = body.find(')', at);
    if (end == std::string::npos) {
      throw DimensionMismatch("query file: unbalanced tuple in '" + field + "'");
    }
    std::string tuple = body.substr(at + 1, end - at - 1);
    std::replace(tuple.begin(), tuple.end(), ',', ' ');
    std::stringstream ss(tuple);
    std::vector<int> values;
    int v;
    while (ss >> v) values.push_back(v);
    if (values.size() != arity) {
      throw DimensionMismatch("query file: tuple arity mismatch in '" + field + "'");
    }
    out.push_back(std::move(values));
    at = end + 1;
  }
  return out;
}

}  // namespace detail

/// Query description file, e.g.:
///   intervene = [(0,0,0)]
///   target = [(1,0)]
///   given = [(0,1,0), (1,1,0)]
inline Query parse_query_file(std::istream& is) {
  Query q;
  std::string line;
  while (std::getline(is, line)) {
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    const auto eq = line.find('=');
    if (eq == std::string::npos) continue;
    std::string key = line.substr(0, eq);
    key.erase(std::remove_if(key.begin(), key.end(), [](char c) { return c == ' ' || c == '\t'; }),
              key.end());
    const std::string value = line.substr(eq + 1);
    if (key == "intervene") {
      for (const auto& t : detail::parse_tuple_list(value, 3, key)) {
        q.intervention.add(t[0], t[1], t[2]);
      }
    } else if (key == "target") {
      for (const auto& t : detail::parse_tuple_list(value, 2, key)) {
        q.targets.push_back({t[0], t[1]});
      }
    } else if (key == "given") {
      for (const auto& t : detail::parse_tuple_list(value, 3, key)) {
        q.conditioning.push_back({{t[0], t[1]}, t[2]});
      }
    } else if (!key.empty()) {
      throw DimensionMismatch("query file: unknown field '" + key + "'");
    }
  }
  q.validate();
  return q;
}

}  // namespace dofinetti
