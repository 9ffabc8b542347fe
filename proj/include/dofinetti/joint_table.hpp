#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdio>
#include <istream>
#include <numeric>
#include <ostream>
#include <span>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "dofinetti/errors.hpp"

namespace dofinetti {

/// Identity of one table axis: variable index i at sequence position n.
struct AxisKey {
  int var = 0;
  int pos = 0;

  friend bool operator==(const AxisKey& a, const AxisKey& b) {
    return a.var == b.var && a.pos == b.pos;
  }
  friend bool operator<(const AxisKey& a, const AxisKey& b) {
    return a.var != b.var ? a.var < b.var : a.pos < b.pos;
  }
};

inline std::string to_string(const AxisKey& k) {
  return "(" + std::to_string(k.var) + "," + std::to_string(k.pos) + ")";
}

struct Axis {
  int var = 0;
  int pos = 0;
  int card = 2;

  AxisKey key() const { return {var, pos}; }
};

enum class ZeroMassPolicy { kThrow, kUniform };

/// Dense probability table over a set of (variable, position) axes. Cells are
/// stored row-major with the first axis most significant, so flat order is
/// lexicographic in axis order. Immutable after construction; all operations
/// below are pure functions.
///
/// Reductions (marginal sums, normalizers) accumulate their addends in an
/// order keyed on (var,pos) rather than on axis layout, which makes every
/// operation bitwise equivariant under axis relabeling.
class JointTable {
 public:
  JointTable(std::vector<Axis> axes, std::vector<double> probs)
      : axes_(std::move(axes)), probs_(std::move(probs)) {
    std::size_t cells = 1;
    for (const auto& ax : axes_) {
      if (ax.card < 1) throw DimensionMismatch("JointTable: axis cardinality < 1");
      cells *= static_cast<std::size_t>(ax.card);
    }
    for (std::size_t i = 0; i < axes_.size(); ++i) {
      for (std::size_t j = i + 1; j < axes_.size(); ++j) {
        if (axes_[i].key() == axes_[j].key()) {
          throw DimensionMismatch("JointTable: duplicate axis " + to_string(axes_[i].key()));
        }
      }
    }
    if (probs_.size() != cells) {
      throw DimensionMismatch("JointTable: cell count does not match axes");
    }
    for (const double p : probs_) {
      if (!(p >= 0.0)) throw DimensionMismatch("JointTable: negative or NaN probability");
    }
    strides_.assign(axes_.size(), 1);
    for (std::size_t i = axes_.size(); i-- > 1;) {
      strides_[i - 1] = strides_[i] * static_cast<std::size_t>(axes_[i].card);
    }
  }

  static JointTable uniform(std::vector<Axis> axes) {
    std::size_t cells = 1;
    for (const auto& ax : axes) cells *= static_cast<std::size_t>(ax.card);
    return JointTable(std::move(axes), std::vector<double>(cells, 1.0 / cells));
  }

  static JointTable point_mass(std::vector<Axis> axes, std::span<const int> config) {
    std::size_t cells = 1;
    for (const auto& ax : axes) cells *= static_cast<std::size_t>(ax.card);
    JointTable t(std::move(axes), std::vector<double>(cells, 0.0));
    t.probs_[t.flat_of(config)] = 1.0;
    return t;
  }

  const std::vector<Axis>& axes() const { return axes_; }
  std::size_t num_axes() const { return axes_.size(); }
  std::size_t num_cells() const { return probs_.size(); }
  const std::vector<double>& probabilities() const { return probs_; }
  double operator[](std::size_t flat) const { return probs_[flat]; }

  static constexpr std::size_t npos = static_cast<std::size_t>(-1);

  std::size_t axis_index(const AxisKey& key) const {
    for (std::size_t i = 0; i < axes_.size(); ++i) {
      if (axes_[i].key() == key) return i;
    }
    return npos;
  }

  bool has_axis(const AxisKey& key) const { return axis_index(key) != npos; }

  std::size_t flat_of(std::span<const int> config) const {
    std::size_t flat = 0;
    for (std::size_t i = 0; i < axes_.size(); ++i) {
      flat += strides_[i] * static_cast<std::size_t>(config[i]);
    }
    return flat;
  }

  void config_of(std::size_t flat, std::span<int> out) const {
    for (std::size_t i = 0; i < axes_.size(); ++i) {
      out[i] = static_cast<int>(flat / strides_[i]);
      flat %= strides_[i];
    }
  }

  double prob(std::span<const int> config) const { return probs_[flat_of(config)]; }

  /// Sum of all cells, accumulated in canonical key order.
  double sum() const {
    std::vector<std::size_t> order = canonical_axis_order();
    double total = 0.0;
    std::vector<int> config(axes_.size(), 0);
    do {
      total += probs_[flat_of(config)];
    } while (advance_config(config, order));
    return total;
  }

  bool is_normalized(double tol = 1e-12) const { return std::abs(sum() - 1.0) <= tol; }

  JointTable normalized() const {
    const double z = sum();
    if (z <= 0.0) throw ZeroMassContext("normalized: table has zero total mass");
    std::vector<double> probs = probs_;
    for (auto& p : probs) p /= z;
    return JointTable(axes_, std::move(probs));
  }

  /// Reindexes cells so the axes appear in the requested key order. Pure
  /// relabeling, bitwise exact.
  JointTable permuted(std::span<const AxisKey> new_order) const {
    if (new_order.size() != axes_.size()) {
      throw DimensionMismatch("permuted: axis count mismatch");
    }
    std::vector<Axis> new_axes;
    std::vector<std::size_t> src_axis;  // new axis slot -> old axis index
    new_axes.reserve(axes_.size());
    for (const auto& key : new_order) {
      const std::size_t idx = axis_index(key);
      if (idx == npos) throw DimensionMismatch("permuted: unknown axis " + to_string(key));
      new_axes.push_back(axes_[idx]);
      src_axis.push_back(idx);
    }
    std::vector<double> probs(probs_.size());
    std::vector<int> new_config(axes_.size(), 0);
    std::vector<int> old_config(axes_.size(), 0);
    for (std::size_t flat = 0; flat < probs.size(); ++flat) {
      // Decompose flat in the new layout, scatter into the old layout.
      std::size_t rem = flat;
      for (std::size_t i = 0; i < new_axes.size(); ++i) {
        std::size_t stride = 1;
        for (std::size_t j = i + 1; j < new_axes.size(); ++j) {
          stride *= static_cast<std::size_t>(new_axes[j].card);
        }
        new_config[i] = static_cast<int>(rem / stride);
        rem %= stride;
      }
      for (std::size_t i = 0; i < new_axes.size(); ++i) old_config[src_axis[i]] = new_config[i];
      probs[flat] = probs_[flat_of(old_config)];
    }
    return JointTable(std::move(new_axes), std::move(probs));
  }

  /// Same cells reindexed to match `reference`'s axis order.
  JointTable aligned_with(const JointTable& reference) const {
    std::vector<AxisKey> keys;
    keys.reserve(reference.num_axes());
    for (const auto& ax : reference.axes()) keys.push_back(ax.key());
    return permuted(keys);
  }

  double max_abs_diff(const JointTable& other) const {
    const JointTable aligned = other.aligned_with(*this);
    double worst = 0.0;
    for (std::size_t i = 0; i < probs_.size(); ++i) {
      worst = std::max(worst, std::abs(probs_[i] - aligned.probs_[i]));
    }
    return worst;
  }

  /// Averages the table over all permutations of its position labels. Every
  /// variable must be present at every position with matching cardinalities.
  JointTable symmetrized_positions() const {
    std::vector<int> positions;
    for (const auto& ax : axes_) {
      if (std::find(positions.begin(), positions.end(), ax.pos) == positions.end()) {
        positions.push_back(ax.pos);
      }
    }
    std::sort(positions.begin(), positions.end());
    std::vector<int> perm = positions;
    std::vector<double> acc(probs_.size(), 0.0);
    std::size_t count = 0;
    std::vector<int> config(axes_.size(), 0);
    std::vector<int> mapped(axes_.size(), 0);
    do {
      // perm[k] is the position that original slot positions[k] reads from.
      for (std::size_t flat = 0; flat < probs_.size(); ++flat) {
        config_of(flat, config);
        for (std::size_t i = 0; i < axes_.size(); ++i) {
          const auto slot = std::find(positions.begin(), positions.end(), axes_[i].pos);
          const int target_pos = perm[std::distance(positions.begin(), slot)];
          const std::size_t j = axis_index({axes_[i].var, target_pos});
          if (j == npos || axes_[j].card != axes_[i].card) {
            throw DimensionMismatch("symmetrized_positions: axes not a full grid");
          }
          mapped[j] = config[i];
        }
        acc[flat] += probs_[flat_of(mapped)];
      }
      ++count;
    } while (std::next_permutation(perm.begin(), perm.end()));
    for (auto& v : acc) v /= static_cast<double>(count);
    return JointTable(axes_, std::move(acc));
  }

  /// Text format: header of `var:pos:card` triples, then one
  /// `config,probability` row per cell, lexicographic in axis order.
  void write_text(std::ostream& os) const {
    for (std::size_t i = 0; i < axes_.size(); ++i) {
      if (i) os << ' ';
      os << axes_[i].var << ':' << axes_[i].pos << ':' << axes_[i].card;
    }
    os << '\n';
    std::vector<int> config(axes_.size(), 0);
    char buf[40];
    for (std::size_t flat = 0; flat < probs_.size(); ++flat) {
      config_of(flat, config);
      for (std::size_t i = 0; i < config.size(); ++i) {
        if (i) os << ' ';
        os << config[i];
      }
      std::snprintf(buf, sizeof(buf), "%.17g", probs_[flat]);
      os << ',' << buf << '\n';
    }
  }

  static JointTable read_text(std::istream& is) {
    std::string header;
    if (!std::getline(is, header)) throw DimensionMismatch("table text: missing header");
    std::vector<Axis> axes;
    {
      std::stringstream ss(header);
      std::string tok;
      while (ss >> tok) {
        Axis ax;
        if (std::sscanf(tok.c_str(), "%d:%d:%d", &ax.var, &ax.pos, &ax.card) != 3) {
          throw DimensionMismatch("table text: bad axis token '" + tok + "'");
        }
        axes.push_back(ax);
      }
    }
    if (axes.empty()) throw DimensionMismatch("table text: no axes");
    std::size_t cells = 1;
    for (const auto& ax : axes) cells *= static_cast<std::size_t>(ax.card);
    std::vector<double> probs(cells, 0.0);
    std::string line;
    std::size_t rows = 0;
    JointTable shape(axes, std::vector<double>(cells, 0.0));
    std::vector<int> config(axes.size());
    while (std::getline(is, line)) {
      if (line.empty()) continue;
      const auto comma = line.find(',');
      if (comma == std::string::npos) throw DimensionMismatch("table text: bad row");
      std::stringstream ss(line.substr(0, comma));
      for (auto& c : config) {
        if (!(ss >> c)) throw DimensionMismatch("table text: short config");
      }
      probs[shape.flat_of(config)] = std::stod(line.substr(comma + 1));
      ++rows;
    }
    if (rows != cells) throw DimensionMismatch("table text: row count mismatch");
    return JointTable(std::move(axes), std::move(probs));
  }

  /// Axis indices sorted by (var,pos); the canonical accumulation order.
  std::vector<std::size_t> canonical_axis_order() const {
    std::vector<std::size_t> order(axes_.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [this](std::size_t a, std::size_t b) {
      return axes_[a].key() < axes_[b].key();
    });
    return order;
  }

  /// Odometer step over `config`, incrementing the last axis in `axis_order`
  /// fastest. Returns false once the configuration space is exhausted.
  bool advance_config(std::span<int> config, std::span<const std::size_t> axis_order) const {
    for (std::size_t k = axis_order.size(); k-- > 0;) {
      const std::size_t i = axis_order[k];
      if (++config[i] < axes_[i].card) return true;
      config[i] = 0;
    }
    return false;
  }

 private:
  std::vector<Axis> axes_;
  std::vector<double> probs_;
  std::vector<std::size_t> strides_;
};

/// Marginal over the kept axes; entries are sums over the dropped axes, kept
/// axes retain their order in the source table.
inline JointTable marginalize(const JointTable& table, std::span<const AxisKey> keep) {
  std::vector<bool> kept(table.num_axes(), false);
  for (const auto& key : keep) {
    const std::size_t idx = table.axis_index(key);
    if (idx == JointTable::npos) {
      throw DimensionMismatch("marginalize: unknown axis " + to_string(key));
    }
    if (kept[idx]) throw DimensionMismatch("marginalize: duplicate axis " + to_string(key));
    kept[idx] = true;
  }
  std::vector<Axis> result_axes;
  std::vector<std::size_t> kept_idx;
  std::vector<std::size_t> dropped_idx;
  for (std::size_t i = 0; i < table.num_axes(); ++i) {
    if (kept[i]) {
      result_axes.push_back(table.axes()[i]);
      kept_idx.push_back(i);
    } else {
      dropped_idx.push_back(i);
    }
  }
  // Accumulate dropped configurations in canonical key order so the sums do
  // not depend on the source axis layout.
  std::sort(dropped_idx.begin(), dropped_idx.end(), [&](std::size_t a, std::size_t b) {
    return table.axes()[a].key() < table.axes()[b].key();
  });

  std::size_t cells = 1;
  for (const auto& ax : result_axes) cells *= static_cast<std::size_t>(ax.card);
  std::vector<double> result(cells, 0.0);
  JointTable shape(result_axes, std::vector<double>(cells, 0.0));

  std::vector<int> config(table.num_axes(), 0);
  std::vector<int> result_config(result_axes.size(), 0);
  for (std::size_t rflat = 0; rflat < cells; ++rflat) {
    shape.config_of(rflat, result_config);
    for (std::size_t k = 0; k < kept_idx.size(); ++k) config[kept_idx[k]] = result_config[k];
    for (const std::size_t i : dropped_idx) config[i] = 0;
    double total = 0.0;
    if (dropped_idx.empty()) {
      total = table.prob(config);
    } else {
      do {
        total += table.prob(config);
      } while (table.advance_config(config, dropped_idx));
    }
    result[rflat] = total;
  }
  return JointTable(std::move(result_axes), std::move(result));
}

/// Conditional distribution over the remaining axes given observed values.
/// A zero-mass slice throws ZeroMassContext unless the uniform fallback is
/// selected, in which case `fallback_count` (when given) is incremented.
inline JointTable condition(const JointTable& table,
                            std::span<const std::pair<AxisKey, int>> given,
                            ZeroMassPolicy policy = ZeroMassPolicy::kThrow,
                            std::size_t* fallback_count = nullptr) {
  std::vector<int> forced(table.num_axes(), -1);
  for (const auto& [key, value] : given) {
    const std::size_t idx = table.axis_index(key);
    if (idx == JointTable::npos) {
      throw DimensionMismatch("condition: unknown axis " + to_string(key));
    }
    if (forced[idx] != -1) throw DimensionMismatch("condition: duplicate axis " + to_string(key));
    if (value < 0 || value >= table.axes()[idx].card) {
      throw DimensionMismatch("condition: value out of range for axis " + to_string(key));
    }
    forced[idx] = value;
  }
  std::vector<Axis> result_axes;
  std::vector<std::size_t> free_idx;
  for (std::size_t i = 0; i < table.num_axes(); ++i) {
    if (forced[i] == -1) {
      result_axes.push_back(table.axes()[i]);
      free_idx.push_back(i);
    }
  }
  std::size_t cells = 1;
  for (const auto& ax : result_axes) cells *= static_cast<std::size_t>(ax.card);

  std::vector<std::size_t> canon = free_idx;
  std::sort(canon.begin(), canon.end(), [&](std::size_t a, std::size_t b) {
    return table.axes()[a].key() < table.axes()[b].key();
  });
  std::vector<int> config(table.num_axes(), 0);
  for (std::size_t i = 0; i < config.size(); ++i) config[i] = forced[i] == -1 ? 0 : forced[i];
  double mass = 0.0;
  do {
    mass += table.prob(config);
  } while (table.advance_config(config, canon));

  if (mass <= 0.0) {
    if (policy == ZeroMassPolicy::kThrow) {
      std::string ctx;
      for (const auto& [key, value] : given) {
        ctx += " " + to_string(key) + "=" + std::to_string(value);
      }
      throw ZeroMassContext("condition: zero-mass context" + ctx);
    }
    if (fallback_count) ++(*fallback_count);
    return JointTable::uniform(std::move(result_axes));
  }

  std::vector<double> result(cells, 0.0);
  JointTable shape(result_axes, std::vector<double>(cells, 0.0));
  std::vector<int> result_config(result_axes.size(), 0);
  for (std::size_t rflat = 0; rflat < cells; ++rflat) {
    shape.config_of(rflat, result_config);
    for (std::size_t i = 0; i < config.size(); ++i) config[i] = forced[i] == -1 ? 0 : forced[i];
    for (std::size_t k = 0; k < free_idx.size(); ++k) config[free_idx[k]] = result_config[k];
    result[rflat] = table.prob(config) / mass;
  }
  return JointTable(std::move(result_axes), std::move(result));
}

/// Product of factors over pairwise disjoint axis sets; the result carries the
/// factors' axes in argument order and is normalized iff every factor is.
inline JointTable product(std::span<const JointTable* const> factors) {
  std::vector<Axis> axes;
  for (const JointTable* f : factors) {
    for (const auto& ax : f->axes()) {
      for (const auto& existing : axes) {
        if (existing.key() == ax.key()) {
          throw DimensionMismatch("product: overlapping axis " + to_string(ax.key()));
        }
      }
      axes.push_back(ax);
    }
  }
  std::size_t cells = 1;
  for (const auto& ax : axes) cells *= static_cast<std::size_t>(ax.card);
  std::vector<double> result(cells, 0.0);
  JointTable shape(axes, std::vector<double>(cells, 0.0));
  std::vector<int> config(axes.size(), 0);
  std::vector<int> sub;
  for (std::size_t flat = 0; flat < cells; ++flat) {
    shape.config_of(flat, config);
    double value = 1.0;
    std::size_t offset = 0;
    for (const JointTable* f : factors) {
      sub.assign(config.begin() + offset, config.begin() + offset + f->num_axes());
      value *= f->prob(sub);
      offset += f->num_axes();
    }
    result[flat] = value;
  }
  return JointTable(std::move(axes), std::move(result));
}

inline JointTable product(const JointTable& a, const JointTable& b) {
  const JointTable* factors[] = {&a, &b};
  return product(std::span<const JointTable* const>(factors, 2));
}

/// Axes of a full d-by-N block, position-major: (0,0),(1,0),...,(0,1),(1,1),...
inline std::vector<Axis> grid_axes(int num_vars, int num_positions,
                                   std::span<const int> cards) {
  std::vector<Axis> axes;
  axes.reserve(static_cast<std::size_t>(num_vars) * num_positions);
  for (int n = 0; n < num_positions; ++n) {
    for (int i = 0; i < num_vars; ++i) {
      axes.push_back({i, n, cards[static_cast<std::size_t>(i)]});
    }
  }
  return axes;
}

}  // namespace dofinetti
