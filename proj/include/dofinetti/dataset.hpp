#pragma once

#include <cstdint>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace dofinetti {

/// Grouped categorical data: E environments, each holding N positions of a
/// d-variable tuple. Environments are i.i.d. copies of one exchangeable block.
class ExchangeableDataset {
 public:
  ExchangeableDataset(int num_envs, int num_positions, std::vector<int> cardinalities)
      : num_envs_(num_envs),
        num_positions_(num_positions),
        cardinalities_(std::move(cardinalities)),
        values_(static_cast<std::size_t>(num_envs) * num_positions * cardinalities_.size(),
                0) {
    if (num_envs_ <= 0 || num_positions_ <= 0 || cardinalities_.empty()) {
      throw std::invalid_argument("ExchangeableDataset: empty shape");
    }
    for (const int c : cardinalities_) {
      if (c < 2) throw std::invalid_argument("ExchangeableDataset: cardinality < 2");
    }
  }

  int num_envs() const { return num_envs_; }
  int num_positions() const { return num_positions_; }
  int num_vars() const { return static_cast<int>(cardinalities_.size()); }
  const std::vector<int>& cardinalities() const { return cardinalities_; }
  int cardinality(int var) const { return cardinalities_.at(var); }

  int value(int env, int pos, int var) const { return values_[index(env, pos, var)]; }

  void set_value(int env, int pos, int var, int v) {
    if (v < 0 || v >= cardinalities_.at(var)) {
      throw std::invalid_argument("ExchangeableDataset: value out of cardinality range");
    }
    values_[index(env, pos, var)] = static_cast<std::uint8_t>(v);
  }

  /// Returns a copy with positions reordered as pos -> perm[pos] per environment.
  ExchangeableDataset permute_positions(const std::vector<int>& perm) const {
    if (static_cast<int>(perm.size()) != num_positions_) {
      throw std::invalid_argument("permute_positions: bad permutation size");
    }
    ExchangeableDataset out(num_envs_, num_positions_, cardinalities_);
    for (int e = 0; e < num_envs_; ++e) {
      for (int n = 0; n < num_positions_; ++n) {
        for (int i = 0; i < num_vars(); ++i) {
          out.set_value(e, n, i, value(e, perm[n], i));
        }
      }
    }
    return out;
  }

  /// Returns a copy with variable indices a and b relabeled (must share cardinality).
  ExchangeableDataset swap_variables(int a, int b) const {
    if (cardinalities_.at(a) != cardinalities_.at(b)) {
      throw std::invalid_argument("swap_variables: cardinalities differ");
    }
    ExchangeableDataset out(num_envs_, num_positions_, cardinalities_);
    for (int e = 0; e < num_envs_; ++e) {
      for (int n = 0; n < num_positions_; ++n) {
        for (int i = 0; i < num_vars(); ++i) {
          const int src = i == a ? b : (i == b ? a : i);
          out.set_value(e, n, i, value(e, n, src));
        }
      }
    }
    return out;
  }

  bool operator==(const ExchangeableDataset& other) const {
    return num_envs_ == other.num_envs_ && num_positions_ == other.num_positions_ &&
           cardinalities_ == other.cardinalities_ && values_ == other.values_;
  }

  /// CSV: header `env,pos,x0,x1,...`, one row per (environment, position),
  /// 0-based indices throughout.
  void write_csv(std::ostream& os) const {
    os << "env,pos";
    for (int i = 0; i < num_vars(); ++i) os << ",x" << i;
    os << "\n";
    for (int e = 0; e < num_envs_; ++e) {
      for (int n = 0; n < num_positions_; ++n) {
        os << e << "," << n;
        for (int i = 0; i < num_vars(); ++i) os << "," << value(e, n, i);
        os << "\n";
      }
    }
  }

  /// Reads the CSV format above. Cardinalities are taken as max value + 1
  /// (at least 2) unless given explicitly.
  static ExchangeableDataset read_csv(std::istream& is,
                                      const std::vector<int>& cardinalities = {}) {
    std::string line;
    if (!std::getline(is, line)) {
      throw std::invalid_argument("dataset csv: missing header");
    }
    int num_cols = 1;
    for (const char ch : line) {
      if (ch == ',') ++num_cols;
    }
    const int d = num_cols - 2;
    if (d < 1) throw std::invalid_argument("dataset csv: expected env,pos,x0,... header");

    std::vector<std::vector<int>> rows;
    int max_env = -1, max_pos = -1;
    std::vector<int> max_val(d, 0);
    while (std::getline(is, line)) {
      if (line.empty()) continue;
      std::vector<int> fields;
      std::stringstream ss(line);
      std::string tok;
      while (std::getline(ss, tok, ',')) fields.push_back(std::stoi(tok));
      if (static_cast<int>(fields.size()) != num_cols) {
        throw std::invalid_argument("dataset csv: ragged row");
      }
      max_env = std::max(max_env, fields[0]);
      max_pos = std::max(max_pos, fields[1]);
      for (int i = 0; i < d; ++i) max_val[i] = std::max(max_val[i], fields[2 + i]);
      rows.push_back(std::move(fields));
    }
    if (rows.empty()) throw std::invalid_argument("dataset csv: no data rows");

    std::vector<int> cards = cardinalities;
    if (cards.empty()) {
      cards.resize(d);
      for (int i = 0; i < d; ++i) cards[i] = std::max(2, max_val[i] + 1);
    } else if (static_cast<int>(cards.size()) != d) {
      throw std::invalid_argument("dataset csv: cardinality count mismatch");
    }
    ExchangeableDataset data(max_env + 1, max_pos + 1, cards);
    for (const auto& row : rows) {
      for (int i = 0; i < d; ++i) data.set_value(row[0], row[1], i, row[2 + i]);
    }
    return data;
  }

 private:
  std::size_t index(int env, int pos, int var) const {
    return (static_cast<std::size_t>(env) * num_positions_ + pos) * num_vars() + var;
  }

  int num_envs_;
  int num_positions_;
  std::vector<int> cardinalities_;
  std::vector<std::uint8_t> values_;
};

}  // namespace dofinetti
