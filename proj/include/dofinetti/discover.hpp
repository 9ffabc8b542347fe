#pragma once

#include <cmath>
#include <cstdint>
#include <ostream>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include "dofinetti/dag.hpp"
#include "dofinetti/dataset.hpp"
#include "dofinetti/errors.hpp"
#include "dofinetti/joint_table.hpp"
#include "dofinetti/rng.hpp"
#include "dofinetti/special.hpp"

namespace dofinetti {

struct CiTestResult {
  double statistic = 0.0;
  int degrees_of_freedom = 1;
  double p_value = 1.0;
};

namespace detail {

/// Likelihood-ratio (G) statistic of independence on one r-by-c contingency
/// table; empty cells and margins contribute nothing.
inline double g_statistic(std::span<const double> counts, int rows, int cols) {
  std::vector<double> row_sum(rows, 0.0), col_sum(cols, 0.0);
  double total = 0.0;
  for (int r = 0; r < rows; ++r) {
    for (int c = 0; c < cols; ++c) {
      const double o = counts[static_cast<std::size_t>(r) * cols + c];
      row_sum[r] += o;
      col_sum[c] += o;
      total += o;
    }
  }
  if (total <= 0.0) return 0.0;
  double g = 0.0;
  for (int r = 0; r < rows; ++r) {
    for (int c = 0; c < cols; ++c) {
      const double o = counts[static_cast<std::size_t>(r) * cols + c];
      if (o <= 0.0) continue;
      const double expected = row_sum[r] * col_sum[c] / total;
      g += 2.0 * o * std::log(o / expected);
    }
  }
  return g;
}

inline double min_expected_count(std::span<const double> counts, int rows, int cols) {
  std::vector<double> row_sum(rows, 0.0), col_sum(cols, 0.0);
  double total = 0.0;
  for (int r = 0; r < rows; ++r) {
    for (int c = 0; c < cols; ++c) {
      const double o = counts[static_cast<std::size_t>(r) * cols + c];
      row_sum[r] += o;
      col_sum[c] += o;
      total += o;
    }
  }
  if (total <= 0.0) return 0.0;
  double worst = total;
  for (int r = 0; r < rows; ++r) {
    for (int c = 0; c < cols; ++c) {
      worst = std::min(worst, row_sum[r] * col_sum[c] / total);
    }
  }
  return worst;
}

}  // namespace detail

/// G-test of a _||_ b | cond on the environment-level contingency table: each
/// environment contributes one sample of the tuple. Degrees of freedom are
/// (|a|-1)(|b|-1) * prod |cond|. With `strict_validity`, a stratum whose
/// minimum expected cell count falls below 5 raises InsufficientData.
inline CiTestResult ci_test(const ExchangeableDataset& data, const AxisKey& a, const AxisKey& b,
                            std::span<const AxisKey> cond, bool strict_validity = false) {
  std::vector<AxisKey> all{a, b};
  all.insert(all.end(), cond.begin(), cond.end());
  for (std::size_t i = 0; i < all.size(); ++i) {
    if (all[i].var < 0 || all[i].var >= data.num_vars() || all[i].pos < 0 ||
        all[i].pos >= data.num_positions()) {
      throw DimensionMismatch("ci_test: axis " + to_string(all[i]) + " out of range");
    }
    for (std::size_t j = i + 1; j < all.size(); ++j) {
      if (all[i] == all[j]) throw DimensionMismatch("ci_test: repeated axis " + to_string(all[i]));
    }
  }
  const int ca = data.cardinality(a.var);
  const int cb = data.cardinality(b.var);
  std::size_t num_strata = 1;
  for (const auto& k : cond) num_strata *= static_cast<std::size_t>(data.cardinality(k.var));

  std::vector<double> counts(num_strata * ca * cb, 0.0);
  for (int e = 0; e < data.num_envs(); ++e) {
    std::size_t stratum = 0;
    for (const auto& k : cond) {
      stratum = stratum * static_cast<std::size_t>(data.cardinality(k.var)) +
                static_cast<std::size_t>(data.value(e, k.pos, k.var));
    }
    const int va = data.value(e, a.pos, a.var);
    const int vb = data.value(e, b.pos, b.var);
    counts[(stratum * ca + va) * cb + vb] += 1.0;
  }

  CiTestResult result;
  result.degrees_of_freedom = (ca - 1) * (cb - 1) * static_cast<int>(num_strata);
  for (std::size_t s = 0; s < num_strata; ++s) {
    const std::span<const double> stratum(counts.data() + s * ca * cb,
                                          static_cast<std::size_t>(ca) * cb);
    if (strict_validity && detail::min_expected_count(stratum, ca, cb) < 5.0) {
      throw InsufficientData("ci_test: stratum " + std::to_string(s) +
                             " has expected cell count below 5");
    }
    result.statistic += detail::g_statistic(stratum, ca, cb);
  }
  result.p_value = chi_squared_sf(result.statistic, result.degrees_of_freedom);
  return result;
}

/// Discovery report: the three test p-values, the decision, the level used.
struct DiscoveryReport {
  double significance = 0.05;
  double p_marginal = 1.0;   // X1 _||_ Y1
  double p_forward = 1.0;    // Y1 _||_ X2 | X1  (clean under X->Y)
  double p_backward = 1.0;   // X1 _||_ Y2 | Y1  (clean under Y->X)
  BivariateGraph graph = BivariateGraph::kIndependent;

  void write_text(std::ostream& os) const {
    std::ostringstream fmt;
    fmt.precision(12);
    fmt << "significance = " << significance << "\n"
        << "p_marginal = " << p_marginal << "\n"
        << "p_forward = " << p_forward << "\n"
        << "p_backward = " << p_backward << "\n"
        << "graph = " << to_string(graph) << "\n";
    os << fmt.str();
  }
};

/// Bivariate structure decision from grouped data. Step 1 tests marginal
/// independence of the first pair; if rejected, the two position-crossing
/// tests orient the edge, larger p-value wins (a clean test keeps a uniform
/// p-value while the misoriented one collapses). Exact ties go to X->Y.
/// Only positions 0 and 1 feed the tests even when N > 2.
inline DiscoveryReport discover_bivariate_report(const ExchangeableDataset& data,
                                                 double significance,
                                                 bool strict_validity = false) {
  if (data.num_vars() != 2) throw DimensionMismatch("discover_bivariate: need d = 2");
  if (data.num_positions() < 2) throw DimensionMismatch("discover_bivariate: need N >= 2");
  DiscoveryReport report;
  report.significance = significance;
  const AxisKey x1{0, 0}, y1{1, 0}, x2{0, 1}, y2{1, 1};
  report.p_marginal = ci_test(data, x1, y1, {}, strict_validity).p_value;
  const AxisKey cond_fwd[] = {x1};
  const AxisKey cond_bwd[] = {y1};
  report.p_forward = ci_test(data, y1, x2, cond_fwd, strict_validity).p_value;
  report.p_backward = ci_test(data, x1, y2, cond_bwd, strict_validity).p_value;
  if (report.p_marginal > significance) {
    report.graph = BivariateGraph::kIndependent;
  } else {
    report.graph = report.p_forward >= report.p_backward ? BivariateGraph::kXtoY
                                                         : BivariateGraph::kYtoX;
  }
  return report;
}

inline BivariateGraph discover_bivariate(const ExchangeableDataset& data, double significance,
                                         bool strict_validity = false) {
  return discover_bivariate_report(data, significance, strict_validity).graph;
}

/// PC-style i.i.d. baseline: pools every (X_n, Y_n) pair across environments
/// and positions, tests marginal independence, and when adjacent draws the
/// orientation uniformly at random (a single edge cannot be oriented from
/// i.i.d. data). Seeded, so repeated calls agree.
inline BivariateGraph discover_bivariate_iid_baseline(const ExchangeableDataset& data,
                                                      double significance, std::uint64_t seed) {
  if (data.num_vars() != 2) throw DimensionMismatch("iid baseline: need d = 2");
  const int ca = data.cardinality(0);
  const int cb = data.cardinality(1);
  std::vector<double> counts(static_cast<std::size_t>(ca) * cb, 0.0);
  for (int e = 0; e < data.num_envs(); ++e) {
    for (int n = 0; n < data.num_positions(); ++n) {
      counts[static_cast<std::size_t>(data.value(e, n, 0)) * cb + data.value(e, n, 1)] += 1.0;
    }
  }
  const double g = detail::g_statistic(counts, ca, cb);
  const double p = chi_squared_sf(g, (ca - 1) * (cb - 1));
  if (p > significance) return BivariateGraph::kIndependent;
  SplitMix64 rng(derive_stream(seed, {0x6F7269656E74ull}));  // "orient"
  return rng.bernoulli(0.5) ? BivariateGraph::kXtoY : BivariateGraph::kYtoX;
}

}  // namespace dofinetti
