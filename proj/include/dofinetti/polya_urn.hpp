#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <ostream>
#include <span>
#include <stdexcept>
#include <vector>

#include "dofinetti/prior.hpp"
#include "dofinetti/rng.hpp"
#include "dofinetti/special.hpp"

namespace dofinetti {

/// Two-compartment urn counts. Black is the color reported as X_n = 1 on the
/// left and as Z_n = 1 on the right; each compartment starts with alpha black
/// and beta white balls, matching the closed-form joint probability in which
/// alpha tracks the successes of X and of Z.
struct UrnState {
  std::int64_t step = 0;
  std::int64_t left_black = 0;
  std::int64_t left_white = 0;
  std::int64_t right_black = 0;
  std::int64_t right_white = 0;

  static UrnState initial(const BetaPrior& prior) {
    if (!prior.is_integer() || prior.alpha < 1.0 || prior.beta < 1.0) {
      throw std::invalid_argument("UrnState: alpha, beta must be integers >= 1");
    }
    UrnState s;
    s.left_black = s.right_black = static_cast<std::int64_t>(prior.alpha);
    s.left_white = s.right_white = static_cast<std::int64_t>(prior.beta);
    return s;
  }

  std::int64_t left_total() const { return left_black + left_white; }
  std::int64_t right_total() const { return right_black + right_white; }

  /// Replacement step: one ball of X's color joins the left compartment, one
  /// of Z's color joins the right.
  void apply(int x, int z) {
    if (x) ++left_black; else ++left_white;
    if (z) ++right_black; else ++right_white;
    ++step;
  }
};

struct UrnStepResult {
  int x = 0;
  int y = 0;
  int z = 0;
};

/// One draw of the causal Polya urn. A forced X replaces the left ball's
/// effective color before Y is read; the replacement then proceeds as normal
/// with the intervened X.
inline UrnStepResult urn_step(UrnState& state, SplitMix64& rng,
                              std::optional<int> forced_x = std::nullopt) {
  UrnStepResult r;
  const bool left_black = rng.below(static_cast<std::uint64_t>(state.left_total())) <
                          static_cast<std::uint64_t>(state.left_black);
  r.x = left_black ? 1 : 0;
  if (forced_x) r.x = *forced_x;
  const bool right_black = rng.below(static_cast<std::uint64_t>(state.right_total())) <
                           static_cast<std::uint64_t>(state.right_black);
  r.z = right_black ? 1 : 0;
  r.y = r.x ^ r.z;  // colors disagree
  state.apply(r.x, r.z);
  return r;
}

/// Full run record. `states[k]` is the urn after k completed steps, so
/// `states.front()` is the initial fill and `states.back()` the final state.
struct UrnTrace {
  std::vector<int> xs, ys, zs;
  std::map<int, int> interventions;
  std::vector<UrnState> states;

  /// CSV: `step,x,y,z,intervened,left_black,left_white,right_black,right_white`
  /// with the counts taken after the step's replacement.
  void write_csv(std::ostream& os) const {
    os << "step,x,y,z,intervened,left_black,left_white,right_black,right_white\n";
    for (std::size_t n = 0; n < xs.size(); ++n) {
      const auto& s = states[n + 1];
      os << n << ',' << xs[n] << ',' << ys[n] << ',' << zs[n] << ','
         << (interventions.count(static_cast<int>(n)) ? 1 : 0) << ',' << s.left_black << ','
         << s.left_white << ',' << s.right_black << ',' << s.right_white << '\n';
    }
  }
};

inline UrnTrace polya_urn_run(const BetaPrior& prior, int n_steps,
                              const std::map<int, int>& interventions, std::uint64_t seed) {
  if (n_steps < 0) throw std::invalid_argument("polya_urn_run: n_steps must be >= 0");
  for (const auto& [pos, value] : interventions) {
    if (pos < 0 || pos >= n_steps || (value != 0 && value != 1)) {
      throw std::invalid_argument("polya_urn_run: bad intervention");
    }
  }
  UrnTrace trace;
  trace.interventions = interventions;
  UrnState state = UrnState::initial(prior);
  trace.states.push_back(state);
  SplitMix64 rng(seed);
  for (int n = 0; n < n_steps; ++n) {
    std::optional<int> forced;
    if (const auto it = interventions.find(n); it != interventions.end()) forced = it->second;
    const UrnStepResult r = urn_step(state, rng, forced);
    trace.xs.push_back(r.x);
    trace.ys.push_back(r.y);
    trace.zs.push_back(r.z);
    trace.states.push_back(state);
  }
  return trace;
}

/// Log joint probability of an observed (x, y) pair sequence under the
/// unintervened urn. Depends only on m1 = #{x=1}, m2 = #{z=1} and n, hence is
/// invariant under any permutation of the index pairs:
///   log P = log B(a+m1, b+n-m1) + log B(a+m2, b+n-m2) - 2 log B(a, b).
inline double polya_joint_log_prob(std::span<const int> xs, std::span<const int> ys,
                                   const BetaPrior& prior) {
  if (xs.size() != ys.size() || xs.empty()) {
    throw std::invalid_argument("polya_joint_log_prob: need equal nonempty sequences");
  }
  if (!prior.is_integer() || prior.alpha < 1.0 || prior.beta < 1.0) {
    throw std::invalid_argument("polya_joint_log_prob: alpha, beta must be integers >= 1");
  }
  const int n = static_cast<int>(xs.size());
  int m1 = 0, m2 = 0;
  for (int i = 0; i < n; ++i) {
    if ((xs[i] != 0 && xs[i] != 1) || (ys[i] != 0 && ys[i] != 1)) {
      throw std::invalid_argument("polya_joint_log_prob: non-binary value");
    }
    m1 += xs[i];
    m2 += xs[i] ^ ys[i];
  }
  const double a = prior.alpha;
  const double b = prior.beta;
  return log_beta(a + m1, b + n - m1) + log_beta(a + m2, b + n - m2) - 2.0 * log_beta(a, b);
}

}  // namespace dofinetti
