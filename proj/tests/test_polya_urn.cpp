#include <catch_amalgamated.hpp>

#include <array>
#include <cmath>
#include <map>
#include <sstream>
#include <vector>

#include "dofinetti/polya_urn.hpp"

using namespace dofinetti;

TEST_CASE("urn: symmetric single draw") {
  const BetaPrior prior(1.0, 1.0);
  const int runs = 100000;
  int ones = 0;
  for (int r = 0; r < runs; ++r) {
    const UrnTrace t = polya_urn_run(prior, 1, {}, 9000 + r);
    ones += t.xs[0];
  }
  const double freq = static_cast<double>(ones) / runs;
  CHECK(std::abs(freq - 0.5) <= 3.0 * std::sqrt(0.25 / runs));
}

TEST_CASE("urn: ball-count invariant after k steps") {
  const BetaPrior prior(2.0, 3.0);
  const UrnTrace t = polya_urn_run(prior, 50, {{7, 0}, {13, 1}}, 4);
  for (std::size_t k = 0; k < t.states.size(); ++k) {
    const auto& s = t.states[k];
    CHECK(s.step == static_cast<std::int64_t>(k));
    CHECK(s.left_total() == 5 + static_cast<std::int64_t>(k));
    CHECK(s.right_total() == 5 + static_cast<std::int64_t>(k));
  }
  for (std::size_t n = 0; n < t.xs.size(); ++n) {
    CHECK(t.zs[n] == (t.xs[n] ^ t.ys[n]));
  }
  CHECK(t.xs[7] == 0);
  CHECK(t.xs[13] == 1);
}

TEST_CASE("urn: closed form at n = 1") {
  // alpha = beta = 1: P(x=1, y=1) = P(x=1) P(z=0) = 1/2 * 1/2 = 1/4.
  const BetaPrior prior(1.0, 1.0);
  const int x[] = {1}, y[] = {1};
  CHECK(std::exp(polya_joint_log_prob(x, y, prior)) == Catch::Approx(0.25).margin(1e-12));
  // alpha = 1, beta = 3: P(x=1) = 1/4, z = 0 has P = 3/4.
  const BetaPrior skew(1.0, 3.0);
  CHECK(std::exp(polya_joint_log_prob(x, y, skew)) ==
        Catch::Approx(0.25 * 0.75).margin(1e-12));
}

TEST_CASE("urn: log probability is permutation invariant") {
  const BetaPrior prior(2.0, 2.0);
  const std::vector<int> xs = {1, 0, 1, 1, 0, 0, 1};
  const std::vector<int> ys = {0, 0, 1, 0, 1, 1, 1};
  const double base = polya_joint_log_prob(xs, ys, prior);
  std::vector<int> order = {3, 1, 6, 0, 5, 2, 4};
  std::vector<int> px(xs.size()), py(ys.size());
  for (std::size_t i = 0; i < order.size(); ++i) {
    px[i] = xs[order[i]];
    py[i] = ys[order[i]];
  }
  CHECK(std::abs(polya_joint_log_prob(px, py, prior) - base) <= 1e-12);
}

TEST_CASE("urn: closed form sums to one over all sequences") {
  for (const auto& prior : {BetaPrior(1.0, 1.0), BetaPrior(1.0, 3.0), BetaPrior(2.0, 2.0)}) {
    for (int n = 1; n <= 3; ++n) {
      double total = 0.0;
      for (int mask = 0; mask < (1 << (2 * n)); ++mask) {
        std::vector<int> xs(n), ys(n);
        for (int i = 0; i < n; ++i) {
          xs[i] = (mask >> (2 * i)) & 1;
          ys[i] = (mask >> (2 * i + 1)) & 1;
        }
        total += std::exp(polya_joint_log_prob(xs, ys, prior));
      }
      CHECK(total == Catch::Approx(1.0).margin(1e-10));
    }
  }
}

TEST_CASE("urn: simulated frequencies match the closed form (n = 3)") {
  const BetaPrior prior(1.0, 3.0);
  const int runs = 100000, n = 3;
  std::map<int, int> counts;
  for (int r = 0; r < runs; ++r) {
    const UrnTrace t = polya_urn_run(prior, n, {}, 50000 + r);
    int key = 0;
    for (int i = 0; i < n; ++i) key |= (t.xs[i] << (2 * i)) | (t.ys[i] << (2 * i + 1));
    counts[key]++;
  }
  for (int mask = 0; mask < (1 << (2 * n)); ++mask) {
    std::vector<int> xs(n), ys(n);
    for (int i = 0; i < n; ++i) {
      xs[i] = (mask >> (2 * i)) & 1;
      ys[i] = (mask >> (2 * i + 1)) & 1;
    }
    const double p = std::exp(polya_joint_log_prob(xs, ys, prior));
    const double freq = static_cast<double>(counts[mask]) / runs;
    const double sigma = std::sqrt(p * (1.0 - p) / runs);
    CHECK(std::abs(freq - p) <= 3.5 * sigma);
  }
}

TEST_CASE("urn: intervention raises P(Y=1) after a black-heavy history") {
  // 20 steps of (X=1, Y=0) add 20 black balls to each compartment; a forced
  // white X then almost surely disagrees with the right ball.
  const BetaPrior prior(1.0, 1.0);
  const int runs = 20000, history = 20;
  int y_do = 0, y_obs = 0;
  for (int r = 0; r < runs; ++r) {
    UrnState s = UrnState::initial(prior);
    for (int k = 0; k < history; ++k) s.apply(1, 1);
    SplitMix64 rng_do(derive_stream(31337, {static_cast<std::uint64_t>(r), 0}));
    SplitMix64 rng_obs(derive_stream(31337, {static_cast<std::uint64_t>(r), 1}));
    UrnState s_do = s, s_obs = s;
    y_do += urn_step(s_do, rng_do, 0).y;
    y_obs += urn_step(s_obs, rng_obs).y;
  }
  const double p_do = static_cast<double>(y_do) / runs;
  const double p_obs = static_cast<double>(y_obs) / runs;
  const double sigma =
      std::sqrt(p_do * (1 - p_do) / runs + p_obs * (1 - p_obs) / runs);
  CHECK(p_do - p_obs > 3.0 * sigma);
  // analytic values: P(Y=1 | do(X=0)) = 21/22, P(Y=1) = 2 * (21/22) * (1/22)
  CHECK(std::abs(p_do - 21.0 / 22.0) <= 5.0 * std::sqrt(p_do * (1 - p_do) / runs) + 1e-3);
}

TEST_CASE("urn: trace csv layout") {
  const UrnTrace t = polya_urn_run(BetaPrior(1.0, 1.0), 3, {{1, 1}}, 12);
  std::stringstream ss;
  t.write_csv(ss);
  std::string header;
  std::getline(ss, header);
  CHECK(header == "step,x,y,z,intervened,left_black,left_white,right_black,right_white");
  int rows = 0;
  std::string line;
  while (std::getline(ss, line)) {
    if (!line.empty()) ++rows;
  }
  CHECK(rows == 3);
}

TEST_CASE("urn: determinism and precondition checks") {
  const UrnTrace a = polya_urn_run(BetaPrior(2.0, 1.0), 40, {{3, 0}}, 5);
  const UrnTrace b = polya_urn_run(BetaPrior(2.0, 1.0), 40, {{3, 0}}, 5);
  CHECK(a.xs == b.xs);
  CHECK(a.ys == b.ys);
  CHECK_THROWS_AS(polya_urn_run(BetaPrior(1.5, 1.0), 5, {}, 1), std::invalid_argument);
  CHECK_THROWS_AS(polya_urn_run(BetaPrior(1.0, 1.0), 5, {{9, 0}}, 1), std::invalid_argument);
  const std::vector<int> xs = {1}, ys = {1};
  CHECK_THROWS_AS(polya_joint_log_prob(xs, std::vector<int>{}, BetaPrior(1, 1)),
                  std::invalid_argument);
}
