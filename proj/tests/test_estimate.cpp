#include <catch_amalgamated.hpp>

#include <cmath>
#include <vector>

#include "dofinetti/estimate.hpp"
#include "dofinetti/oracle.hpp"
#include "dofinetti/simulate.hpp"
#include "test_support.hpp"

using namespace dofinetti;

namespace {

const std::vector<BivariateGraph> kGraphs = {BivariateGraph::kXtoY, BivariateGraph::kYtoX,
                                             BivariateGraph::kIndependent};

JointTable random_product_form_table(SplitMix64& rng) {
  // positions independent, arbitrary per-position pair blocks
  const JointTable b0 = testing::random_table({{0, 0, 2}, {1, 0, 2}}, rng);
  const JointTable b1 = testing::random_table({{0, 1, 2}, {1, 1, 2}}, rng);
  return product(b0, b1);
}

}  // namespace

TEST_CASE("fit_joint: counting basics") {
  ExchangeableDataset one(1, 2, {2, 2});
  one.set_value(0, 0, 0, 1);
  one.set_value(0, 1, 1, 1);
  const JointTable t1 = fit_joint(one);
  CHECK(t1.prob(std::vector<int>{1, 0, 0, 1}) == 1.0);
  CHECK(t1.sum() == 1.0);

  ExchangeableDataset two(2, 1, {2, 2});
  two.set_value(0, 0, 0, 0);
  two.set_value(1, 0, 0, 1);
  const JointTable t2 = fit_joint(two);
  CHECK(t2.prob(std::vector<int>{0, 0}) == 0.5);
  CHECK(t2.prob(std::vector<int>{1, 0}) == 0.5);

  // additive smoothing keeps normalization
  const JointTable t3 = fit_joint(two, 0.5);
  CHECK(t3.sum() == Catch::Approx(1.0).margin(1e-12));
  CHECK(t3.prob(std::vector<int>{0, 1}) > 0.0);
}

TEST_CASE("fit_joint: matches the quadrature oracle at E = 10^5") {
  const int envs = 100000;
  const ExchangeableDataset data =
      sample_icm_bivariate(BivariateGraph::kXtoY, BetaPrior(1.0, 3.0), envs, 2, 99);
  const JointTable fitted = fit_joint(data);
  const JointTable truth =
      quadrature_block_table(BivariateGraph::kXtoY, BetaPrior(1.0, 3.0), 2, 64)
          .aligned_with(fitted);
  const std::vector<int> cell = {0, 0, 0, 0};
  const double p = truth.prob(cell);
  const double sigma = std::sqrt(p * (1.0 - p) / envs);
  CHECK(std::abs(fitted.prob(cell) - p) <= 3.0 * sigma);

  // marginal of X1 recovers the Beta(1,3) prior mean 1/4
  const std::vector<AxisKey> x1 = {{0, 0}};
  const JointTable m = marginalize(fitted, x1);
  CHECK(std::abs(m[1] - 0.25) <= 3.0 * std::sqrt(0.25 * 0.75 / envs));
}

TEST_CASE("truncated factorization over quadrature-oracle factors matches the integral form") {
  // Assembling the factorization's conditionals from the numerically integrated block
  // reproduces the directly integrated post-interventional mixture.
  const BetaPrior prior(1.0, 3.0);
  for (const auto graph : kGraphs) {
    const JointTable block = quadrature_block_table(graph, prior, 2, 64);
    const Dag dag = Dag::bivariate(graph);
    for (int value = 0; value < 2; ++value) {
      InterventionSet interv;
      interv.add(0, 0, value);
      const JointTable engine = truncated_factorization(block, dag, interv);
      const JointTable integral = quadrature_post_interventional(graph, prior, interv, 2, 64);
      CHECK(engine.max_abs_diff(integral) <= 1e-9);
    }
  }
}

TEST_CASE("truncated factorization: empty intervention is the identity on ICM tables") {
  const JointTable analytic = analytic_block_table(BivariateGraph::kXtoY, BetaPrior(1, 3), 2);
  const JointTable out = truncated_factorization(analytic, Dag::bivariate(BivariateGraph::kXtoY),
                                                 InterventionSet{});
  CHECK(out.max_abs_diff(analytic) <= 1e-12);

  SplitMix64 rng(7);
  const Dag chain(3, {{0, 1}, {1, 2}});
  const JointTable mixture = testing::random_icm_table(chain, {2, 2, 2}, 2, rng);
  const JointTable out3 = truncated_factorization(mixture, chain, InterventionSet{});
  CHECK(out3.max_abs_diff(mixture) <= 1e-12);
}

TEST_CASE("truncated factorization: reduces to the classical formula on product-form tables") {
  SplitMix64 rng(11);
  for (int trial = 0; trial < 100; ++trial) {
    const JointTable table = random_product_form_table(rng);
    const auto graph = kGraphs[trial % kGraphs.size()];
    const Dag dag = Dag::bivariate(graph);
    InterventionSet interv;
    interv.add(static_cast<int>(rng.below(2)), static_cast<int>(rng.below(2)),
               static_cast<int>(rng.below(2)));
    const JointTable exch = truncated_factorization(table, dag, interv);
    const JointTable iid = testing::brute_iid_truncated_factorization(table, dag, interv);
    CHECK(exch.max_abs_diff(iid) <= 1e-12);
  }
}

TEST_CASE("truncated factorization: golden conditional 0.8 on the analytic table") {
  const JointTable analytic = analytic_block_table(BivariateGraph::kXtoY, BetaPrior(1, 3), 2);
  InterventionSet interv;
  interv.add(0, 0, 0);  // do(X1 = 0)
  const JointTable post =
      truncated_factorization(analytic, Dag::bivariate(BivariateGraph::kXtoY), interv);
  const std::pair<AxisKey, int> given[] = {{AxisKey{0, 1}, 0}, {AxisKey{1, 1}, 0}};
  const JointTable cond = condition(post, given);
  const std::vector<AxisKey> y1 = {{1, 0}};
  const JointTable m = marginalize(cond, y1);
  CHECK(std::abs(m[0] - 0.8) <= 1e-10);
}

TEST_CASE("truncated factorization: matches the analytic post-interventional oracle") {
  const BetaPrior prior(1.0, 3.0);
  for (const auto graph : kGraphs) {
    const JointTable block = analytic_block_table(graph, prior, 2);
    const Dag dag = Dag::bivariate(graph);
    for (int var = 0; var < 2; ++var) {
      for (int pos = 0; pos < 2; ++pos) {
        for (int value = 0; value < 2; ++value) {
          InterventionSet interv;
          interv.add(var, pos, value);
          const JointTable engine = truncated_factorization(block, dag, interv);
          const JointTable oracle = analytic_post_interventional(graph, prior, interv);
          CHECK(engine.max_abs_diff(oracle) <= 1e-10);
          CHECK(std::abs(engine.sum() - 1.0) <= 1e-10);
        }
      }
    }
  }
}

TEST_CASE("truncated factorization: agrees with the direct-summation reference") {
  SplitMix64 rng(13);
  const Dag chain(3, {{0, 1}, {1, 2}});
  const Dag collider(3, {{0, 2}, {1, 2}});
  for (int trial = 0; trial < 20; ++trial) {
    for (const Dag& dag : {chain, collider}) {
      const JointTable table = testing::random_icm_table(dag, {2, 2, 2}, 2, rng);
      // one to three assignments, possibly several variables and positions
      InterventionSet interv;
      const int wanted = 1 + static_cast<int>(rng.below(3));
      while (static_cast<int>(interv.size()) < wanted) {
        const int var = static_cast<int>(rng.below(3));
        const int pos = static_cast<int>(rng.below(2));
        if (!interv.find({var, pos})) interv.add(var, pos, static_cast<int>(rng.below(2)));
      }
      const JointTable engine = truncated_factorization(table, dag, interv);
      const JointTable reference = testing::brute_truncated_factorization(table, dag, interv);
      CHECK(engine.max_abs_diff(reference) <= 1e-10);
      CHECK(std::abs(engine.sum() - 1.0) <= 1e-10);
    }
  }
}

TEST_CASE("answer_query: unconditional effect is 3/4, the normalized closed form") {
  // The unnormalized marginal-likelihood read-off would give 1/4; the
  // normalized posterior predictive gives P(Y1=0 | do(X1=0)) = 3/4, confirmed
  // by the quadrature oracle below.
  const JointTable analytic = analytic_block_table(BivariateGraph::kXtoY, BetaPrior(1, 3), 2);
  Query q;
  q.intervention.add(0, 0, 0);
  q.targets = {{1, 0}};
  const JointTable out = answer_query(analytic, Dag::bivariate(BivariateGraph::kXtoY), q);
  CHECK(std::abs(out[0] - 0.75) <= 1e-10);

  InterventionSet interv;
  interv.add(0, 0, 0);
  const JointTable quad =
      quadrature_post_interventional(BivariateGraph::kXtoY, BetaPrior(1, 3), interv);
  const std::vector<AxisKey> y1 = {{1, 0}};
  CHECK(std::abs(marginalize(quad, y1)[0] - 0.75) <= 1e-9);
}

TEST_CASE("answer_query: conditioning on the second pair gives 0.8") {
  const JointTable analytic = analytic_block_table(BivariateGraph::kXtoY, BetaPrior(1, 3), 2);
  Query q;
  q.intervention.add(0, 0, 0);
  q.targets = {{1, 0}};
  q.conditioning = {{{0, 1}, 0}, {{1, 1}, 0}};
  const JointTable out = answer_query(analytic, Dag::bivariate(BivariateGraph::kXtoY), q);
  CHECK(std::abs(out[0] - 0.8) <= 1e-10);
}

TEST_CASE("answer_query: cross-position interventions do not move the target") {
  SplitMix64 rng(17);
  for (const auto graph : kGraphs) {
    const Dag dag = Dag::bivariate(graph);
    const JointTable analytic = analytic_block_table(graph, BetaPrior(1, 3), 2);
    const JointTable mixture = testing::random_icm_table(dag, {2, 2}, 2, rng);
    for (const JointTable* table : {&analytic, &mixture}) {
      Query q;
      q.intervention.add(0, 0, 1);  // do(X1)
      q.targets = {{1, 1}};         // Y2
      const JointTable out = answer_query(*table, dag, q);
      const JointTable plain = marginalize(*table, q.targets);
      CHECK(out.max_abs_diff(plain) <= 1e-12);
    }
  }
}

TEST_CASE("answer_query: position symmetry of interventions on symmetrized tables") {
  SplitMix64 rng(19);
  for (int trial = 0; trial < 30; ++trial) {
    const auto graph = kGraphs[trial % kGraphs.size()];
    const Dag dag = Dag::bivariate(graph);
    const JointTable table =
        testing::random_table({{0, 0, 2}, {1, 0, 2}, {0, 1, 2}, {1, 1, 2}}, rng)
            .symmetrized_positions();
    const int var = static_cast<int>(rng.below(2));
    const int value = static_cast<int>(rng.below(2));
    Query q0, q1;
    q0.intervention.add(var, 0, value);
    q0.targets = {{1 - var, 0}};
    q1.intervention.add(var, 1, value);
    q1.targets = {{1 - var, 1}};
    const JointTable at0 = answer_query(table, dag, q0);
    const JointTable at1 = answer_query(table, dag, q1);
    REQUIRE(at0.num_cells() == at1.num_cells());
    for (std::size_t i = 0; i < at0.num_cells(); ++i) {
      CHECK(std::abs(at0[i] - at1[i]) <= 1e-13);
    }
  }
}

TEST_CASE("answer_query: conditional-intervention product form as a cross-check") {
  // P(X_{-I;n} | do(X_{I;n}), X_{:;S}) = prod_{i not in I} P(X_{i;n} | X_{i;S}, PA_{i;S+n})
  SplitMix64 rng(23);
  for (int trial = 0; trial < 20; ++trial) {
    const auto graph = kGraphs[trial % kGraphs.size()];
    const Dag dag = Dag::bivariate(graph);
    const JointTable table = testing::random_icm_table(dag, {2, 2}, 2, rng);
    const int var = static_cast<int>(rng.below(2));
    const int value = static_cast<int>(rng.below(2));
    const int other = 1 - var;
    const int x2 = static_cast<int>(rng.below(2));
    const int y2 = static_cast<int>(rng.below(2));

    Query q;
    q.intervention.add(var, 0, value);  // intervene at position 0
    q.targets = {{other, 0}};
    q.conditioning = {{{0, 1}, x2}, {{1, 1}, y2}};  // condition on position 1
    const JointTable engine = answer_query(table, dag, q);

    // direct product form on the observational table
    for (int target_value = 0; target_value < 2; ++target_value) {
      std::vector<int> config(4, 0);
      config[table.axis_index({var, 0})] = value;
      config[table.axis_index({other, 0})] = target_value;
      config[table.axis_index({0, 1})] = x2;
      config[table.axis_index({1, 1})] = y2;
      std::vector<AxisKey> child = {{other, 0}};
      std::vector<AxisKey> given = {{other, 1}};
      for (const int p : dag.parents(other)) {
        given.push_back({p, 0});
        given.push_back({p, 1});
      }
      const double lemma = testing::direct_conditional(table, config, child, given);
      CHECK(std::abs(engine[static_cast<std::size_t>(target_value)] - lemma) <= 1e-10);
    }
  }
}

TEST_CASE("answer_query: error taxonomy") {
  const JointTable analytic = analytic_block_table(BivariateGraph::kXtoY, BetaPrior(1, 3), 2);
  const Dag dag = Dag::bivariate(BivariateGraph::kXtoY);

  Query contradict;
  contradict.intervention.add(0, 0, 0);
  contradict.targets = {{1, 0}};
  contradict.conditioning = {{{0, 0}, 1}};  // conflicts with do(X1 = 0)
  CHECK_THROWS_AS(answer_query(analytic, dag, contradict), ConditioningInconsistent);

  Query overlap;
  overlap.intervention.add(0, 0, 0);
  overlap.targets = {{0, 0}};
  CHECK_THROWS_AS(answer_query(analytic, dag, overlap), DimensionMismatch);

  // zero-mass context: no cell has x1 = 1 with x2 = 1, but P(x2 = 1) > 0
  std::vector<double> cells(16, 0.0);
  JointTable shape(analytic.axes(), std::vector<double>(16, 0.0));
  std::vector<int> config(4);
  double mass = 0.0;
  for (std::size_t flat = 0; flat < 16; ++flat) {
    shape.config_of(flat, config);
    if (config[0] == 1 && config[2] == 1) continue;
    cells[flat] = 1.0;
    mass += 1.0;
  }
  for (auto& c : cells) c /= mass;
  const JointTable gappy(analytic.axes(), std::move(cells));
  InterventionSet fatal;
  fatal.add(0, 0, 1);
  CHECK_THROWS_AS(truncated_factorization(gappy, dag, fatal), ZeroMassContext);
  std::size_t fallbacks = 0;
  const JointTable rescued =
      truncated_factorization(gappy, dag, fatal, ZeroMassPolicy::kUniform, &fallbacks);
  CHECK(fallbacks > 0);
  CHECK(std::abs(rescued.sum() - 1.0) <= 1e-10);
}

TEST_CASE("parent adjustment: no parents reduces to the plain conditional") {
  const JointTable analytic = analytic_block_table(BivariateGraph::kXtoY, BetaPrior(1, 3), 2);
  const Dag dag = Dag::bivariate(BivariateGraph::kXtoY);
  InterventionSet interv;
  interv.add(0, 0, 0);
  interv.add(0, 1, 0);  // do(X1 = 0, X2 = 0): PA_X is empty
  const std::vector<AxisKey> targets = {{1, 0}, {1, 1}};
  const JointTable adj = parent_adjustment(analytic, dag, interv, targets);
  const std::pair<AxisKey, int> given[] = {{AxisKey{0, 0}, 0}, {AxisKey{0, 1}, 0}};
  const JointTable direct = marginalize(condition(analytic, given), targets);
  CHECK(adj.max_abs_diff(direct) <= 1e-12);
}

TEST_CASE("parent adjustment: agrees with answer_query on randomized bivariate queries") {
  SplitMix64 rng(29);
  for (int trial = 0; trial < 50; ++trial) {
    const auto graph = kGraphs[trial % kGraphs.size()];
    const Dag dag = Dag::bivariate(graph);
    const JointTable table = testing::random_icm_table(dag, {2, 2}, 2, rng);
    const int var = static_cast<int>(rng.below(2));
    InterventionSet interv;
    Query q;
    const bool both_positions = rng.below(2) == 1;
    interv.add(var, 0, static_cast<int>(rng.below(2)));
    if (both_positions) interv.add(var, 1, static_cast<int>(rng.below(2)));
    q.intervention = interv;
    q.targets = {{1 - var, 0}};
    if (both_positions && rng.below(2) == 1) q.targets.push_back({1 - var, 1});
    const JointTable via_query = answer_query(table, dag, q);
    const JointTable via_adjustment = parent_adjustment(table, dag, interv, q.targets);
    CHECK(via_adjustment.max_abs_diff(via_query) <= 1e-10);
  }
}

TEST_CASE("parent adjustment: chain graph against the direct-summation reference") {
  SplitMix64 rng(31);
  const Dag chain(3, {{0, 1}, {1, 2}});
  for (int trial = 0; trial < 10; ++trial) {
    const JointTable table = testing::random_icm_table(chain, {2, 2, 2}, 2, rng);
    InterventionSet interv;
    interv.add(1, 0, static_cast<int>(rng.below(2)));
    interv.add(1, 1, static_cast<int>(rng.below(2)));  // do(Y1, Y2)
    const std::vector<AxisKey> targets = {{2, 0}, {0, 1}};
    const JointTable adj = parent_adjustment(table, chain, interv, targets);
    const JointTable reference = marginalize(
        testing::brute_truncated_factorization(table, chain, interv), targets);
    CHECK(adj.max_abs_diff(reference) <= 1e-10);
  }
}

TEST_CASE("parent adjustment: inconsistent patterns are rejected") {
  const JointTable analytic = analytic_block_table(BivariateGraph::kXtoY, BetaPrior(1, 3), 2);
  const Dag dag = Dag::bivariate(BivariateGraph::kXtoY);
  InterventionSet skewed;
  skewed.add(0, 0, 0);
  skewed.add(1, 1, 0);  // position 0 intervenes {X}, position 1 intervenes {Y}
  const std::vector<AxisKey> targets = {{1, 0}};
  CHECK_THROWS_AS(parent_adjustment(analytic, dag, skewed, targets),
                  InconsistentInterventionPattern);

  InterventionSet fine;
  fine.add(0, 0, 0);
  const std::vector<AxisKey> outside = {{1, 1}};  // target outside covered positions
  CHECK_THROWS_AS(parent_adjustment(analytic, dag, fine, outside), DimensionMismatch);
}

TEST_CASE("normalization: randomized queries stay normalized") {
  SplitMix64 rng(37);
  for (int trial = 0; trial < 40; ++trial) {
    const auto graph = kGraphs[trial % kGraphs.size()];
    const Dag dag = Dag::bivariate(graph);
    const JointTable table = testing::random_icm_table(dag, {2, 2}, 2, rng);
    InterventionSet interv;
    interv.add(static_cast<int>(rng.below(2)), static_cast<int>(rng.below(2)),
               static_cast<int>(rng.below(2)));
    const JointTable post = truncated_factorization(table, dag, interv);
    CHECK(std::abs(post.sum() - 1.0) <= 1e-10);
  }
}
