#include <gtest/gtest.h>

#include <cmath>

#include "epiplan/rollout.hpp"

using namespace epiplan;

namespace {

const GsirParams kTheta{0.11, {0.25, 0.07, 0.04}};

RolloutConfig config(int reps, Day start, Day horizon) {
    RolloutConfig c;
    c.replications = reps;
    c.start_day = start;
    c.horizon = horizon;
    c.schedule = DecisionSchedule::every(start, 7, horizon);
    return c;
}

DecisionRule constant(int level) {
    return [level](const RegionState&, Day) { return ActionLevel(level, 3); };
}

}  // namespace

TEST(Rollout, TransitionsCount) {
    EXPECT_EQ(config(1, 12, 120).transitions(), 109);
    RolloutConfig bad = config(0, 1, 10);
    EXPECT_THROW(bad.validate(), std::invalid_argument);
}

// Independent re-simulation of one replication from the same derived streams.
TEST(Rollout, ReplicationMatchesHandSimulation) {
    const RandomStream rng(SeedSpec{7, 0});
    const RegionState start(9500, 300, 200, 10000);
    const auto cost = default_cost_model({"A", 10000, 7000.0});
    auto cfg = config(1, 5, 30);
    cfg.sample_theta_per_rollout = false;
    const auto dist = ParamDistribution::point(kTheta);
    RolloutPath path;
    const auto out = run_replication(constant(2), start, dist, cost, cfg, rng, 3, &path);

    RandomStream dyn = rng.derive({3, 1});
    RandomStream cst = rng.derive({3, 2});
    RegionState s = start;
    double epi = 0, econ = 0;
    for (Day t = 5; t <= 30; ++t) {
        const auto step = gsir_step(s, ActionLevel(2, 3), kTheta, dyn);
        epi += static_cast<double>(step.new_infections);
        econ += sample_action_cost(cost, ActionLevel(2, 3), cst);
        s = step.next;
    }
    EXPECT_DOUBLE_EQ(out.epi, epi);
    EXPECT_DOUBLE_EQ(out.econ, econ);
    ASSERT_EQ(path.cumulative_epi.size(), 26u);
    EXPECT_DOUBLE_EQ(path.cumulative_epi.back(), epi);
    EXPECT_EQ(path.actions.front(), 2);
}

TEST(Rollout, PreviousActionUntilFirstDecision) {
    const RandomStream rng(SeedSpec{8, 0});
    auto cfg = config(1, 1, 10);
    cfg.schedule = DecisionSchedule(std::vector<Day>{5});
    cfg.previous_action = ActionLevel(3, 3);
    RolloutPath path;
    run_replication(constant(1), RegionState(990, 10, 0, 1000), ParamDistribution::point(kTheta),
                    default_cost_model({"A", 1000, 700.0}), cfg, rng, 0, &path);
    EXPECT_EQ(path.actions, (std::vector<int>{3, 3, 3, 3, 1, 1, 1, 1, 1, 1}));
}

TEST(Rollout, CommonRandomNumbersAndDeterminism) {
    const RandomStream rng(SeedSpec{9, 0});
    const RegionState start(9000, 500, 500, 10000);
    const auto cost = default_cost_model({"A", 10000, 7000.0});
    const auto dist = ParamDistribution::from_posterior(default_priors());
    const auto cfg = config(40, 12, 60);
    const auto a = evaluate_policy(constant(2), start, dist, TradeoffWeight(1.0), cost, cfg, rng);
    const auto b = evaluate_policy(constant(2), start, dist, TradeoffWeight(1.0), cost, cfg, rng);
    EXPECT_EQ(a.weighted_mean, b.weighted_mean);
    EXPECT_EQ(a.standard_error, b.standard_error);
    EXPECT_NEAR(a.weighted_mean, a.epi_mean + a.econ_mean, 1e-9 * a.weighted_mean);
    EXPECT_EQ(a.simulated_steps, 40u * 49u);
    // Stricter action: fewer infections, higher cost, replication by replication under CRN.
    const auto strict = evaluate_policy(constant(3), start, dist, TradeoffWeight(1.0), cost, cfg, rng);
    EXPECT_LT(strict.epi_mean, a.epi_mean);
    EXPECT_GT(strict.econ_mean, a.econ_mean);
}

TEST(Rollout, FreeActionHasZeroEconomicCost) {
    const auto est = evaluate_policy(constant(1), RegionState(900, 100, 0, 1000), ParamDistribution::point(kTheta),
                                     TradeoffWeight(5.0), default_cost_model({"A", 1000, 700.0}), config(10, 1, 20),
                                     RandomStream(SeedSpec{1, 0}));
    EXPECT_EQ(est.econ_mean, 0.0);
    EXPECT_DOUBLE_EQ(est.weighted_mean, est.epi_mean);
}

TEST(Rollout, EconomicMeanMatchesExpectedCost) {
    const auto cost = default_cost_model({"A", 1000, 365.0 * 100});
    const auto cfg = config(400, 1, 30);
    const auto est = evaluate_cost_pair(constant(3), RegionState(1000, 0, 0, 1000), kTheta, cost, cfg,
                                        RandomStream(SeedSpec{2, 0}));
    EXPECT_EQ(est.epi_mean, 0.0);
    EXPECT_NEAR(est.econ_mean, 30 * cost.expected_cost(ActionLevel(3, 3)), 4 * est.econ_se);
    EXPECT_NEAR(est.econ_ci95, 1.96 * est.econ_se, 1e-3 * est.econ_se);
}

TEST(Rollout, ConfidenceIntervalsNeedReplications) {
    const auto cfg = config(10, 1, 5);
    EXPECT_THROW(evaluate_cost_pair(constant(1), RegionState(99, 1, 0, 100), kTheta,
                                    default_cost_model({"A", 100, 70.0}), cfg, RandomStream(SeedSpec{}), true),
                 std::invalid_argument);
    EXPECT_NO_THROW(evaluate_cost_pair(constant(1), RegionState(99, 1, 0, 100), kTheta,
                                       default_cost_model({"A", 100, 70.0}), cfg, RandomStream(SeedSpec{}), false));
}

TEST(Rollout, ValueEstimateConsistencyCheck) {
    EXPECT_NO_THROW(ValueEstimate::make(30.0, 10.0, 10.0, 1.0, 5, 2.0, 0));
    EXPECT_THROW(ValueEstimate::make(31.0, 10.0, 10.0, 1.0, 5, 2.0, 0), std::logic_error);
}
