#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <nlohmann/json.hpp>

#include "epiplan/pareto.hpp"

using namespace epiplan;

namespace {

const GsirParams kTheta{0.11, {0.25, 0.07, 0.04}};

// Planner that maps larger weights to laxer fixed thresholds.
Planner fixed_planner() {
    return [](TradeoffWeight w, const RandomStream&) {
        const double t = std::min(5000.0, 50.0 * (1.0 + w.omega));
        const ThresholdPolicy p({t, 2 * t}, 10000);
        return FittedPolicy{"threshold", p.rule(), threshold_policy_to_json(p), p};
    };
}

FrontierConfig small_config() {
    FrontierConfig f;
    f.rollout.replications = 10;
    f.rollout.start_day = 12;
    f.rollout.horizon = 60;
    f.rollout.schedule = DecisionSchedule::every(12, 7, 60);
    f.band_replications = 60;
    return f;
}

}  // namespace

TEST(Quantile, NearestRank) {
    const std::vector<double> v{5, 1, 4, 2, 3};
    EXPECT_EQ(empirical_quantile(v, 0.0), 1);
    EXPECT_EQ(empirical_quantile(v, 0.2), 1);
    EXPECT_EQ(empirical_quantile(v, 0.21), 2);
    EXPECT_EQ(empirical_quantile(v, 0.5), 3);
    EXPECT_EQ(empirical_quantile(v, 1.0), 5);
    EXPECT_THROW(empirical_quantile({}, 0.5), std::invalid_argument);
    EXPECT_THROW(empirical_quantile(v, 1.5), std::invalid_argument);
}

TEST(Quantile, BandWidenedToContainMean) {
    // 99 zeros and one huge value: the 5%..95% envelope is [0, 0] but the mean is 10.
    std::vector<std::vector<double>> s(100, std::vector<double>{0.0});
    s[0][0] = 1000.0;
    const Band b = quantile_band(s, 0.9);
    EXPECT_DOUBLE_EQ(b.mean[0], 10.0);
    EXPECT_DOUBLE_EQ(b.lower[0], 0.0);
    EXPECT_DOUBLE_EQ(b.upper[0], 10.0);
    EXPECT_THROW(quantile_band({{1.0}, {1.0, 2.0}}, 0.9), std::invalid_argument);
}

// Against an O(n^2) strict-dominance scan, with many ties.
TEST(Pareto, NondominatedMatchesBruteForce) {
    RandomStream r(SeedSpec{1, 0});
    for (int trial = 0; trial < 200; ++trial) {
        const std::size_t n = 1 + r() % 25;
        std::vector<std::pair<double, double>> pts(n);
        for (auto& p : pts) p = {static_cast<double>(r() % 8), static_cast<double>(r() % 8)};
        std::vector<std::size_t> expect;
        for (std::size_t i = 0; i < n; ++i) {
            bool dom = false;
            for (std::size_t j = 0; j < n; ++j)
                dom = dom || (pts[j].first < pts[i].first && pts[j].second < pts[i].second);
            if (!dom) expect.push_back(i);
        }
        EXPECT_EQ(nondominated_indices(pts), expect);
    }
}

TEST(Pareto, ConservativeFilterUsesPooledSe) {
    ParetoEntry a, b;
    a.epi_mean = 10;
    a.econ_mean = 10;
    b.epi_mean = 8;
    b.econ_mean = 8;
    a.epi_se = a.econ_se = b.epi_se = b.econ_se = 0.5;
    // Gap 2 exceeds 2 * hypot(0.5, 0.5) = 1.41: a is dominated.
    EXPECT_EQ(pareto_filter_conservative({a, b}).size(), 1u);
    a.epi_se = b.epi_se = 1.0;  // 2 * 1.41 = 2.83 > 2
    EXPECT_EQ(pareto_filter_conservative({a, b}).size(), 2u);
    EXPECT_EQ(pareto_filter({a, b}).size(), 1u);
}

TEST(Frontier, BuildsSortedEntriesWithValidBands) {
    const RegionState start(95000, 300, 4700, 100000);
    const auto cost = default_cost_model({"A", 100000, 70000.0});
    const auto weights = weight_grid({3, -2, 0});
    const auto dist = ParamDistribution::from_posterior(default_priors());
    const RandomStream rng(SeedSpec{2, 0});
    const auto f = build_frontier(start, dist, weights, fixed_planner(), cost, small_config(), rng);
    ASSERT_EQ(f.size(), 3u);
    EXPECT_LT(f[0].weight.omega, f[1].weight.omega);
    EXPECT_LT(f[1].weight.omega, f[2].weight.omega);
    for (const auto& e : f) {
        EXPECT_NO_THROW(e.bands.validate());
        EXPECT_EQ(e.bands.days(), 49u);
        EXPECT_EQ(e.bands.start_day, 12);
        EXPECT_NEAR(e.bands.epi.mean.back(), e.epi_mean, 1e-9 * (1 + e.epi_mean));
        EXPECT_EQ(e.immediate_action, e.policy.threshold->action(300.0));
    }
    // Same seed, same bytes.
    const auto g = build_frontier(start, dist, weights, fixed_planner(), cost, small_config(), rng);
    EXPECT_EQ(frontier_to_json(f).dump(), frontier_to_json(g).dump());
    const auto [action, entry] = recommend(f, weights[0]);
    EXPECT_EQ(entry.weight, weights[0]);
    EXPECT_EQ(action, entry.immediate_action);
    EXPECT_THROW(recommend(f, TradeoffWeight(123.0)), std::out_of_range);
    const auto j = entry_to_json(f[0]);
    for (const char* key : {"weight", "policy", "epi_mean", "econ_mean", "epi_se", "econ_se", "immediate_action", "bands"})
        EXPECT_TRUE(j.contains(key)) << key;
    EXPECT_EQ(frontier_csv(f).substr(0, 32), "weight,epi_mean,econ_mean,action");
}

TEST(Frontier, PlannerFailureNamesWeight) {
    Planner bad = [](TradeoffWeight, const RandomStream&) -> FittedPolicy { throw std::runtime_error("nope"); };
    try {
        build_frontier(RegionState(90, 10, 0, 100), ParamDistribution::point(kTheta), {TradeoffWeight(2.0)}, bad,
                       default_cost_model({"A", 100, 70.0}), small_config(), RandomStream(SeedSpec{}));
        FAIL();
    } catch (const std::runtime_error& e) {
        EXPECT_NE(std::string(e.what()).find("weight 2"), std::string::npos);
    }
    EXPECT_THROW(build_frontier(RegionState(90, 10, 0, 100), ParamDistribution::point(kTheta), {}, fixed_planner(),
                                default_cost_model({"A", 100, 70.0}), small_config(), RandomStream(SeedSpec{})),
                 std::invalid_argument);
}
