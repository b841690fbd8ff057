#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <nlohmann/json.hpp>
#include <set>

#include "epiplan/planners.hpp"

using namespace epiplan;

namespace {

PolicyObjective analytic(std::function<double(const std::vector<double>&)> f, int* calls = nullptr) {
    return [f, calls](const ThresholdPolicy& p) {
        if (calls) ++*calls;
        const double v = f(p.thresholds());
        return ValueEstimate::make(v, v, 0.0, 0.0, 1, 0.0, 0);
    };
}

double bowl(const std::vector<double>& l) {
    return std::pow(l[0] - 123.37, 2) + 0.1 * std::pow(l[1] - 987.6, 2);
}

}  // namespace

TEST(Threshold, LevelCountsCutoffsAtOrBelow) {
    const ThresholdPolicy p({10, 50}, 100);
    EXPECT_EQ(p.action(0).value(), 1);
    EXPECT_EQ(p.action(9.99).value(), 1);
    EXPECT_EQ(p.action(10).value(), 2);
    EXPECT_EQ(p.action(49).value(), 2);
    EXPECT_EQ(p.action(50).value(), 3);
    EXPECT_EQ(p.action(1e9).value(), 3);
    // Empty middle interval goes to the level above.
    const ThresholdPolicy q({20, 20}, 100);
    EXPECT_EQ(q.action(20).value(), 3);
    EXPECT_EQ(q.action(19).value(), 1);
    // Zero cutoff: level 2 at x = 0.
    EXPECT_EQ(ThresholdPolicy({0, 5}, 10).action(0).value(), 2);
    EXPECT_EQ(apply_threshold_policy(p, RegionState(40, 60, 0, 100)).value(), 3);
}

TEST(Threshold, Validation) {
    EXPECT_THROW(ThresholdPolicy({}, 10), std::invalid_argument);
    EXPECT_THROW(ThresholdPolicy({5, 3}, 10), std::invalid_argument);
    EXPECT_THROW(ThresholdPolicy({-1, 3}, 10), std::invalid_argument);
    EXPECT_THROW(ThresholdPolicy({1, 30}, 10), std::invalid_argument);
    const ThresholdPolicy p({1.5, 7.25}, 10);
    EXPECT_EQ(threshold_policy_from_json(threshold_policy_to_json(p)), p);
}

TEST(Grid, AxisAndRoundPoints) {
    EXPECT_EQ(axis_points({0, 300, 50}).size(), 7u);
    EXPECT_EQ(axis_points({-0.25, 0.25, 0.01}).size(), 51u);
    EXPECT_DOUBLE_EQ(axis_points({0, 1, 0.1})[3], 0.3);
    const auto s = default_grid_schedule();
    EXPECT_EQ(s.dimension(), 2u);
    const auto r0 = round_points(s, 0, {}, 1e9);
    // 7 x 11 grid minus infeasible pairs with lambda_2 > lambda_3.
    std::size_t expect = 0;
    for (double a : axis_points({0, 300, 50}))
        for (double b : axis_points({0, 2000, 200})) expect += a <= b;
    EXPECT_EQ(r0.size(), expect);
    // Later rounds recenter, clip at 0 and at the cap.
    const auto r1 = round_points(s, 1, {20, 90}, 100);
    for (const auto& p : r1) {
        EXPECT_GE(p[0], 0.0);
        EXPECT_LE(p[1], 100.0);
        EXPECT_LE(p[0], p[1]);
    }
    EXPECT_DOUBLE_EQ(r1.front()[0], 0.0);
}

// Independent re-implementation of round recentering against grid_search.
TEST(Grid, MatchesRecenteringOracle) {
    const auto s = default_grid_schedule();
    const double cap = 1500;
    std::vector<double> center;
    double best_v = INFINITY;
    std::vector<double> best;
    for (std::size_t r = 0; r < s.rounds.size(); ++r) {
        std::vector<std::vector<double>> axes;
        for (std::size_t i = 0; i < 2; ++i) {
            const auto& ax = s.rounds[r][i];
            const double lo = std::max(0.0, ax.lower + (r ? center[i] : 0.0));
            const double hi = std::min(cap, ax.upper + (r ? center[i] : 0.0));
            std::vector<double> pts;
            for (int k = 0; lo + k * ax.step <= hi + 1e-9; ++k) pts.push_back(std::round((lo + k * ax.step) * 1e9) / 1e9);
            axes.push_back(pts);
        }
        for (double a : axes[0])
            for (double b : axes[1]) {
                if (a > b) continue;
                const double v = bowl({a, b});
                if (v < best_v || (v == best_v && std::vector<double>{a, b} < best)) {
                    best_v = v;
                    best = {a, b};
                }
            }
        center = best;
    }
    int calls = 0;
    const auto res = grid_search(analytic(bowl, &calls), s, cap);
    EXPECT_EQ(res.policy.thresholds(), best);
    EXPECT_DOUBLE_EQ(res.value.weighted_mean, best_v);
    EXPECT_EQ(res.evaluations, static_cast<std::uint64_t>(calls));
    EXPECT_NEAR(best[0], 123.37, 0.01);
    EXPECT_NEAR(best[1], 987.6, 0.2);
}

TEST(Grid, TiesGoToLexicographicallySmallest) {
    const auto res = grid_search(analytic([](const std::vector<double>&) { return 1.0; }), default_grid_schedule(), 500);
    EXPECT_EQ(res.policy.thresholds(), (std::vector<double>{0, 0}));
    EXPECT_TRUE(threshold_less({0, 5}, {1, 0}));
    EXPECT_FALSE(threshold_less({1, 0}, {1, 0}));
}

TEST(Grid, EmptyFirstRoundThrows) {
    GridSchedule s;
    s.rounds = {{{10, 20, 5}, {30, 40, 5}}};
    EXPECT_THROW(grid_search(analytic(bowl), s, 5), std::invalid_argument);
    GridSchedule bad;
    EXPECT_THROW(bad.validate(), std::invalid_argument);
}

// Variational inequality: p = proj(x) iff (x - p).(z - p) <= 0 for all feasible z.
TEST(Spsa, ProjectionIsEuclidean) {
    RandomStream r(SeedSpec{1, 0});
    for (int trial = 0; trial < 300; ++trial) {
        const std::size_t n = 1 + r() % 4;
        const double cap = 10 + 100 * r.uniform();
        const double margin = (trial % 3 == 0) ? 0.0 : 5 * r.uniform();
        std::vector<double> x(n);
        for (auto& v : x) v = 200 * r.uniform() - 50;
        const auto p = project_feasible(x, margin, cap);
        const double m = std::min(margin, cap / static_cast<double>(n));
        ASSERT_GE(p[0], -1e-12);
        for (std::size_t i = 1; i < n; ++i) ASSERT_GE(p[i] - p[i - 1], m - 1e-9);
        ASSERT_LE(p.back(), cap - m + 1e-9);
        for (int z = 0; z < 20; ++z) {
            std::vector<double> mu(n);
            for (auto& v : mu) v = (cap - static_cast<double>(n) * m) * r.uniform();
            std::sort(mu.begin(), mu.end());
            double ip = 0.0;
            for (std::size_t i = 0; i < n; ++i) ip += (x[i] - p[i]) * (mu[i] + static_cast<double>(i) * m - p[i]);
            EXPECT_LE(ip, 1e-7);
        }
        // Feasible points are fixed.
        const auto again = project_feasible(p, margin, cap);
        for (std::size_t i = 0; i < n; ++i) EXPECT_NEAR(again[i], p[i], 1e-9);
    }
}

TEST(Spsa, Gains) {
    SpsaConfig c;
    c.c = 2.0;
    EXPECT_DOUBLE_EQ(c.zeta(1), 2.0);
    EXPECT_NEAR(c.zeta(10), 2.0 / std::pow(10, 0.602), 1e-12);
    EXPECT_NEAR(c.xi(10), 20.0 / std::pow(10, 0.101), 1e-12);
    c.a = 0.4;
    EXPECT_THROW(c.validate(), std::invalid_argument);
}

TEST(Spsa, ConvergesOnBowl) {
    SpsaConfig c;
    c.iterations = 400;
    c.d = 5;
    const auto res = spsa_search(analytic(bowl), c, 2000, ThresholdPolicy({150, 1000}, 2000), RandomStream(SeedSpec{3, 0}));
    EXPECT_LT(res.value.weighted_mean, bowl({150, 1000}));
    EXPECT_NEAR(res.policy.thresholds()[0], 123.37, 10.0);
    EXPECT_EQ(res.evaluations, 1u + 2u * 4u + 3u * 400u);
    // Deterministic given the stream.
    const auto again = spsa_search(analytic(bowl), c, 2000, ThresholdPolicy({150, 1000}, 2000), RandomStream(SeedSpec{3, 0}));
    EXPECT_EQ(again.policy, res.policy);
}

TEST(Complexity, Formula) {
    const auto e = complexity_estimate(10, 3, 100, 8, 100, 120);
    EXPECT_DOUBLE_EQ(e.grid_points_per_round, 100);
    EXPECT_DOUBLE_EQ(e.step_evaluations_per_weight, 100 * 120 * 100.0);
    EXPECT_DOUBLE_EQ(e.step_evaluations_tool, 8 * 1.2e6 + 8 * 100 * 120.0);
}

// Measured simulated steps of a rollout grid equal M * T * points.
TEST(Complexity, MeasuredStepsMatch) {
    GridSchedule s;
    s.rounds = {{{0, 2, 1}, {10, 12, 1}}};
    RolloutConfig cfg;
    cfg.replications = 7;
    cfg.start_day = 1;
    cfg.horizon = 20;
    cfg.schedule = DecisionSchedule::every(1, 7, 20);
    std::uint64_t steps = 0;
    auto obj = rollout_objective(RegionState(990, 10, 0, 1000), ParamDistribution::point({0.11, {0.25, 0.07, 0.04}}),
                                 TradeoffWeight(1.0), default_cost_model({"A", 1000, 700.0}), cfg,
                                 RandomStream(SeedSpec{4, 0}));
    std::mutex m;
    auto counting = [&](const ThresholdPolicy& p) {
        auto v = obj(p);
        std::lock_guard lock(m);
        steps += v.simulated_steps;
        return v;
    };
    const auto res = grid_search(counting, s, 100);
    EXPECT_EQ(res.evaluations, 9u);
    EXPECT_EQ(steps, 9u * 7u * 20u);
    EXPECT_DOUBLE_EQ(complexity_estimate(3, 3, 7, 1, 0, 20).step_evaluations_per_weight, static_cast<double>(steps));
}
