#include <gtest/gtest.h>

#include <cmath>
#include <nlohmann/json.hpp>

#include "epiplan/dqn.hpp"
#include "epiplan/kernels.hpp"

using namespace epiplan;

namespace {

// next(s, a) = a. Leaving for state 1 is cheap now and costly later, so the
// optimal action in state 0 changes on the last stage.
TabularMdp toy() { return TabularMdp({{0, 1}, {0, 1}}, {{1.0, 0.0}, {3.0, 4.0}}, 3); }

// Backward induction over the same tables.
std::vector<std::vector<int>> dp_policy(const std::vector<std::vector<int>>& next,
                                        const std::vector<std::vector<double>>& cost, int stages) {
    const std::size_t ns = next.size(), na = next[0].size();
    std::vector<double> v(ns, 0.0);
    std::vector<std::vector<int>> pol(static_cast<std::size_t>(stages), std::vector<int>(ns));
    for (int t = stages - 1; t >= 0; --t) {
        std::vector<double> nv(ns);
        for (std::size_t s = 0; s < ns; ++s) {
            double best = INFINITY;
            for (std::size_t a = 0; a < na; ++a) {
                const double q = cost[s][a] + v[static_cast<std::size_t>(next[s][a])];
                if (q < best) {
                    best = q;
                    pol[static_cast<std::size_t>(t)][s] = static_cast<int>(a);
                }
            }
            nv[s] = best;
        }
        v = nv;
    }
    return pol;
}

}  // namespace

TEST(Mlp, ShapesAndSerialization) {
    RandomStream r(SeedSpec{1, 0});
    Mlp net(4, {8, 8}, 3, r);
    EXPECT_EQ(net.input_dim(), 4u);
    EXPECT_EQ(net.output_dim(), 3u);
    EXPECT_EQ(net.layer_count(), 3u);
    const std::vector<double> x{0.1, -0.2, 0.3, 0.4};
    const auto y = net.forward(x);
    ASSERT_EQ(y.size(), 3u);
    const Mlp back = Mlp::from_json(net.to_json());
    EXPECT_EQ(back.forward(x), y);
    Mlp other(4, {8, 8}, 3, r);
    EXPECT_NE(other.forward(x), y);
    other.copy_weights_from(net);
    EXPECT_EQ(other.forward(x), y);
}

TEST(Mlp, FitsRegression) {
    RandomStream r(SeedSpec{2, 0});
    Mlp net(1, {16, 16}, 2, r);
    std::vector<std::vector<double>> xs;
    std::vector<int> idx;
    std::vector<double> ys;
    for (int i = 0; i < 32; ++i) {
        const double x = i / 31.0;
        xs.push_back({x});
        idx.push_back(i % 2);
        ys.push_back(i % 2 ? 1.0 - x : 2.0 * x);
    }
    const double first = net.train_batch(xs, idx, ys, 1e-2);
    double last = first;
    for (int it = 0; it < 1500; ++it) last = net.train_batch(xs, idx, ys, 1e-2);
    EXPECT_LT(last, 0.05 * first);
    EXPECT_NEAR(net.forward(std::vector<double>{0.5})[0], 1.0, 0.1);
}

// Training on both kernel tables gives the same network up to rounding.
TEST(Mlp, ScalarAndSimdTrainingAgree) {
    if (!kernels::cpu_supports(kernels::Isa::kAvx2) || !kernels::avx2_table()) GTEST_SKIP();
    const auto original = kernels::active_isa();
    auto run = [](kernels::Isa isa) {
        kernels::force_isa(isa);
        RandomStream r(SeedSpec{3, 0});
        Mlp net(3, {8, 8}, 2, r);
        std::vector<std::vector<double>> xs{{0.1, 0.2, 0.3}, {0.5, -0.1, 0.0}, {1.0, 1.0, -1.0}};
        for (int it = 0; it < 50; ++it) net.train_batch(xs, {0, 1, 0}, {1.0, -1.0, 0.5}, 1e-2);
        return net.forward(std::vector<double>{0.3, 0.3, 0.3});
    };
    const auto a = run(kernels::Isa::kScalar);
    const auto b = run(kernels::Isa::kAvx2);
    kernels::force_isa(original);
    for (std::size_t i = 0; i < a.size(); ++i) EXPECT_NEAR(a[i], b[i], 1e-9);
}

TEST(TabularMdp, StepsAndValidation) {
    TabularMdp m = toy();
    RandomStream r(SeedSpec{4, 0});
    m.reset(r);
    const int s = m.state();
    EXPECT_EQ(m.features(), TabularMdp::one_hot(s, 2));
    EXPECT_DOUBLE_EQ(m.step(1, r), s == 0 ? 0.0 : 4.0);
    EXPECT_EQ(m.state(), 1);
    EXPECT_THROW(TabularMdp({{0, 5}}, {{1, 1}}, 2), std::invalid_argument);
    EXPECT_THROW(TabularMdp({{0, 1}, {0}}, {{1, 1}, {1}}, 2), std::invalid_argument);
}

TEST(Dqn, DpOracleIsStageDependent) {
    const auto pol = dp_policy({{0, 1}, {0, 1}}, {{1.0, 0.0}, {3.0, 4.0}}, 3);
    EXPECT_EQ(pol[0], (std::vector<int>{0, 0}));
    EXPECT_EQ(pol[1], (std::vector<int>{0, 0}));
    EXPECT_EQ(pol[2], (std::vector<int>{1, 0}));
}

TEST(Dqn, LearnsToyOptimum) {
    TabularMdp env = toy();
    QNetConfig c;
    c.layers = 2;
    c.width = 16;
    c.step_size = 2e-3;
    c.episodes = 1500;
    c.exploration_epsilon = 0.3;
    c.target_sync = 50;
    const auto q = train_dqn(env, c, RandomStream(SeedSpec{5, 0}));
    const auto pol = dp_policy({{0, 1}, {0, 1}}, {{1.0, 0.0}, {3.0, 4.0}}, 3);
    int match = 0;
    for (int t = 0; t < 3; ++t)
        for (int s = 0; s < 2; ++s) match += q.greedy(TabularMdp::one_hot(s, 2), t) == pol[static_cast<std::size_t>(t)][static_cast<std::size_t>(s)];
    EXPECT_EQ(match, 6);
    const QNetwork back = QNetwork::from_json(q.to_json());
    EXPECT_EQ(back.q_values(TabularMdp::one_hot(0, 2), 1), q.q_values(TabularMdp::one_hot(0, 2), 1));
}

TEST(Dqn, DivergenceIsReported) {
    TabularMdp env({{0, 1}, {0, 1}}, {{1e300, 0.0}, {3.0, 1e300}}, 3);
    QNetConfig c;
    c.layers = 1;
    c.width = 4;
    c.episodes = 200;
    c.warmup = 1;
    c.step_size = 10.0;
    EXPECT_THROW(train_dqn(env, c, RandomStream(SeedSpec{6, 0})), std::runtime_error);
}

TEST(Dqn, GsirPlanProducesValidRule) {
    const RegionState start(9000, 500, 500, 10000);
    QNetConfig c;
    c.layers = 2;
    c.width = 8;
    c.episodes = 20;
    const auto plan = dqn_plan(start, 12, 40, 7, ParamDistribution::point({0.11, {0.25, 0.07, 0.04}}),
                               TradeoffWeight(1.0), default_cost_model({"A", 10000, 7000.0}), c,
                               RandomStream(SeedSpec{7, 0}));
    EXPECT_EQ(plan.q.stages(), (40 - 12) / 7 + 1);
    const int a = plan.rule(start, 12).value();
    EXPECT_GE(a, 1);
    EXPECT_LE(a, 3);
    GsirMdp env(start, 12, 40, 7, ParamDistribution::point({0.11, {0.25, 0.07, 0.04}}), TradeoffWeight(0.0),
                default_cost_model({"A", 10000, 7000.0}), 1.0);
    RandomStream r(SeedSpec{8, 0});
    env.reset(r);
    EXPECT_EQ(env.features(), GsirMdp::state_features(start));
    EXPECT_GE(env.step(0, r), 0.0);
}
