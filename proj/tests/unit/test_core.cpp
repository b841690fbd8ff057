#include <gtest/gtest.h>

#include <cmath>
#include <nlohmann/json.hpp>
#include <set>

#include "epiplan/config.hpp"
#include "epiplan/dataset.hpp"
#include "epiplan/parallel.hpp"
#include "epiplan/rng.hpp"
#include "epiplan/variates.hpp"

using namespace epiplan;

TEST(RegionState, RejectsInconsistentCounts) {
    EXPECT_NO_THROW(RegionState(90, 5, 5, 100));
    EXPECT_THROW(RegionState(90, 5, 6, 100), std::invalid_argument);
    EXPECT_THROW(RegionState(-1, 51, 50, 100), std::invalid_argument);
    EXPECT_THROW(RegionState(0, 0, 0, 0), std::invalid_argument);
    EXPECT_EQ(RegionState::from_infectious_removed(7, 3, 100).susceptible(), 90);
}

TEST(ActionLevel, Range) {
    EXPECT_EQ(ActionLevel(3, 3).index(), 2);
    EXPECT_THROW(ActionLevel(4, 3), std::out_of_range);
    EXPECT_THROW(ActionLevel(0, 3), std::out_of_range);
    EXPECT_THROW(ActionLevel(1, 1), std::invalid_argument);
}

TEST(GsirParams, Validation) {
    GsirParams p{0.11, {0.25, 0.07, 0.04}};
    EXPECT_NO_THROW(p.validate());
    EXPECT_TRUE(p.ordered());
    p.betas = {0.1, 0.2};
    EXPECT_FALSE(p.ordered());
    p.gamma = 1.5;
    EXPECT_THROW(p.validate(), std::invalid_argument);
}

TEST(Rng, DeriveIsPureAndDistinct) {
    RandomStream root(SeedSpec{7, 1});
    RandomStream a = root.derive({1, 2});
    RandomStream b = root.derive({1, 2});
    RandomStream c = root.derive({2, 1});
    for (int i = 0; i < 10; ++i) EXPECT_EQ(a(), b());
    EXPECT_NE(root.derive({1, 2})(), c());
    EXPECT_EQ(derive_rng(SeedSpec{7, 1}, {3}).key(), root.derive({3}).key());
    // Deriving does not advance the parent.
    RandomStream p1(SeedSpec{9, 0}), p2(SeedSpec{9, 0});
    (void)p1.derive({5});
    EXPECT_EQ(p1(), p2());
}

TEST(Rng, UniformRange) {
    RandomStream r(SeedSpec{1, 0});
    double sum = 0.0;
    for (int i = 0; i < 20000; ++i) {
        const double u = r.uniform();
        ASSERT_GE(u, 0.0);
        ASSERT_LT(u, 1.0);
        sum += u;
    }
    EXPECT_NEAR(sum / 20000, 0.5, 0.01);
}

TEST(Variates, EdgeCases) {
    RandomStream r(SeedSpec{2, 0});
    EXPECT_EQ(variates::poisson(r, 0.0), 0);
    EXPECT_EQ(variates::poisson(r, -3.0), 0);
    EXPECT_EQ(variates::binomial(r, 10, 0.0), 0);
    EXPECT_EQ(variates::binomial(r, 10, 1.0), 10);
    EXPECT_EQ(variates::binomial(r, 0, 0.5), 0);
}

// Moments of every sampler, across the small- and large-mean code paths.
TEST(Variates, Moments) {
    RandomStream r(SeedSpec{3, 0});
    const int n = 40000;
    auto check = [&](auto draw, double mean, double var) {
        double s = 0, s2 = 0;
        for (int i = 0; i < n; ++i) {
            const double x = static_cast<double>(draw());
            s += x;
            s2 += x * x;
        }
        const double m = s / n;
        const double v = s2 / n - m * m;
        EXPECT_NEAR(m, mean, 4.0 * std::sqrt(var / n));
        EXPECT_NEAR(v, var, 0.05 * var);
    };
    check([&] { return variates::poisson(r, 3.5); }, 3.5, 3.5);
    check([&] { return variates::poisson(r, 250.0); }, 250.0, 250.0);
    check([&] { return variates::binomial(r, 20, 0.3); }, 6.0, 4.2);
    check([&] { return variates::binomial(r, 5000, 0.11); }, 550.0, 489.5);
    check([&] { return variates::gamma(r, 0.7, 2.0); }, 0.35, 0.175);
    check([&] { return variates::gamma(r, 517.41, 2000.0); }, 517.41 / 2000, 517.41 / 4e6);
    check([&] { return variates::beta(r, 2.0, 5.0); }, 2.0 / 7, 10.0 / (49 * 8));
    check([&] { return variates::normal(r, 1.0, 2.0); }, 1.0, 4.0);
}

TEST(Parallel, SlotsAndExceptions) {
    std::vector<int> out(1000, 0);
    parallel_for(out.size(), [&](std::size_t i) { out[i] = static_cast<int>(i * i % 97); });
    for (std::size_t i = 0; i < out.size(); ++i) EXPECT_EQ(out[i], static_cast<int>(i * i % 97));
    EXPECT_THROW(parallel_for(10, [](std::size_t i) {
                     if (i == 3) throw std::runtime_error("boom");
                 }),
                 std::runtime_error);
}

namespace {
const char* kRegions = "region_id,population,gdp_annual\nA,1000,700\nB,500,350\n";
const char* kSeries =
    "region_id,day,cumulative_confirmed,action_level\n"
    "A,1,1,1\nA,2,2,1\nA,3,4,2\nB,1,0,1\nB,2,1,1\nB,3,1,3\n";
}  // namespace

TEST(Dataset, ParseAndRoundTrip) {
    const Dataset d = parse_dataset(kRegions, kSeries, LoadOptions{});
    ASSERT_EQ(d.regions.size(), 2u);
    EXPECT_EQ(d.horizon, 3);
    EXPECT_EQ(d.region("A").series.confirmed_on(3), 4);
    EXPECT_EQ(d.region("B").series.action_on(3), 3);
    const Dataset again = parse_dataset(regions_csv(d), series_csv(d), LoadOptions{});
    EXPECT_EQ(series_csv(again), series_csv(d));
    EXPECT_EQ(regions_csv(again), regions_csv(d));
}

TEST(Dataset, ParseErrorsCarryLocation) {
    const std::string bad = std::string(kSeries) + "A,4,x,1\n";
    try {
        parse_dataset(kRegions, bad, LoadOptions{});
        FAIL() << "expected ParseError";
    } catch (const ParseError& e) {
        EXPECT_EQ(e.file(), "series.csv");
        EXPECT_EQ(e.row(), 8u);
        EXPECT_EQ(e.column(), "cumulative_confirmed");
    }
    EXPECT_THROW(parse_dataset(kRegions, std::string(kSeries) + "A,4,5,4\n", LoadOptions{}), ParseError);
    EXPECT_THROW(parse_dataset(kRegions, std::string(kSeries) + "C,4,5,1\n", LoadOptions{}), ParseError);
    EXPECT_THROW(parse_dataset(kRegions, std::string(kSeries) + "A,5,5,1\n", LoadOptions{}), ParseError);
    EXPECT_THROW(parse_dataset("region_id,population\nA,10\n", kSeries, LoadOptions{}), ParseError);
}

TEST(Dataset, RepairIsolatedDip) {
    std::vector<Count> c{1, 3, 2, 5, 6};
    EXPECT_EQ(repair_cumulative(c, "A"), 1);
    EXPECT_TRUE(std::is_sorted(c.begin(), c.end()));
    std::vector<Count> hopeless{5, 4, 3, 2, 1};
    EXPECT_THROW(repair_cumulative(hopeless, "A"), std::exception);
}

TEST(Dataset, DecisionPoints) {
    EXPECT_TRUE(is_decision_point(12, 12, 7));
    EXPECT_TRUE(is_decision_point(19, 12, 7));
    EXPECT_FALSE(is_decision_point(13, 12, 7));
    EXPECT_FALSE(is_decision_point(5, 12, 7));
    const auto pts = decision_points(40, 7, 12);
    EXPECT_EQ(pts, (std::vector<Day>{12, 19, 26, 33, 40}));
}

TEST(Config, JsonRoundTripAndStrictKeys) {
    Config c;
    c.seed = 99;
    c.planner.name = "spsa";
    c.synth.observation = "fixed_delay";
    const auto j = config_to_json(c);
    const Config back = config_from_json(j);
    EXPECT_EQ(config_to_json(back), j);
    EXPECT_THROW(config_from_json(nlohmann::json{{"sede", 1}}), std::exception);
    EXPECT_THROW(config_from_json(nlohmann::json{{"planner", {{"name", "annealing"}}}}), std::exception);
    const Config partial = config_from_json(nlohmann::json{{"delay_days", 7}});
    EXPECT_EQ(partial.delay_days, 7);
    EXPECT_EQ(partial.start_day, 12);
}
