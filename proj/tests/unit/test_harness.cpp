#include <gtest/gtest.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <nlohmann/json.hpp>

#include "epiplan/dataset.hpp"
#include "epiplan/experiments.hpp"

using namespace epiplan;
namespace fs = std::filesystem;

namespace {

Config tiny_config() {
    Config c;
    c.synth.regions = 2;
    c.synth.min_population = 20000;
    c.synth.max_population = 40000;
    c.horizon = 40;
    c.synth.horizon = 41;
    c.weight_exponents = {0, 4};
    c.planner.grid.rounds = {{{0, 300, 150}, {0, 2000, 1000}}};
    c.planner.replications = 4;
    c.mbs_replications = 4;
    c.evaluation_replications = 6;
    c.baselines = {{"mitigation", 4}, {"suppression", 4}, {"threshold", 10}};
    return c;
}

std::string read(const fs::path& p) {
    std::ifstream in(p);
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

}  // namespace

TEST(Synth, ZeroInfectionRateKeepsCountsFlat) {
    Config c;
    c.synth.truth = {0.0, {0.0, 0.0, 0.0}};
    const auto s = synth_generate(synth_spec_from_config(c), RandomStream(SeedSpec{1, 0}));
    for (const auto& r : s.dataset.regions)
        for (Count v : r.series.cumulative_confirmed) EXPECT_EQ(v, r.series.cumulative_confirmed.front());
}

TEST(Synth, RegionsAndScript) {
    SynthSettings s;
    const auto regs = synth_regions(s);
    ASSERT_EQ(regs.size(), 6u);
    EXPECT_EQ(regs.front().meta.population, 10000);
    EXPECT_EQ(regs.back().meta.population, 100000);
    EXPECT_NEAR(static_cast<double>(regs[1].meta.population) / regs[0].meta.population,
                static_cast<double>(regs[2].meta.population) / regs[1].meta.population, 1e-3);
    EXPECT_EQ(regs[0].initial_infectious, 20);
    EXPECT_DOUBLE_EQ(regs[0].meta.gdp_annual, 7000.0);
    const auto script = staged_action_script(3);
    EXPECT_EQ(script(0, 11), 1);
    EXPECT_EQ(script(0, 12), 2);
    EXPECT_EQ(script(1, 14), 1);
    EXPECT_EQ(script(1, 15), 2);
    EXPECT_EQ(script(0, 30), 3);
    EXPECT_EQ(script(5, 33), 2);
    EXPECT_EQ(script(5, 34), 3);
    EXPECT_EQ(constant_action_script(2)(3, 99), 2);
}

TEST(Synth, DeterministicAndCsvStable) {
    Config c;
    const auto a = synth_generate(synth_spec_from_config(c), RandomStream(SeedSpec{2, 0}));
    const auto b = synth_generate(synth_spec_from_config(c), RandomStream(SeedSpec{2, 0}));
    EXPECT_EQ(series_csv(a.dataset), series_csv(b.dataset));
    EXPECT_EQ(a.dataset.regions[0].series.last_day(), 121);
    EXPECT_NO_THROW(validate_dataset(a.dataset));
    const auto recs = latent_records(a, 3);
    EXPECT_EQ(recs.size(), 6u * 120u);
    EXPECT_THROW(observation_mode_from_string("sometimes"), std::invalid_argument);
}

TEST(Validation, OneStepAndErrors) {
    Config c;
    c.synth.observation = "fixed_delay";
    const auto s = synth_generate(synth_spec_from_config(c), RandomStream(SeedSpec{3, 0}));
    const auto rep = temporal_validation(s.dataset, 40, 41, 200, c.priors, DelaySpec{9}, 0.99, RandomStream(SeedSpec{4, 0}));
    ASSERT_EQ(rep.regions.size(), 6u);
    EXPECT_EQ(rep.regions[0].points, 1);
    EXPECT_EQ(rep.regions[0].first_day, 41);
    EXPECT_THROW(temporal_validation(s.dataset, 41, 41, 10, c.priors, DelaySpec{9}, 0.99, RandomStream()),
                 std::invalid_argument);
    EXPECT_THROW(temporal_validation(s.dataset, 5, 41, 10, c.priors, DelaySpec{9}, 0.99, RandomStream()),
                 std::invalid_argument);
    EXPECT_TRUE(rep.to_json().contains("empirical_coverage"));
}

// Continuation data and bands come from the same fitted model, so 99% bands
// cover nearly everything.
TEST(Validation, FittedModelContinuationIsCovered) {
    Config c;
    c.synth.observation = "fixed_delay";
    const auto s = synth_generate(synth_spec_from_config(c), RandomStream(SeedSpec{5, 0}));
    const auto data = fitted_model_continuation(s.dataset, 40, 80, c.priors, DelaySpec{9}, RandomStream(SeedSpec{6, 0}));
    for (Day t = 1; t <= 40; ++t)
        EXPECT_EQ(data.regions[0].series.confirmed_on(t), s.dataset.regions[0].series.confirmed_on(t));
    const auto rep = temporal_validation(data, 40, 80, 400, c.priors, DelaySpec{9}, 0.99, RandomStream(SeedSpec{7, 0}));
    EXPECT_GE(rep.empirical_coverage(), 0.9);
}

TEST(CrossValidation, NeedsTwoRegionsAndSkipsZeros) {
    Config c;
    c.synth.observation = "fixed_delay";
    auto s = synth_generate(synth_spec_from_config(c), RandomStream(SeedSpec{8, 0}));
    Dataset one = s.dataset;
    one.regions.resize(1);
    EXPECT_THROW(leave_one_out_cv(one, 61, 12, 120, 10, c.priors, DelaySpec{9}, RandomStream()), std::invalid_argument);
    Dataset zeros = s.dataset;
    auto& z = zeros.regions[0].series.cumulative_confirmed;
    std::fill(z.begin(), z.end(), 0);
    const auto rep = leave_one_out_cv(zeros, 61, 12, 120, 20, c.priors, DelaySpec{9}, RandomStream(SeedSpec{9, 0}));
    EXPECT_TRUE(rep.regions[0].skipped);
    EXPECT_EQ(rep.warnings.size(), 1u);
    EXPECT_FALSE(rep.regions[1].skipped);
    EXPECT_GT(rep.mean_error_ratio, 0.0);
}

TEST(Sensitivity, CasesAndPriorGrid) {
    const auto grid = prior_effect_grid();
    ASSERT_EQ(grid.size(), 16u);
    for (const auto& [mu2, mu3] : grid) {
        EXPECT_GE(mu3, 0.05 - 1e-12);
        EXPECT_LE(mu3, 0.2 + 1e-12);
        EXPECT_GE(mu2 - mu3, 0.05 - 1e-12);
        EXPECT_LE(mu2 - mu3, 0.2 + 1e-12);
    }
    const auto cases = sensitivity_cases(Config{}, 25);
    EXPECT_EQ(cases.size(), 2u + 5u + 16u);
    EXPECT_EQ(cases[0].config.evaluation_replications, 25);
    EXPECT_TRUE(cases[1].seir);
    EXPECT_EQ(cases[4].name, "D=9");
}

TEST(Sensitivity, R0Recalibration) {
    const GsirParams th{0.11, {0.25, 0.07, 0.04}};
    const auto h = recalibrate_r0(th, 1.4);
    EXPECT_NEAR(h.betas[0] / h.gamma, 1.4, 1e-12);
    EXPECT_NEAR(h.betas[1] / h.betas[0], 0.07 / 0.25, 1e-12);
    EXPECT_THROW(recalibrate_r0(th, 0.0), std::invalid_argument);
}

TEST(Comparison, RowsAndDeterminism) {
    const Config c = tiny_config();
    const auto synth = synth_generate(synth_spec_from_config(c), RandomStream(SeedSpec{10, 0}));
    const auto env = comparison_environment(synth, c);
    EXPECT_EQ(env.start.size(), 2u);
    const auto rep = policy_comparison(env, c, weight_grid(c.weight_exponents), c.baselines, RandomStream(SeedSpec{11, 0}));
    ASSERT_EQ(rep.rows.size(), 2u + 3u + 1u);
    EXPECT_EQ(rep.rows[0].family, "proposed");
    EXPECT_EQ(rep.row("M4").family, "mitigation");
    EXPECT_EQ(rep.rows.back().policy, "behavior");
    for (const auto& r : rep.rows) {
        EXPECT_GE(r.epi_mean, 0.0);
        EXPECT_GE(r.econ_mean, 0.0);
        EXPECT_NEAR(r.epi_ci95, 1.96 * r.epi_se, 0.01 * r.epi_se + 1e-12);
    }
    const auto again = policy_comparison(env, c, weight_grid(c.weight_exponents), c.baselines, RandomStream(SeedSpec{11, 0}));
    EXPECT_EQ(rep.to_csv(), again.to_csv());
    EXPECT_EQ(rep.to_json().dump(), again.to_json().dump());
    EXPECT_THROW(rep.row("nope"), std::out_of_range);
}

TEST(Comparison, DominanceRule) {
    PolicyRow p{"p", "proposed", 1, 100, 100, 1, 1, 0, 0};
    PolicyRow b{"b", "mitigation", 4, 95, 95, 1, 1, 0, 0};
    EXPECT_TRUE(dominates(b, p));  // 5 > 2 * sqrt(2)
    b.epi_mean = 98;
    EXPECT_FALSE(dominates(b, p));
}

TEST(Sensitivity, IdentityVariationMatchesBase) {
    Config c = tiny_config();
    auto cases = sensitivity_cases(c, 6);
    std::vector<SensitivityCase> pick{cases[0], cases[4]};
    ASSERT_EQ(pick[1].name, "D=9");
    const auto rep = sensitivity_suite(c, pick, RandomStream(SeedSpec{12, 0}));
    ASSERT_EQ(rep.runs.size(), 2u);
    auto strip = [](nlohmann::json j) {
        j.erase("name");
        return j.dump();
    };
    EXPECT_EQ(strip(rep.runs[0].to_json()), strip(rep.runs[1].to_json()));
}

#ifdef EPIPLAN_CLI_PATH
TEST(Cli, SynthEstimateAndCv) {
    const fs::path dir = fs::temp_directory_path() / "epiplan_cli_test";
    fs::remove_all(dir);
    const std::string cli = EPIPLAN_CLI_PATH;
    ASSERT_EQ(std::system((cli + " synth --seed 3 --out-dir " + (dir / "syn").string()).c_str()), 0);
    EXPECT_TRUE(fs::exists(dir / "syn" / "regions.csv"));
    EXPECT_TRUE(fs::exists(dir / "syn" / "report.json"));
    ASSERT_EQ(std::system((cli + " estimate --data " + (dir / "syn").string() + " --as-of 40 --out-dir " +
                           (dir / "est").string())
                              .c_str()),
              0);
    EXPECT_EQ(read(dir / "est" / "posterior.csv").substr(0, 17), "parameter,mean,sd");
    const auto report = nlohmann::json::parse(read(dir / "est" / "report.json"));
    EXPECT_EQ(report.at("as_of"), 40);
    ASSERT_EQ(std::system((cli + " cv --replications 20 --out-dir " + (dir / "cv").string() + " > /dev/null").c_str()), 0);
    EXPECT_TRUE(fs::exists(dir / "cv" / "cv.csv"));
    // Byte-identical rerun.
    ASSERT_EQ(std::system((cli + " cv --replications 20 --out-dir " + (dir / "cv2").string() + " > /dev/null").c_str()), 0);
    EXPECT_EQ(read(dir / "cv" / "report.json"), read(dir / "cv2" / "report.json"));
    EXPECT_NE(std::system((cli + " estimate --data /nonexistent --out-dir " + (dir / "x").string() + " 2> /dev/null").c_str()), 0);
    fs::remove_all(dir);
}
#endif
