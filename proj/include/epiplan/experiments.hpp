#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "epiplan/config.hpp"
#include "epiplan/gsir.hpp"
#include "epiplan/observe.hpp"
#include "epiplan/pareto.hpp"

namespace epiplan {

// ---- synthetic data -------------------------------------------------------

enum class ObservationMode {
    kRemoval,     // O_t = X^R_t; confirmation is removal
    kFixedDelay,  // each infection is confirmed, and removed, exactly D days later
};

ObservationMode observation_mode_from_string(const std::string& s);

// Action level of region `region` on `day`.
using ActionScript = std::function<int(std::size_t region, Day day)>;

// Level 1, then 2, then 3 with region-staggered switch days; leaves data on every level.
ActionScript staged_action_script(int levels = 3);
ActionScript constant_action_script(int level);

struct SynthRegion {
    RegionMeta meta;
    Count initial_infectious = 0;
};

struct SynthSpec {
    GsirParams truth;
    std::optional<double> incubation_rate;  // set: GSEIR dynamics
    std::vector<SynthRegion> regions;
    Day horizon = 120;
    int decision_interval = 7;
    ActionScript script;
    DelaySpec delay;
    ObservationMode mode = ObservationMode::kRemoval;
};

struct SynthResult {
    Dataset dataset;
    std::vector<Trajectory> latent;  // per region, states on days 1 .. horizon
};

SynthResult synth_generate(const SynthSpec& spec, const RandomStream& rng);

// Regions with populations spaced geometrically between the configured bounds.
std::vector<SynthRegion> synth_regions(const SynthSettings& s);
SynthSpec synth_spec_from_config(const Config& c);

// Transitions of the latent trajectories (no observation delay).
std::vector<TransitionRecord> latent_records(const SynthResult& synth, int levels);

// ---- temporal validation and cross-validation ------------------------------

struct ValidationRegion {
    std::string region_id;
    Day first_day = 0;  // first predicted day
    Band band;          // predicted cumulative confirmations
    std::vector<double> observed;
    int covered = 0;
    int points = 0;
};

struct ValidationReport {
    double coverage_level = 0.99;
    std::vector<ValidationRegion> regions;
    PosteriorParams posterior;
    double empirical_coverage() const;
    nlohmann::json to_json() const;
};

// Fits on observations up to train_until and forward-samples cumulative
// confirmations for days train_until+1 .. predict_until under recorded actions.
ValidationReport temporal_validation(const Dataset& data, Day train_until, Day predict_until, int replications,
                                     const PriorSpec& priors, DelaySpec delay, double coverage,
                                     const RandomStream& rng);

// Validation data generated by the fitted model itself: observations after
// train_until are replaced by cumulative removals simulated from each region's
// last reconstructible state under recorded actions, with theta drawn from the
// posterior fitted on data up to train_until (one draw per region).
Dataset fitted_model_continuation(const Dataset& data, Day train_until, Day until, const PriorSpec& priors,
                                  DelaySpec delay, const RandomStream& rng);

struct CvRegion {
    std::string region_id;
    double predicted = 0.0;
    double observed = 0.0;
    double error_ratio = 0.0;
    bool skipped = false;
};

struct CvReport {
    std::vector<CvRegion> regions;
    double mean_error_ratio = 0.0;
    std::vector<std::string> warnings;
    nlohmann::json to_json() const;
};

// For each region: posterior from the other regions up to train_until, then
// predicted cumulative confirmations at predict_day starting from predict_from.
CvReport leave_one_out_cv(const Dataset& data, Day train_until, Day predict_from, Day predict_day, int replications,
                          const PriorSpec& priors, DelaySpec delay, const RandomStream& rng);

// ---- planning helpers ------------------------------------------------------

struct PlanContext {
    RegionState start;
    Day start_day = 1;
    Day horizon = 120;
    int decision_interval = 7;
    ParamDistribution params;
    CostModel cost_model;
};

// Planner for one region as configured (grid, spsa or dqn).
Planner make_planner(const Config& config, const PlanContext& ctx);

RolloutConfig plan_rollout_config(const Config& config, const PlanContext& ctx, int replications);

// ---- policy comparison -----------------------------------------------------

struct PolicyRow {
    std::string policy;
    std::string family;  // proposed | mitigation | suppression | threshold | behavior
    double parameter = 0.0;
    double epi_mean = 0.0, econ_mean = 0.0;
    double epi_se = 0.0, econ_se = 0.0;
    double epi_ci95 = 0.0, econ_ci95 = 0.0;
};

struct ComparisonReport {
    std::string name;
    std::vector<PolicyRow> rows;  // proposed rows by weight, then baselines in config order
    nlohmann::json fitted;        // per region and weight: fitted policy descriptions

    const PolicyRow& row(const std::string& policy) const;
    std::string to_csv() const;
    nlohmann::json to_json() const;
};

// Truth dynamics are GSIR (or GSEIR) with removal-as-confirmation observations.
struct ComparisonEnvironment {
    Dataset observed;                // recorded data; only days <= start_day are visible to policies
    std::vector<RegionState> start;  // truth state per region on start_day
    GsirParams truth;
    std::optional<double> incubation_rate;
};

// Environment from synthetic data: observations and latent states at start_day.
ComparisonEnvironment comparison_environment(const SynthResult& synth, const Config& config,
                                             std::optional<double> incubation_rate = std::nullopt);

ComparisonReport policy_comparison(const ComparisonEnvironment& env, const Config& config,
                                   const std::vector<TradeoffWeight>& weights,
                                   const std::vector<BaselineSpec>& baselines, const RandomStream& rng,
                                   const std::string& name = "compare");

// Baseline b dominates proposed p when it is better on both axes by more than
// z pooled standard errors.
bool dominates(const PolicyRow& b, const PolicyRow& p, double z = 2.0);

// ---- sensitivity -----------------------------------------------------------

// {(mu2, mu3): mu3 in {0.05, .., 0.2}, mu2 - mu3 in {0.05, .., 0.2}}
std::vector<std::pair<double, double>> prior_effect_grid();

// beta_1 = r0 * gamma, other levels scaled by the same factor.
GsirParams recalibrate_r0(const GsirParams& fitted, double r0);

struct SensitivityCase {
    std::string name;
    Config config;
    bool seir = false;
};

std::vector<SensitivityCase> sensitivity_cases(const Config& base, int replications = 25);

struct SensitivityReport {
    std::vector<ComparisonReport> runs;
    std::string to_csv() const;
    nlohmann::json to_json() const;
};

SensitivityReport sensitivity_suite(const Config& base, const std::vector<SensitivityCase>& cases,
                                    const RandomStream& rng);

}  // namespace epiplan
