#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "epiplan/baselines.hpp"
#include "epiplan/bayes.hpp"
#include "epiplan/cost.hpp"
#include "epiplan/dqn.hpp"
#include "epiplan/planners.hpp"

namespace epiplan {

struct PlannerSettings {
    std::string name = "grid";  // grid | spsa | dqn
    GridSchedule grid = default_grid_schedule();
    SpsaConfig spsa;
    QNetConfig dqn;
    int replications = 100;      // rollouts per objective evaluation
    double cap_fraction = 1.0;   // lambda_M as a fraction of the region population
};

struct SynthSettings {
    GsirParams truth{0.11, {0.25, 0.07, 0.04}};
    int regions = 6;
    Count min_population = 10000;
    Count max_population = 100000;
    double initial_infectious_fraction = 0.002;
    double gdp_per_capita = 0.7;
    Day horizon = 120;
    std::string observation = "removal";  // removal | fixed_delay
    std::string environment = "gsir";     // gsir | gseir
    double incubation_rate = 1.0 / 7.0;
};

struct Config {
    std::uint64_t seed = 2020;
    int delay_days = 9;
    int decision_interval = 7;
    int levels = 3;
    Day start_day = 12;
    Day horizon = 120;
    PriorSpec priors = default_priors();
    std::vector<LevelCost> level_costs = default_level_costs();
    std::vector<int> weight_exponents = default_weight_exponents();
    PlannerSettings planner;
    int mbs_replications = 100;
    int band_replications = 1000;
    double band_coverage = 0.99;
    int evaluation_replications = 100;
    bool replan = false;
    bool sample_theta_per_rollout = true;
    std::vector<BaselineSpec> baselines = default_baselines();
    SynthSettings synth;

    void validate() const;
};

// Missing keys keep their defaults; unknown keys are rejected.
Config config_from_json(const nlohmann::json& j);
nlohmann::json config_to_json(const Config& c);
Config load_config(const std::filesystem::path& path);

}  // namespace epiplan
