#pragma once

#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "epiplan/rng.hpp"
#include "epiplan/types.hpp"

namespace epiplan {

// Daily GDP-loss ratio of one action level, C_j ~ Normal(mean, sd^2).
struct LevelCost {
    int level = 1;
    double mean = 0.0;
    double sd = 0.0;
};

struct CostModel {
    std::vector<LevelCost> levels;  // levels[j-1] describes action j; level 1 is free
    double gdp_daily = 0.0;         // G / 365

    int level_count() const { return static_cast<int>(levels.size()); }
    // Mean of the clamped daily cost of an action.
    double expected_cost(ActionLevel a) const;
    void validate() const;
};

struct CostPair {
    double epidemiological = 0.0;
    double economic = 0.0;
};

struct TradeoffWeight {
    double omega = 0.0;

    explicit TradeoffWeight(double w = 0.0);
    bool operator==(const TradeoffWeight&) const = default;
};

// Fitted ratios (0, 0.368, 0.484) with sds (0, 0.239, 0.181), scaled by G/365.
std::vector<LevelCost> default_level_costs();
CostModel default_cost_model(const RegionMeta& meta);
CostModel make_cost_model(const RegionMeta& meta, std::vector<LevelCost> levels);

// One day of action cost: max(0, C_a) * G / 365; exactly 0 for level 1.
double sample_action_cost(const CostModel& model, ActionLevel action, RandomStream& rng);

// Susceptible decrement; throws when the transition gains susceptibles.
Count epidemiological_cost(const RegionState& pre, const RegionState& post);

// omega_k = e^k / 10
std::vector<TradeoffWeight> weight_grid(const std::vector<int>& exponents);
std::vector<int> default_weight_exponents();  // {-2, 0, 1, ..., 6}

// [{level, mean, sd}, ...]
nlohmann::json level_costs_to_json(const std::vector<LevelCost>& levels);
std::vector<LevelCost> level_costs_from_json(const nlohmann::json& j);

}  // namespace epiplan
