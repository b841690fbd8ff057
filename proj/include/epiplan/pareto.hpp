#pragma once

#include <functional>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "epiplan/bayes.hpp"
#include "epiplan/cost.hpp"
#include "epiplan/gsir.hpp"
#include "epiplan/planners.hpp"
#include "epiplan/rollout.hpp"

namespace epiplan {

struct Band {
    std::vector<double> lower, mean, upper;
};

// Pointwise envelopes over days start_day .. start_day + days - 1.
struct BandSet {
    double coverage = 0.99;
    Day start_day = 1;
    Band epi;     // cumulative epidemiological cost
    Band econ;    // cumulative action cost
    Band action;  // action level, mean over replications

    std::size_t days() const { return epi.mean.size(); }
    void validate() const;
};

// Nearest-rank empirical quantile: sorted[ceil(q n) - 1].
double empirical_quantile(std::vector<double> values, double q);

// samples[k][t] -> pointwise (1 - coverage)/2 and (1 + coverage)/2 quantiles and the mean.
// The envelope is widened to contain the mean where a skewed sample would exclude it.
Band quantile_band(const std::vector<std::vector<double>>& samples, double coverage);

struct FittedPolicy {
    std::string kind;  // "threshold", "dqn", ...
    DecisionRule rule;
    nlohmann::json description;
    // Set for threshold policies, which act on the real-valued proxy mean.
    std::optional<ThresholdPolicy> threshold;
};

// Fits one policy for a weight; the stream is specific to that weight.
using Planner = std::function<FittedPolicy(TradeoffWeight, const RandomStream&)>;

struct ParetoEntry {
    TradeoffWeight weight;
    FittedPolicy policy;
    double epi_mean = 0.0;
    double econ_mean = 0.0;
    double epi_se = 0.0;
    double econ_se = 0.0;
    ActionLevel immediate_action;
    BandSet bands;
};

struct FrontierConfig {
    RolloutConfig rollout;          // start day, horizon, schedule, previous action
    int band_replications = 1000;   // K
    double coverage = 0.99;
};

std::vector<ParetoEntry> build_frontier(const RegionState& current, const ParamDistribution& posterior,
                                        const std::vector<TradeoffWeight>& weights, const Planner& planner,
                                        const CostModel& cost_model, const FrontierConfig& cfg,
                                        const RandomStream& rng);

// Removes entries strictly dominated (worse on both axes) by another entry.
std::vector<ParetoEntry> pareto_filter(const std::vector<ParetoEntry>& entries);
// Dominance only when the other entry is better by more than z standard errors on both axes.
std::vector<ParetoEntry> pareto_filter_conservative(const std::vector<ParetoEntry>& entries, double z = 2.0);

// Index-level filter on (epi, econ) pairs, shared by both entry filters.
std::vector<std::size_t> nondominated_indices(const std::vector<std::pair<double, double>>& points);

std::pair<ActionLevel, ParetoEntry> recommend(const std::vector<ParetoEntry>& entries, TradeoffWeight weight);

nlohmann::json band_to_json(const Band& b);
nlohmann::json bands_to_json(const BandSet& b);
nlohmann::json entry_to_json(const ParetoEntry& e);
nlohmann::json frontier_to_json(const std::vector<ParetoEntry>& entries);
// weight,epi_mean,econ_mean,action
std::string frontier_csv(const std::vector<ParetoEntry>& entries);

}  // namespace epiplan
