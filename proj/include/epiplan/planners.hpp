#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "epiplan/gsir.hpp"
#include "epiplan/rng.hpp"
#include "epiplan/rollout.hpp"

namespace epiplan {

// Ordered infectious-count cutoffs (lambda_2, ..., lambda_J) with cap lambda_M.
// Level j covers [lambda_j, lambda_{j+1}) with lambda_1 = 0; an empty interval
// loses to the level above it.
class ThresholdPolicy {
public:
    ThresholdPolicy() = default;
    ThresholdPolicy(std::vector<double> thresholds, double cap);

    const std::vector<double>& thresholds() const { return thresholds_; }
    double cap() const { return cap_; }
    int levels() const { return static_cast<int>(thresholds_.size()) + 1; }

    ActionLevel action(double infectious) const;
    DecisionRule rule() const;

    bool operator==(const ThresholdPolicy&) const = default;

private:
    std::vector<double> thresholds_;
    double cap_ = 0.0;
};

ActionLevel apply_threshold_policy(const ThresholdPolicy& policy, const RegionState& state);

using PolicyObjective = std::function<ValueEstimate(const ThresholdPolicy&)>;

// Rollout objective for a fixed seed: every candidate sees the same random
// streams, so differences between candidates come from the policy alone.
PolicyObjective rollout_objective(const RegionState& start, ParamDistribution params, TradeoffWeight weight,
                                  CostModel cost_model, RolloutConfig cfg, RandomStream rng);

struct GridAxis {
    double lower = 0.0;
    double upper = 0.0;
    double step = 1.0;
};

// rounds[r][i] is the window for threshold i in round r. Round 0 is absolute;
// later rounds are offsets from the incumbent argmin. Lower bounds are clipped at 0.
struct GridSchedule {
    std::vector<std::vector<GridAxis>> rounds;

    void validate() const;
    std::size_t dimension() const { return rounds.empty() ? 0 : rounds.front().size(); }
};

// Five rounds: steps 50, 5, 1, 0.25, 0.01 for lambda_2 and 200, 20, 4, 1, 0.2
// for lambda_3, starting from [0, 300] x [0, 2000].
GridSchedule default_grid_schedule();

// Points of one axis: lower, lower + step, ..., <= upper.
std::vector<double> axis_points(const GridAxis& axis);

// Feasible points of one round around `center` (ignored for round 0).
std::vector<std::vector<double>> round_points(const GridSchedule& schedule, std::size_t round,
                                              const std::vector<double>& center, double cap);

struct PlannerResult {
    ThresholdPolicy policy;
    ValueEstimate value;
    std::uint64_t evaluations = 0;
};

// Lexicographic order on thresholds; used to break value ties.
bool threshold_less(const std::vector<double>& a, const std::vector<double>& b);

PlannerResult grid_search(const PolicyObjective& objective, const GridSchedule& schedule, double cap);

struct SpsaConfig {
    int iterations = 200;
    // zeta_k = c / k^a
    double c = 0.0;
    double a = 0.602;
    // xi_k = d / k^g
    double d = 20.0;
    double g = 0.101;
    // When c <= 0, c is chosen so the first step moves about initial_step.
    double initial_step = 50.0;
    int calibration_samples = 4;

    double zeta(int k) const;
    double xi(int k) const;
    void validate() const;
};

// Euclidean projection onto {0 <= l_2, l_i + margin <= l_{i+1}, l_J + margin <= cap}.
std::vector<double> project_feasible(const std::vector<double>& thresholds, double margin, double cap);

PlannerResult spsa_search(const PolicyObjective& objective, const SpsaConfig& config, double cap,
                          const ThresholdPolicy& initial, RandomStream rng);

struct ComplexityEstimate {
    double grid_points_per_round = 0.0;  // eta^{J-1}
    double step_evaluations_per_weight = 0.0;  // M T eta^{J-1}
    double step_evaluations_tool = 0.0;  // M B T eta^{J-1} + B K T
};

ComplexityEstimate complexity_estimate(double eta, int levels, int replications, int weights, int mbs_replications,
                                       int horizon);

nlohmann::json threshold_policy_to_json(const ThresholdPolicy& p);
ThresholdPolicy threshold_policy_from_json(const nlohmann::json& j);

}  // namespace epiplan
