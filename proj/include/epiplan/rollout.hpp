#pragma once

#include <cstdint>
#include <vector>

#include "epiplan/bayes.hpp"
#include "epiplan/cost.hpp"
#include "epiplan/gsir.hpp"
#include "epiplan/rng.hpp"

namespace epiplan {

struct RolloutConfig {
    int replications = 100;
    Day start_day = 1;
    Day horizon = 120;
    DecisionSchedule schedule;
    // Action in force before start_day; used until the first scheduled day.
    ActionLevel previous_action;
    // One theta draw per replication (true) or the posterior mean throughout (false).
    bool sample_theta_per_rollout = true;
    // Redraw theta every simulated day instead of once per replication.
    bool sample_theta_per_step = false;

    void validate() const;
    int transitions() const { return horizon - start_day + 1; }
};

struct ValueEstimate {
    double weighted_mean = 0.0;
    double epi_mean = 0.0;
    double econ_mean = 0.0;
    double standard_error = 0.0;  // of weighted_mean
    int replications = 0;
    std::uint64_t simulated_steps = 0;

    // Checks weighted_mean == epi_mean + omega * econ_mean up to rounding.
    static ValueEstimate make(double weighted, double epi, double econ, double se, int reps, double omega,
                              std::uint64_t steps);
};

// Per-replication detail for prediction bands; index k is day start_day + k.
struct RolloutPath {
    std::vector<double> cumulative_epi;
    std::vector<double> cumulative_econ;
    std::vector<int> actions;
};

struct ReplicationOutcome {
    double epi = 0.0;
    double econ = 0.0;
};

// Replication `index` of a rollout: its random streams are derived from
// (rng, index), so outcomes do not depend on evaluation order.
ReplicationOutcome run_replication(const DecisionRule& policy, const RegionState& start,
                                   const ParamDistribution& params, const CostModel& cost_model,
                                   const RolloutConfig& cfg, const RandomStream& rng, std::uint64_t index,
                                   RolloutPath* path = nullptr);

// Monte Carlo estimate of E[sum_t C^E_t + omega C^A_t] from start_day to horizon.
ValueEstimate evaluate_policy(const DecisionRule& policy, const RegionState& start, const ParamDistribution& params,
                              TradeoffWeight weight, const CostModel& cost_model, const RolloutConfig& cfg,
                              const RandomStream& rng);

struct CostPairEstimate {
    double epi_mean = 0.0;
    double econ_mean = 0.0;
    double epi_se = 0.0;
    double econ_se = 0.0;
    double epi_ci95 = 0.0;  // half-widths of normal-approximation intervals
    double econ_ci95 = 0.0;
    int replications = 0;
};

inline constexpr int kMinReplicationsForCi = 25;

// Fixed-parameter evaluation of both cost axes. Confidence intervals need
// at least kMinReplicationsForCi replications.
CostPairEstimate evaluate_cost_pair(const DecisionRule& policy, const RegionState& start, const GsirParams& params,
                                    const CostModel& cost_model, const RolloutConfig& cfg, const RandomStream& rng,
                                    bool with_ci = true);

}  // namespace epiplan
