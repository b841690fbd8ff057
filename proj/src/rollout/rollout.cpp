#include "epiplan/rollout.hpp"

#include <cmath>
#include <stdexcept>

#include "epiplan/kernels.hpp"
#include "epiplan/parallel.hpp"

namespace epiplan {

namespace {

enum StreamLabel : std::uint64_t { kTheta = 0, kDynamics = 1, kCost = 2 };

struct Stats {
    double mean;
    double se;
};

Stats mean_and_se(const std::vector<double>& values) {
    const auto n = static_cast<double>(values.size());
    const auto s = kernels::sum_stats(values);
    const double mean = s.sum / n;
    if (values.size() < 2) return {mean, 0.0};
    // Centered second pass; the raw sum of squares loses precision for large costs.
    double m2 = 0.0;
    for (double v : values) m2 += (v - mean) * (v - mean);
    return {mean, std::sqrt(m2 / (n - 1.0) / n)};
}

}  // namespace

void RolloutConfig::validate() const {
    if (replications < 1) throw std::invalid_argument("rollout replications must be >= 1");
    if (horizon < start_day) throw std::invalid_argument("rollout horizon precedes start day");
}

ValueEstimate ValueEstimate::make(double weighted, double epi, double econ, double se, int reps, double omega,
                                  std::uint64_t steps) {
    const double expect = epi + omega * econ;
    const double scale = std::max({1.0, std::abs(epi), std::abs(omega * econ)});
    if (std::abs(weighted - expect) > 1e-9 * scale)
        throw std::logic_error("ValueEstimate: weighted mean inconsistent with cost means");
    if (!(se >= 0.0)) throw std::logic_error("ValueEstimate: negative standard error");
    return {weighted, epi, econ, se, reps, steps};
}

ReplicationOutcome run_replication(const DecisionRule& policy, const RegionState& start,
                                   const ParamDistribution& params, const CostModel& cost_model,
                                   const RolloutConfig& cfg, const RandomStream& rng, std::uint64_t index,
                                   RolloutPath* path) {
    RandomStream theta_rng = rng.derive({index, kTheta});
    RandomStream dyn_rng = rng.derive({index, kDynamics});
    RandomStream cost_rng = rng.derive({index, kCost});

    GsirParams theta = cfg.sample_theta_per_rollout ? params.sample(theta_rng) : params.mean();
    ReplicationOutcome out;
    if (path) {
        path->cumulative_epi.clear();
        path->cumulative_econ.clear();
        path->actions.clear();
    }
    RegionState state = start;
    ActionLevel action = cfg.previous_action;
    for (Day t = cfg.start_day; t <= cfg.horizon; ++t) {
        if (cfg.schedule.contains(t)) action = policy(state, t);
        if (cfg.sample_theta_per_step && cfg.sample_theta_per_rollout && t > cfg.start_day)
            theta = params.sample(theta_rng);
        const StepResult step = gsir_step(state, action, theta, dyn_rng);
        out.epi += static_cast<double>(step.new_infections);
        out.econ += sample_action_cost(cost_model, action, cost_rng);
        state = step.next;
        if (path) {
            path->cumulative_epi.push_back(out.epi);
            path->cumulative_econ.push_back(out.econ);
            path->actions.push_back(action.value());
        }
    }
    return out;
}

ValueEstimate evaluate_policy(const DecisionRule& policy, const RegionState& start, const ParamDistribution& params,
                              TradeoffWeight weight, const CostModel& cost_model, const RolloutConfig& cfg,
                              const RandomStream& rng) {
    cfg.validate();
    const auto n = static_cast<std::size_t>(cfg.replications);
    std::vector<double> epi(n), econ(n), weighted(n);
    parallel_for(n, [&](std::size_t r) {
        const auto o = run_replication(policy, start, params, cost_model, cfg, rng, r);
        epi[r] = o.epi;
        econ[r] = o.econ;
        weighted[r] = o.epi + weight.omega * o.econ;
    });
    const Stats e = mean_and_se(epi);
    const Stats c = mean_and_se(econ);
    const Stats w = mean_and_se(weighted);
    const auto steps = static_cast<std::uint64_t>(n) * static_cast<std::uint64_t>(cfg.transitions());
    return ValueEstimate::make(w.mean, e.mean, c.mean, w.se, cfg.replications, weight.omega, steps);
}

CostPairEstimate evaluate_cost_pair(const DecisionRule& policy, const RegionState& start, const GsirParams& params,
                                    const CostModel& cost_model, const RolloutConfig& cfg, const RandomStream& rng,
                                    bool with_ci) {
    cfg.validate();
    if (with_ci && cfg.replications < kMinReplicationsForCi)
        throw std::invalid_argument("confidence intervals need at least 25 replications");
    const auto dist = ParamDistribution::point(params);
    const auto n = static_cast<std::size_t>(cfg.replications);
    std::vector<double> epi(n), econ(n);
    parallel_for(n, [&](std::size_t r) {
        const auto o = run_replication(policy, start, dist, cost_model, cfg, rng, r);
        epi[r] = o.epi;
        econ[r] = o.econ;
    });
    const Stats e = mean_and_se(epi);
    const Stats c = mean_and_se(econ);
    CostPairEstimate out;
    out.epi_mean = e.mean;
    out.econ_mean = c.mean;
    out.epi_se = e.se;
    out.econ_se = c.se;
    out.replications = cfg.replications;
    if (with_ci) {
        out.epi_ci95 = 1.959963984540054 * e.se;
        out.econ_ci95 = 1.959963984540054 * c.se;
    }
    return out;
}

}  // namespace epiplan
