#include <cmath>
#include <stdexcept>

#include <nlohmann/json.hpp>

#include "epiplan/planners.hpp"

namespace epiplan {

ThresholdPolicy::ThresholdPolicy(std::vector<double> thresholds, double cap)
    : thresholds_(std::move(thresholds)), cap_(cap) {
    if (thresholds_.empty()) throw std::invalid_argument("threshold policy needs at least one threshold");
    if (!std::isfinite(cap_) || cap_ < 0.0) throw std::invalid_argument("tolerance cap must be finite and >= 0");
    double prev = 0.0;
    for (double t : thresholds_) {
        if (!std::isfinite(t)) throw std::invalid_argument("threshold must be finite");
        if (t < prev) throw std::invalid_argument("thresholds must be non-negative and non-decreasing");
        prev = t;
    }
    if (thresholds_.back() > cap_) throw std::invalid_argument("top threshold exceeds tolerance cap");
}

ActionLevel ThresholdPolicy::action(double infectious) const {
    int level = 1;
    for (double t : thresholds_)
        if (t <= infectious) ++level;
    return ActionLevel(level, levels());
}

DecisionRule ThresholdPolicy::rule() const {
    return [p = *this](const RegionState& s, Day) { return p.action(static_cast<double>(s.infectious())); };
}

ActionLevel apply_threshold_policy(const ThresholdPolicy& policy, const RegionState& state) {
    return policy.action(static_cast<double>(state.infectious()));
}

PolicyObjective rollout_objective(const RegionState& start, ParamDistribution params, TradeoffWeight weight,
                                  CostModel cost_model, RolloutConfig cfg, RandomStream rng) {
    return [=](const ThresholdPolicy& p) {
        return evaluate_policy(p.rule(), start, params, weight, cost_model, cfg, rng);
    };
}

ComplexityEstimate complexity_estimate(double eta, int levels, int replications, int weights, int mbs_replications,
                                       int horizon) {
    ComplexityEstimate out;
    out.grid_points_per_round = std::pow(eta, levels - 1);
    out.step_evaluations_per_weight = replications * static_cast<double>(horizon) * out.grid_points_per_round;
    out.step_evaluations_tool = weights * out.step_evaluations_per_weight +
                                static_cast<double>(weights) * mbs_replications * horizon;
    return out;
}

nlohmann::json threshold_policy_to_json(const ThresholdPolicy& p) {
    return {{"kind", "threshold"}, {"thresholds", p.thresholds()}, {"cap", p.cap()}};
}

ThresholdPolicy threshold_policy_from_json(const nlohmann::json& j) {
    if (j.value("kind", "threshold") != "threshold") throw std::invalid_argument("not a threshold policy");
    return ThresholdPolicy(j.at("thresholds").get<std::vector<double>>(), j.at("cap").get<double>());
}

}  // namespace epiplan
