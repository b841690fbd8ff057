#include "epiplan/gsir.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <stdexcept>

#include "epiplan/variates.hpp"

namespace epiplan {

DecisionSchedule::DecisionSchedule(std::vector<Day> days) : days_(std::move(days)) {
    std::sort(days_.begin(), days_.end());
    days_.erase(std::unique(days_.begin(), days_.end()), days_.end());
}

DecisionSchedule DecisionSchedule::every(Day start, int interval, Day horizon) {
    if (interval <= 0) throw std::invalid_argument("decision interval must be positive");
    std::vector<Day> days;
    for (Day t = std::max(start, 1); t <= horizon; t += interval) days.push_back(t);
    return DecisionSchedule(std::move(days));
}

bool DecisionSchedule::contains(Day day) const { return std::binary_search(days_.begin(), days_.end(), day); }

double gsir_rate(const RegionState& state, ActionLevel action, const GsirParams& params) {
    return params.beta(action) * static_cast<double>(state.susceptible()) * static_cast<double>(state.infectious()) /
           static_cast<double>(state.population());
}

StepResult gsir_step(const RegionState& state, ActionLevel action, const GsirParams& params, RandomStream& rng) {
    const Count infections = std::min(variates::poisson(rng, gsir_rate(state, action, params)), state.susceptible());
    const Count removals = variates::binomial(rng, state.infectious(), params.gamma);
    const Count s = state.susceptible() - infections;
    const Count r = state.removed() + removals;
    return {RegionState(s, state.population() - s - r, r, state.population()), infections, removals};
}

void GseirParams::validate() const {
    gsir.validate();
    if (!(incubation_rate >= 0.0 && incubation_rate <= 1.0))
        throw std::invalid_argument("incubation rate outside [0,1]");
}

SeirState::SeirState(Count susceptible, Count exposed, Count infectious, Count removed, Count population)
    : s_(susceptible), e_(exposed), i_(infectious), r_(removed), m_(population) {
    if (population <= 0) throw std::invalid_argument("SeirState: population must be positive");
    if (s_ < 0 || e_ < 0 || i_ < 0 || r_ < 0) throw std::invalid_argument("SeirState: negative compartment");
    if (s_ + e_ + i_ + r_ != m_) throw std::invalid_argument("SeirState: compartments do not sum to population");
}

SeirState SeirState::from_sir(const RegionState& s) {
    const Count exposed = std::min(s.infectious(), s.susceptible());
    return SeirState(s.susceptible() - exposed, exposed, s.infectious(), s.removed(), s.population());
}

RegionState SeirState::sir_view() const { return RegionState(s_ + e_, i_, r_, m_); }

SeirStepResult gseir_step(const SeirState& state, ActionLevel action, const GseirParams& params, RandomStream& rng) {
    const double rate = params.gsir.beta(action) * static_cast<double>(state.susceptible()) *
                        static_cast<double>(state.infectious()) / static_cast<double>(state.population());
    const Count exposed = std::min(variates::poisson(rng, rate), state.susceptible());
    const Count onset = variates::binomial(rng, state.exposed(), params.incubation_rate);
    const Count removals = variates::binomial(rng, state.infectious(), params.gsir.gamma);
    SeirState next(state.susceptible() - exposed, state.exposed() + exposed - onset,
                   state.infectious() + onset - removals, state.removed() + removals, state.population());
    return {next, exposed, onset, removals};
}

Trajectory simulate(const RegionState& initial, Day start_day, Day horizon, const DecisionRule& policy,
                    const GsirParams& params, const DecisionSchedule& schedule, ActionLevel previous_action,
                    RandomStream& rng) {
    Trajectory traj;
    traj.start_day = start_day;
    traj.states.push_back(initial);
    ActionLevel action = previous_action;
    for (Day t = start_day; t <= horizon; ++t) {
        const RegionState& cur = traj.states.back();
        if (schedule.contains(t)) action = policy(cur, t);
        StepResult step = gsir_step(cur, action, params, rng);
        traj.actions.push_back(action);
        traj.new_infections.push_back(step.new_infections);
        traj.new_removals.push_back(step.new_removals);
        traj.states.push_back(step.next);
    }
    return traj;
}

void write_trajectory_csv(std::ostream& out, const Trajectory& traj) {
    out << "day,susceptible,infectious,removed,action,new_infections,new_removals\n";
    for (std::size_t k = 0; k < traj.transitions(); ++k) {
        const auto& s = traj.states[k];
        out << traj.start_day + static_cast<Day>(k) << ',' << s.susceptible() << ',' << s.infectious() << ','
            << s.removed() << ',' << traj.actions[k].value() << ',' << traj.new_infections[k] << ','
            << traj.new_removals[k] << '\n';
    }
}

ReproductionSummary reproduction_numbers(const ParamDistribution& params, int samples, RandomStream& rng) {
    if (samples < 1) throw std::invalid_argument("reproduction_numbers: samples must be >= 1");
    const auto levels = static_cast<std::size_t>(params.levels());
    // Welford accumulation keeps the spread of a point mass exactly zero.
    std::vector<double> mean(levels, 0.0), m2(levels, 0.0);
    for (int s = 0; s < samples; ++s) {
        const GsirParams theta = params.sample(rng);
        for (std::size_t j = 0; j < levels; ++j) {
            const double r0 = theta.betas[j] / theta.gamma;
            const double delta = r0 - mean[j];
            mean[j] += delta / static_cast<double>(s + 1);
            m2[j] += delta * (r0 - mean[j]);
        }
    }
    ReproductionSummary out;
    const GsirParams raw = params.is_point() ? params.mean() : posterior_raw_mean(params.posterior());
    for (std::size_t j = 0; j < levels; ++j) {
        out.mean.push_back(mean[j]);
        out.sd.push_back(samples > 1 ? std::sqrt(m2[j] / static_cast<double>(samples - 1)) : 0.0);
        out.ratio_of_means.push_back(raw.betas[j] / raw.gamma);
    }
    return out;
}

}  // namespace epiplan
