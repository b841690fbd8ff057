#pragma once

#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

#include "epiplan/bayes.hpp"
#include "epiplan/rng.hpp"
#include "epiplan/types.hpp"

namespace epiplan {

// Maps the state on a decision day to the action for that day.
using DecisionRule = std::function<ActionLevel(const RegionState&, Day)>;

// Sorted set of days on which the action may change.
class DecisionSchedule {
public:
    DecisionSchedule() = default;
    explicit DecisionSchedule(std::vector<Day> days);
    static DecisionSchedule every(Day start, int interval, Day horizon);

    bool contains(Day day) const;
    const std::vector<Day>& days() const { return days_; }

private:
    std::vector<Day> days_;
};

// beta_action * S * I / M
double gsir_rate(const RegionState& state, ActionLevel action, const GsirParams& params);

struct StepResult {
    RegionState next;
    Count new_infections = 0;
    Count new_removals = 0;
};

// One day of the stochastic model: new infections ~ Poisson(rate) capped at S,
// removals ~ Binomial(I, gamma), both drawn from the pre-step state.
StepResult gsir_step(const RegionState& state, ActionLevel action, const GsirParams& params, RandomStream& rng);

struct GseirParams {
    GsirParams gsir;
    double incubation_rate = 1.0 / 7.0;

    void validate() const;
};

class SeirState {
public:
    SeirState() = default;
    SeirState(Count susceptible, Count exposed, Count infectious, Count removed, Count population);
    // Exposed count set to the infectious count, taken out of the susceptibles.
    static SeirState from_sir(const RegionState& s);

    Count susceptible() const { return s_; }
    Count exposed() const { return e_; }
    Count infectious() const { return i_; }
    Count removed() const { return r_; }
    Count population() const { return m_; }
    RegionState sir_view() const;  // exposed folded into susceptible

    bool operator==(const SeirState&) const = default;

private:
    Count s_ = 0, e_ = 0, i_ = 0, r_ = 0, m_ = 0;
};

struct SeirStepResult {
    SeirState next;
    Count new_exposed = 0;
    Count new_infectious = 0;
    Count new_removals = 0;
};

SeirStepResult gseir_step(const SeirState& state, ActionLevel action, const GseirParams& params, RandomStream& rng);

struct Trajectory {
    Day start_day = 1;
    std::vector<RegionState> states;    // states[k] is the state on day start_day + k
    std::vector<ActionLevel> actions;   // actions[k] applies to the transition out of states[k]
    std::vector<Count> new_infections;  // e^S of transition k
    std::vector<Count> new_removals;    // e^R of transition k

    std::size_t transitions() const { return actions.size(); }
};

// Simulates days start_day .. horizon. On scheduled days the rule is queried;
// otherwise the previous action (initially `previous_action`) persists.
Trajectory simulate(const RegionState& initial, Day start_day, Day horizon, const DecisionRule& policy,
                    const GsirParams& params, const DecisionSchedule& schedule, ActionLevel previous_action,
                    RandomStream& rng);

// day,susceptible,infectious,removed,action,new_infections,new_removals
void write_trajectory_csv(std::ostream& out, const Trajectory& traj);

struct ReproductionSummary {
    std::vector<double> mean;           // E[beta_j / gamma]
    std::vector<double> sd;
    std::vector<double> ratio_of_means;  // E[beta_j] / E[gamma]
};

ReproductionSummary reproduction_numbers(const ParamDistribution& params, int samples, RandomStream& rng);

}  // namespace epiplan
