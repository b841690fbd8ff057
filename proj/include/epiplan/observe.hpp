#pragma once

#include <vector>

#include "epiplan/bayes.hpp"
#include "epiplan/rng.hpp"
#include "epiplan/types.hpp"

namespace epiplan {

// Expected lag between becoming infectious and being confirmed.
struct DelaySpec {
    int delay_days = 9;
};

// Latent states from cumulative confirmations: R_t = O_t, I_t = O_{t+D} - O_t,
// S_t = M - I_t - R_t. Element k is day k+1; days after last_day - D are
// not reconstructible and are omitted.
std::vector<RegionState> reconstruct_states(const SurveillanceSeries& series, const RegionMeta& meta,
                                            DelaySpec delay);

// Same, using only observations up to and including `as_of`.
std::vector<RegionState> reconstruct_states(const SurveillanceSeries& series, const RegionMeta& meta,
                                            DelaySpec delay, Day as_of);

// Day-to-day transitions of consecutive reconstructed states; the action
// recorded on day t drives the transition t -> t+1.
std::vector<TransitionRecord> transition_records(const RegionData& region, DelaySpec delay, Day as_of, int levels);

// Records for every region of the dataset, region by region.
std::vector<TransitionRecord> transition_records(const Dataset& data, DelaySpec delay, Day as_of);

struct ProxyState {
    RegionState state;          // rounded, population-consistent
    double mean_susceptible = 0.0;
    double mean_infectious = 0.0;  // real-valued average used by threshold policies
    double mean_removed = 0.0;
};

// Model-based simulation over the unobservable window: rolls the model from
// the last reconstructible state under the recorded actions and averages
// the compartments over replications.
ProxyState mbs_proxy(const RegionState& last_full_state, const std::vector<ActionLevel>& recent_actions,
                     const ParamDistribution& params, int replications, RandomStream& rng);
ProxyState mbs_proxy(const RegionState& last_full_state, const std::vector<ActionLevel>& recent_actions,
                     const GsirParams& params, int replications, RandomStream& rng);

// Proxy for the decision day `as_of` from data observed up to `as_of`.
ProxyState decision_proxy(const RegionData& region, int levels, DelaySpec delay, Day as_of,
                          const ParamDistribution& params, int replications, RandomStream& rng);

}  // namespace epiplan
