#include "epiplan/observe.hpp"

#include <cmath>
#include <stdexcept>

#include "epiplan/gsir.hpp"

namespace epiplan {

std::vector<RegionState> reconstruct_states(const SurveillanceSeries& series, const RegionMeta& meta,
                                            DelaySpec delay) {
    return reconstruct_states(series, meta, delay, series.last_day());
}

std::vector<RegionState> reconstruct_states(const SurveillanceSeries& series, const RegionMeta& meta,
                                            DelaySpec delay, Day as_of) {
    if (delay.delay_days < 0) throw std::invalid_argument("delay must be non-negative");
    const Day last = std::min(as_of, series.last_day());
    std::vector<RegionState> out;
    for (Day t = 1; t + delay.delay_days <= last; ++t) {
        const Count removed = series.confirmed_on(t);
        const Count infectious = series.confirmed_on(t + delay.delay_days) - removed;
        const Count susceptible = meta.population - infectious - removed;
        if (susceptible < 0)
            throw std::invalid_argument("region " + meta.region_id + ": reconstructed susceptible count negative on day " +
                                        std::to_string(t));
        if (infectious < 0)
            throw std::invalid_argument("region " + meta.region_id + ": cumulative counts decrease after day " +
                                        std::to_string(t));
        out.emplace_back(susceptible, infectious, removed, meta.population);
    }
    return out;
}

std::vector<TransitionRecord> transition_records(const RegionData& region, DelaySpec delay, Day as_of, int levels) {
    const auto states = reconstruct_states(region.series, region.meta, delay, as_of);
    std::vector<TransitionRecord> out;
    for (std::size_t k = 0; k + 1 < states.size(); ++k) {
        const Day day = static_cast<Day>(k) + 1;
        TransitionRecord rec{region.meta.region_id, day, states[k], states[k + 1],
                             ActionLevel(region.series.action_on(day), levels)};
        out.push_back(std::move(rec));
    }
    return out;
}

std::vector<TransitionRecord> transition_records(const Dataset& data, DelaySpec delay, Day as_of) {
    std::vector<TransitionRecord> out;
    for (const auto& region : data.regions) {
        auto recs = transition_records(region, delay, as_of, data.levels);
        out.insert(out.end(), recs.begin(), recs.end());
    }
    return out;
}

namespace {

ProxyState run_mbs(const RegionState& start, const std::vector<ActionLevel>& actions, int replications,
                   RandomStream& rng, const std::function<GsirParams(RandomStream&)>& draw) {
    if (replications < 1) throw std::invalid_argument("mbs_proxy: replications must be >= 1");
    ProxyState out;
    if (actions.empty()) {
        out.state = start;
        out.mean_susceptible = static_cast<double>(start.susceptible());
        out.mean_infectious = static_cast<double>(start.infectious());
        out.mean_removed = static_cast<double>(start.removed());
        return out;
    }
    double sum_s = 0.0, sum_i = 0.0, sum_r = 0.0;
    for (int rep = 0; rep < replications; ++rep) {
        RandomStream stream = rng.derive({static_cast<std::uint64_t>(rep)});
        const GsirParams theta = draw(stream);
        RegionState s = start;
        for (const auto& a : actions) s = gsir_step(s, a, theta, stream).next;
        sum_s += static_cast<double>(s.susceptible());
        sum_i += static_cast<double>(s.infectious());
        sum_r += static_cast<double>(s.removed());
    }
    const double n = static_cast<double>(replications);
    out.mean_susceptible = sum_s / n;
    out.mean_infectious = sum_i / n;
    out.mean_removed = sum_r / n;
    const Count m = start.population();
    auto half_up = [](double v) { return static_cast<Count>(std::floor(v + 0.5)); };
    Count s = half_up(out.mean_susceptible);
    const Count r = half_up(out.mean_removed);
    if (s + r > m) s = m - r;
    out.state = RegionState(s, m - s - r, r, m);
    return out;
}

}  // namespace

ProxyState mbs_proxy(const RegionState& last_full_state, const std::vector<ActionLevel>& recent_actions,
                     const ParamDistribution& params, int replications, RandomStream& rng) {
    return run_mbs(last_full_state, recent_actions, replications, rng,
                   [&](RandomStream& s) { return params.sample(s); });
}

ProxyState mbs_proxy(const RegionState& last_full_state, const std::vector<ActionLevel>& recent_actions,
                     const GsirParams& params, int replications, RandomStream& rng) {
    return run_mbs(last_full_state, recent_actions, replications, rng, [&](RandomStream&) { return params; });
}

ProxyState decision_proxy(const RegionData& region, int levels, DelaySpec delay, Day as_of,
                          const ParamDistribution& params, int replications, RandomStream& rng) {
    const auto states = reconstruct_states(region.series, region.meta, delay, as_of);
    if (states.empty())
        throw std::invalid_argument("region " + region.meta.region_id + ": no reconstructible state by day " +
                                    std::to_string(as_of));
    const Day last_full = static_cast<Day>(states.size());
    std::vector<ActionLevel> actions;
    for (Day t = last_full; t < as_of; ++t) actions.emplace_back(region.series.action_on(t), levels);
    return mbs_proxy(states.back(), actions, params, replications, rng);
}

}  // namespace epiplan
