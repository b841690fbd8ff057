#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "epiplan/experiments.hpp"
#include "epiplan/kernels.hpp"
#include "epiplan/parallel.hpp"
#include "epiplan/variates.hpp"

namespace epiplan {

ObservationMode observation_mode_from_string(const std::string& s) {
    if (s == "removal") return ObservationMode::kRemoval;
    if (s == "fixed_delay") return ObservationMode::kFixedDelay;
    throw std::invalid_argument("unknown observation mode: " + s);
}

ActionScript staged_action_script(int levels) {
    return [levels](std::size_t region, Day day) {
        const auto k = static_cast<Day>(region % 4);
        const Day to_two = 12 + 3 * k;
        const Day to_top = 30 + 4 * k;
        if (day < to_two) return 1;
        if (day < to_top || levels < 3) return std::min(2, levels);
        return levels;
    };
}

ActionScript constant_action_script(int level) {
    return [level](std::size_t, Day) { return level; };
}

namespace {

Trajectory simulate_region_removal(const SynthSpec& spec, std::size_t k, const SynthRegion& r, RandomStream& rng) {
    const int levels = spec.truth.levels();
    const Count m = r.meta.population;
    Trajectory tr;
    tr.start_day = 1;
    if (spec.incubation_rate) {
        const GseirParams p{spec.truth, *spec.incubation_rate};
        SeirState s(m - r.initial_infectious, 0, r.initial_infectious, 0, m);
        tr.states.push_back(s.sir_view());
        for (Day t = 1; t < spec.horizon; ++t) {
            const ActionLevel a(spec.script(k, t), levels);
            const auto step = gseir_step(s, a, p, rng);
            tr.actions.push_back(a);
            tr.new_infections.push_back(step.new_exposed);
            tr.new_removals.push_back(step.new_removals);
            s = step.next;
            tr.states.push_back(s.sir_view());
        }
        return tr;
    }
    RegionState s(m - r.initial_infectious, r.initial_infectious, 0, m);
    tr.states.push_back(s);
    for (Day t = 1; t < spec.horizon; ++t) {
        const ActionLevel a(spec.script(k, t), levels);
        const auto step = gsir_step(s, a, spec.truth, rng);
        tr.actions.push_back(a);
        tr.new_infections.push_back(step.new_infections);
        tr.new_removals.push_back(step.new_removals);
        s = step.next;
        tr.states.push_back(s);
    }
    return tr;
}

// Infections drawn as in the model; removal happens exactly D days after infection.
Trajectory simulate_region_fixed_delay(const SynthSpec& spec, std::size_t k, const SynthRegion& r,
                                       RandomStream& rng) {
    const int levels = spec.truth.levels();
    const int d = spec.delay.delay_days;
    const Count m = r.meta.population;
    std::vector<Count> infected_on(static_cast<std::size_t>(spec.horizon) + 1, 0);  // index = day
    infected_on[1] = r.initial_infectious;
    Count cumulative = r.initial_infectious;
    auto removed_by = [&](Day t) {
        Count total = 0;
        for (Day u = 1; u <= t - d; ++u) total += infected_on[static_cast<std::size_t>(u)];
        return total;
    };
    Trajectory tr;
    tr.start_day = 1;
    RegionState s(m - cumulative, cumulative, 0, m);
    tr.states.push_back(s);
    for (Day t = 1; t < spec.horizon; ++t) {
        const ActionLevel a(spec.script(k, t), levels);
        const double rate = gsir_rate(s, a, spec.truth);
        const Count e = std::min<Count>(variates::poisson(rng, rate), s.susceptible());
        infected_on[static_cast<std::size_t>(t) + 1] = e;
        cumulative += e;
        const Count removed = removed_by(t + 1);
        const RegionState next(m - cumulative, cumulative - removed, removed, m);
        tr.actions.push_back(a);
        tr.new_infections.push_back(e);
        tr.new_removals.push_back(removed - s.removed());
        s = next;
        tr.states.push_back(s);
    }
    return tr;
}

}  // namespace

SynthResult synth_generate(const SynthSpec& spec, const RandomStream& rng) {
    spec.truth.validate();
    if (spec.horizon < 1) throw std::invalid_argument("synth: horizon must be >= 1");
    if (!spec.script) throw std::invalid_argument("synth: missing action script");
    if (spec.incubation_rate && spec.mode != ObservationMode::kRemoval)
        throw std::invalid_argument("synth: GSEIR dynamics support removal observations only");
    SynthResult out;
    out.dataset.horizon = spec.horizon;
    out.dataset.decision_interval = spec.decision_interval;
    out.dataset.levels = spec.truth.levels();
    out.dataset.regions.resize(spec.regions.size());
    out.latent.resize(spec.regions.size());
    parallel_for(spec.regions.size(), [&](std::size_t k) {
        const auto& r = spec.regions[k];
        r.meta.validate();
        if (r.initial_infectious < 0 || r.initial_infectious > r.meta.population)
            throw std::invalid_argument("synth: initial infectious out of range for region " + r.meta.region_id);
        RandomStream stream = rng.derive({k});
        Trajectory tr = spec.mode == ObservationMode::kRemoval ? simulate_region_removal(spec, k, r, stream)
                                                               : simulate_region_fixed_delay(spec, k, r, stream);
        RegionData data;
        data.meta = r.meta;
        data.series.region_id = r.meta.region_id;
        for (Day t = 1; t <= spec.horizon; ++t) {
            data.series.cumulative_confirmed.push_back(tr.states[static_cast<std::size_t>(t - 1)].removed());
            data.series.actions.push_back(spec.script(k, t));
        }
        out.dataset.regions[k] = std::move(data);
        out.latent[k] = std::move(tr);
    });
    return out;
}

std::vector<SynthRegion> synth_regions(const SynthSettings& s) {
    std::vector<SynthRegion> out;
    for (int k = 0; k < s.regions; ++k) {
        const double frac = s.regions > 1 ? static_cast<double>(k) / (s.regions - 1) : 0.0;
        const double pop = static_cast<double>(s.min_population) *
                           std::pow(static_cast<double>(s.max_population) / static_cast<double>(s.min_population), frac);
        SynthRegion r;
        r.meta.region_id = "R" + std::to_string(k + 1);
        r.meta.population = static_cast<Count>(std::llround(pop));
        r.meta.gdp_annual = s.gdp_per_capita * static_cast<double>(r.meta.population);
        r.initial_infectious =
            std::max<Count>(1, static_cast<Count>(std::llround(s.initial_infectious_fraction * pop)));
        out.push_back(std::move(r));
    }
    return out;
}

SynthSpec synth_spec_from_config(const Config& c) {
    SynthSpec spec;
    spec.truth = c.synth.truth;
    if (c.synth.environment == "gseir") spec.incubation_rate = c.synth.incubation_rate;
    spec.regions = synth_regions(c.synth);
    spec.horizon = std::max(c.synth.horizon, c.horizon + 1);
    spec.decision_interval = c.decision_interval;
    spec.script = staged_action_script(c.levels);
    spec.delay = DelaySpec{c.delay_days};
    spec.mode = observation_mode_from_string(c.synth.observation);
    return spec;
}

std::vector<TransitionRecord> latent_records(const SynthResult& synth, int levels) {
    std::vector<TransitionRecord> out;
    for (std::size_t k = 0; k < synth.latent.size(); ++k) {
        const auto& tr = synth.latent[k];
        const auto& id = synth.dataset.regions[k].meta.region_id;
        for (std::size_t t = 0; t < tr.transitions(); ++t)
            out.push_back({id, tr.start_day + static_cast<Day>(t), tr.states[t], tr.states[t + 1],
                           ActionLevel(tr.actions[t].value(), levels)});
    }
    return out;
}

// ---- validation ------------------------------------------------------------

double ValidationReport::empirical_coverage() const {
    int covered = 0, points = 0;
    for (const auto& r : regions) {
        covered += r.covered;
        points += r.points;
    }
    return points > 0 ? static_cast<double>(covered) / points : 0.0;
}

nlohmann::json ValidationReport::to_json() const {
    nlohmann::json regs = nlohmann::json::array();
    for (const auto& r : regions)
        regs.push_back({{"region_id", r.region_id},
                        {"first_day", r.first_day},
                        {"band", band_to_json(r.band)},
                        {"observed", r.observed},
                        {"covered", r.covered},
                        {"points", r.points}});
    return {{"coverage_level", coverage_level},
            {"empirical_coverage", empirical_coverage()},
            {"posterior", posterior_to_json(posterior)},
            {"regions", regs}};
}

namespace {

// Cumulative removals on days from+1 .. to, simulated from `start` on day `from`
// under the recorded actions.
std::vector<double> forward_removed(const RegionData& region, int levels, const RegionState& start, Day from, Day to,
                                    const GsirParams& theta, RandomStream& rng) {
    std::vector<double> out;
    RegionState s = start;
    for (Day t = from; t < to; ++t) {
        s = gsir_step(s, ActionLevel(region.series.action_on(t), levels), theta, rng).next;
        out.push_back(static_cast<double>(s.removed()));
    }
    return out;
}

}  // namespace

ValidationReport temporal_validation(const Dataset& data, Day train_until, Day predict_until, int replications,
                                     const PriorSpec& priors, DelaySpec delay, double coverage,
                                     const RandomStream& rng) {
    if (!(train_until < predict_until)) throw std::invalid_argument("validation: need train_until < predict_until");
    if (replications < 1) throw std::invalid_argument("validation: replications must be >= 1");
    const auto records = transition_records(data, delay, train_until);
    if (records.empty())
        throw std::invalid_argument("validation: no training transitions up to day " + std::to_string(train_until));
    ValidationReport report;
    report.coverage_level = coverage;
    report.posterior = update_posterior(priors, records);
    const auto dist = ParamDistribution::from_posterior(report.posterior);

    for (std::size_t k = 0; k < data.regions.size(); ++k) {
        const auto& region = data.regions[k];
        if (predict_until > region.series.last_day())
            throw std::invalid_argument("validation: region " + region.meta.region_id + " ends before day " +
                                        std::to_string(predict_until));
        const auto states = reconstruct_states(region.series, region.meta, delay, train_until);
        if (states.empty()) throw std::invalid_argument("validation: region " + region.meta.region_id + " too short");
        const Day from = static_cast<Day>(states.size());
        const auto n = static_cast<std::size_t>(replications);
        std::vector<std::vector<double>> paths(n);
        const RandomStream region_rng = rng.derive({k});
        parallel_for(n, [&](std::size_t r) {
            RandomStream stream = region_rng.derive({r});
            const GsirParams theta = dist.sample(stream);
            auto full = forward_removed(region, data.levels, states.back(), from, predict_until, theta, stream);
            // Keep days train_until+1 .. predict_until.
            paths[r].assign(full.end() - (predict_until - train_until), full.end());
        });
        ValidationRegion vr;
        vr.region_id = region.meta.region_id;
        vr.first_day = train_until + 1;
        vr.band = quantile_band(paths, coverage);
        for (Day t = train_until + 1; t <= predict_until; ++t) {
            const double obs = static_cast<double>(region.series.confirmed_on(t));
            const auto i = static_cast<std::size_t>(t - train_until - 1);
            vr.observed.push_back(obs);
            vr.points++;
            if (vr.band.lower[i] <= obs && obs <= vr.band.upper[i]) vr.covered++;
        }
        report.regions.push_back(std::move(vr));
    }
    return report;
}

Dataset fitted_model_continuation(const Dataset& data, Day train_until, Day until, const PriorSpec& priors,
                                  DelaySpec delay, const RandomStream& rng) {
    if (!(train_until < until)) throw std::invalid_argument("continuation: need train_until < until");
    const auto records = transition_records(data, delay, train_until);
    if (records.empty()) throw std::invalid_argument("continuation: no training transitions");
    const auto dist = ParamDistribution::from_posterior(update_posterior(priors, records));
    Dataset out = data;
    for (std::size_t k = 0; k < out.regions.size(); ++k) {
        auto& region = out.regions[k];
        if (until > region.series.last_day())
            throw std::invalid_argument("continuation: region " + region.meta.region_id + " too short");
        const auto states = reconstruct_states(region.series, region.meta, delay, train_until);
        if (states.empty()) throw std::invalid_argument("continuation: region " + region.meta.region_id + " too short");
        RandomStream stream = rng.derive({k});
        const GsirParams theta = dist.sample(stream);
        const Day from = static_cast<Day>(states.size());
        const auto path = forward_removed(region, data.levels, states.back(), from, until, theta, stream);
        for (Day t = train_until + 1; t <= until; ++t)
            region.series.cumulative_confirmed[static_cast<std::size_t>(t - 1)] =
                static_cast<Count>(path[static_cast<std::size_t>(t - from - 1)]);
    }
    return out;
}

nlohmann::json CvReport::to_json() const {
    nlohmann::json regs = nlohmann::json::array();
    for (const auto& r : regions)
        regs.push_back({{"region_id", r.region_id},
                        {"predicted", r.predicted},
                        {"observed", r.observed},
                        {"error_ratio", r.error_ratio},
                        {"skipped", r.skipped}});
    return {{"regions", regs}, {"mean_error_ratio", mean_error_ratio}, {"warnings", warnings}};
}

CvReport leave_one_out_cv(const Dataset& data, Day train_until, Day predict_from, Day predict_day, int replications,
                          const PriorSpec& priors, DelaySpec delay, const RandomStream& rng) {
    if (data.regions.size() < 2) throw std::invalid_argument("cross-validation needs at least two regions");
    if (!(predict_from < predict_day)) throw std::invalid_argument("cross-validation: need predict_from < predict_day");
    if (replications < 1) throw std::invalid_argument("cross-validation: replications must be >= 1");
    CvReport report;
    double total = 0.0;
    int used = 0;
    for (std::size_t l = 0; l < data.regions.size(); ++l) {
        const auto& region = data.regions[l];
        std::vector<TransitionRecord> records;
        for (std::size_t k = 0; k < data.regions.size(); ++k) {
            if (k == l) continue;
            auto recs = transition_records(data.regions[k], delay, train_until, data.levels);
            records.insert(records.end(), recs.begin(), recs.end());
        }
        const auto dist = ParamDistribution::from_posterior(update_posterior(priors, records));
        CvRegion cr;
        cr.region_id = region.meta.region_id;
        cr.observed = static_cast<double>(region.series.confirmed_on(predict_day));
        if (cr.observed == 0.0) {
            cr.skipped = true;
            report.warnings.push_back("region " + cr.region_id + ": zero observed count on day " +
                                      std::to_string(predict_day) + ", skipped");
            report.regions.push_back(cr);
            continue;
        }
        const auto states = reconstruct_states(region.series, region.meta, delay);
        if (static_cast<Day>(states.size()) < predict_from)
            throw std::invalid_argument("cross-validation: region " + cr.region_id + " has no state on day " +
                                        std::to_string(predict_from));
        const RegionState start = states[static_cast<std::size_t>(predict_from - 1)];
        const auto n = static_cast<std::size_t>(replications);
        std::vector<double> finals(n);
        const RandomStream region_rng = rng.derive({l});
        parallel_for(n, [&](std::size_t r) {
            RandomStream stream = region_rng.derive({r});
            const GsirParams theta = dist.sample(stream);
            finals[r] = forward_removed(region, data.levels, start, predict_from, predict_day, theta, stream).back();
        });
        cr.predicted = kernels::sum_stats(finals).sum / static_cast<double>(n);
        cr.error_ratio = std::abs(cr.predicted - cr.observed) / cr.observed;
        total += cr.error_ratio;
        ++used;
        report.regions.push_back(cr);
    }
    if (used == 0) throw std::invalid_argument("cross-validation: every region was skipped");
    report.mean_error_ratio = total / used;
    return report;
}

}  // namespace epiplan
