#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

#include "epiplan/dataset.hpp"
#include "epiplan/experiments.hpp"
#include "epiplan/kernels.hpp"
#include "epiplan/parallel.hpp"

namespace epiplan {

// ---- planning ----------------------------------------------------------------

RolloutConfig plan_rollout_config(const Config& config, const PlanContext& ctx, int replications) {
    RolloutConfig rc;
    rc.replications = replications;
    rc.start_day = ctx.start_day;
    rc.horizon = ctx.horizon;
    rc.schedule = DecisionSchedule::every(ctx.start_day, ctx.decision_interval, ctx.horizon);
    rc.previous_action = ActionLevel(1, config.levels);
    rc.sample_theta_per_rollout = config.sample_theta_per_rollout;
    return rc;
}

Planner make_planner(const Config& config, const PlanContext& ctx) {
    const double cap = std::floor(config.planner.cap_fraction * static_cast<double>(ctx.start.population()));
    const RolloutConfig rc = plan_rollout_config(config, ctx, config.planner.replications);
    const auto& ps = config.planner;
    return [=](TradeoffWeight w, const RandomStream& rng) -> FittedPolicy {
        if (ps.name == "dqn") {
            auto plan = dqn_plan(ctx.start, ctx.start_day, ctx.horizon, ctx.decision_interval, ctx.params, w,
                                 ctx.cost_model, ps.dqn, rng);
            return {"dqn", plan.rule, plan.q.to_json(), std::nullopt};
        }
        const auto objective = rollout_objective(ctx.start, ctx.params, w, ctx.cost_model, rc, rng.derive({0}));
        PlannerResult res;
        if (ps.name == "grid") {
            res = grid_search(objective, ps.grid, cap);
        } else if (ps.name == "spsa") {
            std::vector<double> init;
            for (const auto& ax : ps.grid.rounds.front()) init.push_back(std::min(cap, 0.5 * (ax.lower + ax.upper)));
            res = spsa_search(objective, ps.spsa, cap, ThresholdPolicy(project_feasible(init, 0.0, cap), cap),
                              rng.derive({1}));
        } else {
            throw std::invalid_argument("unknown planner " + ps.name);
        }
        auto desc = threshold_policy_to_json(res.policy);
        desc["objective"] = res.value.weighted_mean;
        desc["evaluations"] = res.evaluations;
        return {"threshold", res.policy.rule(), desc, res.policy};
    };
}

// ---- comparison --------------------------------------------------------------

const PolicyRow& ComparisonReport::row(const std::string& policy) const {
    for (const auto& r : rows)
        if (r.policy == policy) return r;
    throw std::out_of_range("no policy row " + policy);
}

std::string ComparisonReport::to_csv() const {
    std::ostringstream out;
    out.precision(12);
    out << "policy,family,parameter,epi_mean,econ_mean,epi_se,econ_se,epi_ci95,econ_ci95\n";
    for (const auto& r : rows)
        out << r.policy << ',' << r.family << ',' << r.parameter << ',' << r.epi_mean << ',' << r.econ_mean << ','
            << r.epi_se << ',' << r.econ_se << ',' << r.epi_ci95 << ',' << r.econ_ci95 << '\n';
    return out.str();
}

nlohmann::json ComparisonReport::to_json() const {
    nlohmann::json arr = nlohmann::json::array();
    for (const auto& r : rows)
        arr.push_back({{"policy", r.policy},
                       {"family", r.family},
                       {"parameter", r.parameter},
                       {"epi_mean", r.epi_mean},
                       {"econ_mean", r.econ_mean},
                       {"epi_se", r.epi_se},
                       {"econ_se", r.econ_se},
                       {"epi_ci95", r.epi_ci95},
                       {"econ_ci95", r.econ_ci95}});
    return {{"name", name}, {"rows", arr}, {"fitted", fitted}};
}

bool dominates(const PolicyRow& b, const PolicyRow& p, double z) {
    const double epi_tol = z * std::hypot(b.epi_se, p.epi_se);
    const double econ_tol = z * std::hypot(b.econ_se, p.econ_se);
    return b.epi_mean < p.epi_mean - epi_tol && b.econ_mean < p.econ_mean - econ_tol;
}

ComparisonEnvironment comparison_environment(const SynthResult& synth, const Config& config,
                                             std::optional<double> incubation_rate) {
    ComparisonEnvironment env;
    env.observed = synth.dataset;
    env.truth = config.synth.truth;
    env.incubation_rate = incubation_rate;
    for (const auto& tr : synth.latent) {
        if (static_cast<std::size_t>(config.start_day) > tr.states.size())
            throw std::invalid_argument("comparison: synthetic data shorter than the start day");
        env.start.push_back(tr.states[static_cast<std::size_t>(config.start_day - 1)]);
    }
    return env;
}

namespace {

enum StreamTag : std::uint64_t { kFitProxy = 1, kFit = 2, kDynamics = 3, kCosts = 4, kProxy = 5, kRefit = 6 };

// Region data visible on `day`: confirmations through day, actions before it.
RegionData truncated(const RegionData& r, Day day) {
    RegionData out = r;
    out.series.cumulative_confirmed.resize(static_cast<std::size_t>(day));
    out.series.actions.resize(static_cast<std::size_t>(day - 1));
    return out;
}

struct Outcome {
    double epi = 0.0;
    double econ = 0.0;
};

// Truth state of one region, GSIR or GSEIR.
struct RegionTruth {
    RegionState sir;
    SeirState seir;
    bool use_seir = false;

    Count removed() const { return use_seir ? seir.removed() : sir.removed(); }
    Count step(ActionLevel a, const GsirParams& truth, double incubation, RandomStream& rng) {
        if (use_seir) {
            const auto r = gseir_step(seir, a, GseirParams{truth, incubation}, rng);
            seir = r.next;
            return r.new_exposed;
        }
        const auto r = gsir_step(sir, a, truth, rng);
        sir = r.next;
        return r.new_infections;
    }
};

using Controller = std::function<std::vector<ActionLevel>(const std::vector<RegionData>& visible, Day day,
                                                          const std::vector<ActionLevel>& current, std::uint64_t rep)>;

Outcome run_environment(const ComparisonEnvironment& env, const Config& config,
                        const std::vector<CostModel>& costs, const Controller& controller, const RandomStream& rng,
                        std::uint64_t rep) {
    const std::size_t n = env.observed.regions.size();
    std::vector<RegionData> visible(n);
    std::vector<RegionTruth> truth(n);
    std::vector<RandomStream> dyn, cost_rng;
    for (std::size_t l = 0; l < n; ++l) {
        visible[l] = truncated(env.observed.regions[l], config.start_day);
        truth[l].use_seir = env.incubation_rate.has_value();
        if (truth[l].use_seir) truth[l].seir = SeirState::from_sir(env.start[l]);
        else truth[l].sir = env.start[l];
        dyn.push_back(rng.derive({kDynamics, rep, l}));
        cost_rng.push_back(rng.derive({kCosts, rep, l}));
    }
    const double incubation = env.incubation_rate.value_or(0.0);
    std::vector<ActionLevel> current(n, ActionLevel(1, config.levels));
    Outcome out;
    for (Day t = config.start_day; t <= config.horizon; ++t) {
        current = controller(visible, t, current, rep);
        for (std::size_t l = 0; l < n; ++l) {
            out.epi += static_cast<double>(truth[l].step(current[l], env.truth, incubation, dyn[l]));
            out.econ += sample_action_cost(costs[l], current[l], cost_rng[l]);
            visible[l].series.actions.push_back(current[l].value());
            visible[l].series.cumulative_confirmed.push_back(truth[l].removed());
        }
    }
    return out;
}

PolicyRow summarize(const std::string& name, const std::string& family, double parameter,
                    const std::vector<Outcome>& outcomes) {
    std::vector<double> epi, econ;
    for (const auto& o : outcomes) {
        epi.push_back(o.epi);
        econ.push_back(o.econ);
    }
    auto stats = [](const std::vector<double>& v, double& mean, double& se) {
        const double n = static_cast<double>(v.size());
        mean = kernels::sum_stats(v).sum / n;
        double m2 = 0.0;
        for (double x : v) m2 += (x - mean) * (x - mean);
        se = v.size() > 1 ? std::sqrt(m2 / (n - 1.0) / n) : 0.0;
    };
    PolicyRow row;
    row.policy = name;
    row.family = family;
    row.parameter = parameter;
    stats(epi, row.epi_mean, row.epi_se);
    stats(econ, row.econ_mean, row.econ_se);
    row.epi_ci95 = 1.959963984540054 * row.epi_se;
    row.econ_ci95 = 1.959963984540054 * row.econ_se;
    return row;
}

std::string weight_label(double omega) {
    std::ostringstream s;
    s.precision(6);
    s << "proposed(w=" << omega << ")";
    return s.str();
}

}  // namespace

ComparisonReport policy_comparison(const ComparisonEnvironment& env, const Config& config,
                                   const std::vector<TradeoffWeight>& weights,
                                   const std::vector<BaselineSpec>& baselines, const RandomStream& rng,
                                   const std::string& name) {
    config.validate();
    const std::size_t n = env.observed.regions.size();
    if (n == 0 || env.start.size() != n) throw std::invalid_argument("comparison: environment/regions mismatch");
    const DelaySpec delay{config.delay_days};
    const int levels = config.levels;
    std::vector<CostModel> costs;
    for (const auto& r : env.observed.regions) costs.push_back(make_cost_model(r.meta, config.level_costs));

    // Fit one policy per (region, weight) from data visible on the start day.
    std::vector<RegionData> at_start;
    for (const auto& r : env.observed.regions) at_start.push_back(truncated(r, config.start_day));
    auto posterior_at = [&](const std::vector<RegionData>& visible, Day day) {
        std::vector<TransitionRecord> records;
        for (const auto& r : visible) {
            auto recs = transition_records(r, delay, day, levels);
            records.insert(records.end(), recs.begin(), recs.end());
        }
        return ParamDistribution::from_posterior(update_posterior(config.priors, records));
    };
    const ParamDistribution dist0 = posterior_at(at_start, config.start_day);
    std::vector<ProxyState> proxy0(n);
    for (std::size_t l = 0; l < n; ++l) {
        RandomStream s = rng.derive({kFitProxy, l});
        proxy0[l] = decision_proxy(at_start[l], levels, delay, config.start_day, dist0, config.mbs_replications, s);
    }
    auto fit = [&](std::size_t l, const ParamDistribution& dist, const RegionState& start, Day day, TradeoffWeight w,
                   const RandomStream& s) {
        PlanContext ctx{start, day, config.horizon, config.decision_interval, dist, costs[l]};
        return make_planner(config, ctx)(w, s);
    };
    const std::size_t nw = weights.size();
    std::vector<FittedPolicy> fitted(n * nw);
    parallel_for(n * nw, [&](std::size_t i) {
        const std::size_t l = i / nw, w = i % nw;
        fitted[i] = fit(l, dist0, proxy0[l].state, config.start_day, weights[w], rng.derive({kFit, l, w}));
    });

    ComparisonReport report;
    report.name = name;
    report.fitted = nlohmann::json::array();
    for (std::size_t l = 0; l < n; ++l)
        for (std::size_t w = 0; w < nw; ++w)
            report.fitted.push_back({{"region_id", env.observed.regions[l].meta.region_id},
                                     {"weight", weights[w].omega},
                                     {"policy", fitted[l * nw + w].description}});

    const auto reps = static_cast<std::size_t>(config.evaluation_replications);
    auto evaluate = [&](const Controller& controller) {
        std::vector<Outcome> outcomes(reps);
        parallel_for(reps, [&](std::size_t r) { outcomes[r] = run_environment(env, config, costs, controller, rng, r); });
        return outcomes;
    };

    for (std::size_t w = 0; w < nw; ++w) {
        const TradeoffWeight weight = weights[w];
        Controller proposed = [&, w, weight](const std::vector<RegionData>& visible, Day day,
                                             const std::vector<ActionLevel>& current, std::uint64_t rep) {
            if (!is_decision_point(day, config.start_day, config.decision_interval)) return current;
            const ParamDistribution dist = posterior_at(visible, day);
            std::vector<ActionLevel> next(n);
            for (std::size_t l = 0; l < n; ++l) {
                RandomStream s = rng.derive({kProxy, rep, static_cast<std::uint64_t>(day), l, w});
                const ProxyState proxy = decision_proxy(visible[l], levels, delay, day, dist, config.mbs_replications, s);
                FittedPolicy refit;
                const FittedPolicy* policy = &fitted[l * nw + w];
                if (config.replan && day != config.start_day) {
                    refit = fit(l, dist, proxy.state, day, weight,
                                rng.derive({kRefit, rep, static_cast<std::uint64_t>(day), l, w}));
                    policy = &refit;
                }
                next[l] = policy->threshold ? policy->threshold->action(proxy.mean_infectious)
                                            : policy->rule(proxy.state, day);
            }
            return next;
        };
        report.rows.push_back(summarize(weight_label(weight.omega), "proposed", weight.omega, evaluate(proposed)));
    }

    for (const auto& b : baselines) {
        const BaselinePolicy policy = b.make();
        Controller ctrl = [&, policy](const std::vector<RegionData>& visible, Day, const std::vector<ActionLevel>&,
                                      std::uint64_t) {
            std::vector<ActionLevel> next;
            for (const auto& r : visible) {
                // Daily new confirmations through yesterday.
                OccurrenceMemory mem(levels);
                const auto& c = r.series.cumulative_confirmed;
                for (std::size_t i = 0; i + 1 < c.size(); ++i) mem.record(i == 0 ? c[0] : c[i] - c[i - 1]);
                next.push_back(policy(mem));
            }
            return next;
        };
        report.rows.push_back(summarize(b.label(), b.family, b.m, evaluate(ctrl)));
    }

    bool have_behavior = true;
    for (const auto& r : env.observed.regions) have_behavior = have_behavior && r.series.last_day() >= config.horizon;
    if (have_behavior) {
        Controller ctrl = [&](const std::vector<RegionData>&, Day day, const std::vector<ActionLevel>&, std::uint64_t) {
            std::vector<ActionLevel> next;
            for (const auto& r : env.observed.regions)
                next.push_back(behavior_policy(env.observed, r.meta.region_id, day));
            return next;
        };
        report.rows.push_back(summarize("behavior", "behavior", 0.0, evaluate(ctrl)));
    }
    return report;
}

// ---- sensitivity ---------------------------------------------------------------

std::vector<std::pair<double, double>> prior_effect_grid() {
    std::vector<std::pair<double, double>> out;
    const double steps[] = {0.05, 0.1, 0.15, 0.2};
    for (double mu3 : steps)
        for (double gap : steps) out.emplace_back(mu3 + gap, mu3);
    return out;
}

GsirParams recalibrate_r0(const GsirParams& fitted, double r0) {
    fitted.validate();
    if (!(r0 > 0.0)) throw std::invalid_argument("r0 must be > 0");
    GsirParams out = fitted;
    const double factor = r0 * fitted.gamma / fitted.betas.front();
    for (auto& b : out.betas) b *= factor;
    return out;
}

std::vector<SensitivityCase> sensitivity_cases(const Config& base, int replications) {
    std::vector<SensitivityCase> out;
    Config b = base;
    b.evaluation_replications = replications;
    out.push_back({"base", b, false});
    Config seir = b;
    seir.synth.environment = "gseir";
    out.push_back({"seir", seir, true});
    for (int d = 7; d <= 11; ++d) {
        Config c = b;
        c.delay_days = d;
        out.push_back({"D=" + std::to_string(d), c, false});
    }
    const double beta1 = base.priors.betas.front().a / base.priors.betas.front().b;
    const double rate = base.priors.betas.front().b;
    for (const auto& [mu2, mu3] : prior_effect_grid()) {
        Config c = b;
        std::vector<double> effects{1.0, mu2, mu3};
        effects.resize(static_cast<std::size_t>(c.levels), mu3);
        c.priors = priors_from_effects(beta1, effects, rate, base.priors.gamma);
        std::ostringstream name;
        name << "mu2=" << mu2 << ",mu3=" << mu3;
        out.push_back({name.str(), c, false});
    }
    return out;
}

std::string SensitivityReport::to_csv() const {
    std::ostringstream out;
    out.precision(12);
    out << "variation,policy,family,parameter,epi_mean,econ_mean,epi_se,econ_se\n";
    for (const auto& run : runs)
        for (const auto& r : run.rows)
            out << '"' << run.name << "\"," << r.policy << ',' << r.family << ',' << r.parameter << ',' << r.epi_mean
                << ',' << r.econ_mean << ',' << r.epi_se << ',' << r.econ_se << '\n';
    return out.str();
}

nlohmann::json SensitivityReport::to_json() const {
    nlohmann::json arr = nlohmann::json::array();
    for (const auto& r : runs) arr.push_back(r.to_json());
    return {{"runs", arr}};
}

SensitivityReport sensitivity_suite(const Config& base, const std::vector<SensitivityCase>& cases,
                                    const RandomStream& rng) {
    (void)base;
    SensitivityReport report;
    for (const auto& c : cases) {
        const auto spec = synth_spec_from_config(c.config);
        const auto synth = synth_generate(spec, rng.derive({0}));
        const auto env = comparison_environment(synth, c.config,
                                                c.seir ? std::optional<double>(c.config.synth.incubation_rate)
                                                       : std::nullopt);
        report.runs.push_back(policy_comparison(env, c.config, weight_grid(c.config.weight_exponents),
                                                c.config.baselines, rng.derive({1}), c.name));
    }
    return report;
}

}  // namespace epiplan
