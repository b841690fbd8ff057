#include "epiplan/config.hpp"

#include <fstream>
#include <set>
#include <stdexcept>

#include <nlohmann/json.hpp>

namespace epiplan {

namespace {

using nlohmann::json;

void reject_unknown(const json& j, const std::set<std::string>& known, const std::string& where) {
    if (!j.is_object()) throw std::invalid_argument("config: " + where + " must be an object");
    for (const auto& [k, _] : j.items())
        if (!known.count(k)) throw std::invalid_argument("config: unknown key '" + k + "' in " + where);
}

template <typename T>
void read(const json& j, const char* key, T& out) {
    if (j.contains(key)) out = j.at(key).get<T>();
}

json grid_to_json(const GridSchedule& g) {
    json rounds = json::array();
    for (const auto& r : g.rounds) {
        json axes = json::array();
        for (const auto& a : r) axes.push_back({a.lower, a.upper, a.step});
        rounds.push_back(axes);
    }
    return rounds;
}

GridSchedule grid_from_json(const json& j) {
    GridSchedule g;
    for (const auto& r : j) {
        std::vector<GridAxis> axes;
        for (const auto& a : r) {
            if (a.size() != 3) throw std::invalid_argument("config: grid axis must be [lower, upper, step]");
            axes.push_back({a[0].get<double>(), a[1].get<double>(), a[2].get<double>()});
        }
        g.rounds.push_back(std::move(axes));
    }
    g.validate();
    return g;
}

}  // namespace

void Config::validate() const {
    if (delay_days < 0) throw std::invalid_argument("config: delay_days must be >= 0");
    if (decision_interval < 1) throw std::invalid_argument("config: decision_interval must be >= 1");
    if (levels < 2) throw std::invalid_argument("config: levels must be >= 2");
    if (horizon < start_day || start_day < 1) throw std::invalid_argument("config: need 1 <= start_day <= horizon");
    priors.validate();
    if (static_cast<int>(priors.betas.size()) != levels) throw std::invalid_argument("config: prior count != levels");
    if (static_cast<int>(level_costs.size()) != levels) throw std::invalid_argument("config: cost count != levels");
    if (weight_exponents.empty()) throw std::invalid_argument("config: weight grid is empty");
    if (planner.name != "grid" && planner.name != "spsa" && planner.name != "dqn")
        throw std::invalid_argument("config: unknown planner '" + planner.name + "'");
    planner.grid.validate();
    planner.spsa.validate();
    planner.dqn.validate();
    if (planner.replications < 1 || mbs_replications < 1 || band_replications < 1 || evaluation_replications < 1)
        throw std::invalid_argument("config: replication counts must be >= 1");
    if (!(planner.cap_fraction > 0.0 && planner.cap_fraction <= 1.0))
        throw std::invalid_argument("config: planner.cap_fraction must lie in (0, 1]");
    if (!(band_coverage > 0.0 && band_coverage < 1.0)) throw std::invalid_argument("config: band_coverage in (0, 1)");
    if (synth.regions < 1 || synth.min_population < 1 || synth.max_population < synth.min_population)
        throw std::invalid_argument("config: invalid synth region settings");
    if (synth.observation != "removal" && synth.observation != "fixed_delay")
        throw std::invalid_argument("config: synth.observation must be removal or fixed_delay");
    if (synth.environment != "gsir" && synth.environment != "gseir")
        throw std::invalid_argument("config: synth.environment must be gsir or gseir");
    synth.truth.validate();
}

Config config_from_json(const json& j) {
    reject_unknown(j,
                   {"seed", "delay_days", "decision_interval", "levels", "start_day", "horizon", "priors",
                    "level_costs", "weight_exponents", "planner", "mbs_replications", "band_replications",
                    "band_coverage", "evaluation_replications", "replan", "sample_theta_per_rollout", "baselines",
                    "synth"},
                   "config");
    Config c;
    read(j, "seed", c.seed);
    read(j, "delay_days", c.delay_days);
    read(j, "decision_interval", c.decision_interval);
    read(j, "levels", c.levels);
    read(j, "start_day", c.start_day);
    read(j, "horizon", c.horizon);
    if (j.contains("priors")) c.priors = posterior_from_json(j.at("priors"));
    if (j.contains("level_costs")) c.level_costs = level_costs_from_json(j.at("level_costs"));
    read(j, "weight_exponents", c.weight_exponents);
    read(j, "mbs_replications", c.mbs_replications);
    read(j, "band_replications", c.band_replications);
    read(j, "band_coverage", c.band_coverage);
    read(j, "evaluation_replications", c.evaluation_replications);
    read(j, "replan", c.replan);
    read(j, "sample_theta_per_rollout", c.sample_theta_per_rollout);

    if (j.contains("planner")) {
        const auto& p = j.at("planner");
        reject_unknown(p, {"name", "grid", "spsa", "dqn", "replications", "cap_fraction"}, "planner");
        read(p, "name", c.planner.name);
        read(p, "replications", c.planner.replications);
        read(p, "cap_fraction", c.planner.cap_fraction);
        if (p.contains("grid")) c.planner.grid = grid_from_json(p.at("grid"));
        if (p.contains("spsa")) {
            const auto& s = p.at("spsa");
            reject_unknown(s, {"iterations", "c", "a", "d", "g", "initial_step", "calibration_samples"}, "planner.spsa");
            read(s, "iterations", c.planner.spsa.iterations);
            read(s, "c", c.planner.spsa.c);
            read(s, "a", c.planner.spsa.a);
            read(s, "d", c.planner.spsa.d);
            read(s, "g", c.planner.spsa.g);
            read(s, "initial_step", c.planner.spsa.initial_step);
            read(s, "calibration_samples", c.planner.spsa.calibration_samples);
        }
        if (p.contains("dqn")) {
            const auto& d = p.at("dqn");
            reject_unknown(d,
                           {"layers", "width", "step_size", "exploration_epsilon", "episodes", "minibatch",
                            "replay_capacity", "target_sync", "warmup"},
                           "planner.dqn");
            read(d, "layers", c.planner.dqn.layers);
            read(d, "width", c.planner.dqn.width);
            read(d, "step_size", c.planner.dqn.step_size);
            read(d, "exploration_epsilon", c.planner.dqn.exploration_epsilon);
            read(d, "episodes", c.planner.dqn.episodes);
            read(d, "minibatch", c.planner.dqn.minibatch);
            read(d, "replay_capacity", c.planner.dqn.replay_capacity);
            read(d, "target_sync", c.planner.dqn.target_sync);
            read(d, "warmup", c.planner.dqn.warmup);
        }
    }
    if (j.contains("baselines")) {
        c.baselines.clear();
        for (const auto& b : j.at("baselines")) c.baselines.push_back({b.at("family").get<std::string>(), b.at("m").get<int>()});
    }
    if (j.contains("synth")) {
        const auto& s = j.at("synth");
        reject_unknown(s,
                       {"truth", "regions", "min_population", "max_population", "initial_infectious_fraction",
                        "gdp_per_capita", "horizon", "observation", "environment", "incubation_rate"},
                       "synth");
        if (s.contains("truth")) {
            c.synth.truth.gamma = s.at("truth").at("gamma").get<double>();
            c.synth.truth.betas = s.at("truth").at("betas").get<std::vector<double>>();
        }
        read(s, "regions", c.synth.regions);
        read(s, "min_population", c.synth.min_population);
        read(s, "max_population", c.synth.max_population);
        read(s, "initial_infectious_fraction", c.synth.initial_infectious_fraction);
        read(s, "gdp_per_capita", c.synth.gdp_per_capita);
        read(s, "horizon", c.synth.horizon);
        read(s, "observation", c.synth.observation);
        read(s, "environment", c.synth.environment);
        read(s, "incubation_rate", c.synth.incubation_rate);
    }
    c.validate();
    return c;
}

json config_to_json(const Config& c) {
    json baselines = json::array();
    for (const auto& b : c.baselines) baselines.push_back({{"family", b.family}, {"m", b.m}});
    const auto& s = c.planner.spsa;
    const auto& d = c.planner.dqn;
    return {
        {"seed", c.seed},
        {"delay_days", c.delay_days},
        {"decision_interval", c.decision_interval},
        {"levels", c.levels},
        {"start_day", c.start_day},
        {"horizon", c.horizon},
        {"priors", posterior_to_json(c.priors)},
        {"level_costs", level_costs_to_json(c.level_costs)},
        {"weight_exponents", c.weight_exponents},
        {"planner",
         {{"name", c.planner.name},
          {"replications", c.planner.replications},
          {"cap_fraction", c.planner.cap_fraction},
          {"grid", grid_to_json(c.planner.grid)},
          {"spsa",
           {{"iterations", s.iterations},
            {"c", s.c},
            {"a", s.a},
            {"d", s.d},
            {"g", s.g},
            {"initial_step", s.initial_step},
            {"calibration_samples", s.calibration_samples}}},
          {"dqn",
           {{"layers", d.layers},
            {"width", d.width},
            {"step_size", d.step_size},
            {"exploration_epsilon", d.exploration_epsilon},
            {"episodes", d.episodes},
            {"minibatch", d.minibatch},
            {"replay_capacity", d.replay_capacity},
            {"target_sync", d.target_sync},
            {"warmup", d.warmup}}}}},
        {"mbs_replications", c.mbs_replications},
        {"band_replications", c.band_replications},
        {"band_coverage", c.band_coverage},
        {"evaluation_replications", c.evaluation_replications},
        {"replan", c.replan},
        {"sample_theta_per_rollout", c.sample_theta_per_rollout},
        {"baselines", baselines},
        {"synth",
         {{"truth", {{"gamma", c.synth.truth.gamma}, {"betas", c.synth.truth.betas}}},
          {"regions", c.synth.regions},
          {"min_population", c.synth.min_population},
          {"max_population", c.synth.max_population},
          {"initial_infectious_fraction", c.synth.initial_infectious_fraction},
          {"gdp_per_capita", c.synth.gdp_per_capita},
          {"horizon", c.synth.horizon},
          {"observation", c.synth.observation},
          {"environment", c.synth.environment},
          {"incubation_rate", c.synth.incubation_rate}}},
    };
}

Config load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw std::invalid_argument("cannot open config file " + path.string());
    json j;
    try {
        in >> j;
    } catch (const json::parse_error& e) {
        throw std::invalid_argument("config " + path.string() + ": " + e.what());
    }
    return config_from_json(j);
}

}  // namespace epiplan
