#include <algorithm>
#include <cstdio>
#include <fstream>
#include <iomanip>
#include <sstream>

#include "epiplan/dataset.hpp"
#include "epiplan/experiments.hpp"
#include "epiplan/service.hpp"

namespace epiplan {

using nlohmann::json;

json ServiceError::body() const { return {{"code", code}, {"message", what()}, {"detail", detail}}; }

namespace {

ServiceError not_found(const std::string& what) { return ServiceError(404, "not_found", what); }
ServiceError conflict(const std::string& what, json detail = {}) {
    return ServiceError(409, "conflict", what, std::move(detail));
}
ServiceError bad_request(const std::string& what, json detail = {}) {
    return ServiceError(400, "bad_request", what, std::move(detail));
}

std::string frontier_key(Day day, const std::string& region) { return std::to_string(day) + "/" + region; }

std::string etag_of(const std::string& body) {
    std::uint64_t h = 1469598103934665603ULL;
    for (unsigned char c : body) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    std::ostringstream s;
    s << '"' << std::hex << std::setw(16) << std::setfill('0') << h << '"';
    return s.str();
}

json state_to_json(const RegionState& s) {
    return {s.susceptible(), s.infectious(), s.removed(), s.population()};
}

RegionState state_from_json(const json& j) {
    return RegionState(j.at(0).get<Count>(), j.at(1).get<Count>(), j.at(2).get<Count>(), j.at(3).get<Count>());
}

json dataset_to_json(const Dataset& d) {
    json regions = json::array();
    for (const auto& r : d.regions)
        regions.push_back({{"region_id", r.meta.region_id},
                           {"population", r.meta.population},
                           {"gdp_annual", r.meta.gdp_annual},
                           {"confirmed", r.series.cumulative_confirmed},
                           {"actions", r.series.actions}});
    return {{"horizon", d.horizon}, {"decision_interval", d.decision_interval}, {"levels", d.levels}, {"regions", regions}};
}

Dataset dataset_from_json(const json& j) {
    Dataset d;
    d.horizon = j.at("horizon").get<Day>();
    d.decision_interval = j.at("decision_interval").get<int>();
    d.levels = j.at("levels").get<int>();
    for (const auto& r : j.at("regions")) {
        RegionData rd;
        rd.meta = {r.at("region_id").get<std::string>(), r.at("population").get<Count>(), r.at("gdp_annual").get<double>()};
        rd.series.region_id = rd.meta.region_id;
        rd.series.cumulative_confirmed = r.at("confirmed").get<std::vector<Count>>();
        rd.series.actions = r.at("actions").get<std::vector<int>>();
        d.regions.push_back(std::move(rd));
    }
    return d;
}

// Confirmations through `day` and actions before it.
void truncate_to(Dataset& d, Day day) {
    for (auto& r : d.regions) {
        if (r.series.last_day() < day)
            throw bad_request("region " + r.meta.region_id + " has no observation on the start day " +
                              std::to_string(day));
        r.series.cumulative_confirmed.resize(static_cast<std::size_t>(day));
        r.series.actions.resize(static_cast<std::size_t>(day - 1));
    }
}

PosteriorParams posterior_for(const Session& s) {
    std::vector<TransitionRecord> records;
    for (const auto& r : s.data.regions) {
        auto recs = transition_records(r, DelaySpec{s.config.delay_days}, s.current_day, s.config.levels);
        records.insert(records.end(), recs.begin(), recs.end());
    }
    return update_posterior(s.config.priors, records);
}

std::size_t region_index(const Session& s, const std::string& region) {
    for (std::size_t i = 0; i < s.data.regions.size(); ++i)
        if (s.data.regions[i].meta.region_id == region) return i;
    throw not_found("unknown region " + region);
}

}  // namespace

bool Session::at_decision_point() const {
    return current_day <= config.horizon && is_decision_point(current_day, config.start_day, config.decision_interval);
}

json Session::summary() const {
    json regions = json::array();
    for (const auto& r : data.regions) regions.push_back(r.meta.region_id);
    return {{"id", id},
            {"seed", seed},
            {"current_day", current_day},
            {"decision_point", at_decision_point()},
            {"regions", regions},
            {"commits", commits},
            {"posterior", posterior},
            {"synthetic", synthetic},
            {"config", config_to_json(config)}};
}

json Session::snapshot() const {
    json states = json::array();
    for (const auto& s : truth_states) states.push_back(state_to_json(s));
    return {{"id", id},
            {"config", config_to_json(config)},
            {"seed", seed},
            {"data", dataset_to_json(data)},
            {"current_day", current_day},
            {"commits", commits},
            {"posterior", posterior},
            {"synthetic", synthetic},
            {"truth", {{"gamma", truth.gamma}, {"betas", truth.betas}}},
            {"truth_states", states},
            {"frontiers", frontiers}};
}

Session Session::from_snapshot(const json& j) {
    Session s;
    s.id = j.at("id").get<std::string>();
    s.config = config_from_json(j.at("config"));
    s.seed = j.at("seed").get<std::uint64_t>();
    s.data = dataset_from_json(j.at("data"));
    s.current_day = j.at("current_day").get<Day>();
    s.commits = j.at("commits").get<std::map<std::string, int>>();
    s.posterior = j.at("posterior");
    s.synthetic = j.at("synthetic").get<bool>();
    s.truth.gamma = j.at("truth").at("gamma").get<double>();
    s.truth.betas = j.at("truth").at("betas").get<std::vector<double>>();
    for (const auto& st : j.at("truth_states")) s.truth_states.push_back(state_from_json(st));
    s.frontiers = j.at("frontiers").get<std::map<std::string, std::string>>();
    return s;
}

std::string compute_frontier_body(const Session& s, const std::string& region) {
    const std::size_t l = region_index(s, region);
    const auto& rd = s.data.regions[l];
    const Config& c = s.config;
    const DelaySpec delay{c.delay_days};
    const RandomStream root = derive_rng(SeedSpec{s.seed, 0}, {static_cast<std::uint64_t>(s.current_day), l});
    const auto dist = ParamDistribution::from_posterior(posterior_from_json(s.posterior));
    RandomStream proxy_rng = root.derive({1});
    const ProxyState proxy = decision_proxy(rd, c.levels, delay, s.current_day, dist, c.mbs_replications, proxy_rng);
    const CostModel cost = make_cost_model(rd.meta, c.level_costs);
    PlanContext ctx{proxy.state, s.current_day, c.horizon, c.decision_interval, dist, cost};
    FrontierConfig fc;
    fc.rollout = plan_rollout_config(c, ctx, c.planner.replications);
    fc.band_replications = c.band_replications;
    fc.coverage = c.band_coverage;
    auto entries = build_frontier(proxy.state, dist, weight_grid(c.weight_exponents), make_planner(c, ctx), cost, fc,
                                  root.derive({2}));
    for (auto& e : entries)
        if (e.policy.threshold) e.immediate_action = e.policy.threshold->action(proxy.mean_infectious);
    json body = {{"session_id", s.id},
                 {"region_id", region},
                 {"day", s.current_day},
                 {"proxy",
                  {{"state", state_to_json(proxy.state)},
                   {"mean_susceptible", proxy.mean_susceptible},
                   {"mean_infectious", proxy.mean_infectious},
                   {"mean_removed", proxy.mean_removed}}},
                 {"entries", frontier_to_json(entries)}};
    return body.dump();
}

// ---- store ---------------------------------------------------------------------

SessionStore::SessionStore(std::filesystem::path state_dir) : state_dir_(std::move(state_dir)) {
    std::filesystem::create_directories(state_dir_);
    for (const auto& entry : std::filesystem::directory_iterator(state_dir_)) {
        if (entry.path().extension() != ".json") continue;
        std::ifstream in(entry.path());
        json j;
        in >> j;
        auto slot = std::make_shared<Slot>();
        slot->session = Session::from_snapshot(j);
        const auto& id = slot->session.id;
        if (id.size() > 1 && id[0] == 's') next_id_ = std::max(next_id_, std::stoul(id.substr(1)) + 1);
        sessions_[id] = std::move(slot);
    }
}

SessionStore::~SessionStore() { wait_idle(); }

void SessionStore::wait_idle() {
    std::vector<std::thread> workers;
    {
        std::lock_guard lock(mutex_);
        workers.swap(workers_);
    }
    for (auto& t : workers)
        if (t.joinable()) t.join();
}

std::shared_ptr<SessionStore::Slot> SessionStore::find(const std::string& id) {
    std::lock_guard lock(mutex_);
    auto it = sessions_.find(id);
    if (it == sessions_.end()) throw not_found("unknown session " + id);
    return it->second;
}

void SessionStore::save(const Session& s) const {
    const auto path = state_dir_ / (s.id + ".json");
    const auto tmp = state_dir_ / (s.id + ".json.tmp");
    {
        std::ofstream out(tmp);
        out << s.snapshot().dump();
    }
    std::filesystem::rename(tmp, path);
}

json SessionStore::create(const json& body) {
    if (!body.is_object()) throw bad_request("request body must be a JSON object");
    Session s;
    try {
        s.config = body.contains("config") ? config_from_json(body.at("config")) : Config{};
    } catch (const std::exception& e) {
        throw bad_request(std::string("invalid config: ") + e.what());
    }
    s.seed = body.value("seed", s.config.seed);
    const Config& c = s.config;
    if (body.contains("dataset")) {
        const auto& d = body.at("dataset");
        try {
            LoadOptions opt;
            opt.decision_interval = c.decision_interval;
            opt.levels = c.levels;
            s.data = parse_dataset(d.at("regions_csv").get<std::string>(), d.at("series_csv").get<std::string>(), opt);
        } catch (const ParseError& e) {
            throw bad_request(e.what(), {{"file", e.file()}, {"row", e.row()}, {"column", e.column()}});
        } catch (const json::exception& e) {
            throw bad_request(std::string("dataset needs regions_csv and series_csv: ") + e.what());
        } catch (const std::invalid_argument& e) {
            throw bad_request(e.what());
        }
        s.synthetic = false;
    } else {
        const auto synth = synth_generate(synth_spec_from_config(c), derive_rng(SeedSpec{s.seed, 0}, {0xD47A}));
        s.data = synth.dataset;
        s.synthetic = true;
        s.truth = c.synth.truth;
        for (const auto& tr : synth.latent) s.truth_states.push_back(tr.states.at(static_cast<std::size_t>(c.start_day - 1)));
    }
    s.current_day = c.start_day;
    truncate_to(s.data, c.start_day);
    try {
        s.posterior = posterior_to_json(posterior_for(s));
    } catch (const std::invalid_argument& e) {
        throw bad_request(e.what());
    }
    if (!s.synthetic) {
        // Simulate mode on uploaded data starts from the proxy state under the posterior mean.
        const auto post = posterior_from_json(s.posterior);
        s.truth = posterior_mean(post);
        for (std::size_t l = 0; l < s.data.regions.size(); ++l) {
            RandomStream r = derive_rng(SeedSpec{s.seed, 0}, {0x7207, l});
            try {
                s.truth_states.push_back(decision_proxy(s.data.regions[l], c.levels, DelaySpec{c.delay_days},
                                                        s.current_day, ParamDistribution::point(s.truth),
                                                        c.mbs_replications, r)
                                             .state);
            } catch (const std::invalid_argument& e) {
                throw bad_request(e.what());
            }
        }
    }
    auto slot = std::make_shared<Slot>();
    {
        std::lock_guard lock(mutex_);
        s.id = "s" + std::to_string(next_id_++);
        slot->session = std::move(s);
        sessions_[slot->session.id] = slot;
    }
    std::lock_guard lock(slot->mutex);
    save(slot->session);
    return slot->session.summary();
}

json SessionStore::get(const std::string& id) {
    auto slot = find(id);
    std::lock_guard lock(slot->mutex);
    return slot->session.summary();
}

void SessionStore::run_job(std::shared_ptr<Slot> slot, std::string key, std::string region, Session snapshot) {
    std::string body, error;
    try {
        body = compute_frontier_body(snapshot, region);
    } catch (const std::exception& e) {
        error = e.what();
    }
    std::lock_guard lock(slot->mutex);
    auto& job = slot->jobs[key];
    job.done = true;
    job.error = error;
    // Discard results for a session that moved on while planning.
    if (error.empty() && slot->session.current_day == snapshot.current_day) {
        slot->session.frontiers[key] = body;
        save(slot->session);
    }
}

FrontierResponse SessionStore::frontier(const std::string& id, const std::string& region) {
    auto slot = find(id);
    std::unique_lock lock(slot->mutex);
    Session& s = slot->session;
    region_index(s, region);
    if (!s.at_decision_point())
        throw conflict("day " + std::to_string(s.current_day) + " is not a decision point",
                       {{"current_day", s.current_day}});
    const std::string key = frontier_key(s.current_day, region);
    if (auto it = s.frontiers.find(key); it != s.frontiers.end()) return {200, it->second, etag_of(it->second)};
    auto jit = slot->jobs.find(key);
    if (jit != slot->jobs.end() && jit->second.done && !jit->second.error.empty()) {
        const std::string err = jit->second.error;
        slot->jobs.erase(jit);
        throw ServiceError(500, "planning_failed", err, {{"region_id", region}, {"day", s.current_day}});
    }
    if (jit == slot->jobs.end()) {
        Job job;
        job.token = id + ":" + key;
        slot->jobs[key] = job;
        Session copy = s;
        std::lock_guard store_lock(mutex_);
        workers_.emplace_back(&SessionStore::run_job, this, slot, key, region, std::move(copy));
    }
    const json pending = {{"status", "running"}, {"token", slot->jobs[key].token}, {"region_id", region},
                          {"day", s.current_day}};
    return {202, pending.dump(), ""};
}

json SessionStore::bands(const std::string& id, const std::string& region, int entry) {
    auto slot = find(id);
    std::lock_guard lock(slot->mutex);
    const Session& s = slot->session;
    region_index(s, region);
    auto it = s.frontiers.find(frontier_key(s.current_day, region));
    if (it == s.frontiers.end()) throw conflict("frontier not computed for region " + region + " on this day");
    const json f = json::parse(it->second);
    const auto& entries = f.at("entries");
    if (entry < 0 || static_cast<std::size_t>(entry) >= entries.size())
        throw not_found("no policy " + std::to_string(entry) + " in frontier");
    const auto& e = entries.at(static_cast<std::size_t>(entry));
    return {{"region_id", region}, {"day", s.current_day}, {"policy", entry}, {"weight", e.at("weight")},
            {"bands", e.at("bands")}};
}

json SessionStore::commit(const std::string& id, const std::string& region, const json& body) {
    auto slot = find(id);
    std::lock_guard lock(slot->mutex);
    Session& s = slot->session;
    region_index(s, region);
    if (!body.is_object() || !body.contains("action") || !body.at("action").is_number_integer())
        throw bad_request("body must be {\"action\": <level>}");
    const int action = body.at("action").get<int>();
    if (action < 1 || action > s.config.levels)
        throw bad_request("action out of range", {{"action", action}, {"levels", s.config.levels}});
    if (!s.at_decision_point()) throw conflict("no decision point open on day " + std::to_string(s.current_day));
    if (!s.frontiers.count(frontier_key(s.current_day, region)))
        throw conflict("fetch the frontier for region " + region + " before committing");
    if (s.commits.count(region)) throw conflict("action already committed for region " + region + " on this day");
    s.commits[region] = action;
    save(s);
    return {{"region_id", region}, {"day", s.current_day}, {"action", action}};
}

json SessionStore::advance(const std::string& id, const json& body) {
    auto slot = find(id);
    std::lock_guard lock(slot->mutex);
    Session& s = slot->session;
    const Config& c = s.config;
    if (!body.is_object()) throw bad_request("request body must be a JSON object");
    const std::string mode = body.value("mode", "simulate");
    if (s.at_decision_point()) {
        json missing = json::array();
        for (const auto& r : s.data.regions)
            if (!s.commits.count(r.meta.region_id)) missing.push_back(r.meta.region_id);
        if (!missing.empty()) throw conflict("actions not committed for every region", {{"missing", missing}});
    }
    // Action in force per region: the commit, else the one persisting from yesterday.
    std::vector<int> actions;
    for (const auto& r : s.data.regions) {
        auto it = s.commits.find(r.meta.region_id);
        actions.push_back(it != s.commits.end() ? it->second
                                                : (r.series.actions.empty() ? 1 : r.series.actions.back()));
    }

    Dataset next = s.data;
    std::vector<RegionState> next_truth = s.truth_states;
    int days = 0;
    if (mode == "simulate") {
        days = body.value("days", c.decision_interval);
        if (days < 1) throw bad_request("days must be >= 1");
        if (s.current_day + days > c.horizon + 1) throw conflict("advance would pass the horizon");
        for (std::size_t l = 0; l < next.regions.size(); ++l) {
            RandomStream rng =
                derive_rng(SeedSpec{s.seed, 0}, {0x5100, static_cast<std::uint64_t>(s.current_day), l});
            const ActionLevel a(actions[l], c.levels);
            for (int k = 0; k < days; ++k) {
                next_truth[l] = gsir_step(next_truth[l], a, s.truth, rng).next;
                next.regions[l].series.actions.push_back(actions[l]);
                next.regions[l].series.cumulative_confirmed.push_back(next_truth[l].removed());
            }
        }
    } else if (mode == "ingest") {
        if (!body.contains("observations") || !body.at("observations").is_object())
            throw bad_request("ingest needs observations: {region: [cumulative counts]}");
        const auto& obs = body.at("observations");
        for (const auto& r : next.regions)
            if (!obs.contains(r.meta.region_id)) throw bad_request("missing observations for region " + r.meta.region_id);
        for (std::size_t l = 0; l < next.regions.size(); ++l) {
            auto& r = next.regions[l];
            const auto counts = obs.at(r.meta.region_id).get<std::vector<Count>>();
            if (counts.empty()) throw bad_request("empty observations for region " + r.meta.region_id);
            if (l == 0) days = static_cast<int>(counts.size());
            if (static_cast<int>(counts.size()) != days)
                throw bad_request("observation arrays must have equal length");
            Count prev = r.series.cumulative_confirmed.back();
            for (std::size_t k = 0; k < counts.size(); ++k) {
                if (counts[k] < prev || counts[k] > r.meta.population)
                    throw ServiceError(422, "unprocessable",
                                       "cumulative count decreases or exceeds population for region " + r.meta.region_id,
                                       {{"region_id", r.meta.region_id}, {"index", k}, {"value", counts[k]}});
                prev = counts[k];
                r.series.actions.push_back(actions[l]);
                r.series.cumulative_confirmed.push_back(counts[k]);
            }
        }
        if (s.current_day + days > c.horizon + 1) throw conflict("advance would pass the horizon");
    } else {
        throw bad_request("mode must be simulate or ingest");
    }

    s.data = std::move(next);
    s.truth_states = std::move(next_truth);
    s.current_day += days;
    s.commits.clear();
    s.posterior = posterior_to_json(posterior_for(s));
    save(s);
    return s.summary();
}

}  // namespace epiplan
