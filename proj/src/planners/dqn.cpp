#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

#include <nlohmann/json.hpp>

#include "epiplan/dqn.hpp"

namespace epiplan {

TabularMdp::TabularMdp(std::vector<std::vector<int>> next, std::vector<std::vector<double>> cost, int stages)
    : next_(std::move(next)), cost_(std::move(cost)), stages_(stages) {
    if (next_.empty() || next_.size() != cost_.size()) throw std::invalid_argument("tabular mdp: table size mismatch");
    const std::size_t actions = next_.front().size();
    for (std::size_t s = 0; s < next_.size(); ++s) {
        if (next_[s].size() != actions || cost_[s].size() != actions || actions == 0)
            throw std::invalid_argument("tabular mdp: ragged tables");
        for (int n : next_[s])
            if (n < 0 || static_cast<std::size_t>(n) >= next_.size())
                throw std::invalid_argument("tabular mdp: next state out of range");
    }
    if (stages_ < 1) throw std::invalid_argument("tabular mdp: stages must be >= 1");
}

int TabularMdp::action_count() const { return static_cast<int>(next_.front().size()); }

void TabularMdp::reset(RandomStream& rng) {
    state_ = static_cast<int>(rng.uniform() * static_cast<double>(next_.size()));
    state_ = std::min(state_, static_cast<int>(next_.size()) - 1);
}

std::vector<double> TabularMdp::one_hot(int state, std::size_t states) {
    std::vector<double> f(states, 0.0);
    f.at(static_cast<std::size_t>(state)) = 1.0;
    return f;
}

std::vector<double> TabularMdp::features() const { return one_hot(state_, next_.size()); }

double TabularMdp::step(int action, RandomStream&) {
    const auto s = static_cast<std::size_t>(state_);
    const double c = cost_[s].at(static_cast<std::size_t>(action));
    state_ = next_[s][static_cast<std::size_t>(action)];
    return c;
}

GsirMdp::GsirMdp(RegionState start, Day start_day, Day horizon, int interval, ParamDistribution params,
                 TradeoffWeight weight, CostModel cost_model, double cost_scale)
    : start_(start),
      state_(start),
      start_day_(start_day),
      horizon_(horizon),
      day_(start_day),
      interval_(interval),
      params_(std::move(params)),
      weight_(weight),
      cost_model_(std::move(cost_model)),
      cost_scale_(cost_scale) {
    if (interval_ < 1) throw std::invalid_argument("gsir mdp: interval must be >= 1");
    if (horizon_ < start_day_) throw std::invalid_argument("gsir mdp: horizon precedes start day");
    if (!(cost_scale_ > 0.0)) throw std::invalid_argument("gsir mdp: cost scale must be > 0");
}

int GsirMdp::stages() const { return (horizon_ - start_day_) / interval_ + 1; }

void GsirMdp::reset(RandomStream& rng) {
    state_ = start_;
    day_ = start_day_;
    theta_ = params_.sample(rng);
}

std::vector<double> GsirMdp::state_features(const RegionState& s) {
    const double m = static_cast<double>(std::max<Count>(1, s.population()));
    return {static_cast<double>(s.susceptible()) / m, static_cast<double>(s.infectious()) / m,
            static_cast<double>(s.removed()) / m};
}

std::vector<double> GsirMdp::features() const { return state_features(state_); }

double GsirMdp::step(int action, RandomStream& rng) {
    const ActionLevel a(action + 1, action_count());
    double total = 0.0;
    for (int k = 0; k < interval_ && day_ <= horizon_; ++k, ++day_) {
        const StepResult r = gsir_step(state_, a, theta_, rng);
        total += static_cast<double>(r.new_infections) + weight_.omega * sample_action_cost(cost_model_, a, rng);
        state_ = r.next;
    }
    return total * cost_scale_;
}

void QNetConfig::validate() const {
    if (layers < 1 || width < 1 || episodes < 1 || minibatch < 1 || replay_capacity < 1 || target_sync < 1 ||
        warmup < 0)
        throw std::invalid_argument("q-network settings must be positive");
    if (!(step_size > 0.0)) throw std::invalid_argument("q-network step size must be > 0");
    if (!(exploration_epsilon >= 0.0 && exploration_epsilon <= 1.0))
        throw std::invalid_argument("exploration epsilon must lie in [0, 1]");
}

QNetwork::QNetwork(Mlp net, int stages, int actions) : net_(std::move(net)), stages_(stages), actions_(actions) {
    if (net_.output_dim() != static_cast<std::size_t>(actions))
        throw std::invalid_argument("q-network output dimension must equal the action count");
}

namespace {

std::vector<double> with_stage(std::span<const double> features, int stage, int stages) {
    std::vector<double> x(features.begin(), features.end());
    x.push_back(static_cast<double>(stage) / static_cast<double>(stages));
    return x;
}

int argmin(const std::vector<double>& q) {
    return static_cast<int>(std::min_element(q.begin(), q.end()) - q.begin());
}

}  // namespace

std::vector<double> QNetwork::q_values(std::span<const double> features, int stage) const {
    return net_.forward(with_stage(features, stage, stages_));
}

int QNetwork::greedy(std::span<const double> features, int stage) const { return argmin(q_values(features, stage)); }

nlohmann::json QNetwork::to_json() const {
    return {{"kind", "dqn"}, {"stages", stages_}, {"actions", actions_}, {"network", net_.to_json()}};
}

QNetwork QNetwork::from_json(const nlohmann::json& j) {
    if (j.value("kind", "dqn") != "dqn") throw std::invalid_argument("not a dqn policy");
    return QNetwork(Mlp::from_json(j.at("network")), j.at("stages").get<int>(), j.at("actions").get<int>());
}

QNetwork train_dqn(MdpEnvironment& env, const QNetConfig& config, RandomStream rng, const QNetwork* warm_start) {
    config.validate();
    const int actions = env.action_count();
    const int stages = env.stages();
    const std::size_t inputs = env.feature_count() + 1;

    RandomStream init_rng = rng.derive({0});
    RandomStream env_rng = rng.derive({1});
    RandomStream explore_rng = rng.derive({2});
    RandomStream batch_rng = rng.derive({3});

    Mlp online;
    if (warm_start) {
        if (warm_start->net().input_dim() != inputs || warm_start->net().output_dim() != static_cast<std::size_t>(actions))
            throw std::invalid_argument("dqn warm start: architecture mismatch");
        online = warm_start->net();
    } else {
        online = Mlp(inputs, std::vector<std::size_t>(static_cast<std::size_t>(config.layers),
                                                      static_cast<std::size_t>(config.width)),
                     static_cast<std::size_t>(actions), init_rng);
    }
    Mlp target = online;

    struct Transition {
        std::vector<double> x;
        int action;
        double cost;
        std::vector<double> next_x;  // empty on the last stage
    };
    std::vector<Transition> replay;
    replay.reserve(static_cast<std::size_t>(std::min(config.replay_capacity, config.episodes * stages)));
    std::size_t replay_next = 0;
    long updates = 0;

    std::vector<std::vector<double>> bx;
    std::vector<int> ba;
    std::vector<double> by;
    for (int ep = 0; ep < config.episodes; ++ep) {
        env.reset(env_rng);
        for (int stage = 0; stage < stages; ++stage) {
            Transition tr;
            tr.x = with_stage(env.features(), stage, stages);
            if (explore_rng.uniform() < config.exploration_epsilon)
                tr.action = std::min(actions - 1, static_cast<int>(explore_rng.uniform() * actions));
            else
                tr.action = argmin(online.forward(tr.x));
            tr.cost = env.step(tr.action, env_rng);
            if (stage + 1 < stages) tr.next_x = with_stage(env.features(), stage + 1, stages);
            if (replay.size() < static_cast<std::size_t>(config.replay_capacity)) {
                replay.push_back(std::move(tr));
            } else {
                replay[replay_next] = std::move(tr);
                replay_next = (replay_next + 1) % replay.size();
            }

            if (replay.size() < static_cast<std::size_t>(std::max(config.warmup, 1))) continue;
            bx.clear();
            ba.clear();
            by.clear();
            for (int b = 0; b < config.minibatch; ++b) {
                const auto i = std::min(replay.size() - 1,
                                        static_cast<std::size_t>(batch_rng.uniform() * static_cast<double>(replay.size())));
                const auto& t = replay[i];
                double y = t.cost;
                if (!t.next_x.empty()) {
                    const auto q = target.forward(t.next_x);
                    y += *std::min_element(q.begin(), q.end());
                }
                bx.push_back(t.x);
                ba.push_back(t.action);
                by.push_back(y);
            }
            const double loss = online.train_batch(bx, ba, by, config.step_size);
            if (!std::isfinite(loss)) {
                std::ostringstream msg;
                msg << "dqn diverged: non-finite loss at episode " << ep << ", stage " << stage << ", update "
                    << updates << " (step size " << config.step_size << ")";
                throw std::runtime_error(msg.str());
            }
            if (++updates % config.target_sync == 0) target.copy_weights_from(online);
        }
    }
    return QNetwork(std::move(online), stages, actions);
}

DecisionRule dqn_rule(QNetwork q, Day start_day, int interval, int levels) {
    return [q = std::move(q), start_day, interval, levels](const RegionState& s, Day day) {
        const int stage = std::clamp((day - start_day) / interval, 0, q.stages() - 1);
        return ActionLevel(q.greedy(GsirMdp::state_features(s), stage) + 1, levels);
    };
}

DqnPlan dqn_plan(const RegionState& start, Day start_day, Day horizon, int interval, const ParamDistribution& params,
                 TradeoffWeight weight, const CostModel& cost_model, const QNetConfig& config, RandomStream rng,
                 const QNetwork* warm_start) {
    const double scale = 1.0 / static_cast<double>(std::max<Count>(1, start.population()));
    GsirMdp env(start, start_day, horizon, interval, params, weight, cost_model, scale);
    DqnPlan plan;
    plan.q = train_dqn(env, config, rng, warm_start);
    plan.rule = dqn_rule(plan.q, start_day, interval, cost_model.level_count());
    return plan;
}

}  // namespace epiplan
