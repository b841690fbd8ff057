#pragma once

#include <cstddef>
#include <memory>
#include <span>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "epiplan/bayes.hpp"
#include "epiplan/cost.hpp"
#include "epiplan/gsir.hpp"
#include "epiplan/kernels.hpp"
#include "epiplan/rng.hpp"

namespace epiplan {

// Fully connected network: ReLU hidden layers, linear output, Adam updates.
class Mlp {
public:
    Mlp() = default;
    Mlp(std::size_t inputs, const std::vector<std::size_t>& hidden, std::size_t outputs, RandomStream& rng);

    std::size_t input_dim() const { return inputs_; }
    std::size_t output_dim() const;
    std::size_t layer_count() const { return layers_.size(); }

    std::vector<double> forward(std::span<const double> x) const;

    // One Adam step on 0.5 * mean_b (out[b][index_b] - target_b)^2. Returns the loss.
    double train_batch(const std::vector<std::vector<double>>& inputs, const std::vector<int>& output_index,
                       const std::vector<double>& targets, double learning_rate);

    void copy_weights_from(const Mlp& other);

    nlohmann::json to_json() const;
    static Mlp from_json(const nlohmann::json& j);

private:
    struct Layer {
        std::size_t in = 0, out = 0;
        bool relu = true;
        std::vector<double> w, b;
        std::vector<double> gw, gb, mw, vw, mb, vb;
    };
    std::size_t inputs_ = 0;
    std::vector<Layer> layers_;
    long adam_t_ = 0;
};

// Finite-horizon episodic environment with per-stage costs to minimise.
class MdpEnvironment {
public:
    virtual ~MdpEnvironment() = default;
    virtual int action_count() const = 0;
    virtual int stages() const = 0;
    virtual std::size_t feature_count() const = 0;
    virtual void reset(RandomStream& rng) = 0;
    virtual std::vector<double> features() const = 0;
    // Applies an action (0-based) for one stage and returns its cost.
    virtual double step(int action, RandomStream& rng) = 0;
};

// Deterministic table MDP with a uniformly random initial state; features are one-hot.
class TabularMdp : public MdpEnvironment {
public:
    TabularMdp(std::vector<std::vector<int>> next, std::vector<std::vector<double>> cost, int stages);

    int action_count() const override;
    int stages() const override { return stages_; }
    std::size_t feature_count() const override { return next_.size(); }
    void reset(RandomStream& rng) override;
    std::vector<double> features() const override;
    double step(int action, RandomStream& rng) override;

    int state() const { return state_; }
    static std::vector<double> one_hot(int state, std::size_t states);

private:
    std::vector<std::vector<int>> next_;
    std::vector<std::vector<double>> cost_;
    int stages_;
    int state_ = 0;
};

// GSIR dynamics between decision points; theta is drawn once per episode.
// Stage cost is (epi + omega * econ) * cost_scale over the stage's days.
class GsirMdp : public MdpEnvironment {
public:
    GsirMdp(RegionState start, Day start_day, Day horizon, int interval, ParamDistribution params,
            TradeoffWeight weight, CostModel cost_model, double cost_scale);

    int action_count() const override { return cost_model_.level_count(); }
    int stages() const override;
    std::size_t feature_count() const override { return 3; }
    void reset(RandomStream& rng) override;
    std::vector<double> features() const override;
    double step(int action, RandomStream& rng) override;

    static std::vector<double> state_features(const RegionState& s);

private:
    RegionState start_, state_;
    Day start_day_, horizon_, day_ = 0;
    int interval_;
    ParamDistribution params_;
    GsirParams theta_;
    TradeoffWeight weight_;
    CostModel cost_model_;
    double cost_scale_;
};

struct QNetConfig {
    int layers = 5;
    int width = 32;
    double step_size = 2e-4;
    double exploration_epsilon = 0.1;
    int episodes = 2000;
    int minibatch = 32;
    int replay_capacity = 20000;
    int target_sync = 200;  // gradient steps between target-network copies
    int warmup = 64;        // transitions collected before training starts

    void validate() const;
};

// Q(features, stage) -> per-action cost-to-go; input is features plus stage / stages.
class QNetwork {
public:
    QNetwork() = default;
    QNetwork(Mlp net, int stages, int actions);

    std::vector<double> q_values(std::span<const double> features, int stage) const;
    int greedy(std::span<const double> features, int stage) const;
    const Mlp& net() const { return net_; }
    int stages() const { return stages_; }

    nlohmann::json to_json() const;
    static QNetwork from_json(const nlohmann::json& j);

private:
    Mlp net_;
    int stages_ = 0;
    int actions_ = 0;
};

// Deep Q-learning with experience replay and a periodically synced target
// network. Throws std::runtime_error when the loss becomes non-finite.
QNetwork train_dqn(MdpEnvironment& env, const QNetConfig& config, RandomStream rng,
                   const QNetwork* warm_start = nullptr);

// Greedy GSIR rule; stage = (day - start_day) / interval.
DecisionRule dqn_rule(QNetwork q, Day start_day, int interval, int levels);

struct DqnPlan {
    QNetwork q;
    DecisionRule rule;
};

DqnPlan dqn_plan(const RegionState& start, Day start_day, Day horizon, int interval, const ParamDistribution& params,
                 TradeoffWeight weight, const CostModel& cost_model, const QNetConfig& config, RandomStream rng,
                 const QNetwork* warm_start = nullptr);

}  // namespace epiplan
