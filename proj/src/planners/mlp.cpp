#include <algorithm>
#include <cmath>
#include <stdexcept>

#include <nlohmann/json.hpp>

#include "epiplan/dqn.hpp"

namespace epiplan {

Mlp::Mlp(std::size_t inputs, const std::vector<std::size_t>& hidden, std::size_t outputs, RandomStream& rng)
    : inputs_(inputs) {
    if (inputs == 0 || outputs == 0) throw std::invalid_argument("mlp: dimensions must be positive");
    std::size_t in = inputs;
    auto add = [&](std::size_t out, bool relu) {
        Layer l;
        l.in = in;
        l.out = out;
        l.relu = relu;
        // He-uniform for ReLU layers, Glorot-uniform for the linear head.
        const double limit = relu ? std::sqrt(6.0 / static_cast<double>(in))
                                  : std::sqrt(6.0 / static_cast<double>(in + out));
        l.w.resize(in * out);
        for (auto& w : l.w) w = (2.0 * rng.uniform() - 1.0) * limit;
        l.b.assign(out, 0.0);
        l.gw.assign(in * out, 0.0);
        l.mw.assign(in * out, 0.0);
        l.vw.assign(in * out, 0.0);
        l.gb.assign(out, 0.0);
        l.mb.assign(out, 0.0);
        l.vb.assign(out, 0.0);
        layers_.push_back(std::move(l));
        in = out;
    };
    for (std::size_t h : hidden) {
        if (h == 0) throw std::invalid_argument("mlp: hidden width must be positive");
        add(h, true);
    }
    add(outputs, false);
}

std::size_t Mlp::output_dim() const { return layers_.empty() ? 0 : layers_.back().out; }

std::vector<double> Mlp::forward(std::span<const double> x) const {
    if (x.size() != inputs_) throw std::invalid_argument("mlp: input dimension mismatch");
    const auto& k = kernels::active();
    std::vector<double> cur(x.begin(), x.end()), next;
    for (const auto& l : layers_) {
        next.resize(l.out);
        k.dense_forward(l.w.data(), l.b.data(), cur.data(), next.data(), l.out, l.in, l.relu);
        cur.swap(next);
    }
    return cur;
}

double Mlp::train_batch(const std::vector<std::vector<double>>& inputs, const std::vector<int>& output_index,
                        const std::vector<double>& targets, double learning_rate) {
    const std::size_t batch = inputs.size();
    if (batch == 0 || output_index.size() != batch || targets.size() != batch)
        throw std::invalid_argument("mlp: inconsistent batch");
    const auto& k = kernels::active();
    for (auto& l : layers_) {
        std::fill(l.gw.begin(), l.gw.end(), 0.0);
        std::fill(l.gb.begin(), l.gb.end(), 0.0);
    }
    double loss = 0.0;
    std::vector<std::vector<double>> acts(layers_.size() + 1);
    for (std::size_t s = 0; s < batch; ++s) {
        acts[0] = inputs[s];
        if (acts[0].size() != inputs_) throw std::invalid_argument("mlp: input dimension mismatch");
        for (std::size_t li = 0; li < layers_.size(); ++li) {
            const auto& l = layers_[li];
            acts[li + 1].resize(l.out);
            k.dense_forward(l.w.data(), l.b.data(), acts[li].data(), acts[li + 1].data(), l.out, l.in, l.relu);
        }
        const auto a = static_cast<std::size_t>(output_index[s]);
        const double err = acts.back().at(a) - targets[s];
        loss += 0.5 * err * err;
        std::vector<double> delta(layers_.back().out, 0.0);
        delta[a] = err / static_cast<double>(batch);
        for (std::size_t li = layers_.size(); li-- > 0;) {
            auto& l = layers_[li];
            k.outer_accumulate(delta.data(), acts[li].data(), l.gw.data(), l.out, l.in);
            k.axpy(1.0, delta.data(), l.gb.data(), l.out);
            if (li == 0) break;
            std::vector<double> prev(l.in, 0.0);
            for (std::size_t r = 0; r < l.out; ++r)
                if (delta[r] != 0.0) k.axpy(delta[r], l.w.data() + r * l.in, prev.data(), l.in);
            // ReLU derivative from the stored post-activation.
            const auto& below = acts[li];
            for (std::size_t c = 0; c < l.in; ++c)
                if (below[c] <= 0.0) prev[c] = 0.0;
            delta.swap(prev);
        }
    }
    ++adam_t_;
    kernels::AdamStep step;
    step.learning_rate = learning_rate;
    step.bias_correction1 = 1.0 - std::pow(step.beta1, static_cast<double>(adam_t_));
    step.bias_correction2 = 1.0 - std::pow(step.beta2, static_cast<double>(adam_t_));
    for (auto& l : layers_) {
        k.adam_update(l.w.data(), l.gw.data(), l.mw.data(), l.vw.data(), l.w.size(), step);
        k.adam_update(l.b.data(), l.gb.data(), l.mb.data(), l.vb.data(), l.b.size(), step);
    }
    return loss / static_cast<double>(batch);
}

void Mlp::copy_weights_from(const Mlp& other) {
    if (other.layers_.size() != layers_.size()) throw std::invalid_argument("mlp: architecture mismatch");
    for (std::size_t i = 0; i < layers_.size(); ++i) {
        if (other.layers_[i].w.size() != layers_[i].w.size()) throw std::invalid_argument("mlp: architecture mismatch");
        layers_[i].w = other.layers_[i].w;
        layers_[i].b = other.layers_[i].b;
    }
}

nlohmann::json Mlp::to_json() const {
    nlohmann::json arch = nlohmann::json::array();
    nlohmann::json weights = nlohmann::json::array();
    for (const auto& l : layers_) {
        arch.push_back({{"in", l.in}, {"out", l.out}, {"activation", l.relu ? "relu" : "linear"}});
        weights.push_back({{"w", l.w}, {"b", l.b}});
    }
    return {{"inputs", inputs_}, {"architecture", arch}, {"weights", weights}};
}

Mlp Mlp::from_json(const nlohmann::json& j) {
    Mlp m;
    m.inputs_ = j.at("inputs").get<std::size_t>();
    const auto& arch = j.at("architecture");
    const auto& weights = j.at("weights");
    if (arch.size() != weights.size()) throw std::invalid_argument("mlp json: layer count mismatch");
    for (std::size_t i = 0; i < arch.size(); ++i) {
        Layer l;
        l.in = arch[i].at("in").get<std::size_t>();
        l.out = arch[i].at("out").get<std::size_t>();
        l.relu = arch[i].at("activation").get<std::string>() == "relu";
        l.w = weights[i].at("w").get<std::vector<double>>();
        l.b = weights[i].at("b").get<std::vector<double>>();
        if (l.w.size() != l.in * l.out || l.b.size() != l.out) throw std::invalid_argument("mlp json: bad layer shape");
        l.gw.assign(l.w.size(), 0.0);
        l.mw.assign(l.w.size(), 0.0);
        l.vw.assign(l.w.size(), 0.0);
        l.gb.assign(l.out, 0.0);
        l.mb.assign(l.out, 0.0);
        l.vb.assign(l.out, 0.0);
        m.layers_.push_back(std::move(l));
    }
    return m;
}

}  // namespace epiplan
