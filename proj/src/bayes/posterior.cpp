#include <cmath>
#include <stdexcept>

#include <nlohmann/json.hpp>

#include "epiplan/bayes.hpp"
#include "epiplan/variates.hpp"

namespace epiplan {

void PriorSpec::validate() const {
    auto positive = [](const Hyper& h) { return h.a > 0.0 && h.b > 0.0 && std::isfinite(h.a) && std::isfinite(h.b); };
    if (!positive(gamma)) throw std::invalid_argument("prior: gamma hyperparameters must be positive");
    if (betas.size() < 2) throw std::invalid_argument("prior: need at least two action levels");
    for (const auto& h : betas)
        if (!positive(h)) throw std::invalid_argument("prior: beta hyperparameters must be positive");
}

void TransitionRecord::validate() const {
    if (pre.population() != post.population()) throw std::invalid_argument("transition: population changed");
    if (post.removed() < pre.removed()) throw std::invalid_argument("transition: removed count decreased");
    if (post.susceptible() > pre.susceptible()) throw std::invalid_argument("transition: susceptible count increased");
}

PriorSpec default_priors() {
    PriorSpec p;
    p.gamma = {178.89, 2000.0};
    p.betas = {{517.41, 2000.0}, {103.48, 2000.0}, {51.74, 2000.0}};
    return p;
}

PriorSpec priors_from_effects(double beta1_estimate, const std::vector<double>& effects, double concentration,
                              Hyper gamma_prior) {
    if (!(beta1_estimate > 0.0)) throw std::invalid_argument("beta1 estimate must be positive");
    if (!(concentration > 0.0)) throw std::invalid_argument("concentration must be positive");
    if (effects.size() < 2) throw std::invalid_argument("need at least two effects");
    if (effects.front() != 1.0) throw std::invalid_argument("the first effect must be 1");
    for (std::size_t j = 1; j < effects.size(); ++j) {
        if (!(effects[j] > 0.0 && effects[j] <= 1.0)) throw std::invalid_argument("effects must lie in (0, 1]");
        if (effects[j] > effects[j - 1]) throw std::invalid_argument("effects must be non-increasing");
    }
    PriorSpec p;
    p.gamma = gamma_prior;
    for (double u : effects) p.betas.push_back({u * beta1_estimate * concentration, concentration});
    p.validate();
    return p;
}

PosteriorParams update_posterior(const PriorSpec& prior, const std::vector<TransitionRecord>& records) {
    prior.validate();
    PosteriorParams post = prior;
    for (const auto& rec : records) {
        rec.validate();
        const auto j = static_cast<std::size_t>(rec.action.index());
        if (j >= post.betas.size()) throw std::out_of_range("transition action exceeds prior levels");
        const double new_infections = static_cast<double>(rec.pre.susceptible() - rec.post.susceptible());
        const double exposure = static_cast<double>(rec.pre.susceptible()) * static_cast<double>(rec.pre.infectious()) /
                                static_cast<double>(rec.pre.population());
        const double removals = static_cast<double>(rec.post.removed() - rec.pre.removed());
        post.betas[j].a += new_infections;
        post.betas[j].b += exposure;
        post.gamma.a += removals;
        post.gamma.b += static_cast<double>(rec.pre.infectious()) - removals;
    }
    return post;
}

PosteriorMoments posterior_moments(const PosteriorParams& p) {
    PosteriorMoments m;
    const double ab = p.gamma.a + p.gamma.b;
    m.gamma.mean = p.gamma.a / ab;
    m.gamma.variance = p.gamma.a * p.gamma.b / (ab * ab * (ab + 1.0));
    for (const auto& h : p.betas) m.betas.push_back({h.a / h.b, h.a / (h.b * h.b)});
    return m;
}

GsirParams sample_params(const PosteriorParams& posterior, RandomStream& rng) {
    GsirParams out;
    out.gamma = variates::beta(rng, posterior.gamma.a, posterior.gamma.b);
    out.betas.reserve(posterior.betas.size());
    for (const auto& h : posterior.betas) out.betas.push_back(variates::gamma(rng, h.a, h.b));
    return out;
}

GsirParams posterior_raw_mean(const PosteriorParams& posterior) {
    GsirParams out;
    out.gamma = posterior.gamma.a / (posterior.gamma.a + posterior.gamma.b);
    for (const auto& h : posterior.betas) out.betas.push_back(h.a / h.b);
    return out;
}

GsirParams posterior_mean(const PosteriorParams& posterior) {
    GsirParams out = posterior_raw_mean(posterior);
    if (!out.ordered()) out.betas = isotonic_nonincreasing(out.betas);
    return out;
}

std::vector<double> isotonic_nonincreasing(const std::vector<double>& values) {
    // Pool adjacent violators on blocks of (mean, size).
    struct Block {
        double mean;
        std::size_t size;
    };
    std::vector<Block> blocks;
    for (double v : values) {
        blocks.push_back({v, 1});
        while (blocks.size() > 1 && blocks[blocks.size() - 2].mean < blocks.back().mean) {
            const Block last = blocks.back();
            blocks.pop_back();
            Block& prev = blocks.back();
            prev.mean = (prev.mean * static_cast<double>(prev.size) + last.mean * static_cast<double>(last.size)) /
                        static_cast<double>(prev.size + last.size);
            prev.size += last.size;
        }
    }
    std::vector<double> out;
    out.reserve(values.size());
    for (const auto& b : blocks) out.insert(out.end(), b.size, b.mean);
    return out;
}

ParamDistribution ParamDistribution::point(GsirParams params) {
    params.validate();
    ParamDistribution d;
    d.is_point_ = true;
    d.point_ = std::move(params);
    return d;
}

ParamDistribution ParamDistribution::from_posterior(PosteriorParams posterior) {
    posterior.validate();
    ParamDistribution d;
    d.is_point_ = false;
    d.posterior_ = std::move(posterior);
    return d;
}

int ParamDistribution::levels() const { return is_point_ ? point_.levels() : posterior_.levels(); }

GsirParams ParamDistribution::sample(RandomStream& rng) const {
    return is_point_ ? point_ : sample_params(posterior_, rng);
}

GsirParams ParamDistribution::mean() const { return is_point_ ? point_ : posterior_mean(posterior_); }

void to_json(nlohmann::json& j, const Hyper& h) { j = nlohmann::json{{"a", h.a}, {"b", h.b}}; }

void from_json(const nlohmann::json& j, Hyper& h) {
    h.a = j.at("a").get<double>();
    h.b = j.at("b").get<double>();
}

nlohmann::json posterior_to_json(const PosteriorParams& p) {
    return nlohmann::json{{"gamma", p.gamma}, {"betas", p.betas}};
}

PosteriorParams posterior_from_json(const nlohmann::json& j) {
    PosteriorParams p;
    p.gamma = j.at("gamma").get<Hyper>();
    p.betas = j.at("betas").get<std::vector<Hyper>>();
    p.validate();
    return p;
}

}  // namespace epiplan
