#pragma once

#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "epiplan/rng.hpp"
#include "epiplan/types.hpp"

namespace epiplan {

// Beta(a, b) for gamma or Gamma(shape a, rate b) for a beta_j.
struct Hyper {
    double a = 1.0;
    double b = 1.0;

    bool operator==(const Hyper&) const = default;
};

// Independent conjugate priors: gamma ~ Beta, beta_j ~ Gamma (shape, rate).
struct PriorSpec {
    Hyper gamma;
    std::vector<Hyper> betas;

    int levels() const { return static_cast<int>(betas.size()); }
    void validate() const;
    bool operator==(const PriorSpec&) const = default;
};

// Same shape as the prior: the posterior is again Beta x prod Gamma.
using PosteriorParams = PriorSpec;

// One observed day-to-day transition of a region.
struct TransitionRecord {
    std::string region_id;
    Day day = 0;  // day of `pre`; the action was in force during (day, day+1]
    RegionState pre;
    RegionState post;
    ActionLevel action;

    void validate() const;
};

struct MomentPair {
    double mean = 0.0;
    double variance = 0.0;
};

struct PosteriorMoments {
    MomentPair gamma;
    std::vector<MomentPair> betas;
};

PriorSpec default_priors();

// Gamma priors with mean effects[j] * beta1_estimate and rate `concentration`;
// effects[0] must be 1 and the sequence non-increasing in (0, 1].
PriorSpec priors_from_effects(double beta1_estimate, const std::vector<double>& effects, double concentration,
                              Hyper gamma_prior = default_priors().gamma);

// Conjugate update. Records are folded in order, so
// update(update(p, A), B) == update(p, A ++ B) bit for bit.
PosteriorParams update_posterior(const PriorSpec& prior, const std::vector<TransitionRecord>& records);

PosteriorMoments posterior_moments(const PosteriorParams& posterior);

// Draws gamma and each beta_j independently; the draw need not be ordered.
GsirParams sample_params(const PosteriorParams& posterior, RandomStream& rng);

// Hyperparameter means without any projection.
GsirParams posterior_raw_mean(const PosteriorParams& posterior);
// Means with betas projected onto the non-increasing cone (pool adjacent violators,
// unit weights) when the raw means are out of order.
GsirParams posterior_mean(const PosteriorParams& posterior);

// Least-squares projection of `values` onto non-increasing sequences.
std::vector<double> isotonic_nonincreasing(const std::vector<double>& values);

// Parameter distribution driving rollouts: a conjugate posterior or a point mass.
class ParamDistribution {
public:
    static ParamDistribution point(GsirParams params);
    static ParamDistribution from_posterior(PosteriorParams posterior);

    bool is_point() const { return is_point_; }
    int levels() const;
    GsirParams sample(RandomStream& rng) const;
    // Projected mean for a posterior, the parameters themselves for a point mass.
    GsirParams mean() const;
    const PosteriorParams& posterior() const { return posterior_; }

private:
    bool is_point_ = true;
    GsirParams point_;
    PosteriorParams posterior_;
};

void to_json(nlohmann::json& j, const Hyper& h);
void from_json(const nlohmann::json& j, Hyper& h);
// {gamma:{a,b}, betas:[{a,b},...]}
nlohmann::json posterior_to_json(const PosteriorParams& p);
PosteriorParams posterior_from_json(const nlohmann::json& j);

}  // namespace epiplan
