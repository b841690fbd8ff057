#pragma once

#include "epiplan/rng.hpp"
#include "epiplan/types.hpp"

namespace epiplan::variates {

// Poisson(mean); mean <= 0 yields 0.
Count poisson(RandomStream& rng, double mean);
// Binomial(trials, p) with p clamped to [0,1].
Count binomial(RandomStream& rng, Count trials, double p);
// Gamma with shape/rate parameterization (mean = shape / rate).
double gamma(RandomStream& rng, double shape, double rate);
double beta(RandomStream& rng, double a, double b);
double normal(RandomStream& rng, double mean, double sd);

}  // namespace epiplan::variates
