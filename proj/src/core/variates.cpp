#include "epiplan/variates.hpp"

#include <random>

namespace epiplan::variates {

Count poisson(RandomStream& rng, double mean) {
    if (!(mean > 0.0)) return 0;
    std::poisson_distribution<Count> dist(mean);
    return dist(rng);
}

Count binomial(RandomStream& rng, Count trials, double p) {
    if (trials <= 0 || !(p > 0.0)) return 0;
    if (p >= 1.0) return trials;
    std::binomial_distribution<Count> dist(trials, p);
    return dist(rng);
}

double gamma(RandomStream& rng, double shape, double rate) {
    std::gamma_distribution<double> dist(shape, 1.0 / rate);
    return dist(rng);
}

double beta(RandomStream& rng, double a, double b) {
    const double x = gamma(rng, a, 1.0);
    const double y = gamma(rng, b, 1.0);
    return x / (x + y);
}

double normal(RandomStream& rng, double mean, double sd) {
    if (!(sd > 0.0)) return mean;
    std::normal_distribution<double> dist(mean, sd);
    return dist(rng);
}

}  // namespace epiplan::variates
