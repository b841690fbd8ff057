#pragma once

#include <vector>

#include "epiplan/bayes.hpp"

namespace epiplan {

struct QuadratureResult {
    PosteriorMoments moments;
    // Largest relative change of any moment between the final grid and the
    // grid with half as many panels.
    double achieved_tolerance = 0.0;
    bool converged = false;
};

// Posterior moments by brute-force numerical integration of
// prior density x Binomial/Poisson likelihood, evaluated record by record.
// Independent of the conjugate update formulas; intended for small record
// sets and prior shapes >= 1 (bounded, log-concave densities).
QuadratureResult posterior_numeric_oracle(const PriorSpec& prior, const std::vector<TransitionRecord>& records,
                                          double tolerance = 1e-9);

}  // namespace epiplan
