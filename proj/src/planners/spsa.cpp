#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "epiplan/planners.hpp"

namespace epiplan {

namespace {

// Pool-adjacent-violators fit of a non-decreasing sequence (unit weights).
std::vector<double> isotonic_nondecreasing(const std::vector<double>& y) {
    struct Block {
        double sum;
        double count;
    };
    std::vector<Block> blocks;
    for (double v : y) {
        blocks.push_back({v, 1.0});
        while (blocks.size() > 1) {
            const auto& b = blocks[blocks.size() - 1];
            const auto& a = blocks[blocks.size() - 2];
            if (a.sum / a.count <= b.sum / b.count) break;
            Block merged{a.sum + b.sum, a.count + b.count};
            blocks.pop_back();
            blocks.back() = merged;
        }
    }
    std::vector<double> out;
    for (const auto& b : blocks) out.insert(out.end(), static_cast<std::size_t>(b.count), b.sum / b.count);
    return out;
}

double rademacher(RandomStream& rng) { return (rng() >> 63) ? 1.0 : -1.0; }

}  // namespace

double SpsaConfig::zeta(int k) const { return c / std::pow(static_cast<double>(k), a); }
double SpsaConfig::xi(int k) const { return d / std::pow(static_cast<double>(k), g); }

void SpsaConfig::validate() const {
    if (iterations < 1) throw std::invalid_argument("spsa: iterations must be >= 1");
    // Gain conditions for the c / k^a, d / k^g families.
    if (!(a > 0.5 && a <= 1.0)) throw std::invalid_argument("spsa: step exponent a must lie in (0.5, 1]");
    if (!(g > 0.0)) throw std::invalid_argument("spsa: perturbation exponent g must be > 0");
    if (!(d > 0.0)) throw std::invalid_argument("spsa: perturbation scale d must be > 0");
    if (c <= 0.0 && !(initial_step > 0.0 && calibration_samples > 0))
        throw std::invalid_argument("spsa: need c > 0 or a positive initial_step for calibration");
}

std::vector<double> project_feasible(const std::vector<double>& thresholds, double margin, double cap) {
    const std::size_t n = thresholds.size();
    if (n == 0) return {};
    if (margin < 0.0) throw std::invalid_argument("projection margin must be >= 0");
    // With mu_i = l_i - (i-1) margin the set becomes 0 <= mu_1 <= ... <= mu_n <= upper.
    margin = std::min(margin, cap / static_cast<double>(n));
    const double upper = cap - static_cast<double>(n) * margin;
    std::vector<double> mu(n);
    for (std::size_t i = 0; i < n; ++i) mu[i] = thresholds[i] - static_cast<double>(i) * margin;
    mu = isotonic_nondecreasing(mu);
    std::vector<double> out(n);
    for (std::size_t i = 0; i < n; ++i)
        out[i] = std::clamp(mu[i], 0.0, std::max(0.0, upper)) + static_cast<double>(i) * margin;
    // Guard against rounding pushing the top threshold past the cap.
    for (auto& v : out) v = std::min(v, cap);
    for (std::size_t i = 1; i < n; ++i) out[i] = std::max(out[i], out[i - 1]);
    return out;
}

PlannerResult spsa_search(const PolicyObjective& objective, const SpsaConfig& config, double cap,
                          const ThresholdPolicy& initial, RandomStream rng) {
    config.validate();
    const std::size_t n = initial.thresholds().size();
    const double root_n = std::sqrt(static_cast<double>(n));
    auto evaluate = [&](const std::vector<double>& l) { return objective(ThresholdPolicy(l, cap)); };

    PlannerResult best;
    std::vector<double> lambda = project_feasible(initial.thresholds(), 0.0, cap);
    best.policy = ThresholdPolicy(lambda, cap);
    best.value = evaluate(lambda);
    best.evaluations = 1;

    auto gradient = [&](const std::vector<double>& at, double xi, std::vector<double>& delta) {
        for (auto& d : delta) d = rademacher(rng);
        std::vector<double> plus(n), minus(n);
        for (std::size_t i = 0; i < n; ++i) {
            plus[i] = at[i] + xi * delta[i];
            minus[i] = at[i] - xi * delta[i];
        }
        const double fp = evaluate(project_feasible(plus, 0.0, cap)).weighted_mean;
        const double fm = evaluate(project_feasible(minus, 0.0, cap)).weighted_mean;
        best.evaluations += 2;
        std::vector<double> g(n);
        for (std::size_t i = 0; i < n; ++i) g[i] = (fp - fm) / (2.0 * xi * delta[i]);
        return g;
    };

    std::vector<double> delta(n);
    SpsaConfig cfg = config;
    if (cfg.c <= 0.0) {
        double total = 0.0;
        for (int s = 0; s < cfg.calibration_samples; ++s)
            for (double gi : gradient(lambda, cfg.xi(1), delta)) total += std::abs(gi);
        const double mean_abs = total / static_cast<double>(cfg.calibration_samples * static_cast<int>(n));
        cfg.c = mean_abs > 0.0 ? cfg.initial_step / mean_abs : cfg.initial_step;
    }

    for (int k = 1; k <= cfg.iterations; ++k) {
        const double xi = cfg.xi(k);
        const auto g = gradient(lambda, xi, delta);
        std::vector<double> next(n);
        for (std::size_t i = 0; i < n; ++i) next[i] = lambda[i] - cfg.zeta(k) * g[i];
        lambda = project_feasible(next, xi * root_n, cap);
        const ValueEstimate v = evaluate(lambda);
        ++best.evaluations;
        if (v.weighted_mean < best.value.weighted_mean) {
            best.value = v;
            best.policy = ThresholdPolicy(lambda, cap);
        }
    }
    return best;
}

}  // namespace epiplan
