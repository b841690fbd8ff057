#include "epiplan/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <stdexcept>

#include "epiplan/kernels.hpp"

namespace epiplan {

namespace {

using LogDensity = std::function<double(double)>;

double xlogy(double c, double x) { return c == 0.0 ? 0.0 : c * std::log(x); }

// Log density drop that counts as "outside the support" for integration.
constexpr double kTailDrop = 80.0;

double golden_max(const LogDensity& f, double lo, double hi) {
    const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
    double a = lo, b = hi;
    double c = b - inv_phi * (b - a);
    double d = a + inv_phi * (b - a);
    double fc = f(c), fd = f(d);
    for (int it = 0; it < 300 && (b - a) > 1e-15 * std::max(1.0, std::abs(b)); ++it) {
        if (fc >= fd) {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = f(d);
        }
    }
    const double mid = 0.5 * (a + b);
    // Mode may sit on the boundary (shape == 1).
    double best = mid;
    double fbest = f(mid);
    for (double x : {lo, hi}) {
        const double fx = f(x);
        if (std::isfinite(fx) && fx > fbest) {
            best = x;
            fbest = fx;
        }
    }
    return best;
}

// Point in [inner, outer] where f falls to `level`, or `outer` if it never does.
double tail_bound(const LogDensity& f, double inner, double outer, double level) {
    const double fo = f(outer);
    if (!(fo < level)) return outer;
    double a = inner, b = outer;
    for (int it = 0; it < 200; ++it) {
        const double m = 0.5 * (a + b);
        if (f(m) >= level) a = m;
        else b = m;
    }
    return b;
}

struct Moments1d {
    double mean;
    double variance;
};

Moments1d simpson_moments(const LogDensity& f, double lo, double hi, double fmax, std::size_t panels) {
    const std::size_t n = panels * 2;  // Simpson needs an even count of intervals
    const double h = (hi - lo) / static_cast<double>(n);
    std::vector<double> x(n + 1), w(n + 1);
    for (std::size_t i = 0; i <= n; ++i) {
        x[i] = lo + h * static_cast<double>(i);
        const double coeff = (i == 0 || i == n) ? 1.0 : (i % 2 == 1 ? 4.0 : 2.0);
        const double lf = f(x[i]);
        w[i] = std::isfinite(lf) ? coeff * std::exp(lf - fmax) : 0.0;
    }
    const auto& k = kernels::active();
    const double z = k.sum_stats(w.data(), w.size()).sum;
    const double mean = k.dot(w.data(), x.data(), x.size()) / z;
    std::vector<double> dev2(n + 1);
    for (std::size_t i = 0; i <= n; ++i) dev2[i] = (x[i] - mean) * (x[i] - mean);
    const double variance = k.dot(w.data(), dev2.data(), dev2.size()) / z;
    return {mean, variance};
}

MomentPair integrate(const LogDensity& f, double domain_lo, double domain_hi, bool bounded_above, double tolerance,
                     double& worst_tol, bool& converged) {
    double hi = domain_hi;
    if (!bounded_above) {
        // Expand until the density is negligible.
        hi = 1.0;
        const double probe = f(golden_max(f, domain_lo, hi));
        while (f(hi) > probe - kTailDrop - 10.0 || !std::isfinite(f(hi))) {
            hi *= 2.0;
            if (hi > 1e12) throw std::runtime_error("quadrature: density does not decay");
        }
    }
    const double mode = golden_max(f, domain_lo, hi);
    const double fmax = f(mode);
    if (!std::isfinite(fmax)) throw std::runtime_error("quadrature: non-finite density at the mode");
    const double lo_b = tail_bound(f, mode, domain_lo, fmax - kTailDrop);
    const double hi_b = tail_bound(f, mode, hi, fmax - kTailDrop);

    std::size_t panels = 1000;
    Moments1d prev = simpson_moments(f, lo_b, hi_b, fmax, panels);
    double rel = std::numeric_limits<double>::infinity();
    for (; panels <= (std::size_t{1} << 21); panels *= 2) {
        const Moments1d cur = simpson_moments(f, lo_b, hi_b, fmax, panels * 2);
        rel = std::max(std::abs(cur.mean - prev.mean) / std::abs(cur.mean),
                       std::abs(cur.variance - prev.variance) / std::abs(cur.variance));
        prev = cur;
        if (rel <= tolerance) break;
    }
    worst_tol = std::max(worst_tol, rel);
    if (rel > tolerance) converged = false;
    return {prev.mean, prev.variance};
}

}  // namespace

QuadratureResult posterior_numeric_oracle(const PriorSpec& prior, const std::vector<TransitionRecord>& records,
                                          double tolerance) {
    prior.validate();
    QuadratureResult out;
    out.converged = true;

    const LogDensity gamma_density = [&](double g) {
        if (g < 0.0 || g > 1.0) return -std::numeric_limits<double>::infinity();
        double lp = xlogy(prior.gamma.a - 1.0, g) + xlogy(prior.gamma.b - 1.0, 1.0 - g);
        for (const auto& r : records) {
            const double n = static_cast<double>(r.pre.infectious());
            const double k = static_cast<double>(r.post.removed() - r.pre.removed());
            lp += std::lgamma(n + 1.0) - std::lgamma(k + 1.0) - std::lgamma(n - k + 1.0) + xlogy(k, g) +
                  xlogy(n - k, 1.0 - g);
        }
        return lp;
    };
    out.moments.gamma = integrate(gamma_density, 0.0, 1.0, true, tolerance, out.achieved_tolerance, out.converged);

    for (std::size_t j = 0; j < prior.betas.size(); ++j) {
        const LogDensity beta_density = [&, j](double b) {
            if (b < 0.0) return -std::numeric_limits<double>::infinity();
            double lp = xlogy(prior.betas[j].a - 1.0, b) - prior.betas[j].b * b;
            for (const auto& r : records) {
                if (static_cast<std::size_t>(r.action.index()) != j) continue;
                const double exposure = static_cast<double>(r.pre.susceptible()) *
                                        static_cast<double>(r.pre.infectious()) /
                                        static_cast<double>(r.pre.population());
                const double k = static_cast<double>(r.pre.susceptible() - r.post.susceptible());
                lp += xlogy(k, b * exposure) - b * exposure - std::lgamma(k + 1.0);
            }
            return lp;
        };
        out.moments.betas.push_back(
            integrate(beta_density, 0.0, 0.0, false, tolerance, out.achieved_tolerance, out.converged));
    }
    return out;
}

}  // namespace epiplan
