#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "epiplan/parallel.hpp"
#include "epiplan/planners.hpp"

namespace epiplan {

namespace {

double tidy(double v) { return std::round(v * 1e9) / 1e9; }

bool feasible(const std::vector<double>& p, double cap) {
    double prev = 0.0;
    for (double v : p) {
        if (v < prev) return false;
        prev = v;
    }
    return p.empty() || p.back() <= cap;
}

}  // namespace

void GridSchedule::validate() const {
    if (rounds.empty()) throw std::invalid_argument("grid schedule has no rounds");
    const std::size_t dim = rounds.front().size();
    if (dim == 0) throw std::invalid_argument("grid schedule has no axes");
    for (const auto& r : rounds) {
        if (r.size() != dim) throw std::invalid_argument("grid rounds differ in dimension");
        for (const auto& ax : r) {
            if (!(ax.step > 0.0)) throw std::invalid_argument("grid step must be > 0");
            if (!(ax.lower <= ax.upper)) throw std::invalid_argument("grid lower bound exceeds upper bound");
        }
    }
}

GridSchedule default_grid_schedule() {
    GridSchedule s;
    s.rounds = {
        {{0, 300, 50}, {0, 2000, 200}},
        {{-50, 50, 5}, {-200, 200, 20}},
        {{-5, 5, 1}, {-20, 20, 4}},
        {{-1, 1, 0.25}, {-4, 4, 1}},
        {{-0.25, 0.25, 0.01}, {-1, 1, 0.2}},
    };
    return s;
}

std::vector<double> axis_points(const GridAxis& axis) {
    std::vector<double> out;
    const auto n = static_cast<long>(std::floor((axis.upper - axis.lower) / axis.step + 1e-9));
    for (long i = 0; i <= n; ++i) out.push_back(tidy(axis.lower + static_cast<double>(i) * axis.step));
    return out;
}

std::vector<std::vector<double>> round_points(const GridSchedule& schedule, std::size_t round,
                                              const std::vector<double>& center, double cap) {
    const auto& axes = schedule.rounds.at(round);
    std::vector<std::vector<double>> per_axis;
    for (std::size_t i = 0; i < axes.size(); ++i) {
        GridAxis ax = axes[i];
        if (round > 0) {
            ax.lower += center.at(i);
            ax.upper += center.at(i);
        }
        ax.lower = std::max(0.0, ax.lower);
        ax.upper = std::min(cap, ax.upper);
        if (ax.lower > ax.upper) return {};
        per_axis.push_back(axis_points(ax));
    }
    std::vector<std::vector<double>> out;
    std::vector<std::size_t> idx(per_axis.size(), 0);
    for (;;) {
        std::vector<double> p(per_axis.size());
        for (std::size_t i = 0; i < p.size(); ++i) p[i] = per_axis[i][idx[i]];
        if (feasible(p, cap)) out.push_back(std::move(p));
        std::size_t k = idx.size();
        while (k > 0) {
            --k;
            if (++idx[k] < per_axis[k].size()) break;
            idx[k] = 0;
            if (k == 0) return out;
        }
    }
}

bool threshold_less(const std::vector<double>& a, const std::vector<double>& b) {
    return std::lexicographical_compare(a.begin(), a.end(), b.begin(), b.end());
}

PlannerResult grid_search(const PolicyObjective& objective, const GridSchedule& schedule, double cap) {
    schedule.validate();
    PlannerResult best;
    bool have_best = false;
    std::vector<double> center;
    for (std::size_t r = 0; r < schedule.rounds.size(); ++r) {
        const auto points = round_points(schedule, r, center, cap);
        if (points.empty()) {
            if (r == 0) throw std::invalid_argument("grid search: empty feasible grid");
            continue;
        }
        std::vector<ValueEstimate> values(points.size());
        parallel_for(points.size(), [&](std::size_t i) { values[i] = objective(ThresholdPolicy(points[i], cap)); });
        best.evaluations += points.size();
        for (std::size_t i = 0; i < points.size(); ++i) {
            const double v = values[i].weighted_mean;
            const bool better = !have_best || v < best.value.weighted_mean ||
                                (v == best.value.weighted_mean && threshold_less(points[i], best.policy.thresholds()));
            if (better) {
                best.policy = ThresholdPolicy(points[i], cap);
                best.value = values[i];
                have_best = true;
            }
        }
        center = best.policy.thresholds();
    }
    return best;
}

}  // namespace epiplan
