#include "epiplan/pareto.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

#include "epiplan/kernels.hpp"
#include "epiplan/parallel.hpp"

namespace epiplan {

void BandSet::validate() const {
    auto check = [](const Band& b, bool cumulative, const char* name) {
        const std::size_t n = b.mean.size();
        if (b.lower.size() != n || b.upper.size() != n)
            throw std::logic_error(std::string("band ") + name + ": length mismatch");
        for (std::size_t t = 0; t < n; ++t) {
            if (!(b.lower[t] <= b.mean[t] && b.mean[t] <= b.upper[t]))
                throw std::logic_error(std::string("band ") + name + ": envelope does not contain mean");
            if (cumulative && t > 0 &&
                (b.lower[t] < b.lower[t - 1] || b.mean[t] < b.mean[t - 1] || b.upper[t] < b.upper[t - 1]))
                throw std::logic_error(std::string("band ") + name + ": cumulative envelope decreases");
        }
    };
    check(epi, true, "epi");
    check(econ, true, "econ");
    check(action, false, "action");
}

double empirical_quantile(std::vector<double> values, double q) {
    if (values.empty()) throw std::invalid_argument("quantile of empty sample");
    if (!(q >= 0.0 && q <= 1.0)) throw std::invalid_argument("quantile level must lie in [0, 1]");
    std::sort(values.begin(), values.end());
    const auto n = values.size();
    auto rank = static_cast<std::size_t>(std::ceil(q * static_cast<double>(n)));
    rank = std::clamp<std::size_t>(rank, 1, n);
    return values[rank - 1];
}

Band quantile_band(const std::vector<std::vector<double>>& samples, double coverage) {
    if (samples.empty()) throw std::invalid_argument("band needs at least one sample path");
    if (!(coverage > 0.0 && coverage < 1.0)) throw std::invalid_argument("band coverage must lie in (0, 1)");
    const std::size_t days = samples.front().size();
    for (const auto& s : samples)
        if (s.size() != days) throw std::invalid_argument("band sample paths differ in length");
    Band b;
    b.lower.resize(days);
    b.mean.resize(days);
    b.upper.resize(days);
    std::vector<double> column(samples.size());
    for (std::size_t t = 0; t < days; ++t) {
        for (std::size_t k = 0; k < samples.size(); ++k) column[k] = samples[k][t];
        const double mean = kernels::sum_stats(column).sum / static_cast<double>(column.size());
        b.mean[t] = mean;
        b.lower[t] = std::min(mean, empirical_quantile(column, (1.0 - coverage) / 2.0));
        b.upper[t] = std::max(mean, empirical_quantile(column, (1.0 + coverage) / 2.0));
    }
    return b;
}

std::vector<ParetoEntry> build_frontier(const RegionState& current, const ParamDistribution& posterior,
                                        const std::vector<TradeoffWeight>& weights, const Planner& planner,
                                        const CostModel& cost_model, const FrontierConfig& cfg,
                                        const RandomStream& rng) {
    if (weights.empty()) throw std::invalid_argument("frontier needs at least one weight");
    if (cfg.band_replications < 1) throw std::invalid_argument("band replications must be >= 1");
    cfg.rollout.validate();

    std::vector<TradeoffWeight> sorted = weights;
    std::stable_sort(sorted.begin(), sorted.end(),
                     [](const TradeoffWeight& a, const TradeoffWeight& b) { return a.omega < b.omega; });

    std::vector<ParetoEntry> out(sorted.size());
    // Weights fan out; the rollouts inside each fit then run serially on that worker.
    parallel_for(sorted.size(), [&](std::size_t w) {
        ParetoEntry& e = out[w];
        e.weight = sorted[w];
        try {
            e.policy = planner(e.weight, rng.derive({w, 0}));
        } catch (const std::exception& ex) {
            std::ostringstream msg;
            msg << "planner failed for weight " << e.weight.omega << ": " << ex.what();
            throw std::runtime_error(msg.str());
        }
        e.immediate_action = e.policy.rule(current, cfg.rollout.start_day);

        const auto k = static_cast<std::size_t>(cfg.band_replications);
        std::vector<std::vector<double>> epi(k), econ(k), act(k);
        std::vector<double> final_epi(k), final_econ(k);
        const RandomStream band_rng = rng.derive({w, 1});
        for (std::size_t r = 0; r < k; ++r) {
            RolloutPath path;
            const auto o = run_replication(e.policy.rule, current, posterior, cost_model, cfg.rollout, band_rng, r, &path);
            final_epi[r] = o.epi;
            final_econ[r] = o.econ;
            epi[r] = std::move(path.cumulative_epi);
            econ[r] = std::move(path.cumulative_econ);
            act[r].assign(path.actions.begin(), path.actions.end());
        }
        auto mean_se = [](const std::vector<double>& v, double& mean, double& se) {
            const auto s = kernels::sum_stats(v);
            const double n = static_cast<double>(v.size());
            mean = s.sum / n;
            double m2 = 0.0;
            for (double x : v) m2 += (x - mean) * (x - mean);
            se = v.size() > 1 ? std::sqrt(m2 / (n - 1.0) / n) : 0.0;
        };
        mean_se(final_epi, e.epi_mean, e.epi_se);
        mean_se(final_econ, e.econ_mean, e.econ_se);
        e.bands.coverage = cfg.coverage;
        e.bands.start_day = cfg.rollout.start_day;
        e.bands.epi = quantile_band(epi, cfg.coverage);
        e.bands.econ = quantile_band(econ, cfg.coverage);
        e.bands.action = quantile_band(act, cfg.coverage);
    });
    return out;
}

std::vector<std::size_t> nondominated_indices(const std::vector<std::pair<double, double>>& points) {
    // Sort by epi then econ; a point is dominated iff some point with strictly
    // smaller epi has strictly smaller econ.
    std::vector<std::size_t> order(points.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return points[a] < points[b]; });
    std::vector<bool> keep(points.size(), true);
    double best_econ = INFINITY;  // min econ over points with strictly smaller epi
    std::size_t i = 0;
    while (i < order.size()) {
        std::size_t j = i;
        double group_min = INFINITY;
        while (j < order.size() && points[order[j]].first == points[order[i]].first) {
            if (points[order[j]].second > best_econ) keep[order[j]] = false;
            group_min = std::min(group_min, points[order[j]].second);
            ++j;
        }
        best_econ = std::min(best_econ, group_min);
        i = j;
    }
    std::vector<std::size_t> out;
    for (std::size_t k = 0; k < points.size(); ++k)
        if (keep[k]) out.push_back(k);
    return out;
}

std::vector<ParetoEntry> pareto_filter(const std::vector<ParetoEntry>& entries) {
    std::vector<std::pair<double, double>> pts;
    for (const auto& e : entries) pts.emplace_back(e.epi_mean, e.econ_mean);
    std::vector<ParetoEntry> out;
    for (std::size_t i : nondominated_indices(pts)) out.push_back(entries[i]);
    return out;
}

std::vector<ParetoEntry> pareto_filter_conservative(const std::vector<ParetoEntry>& entries, double z) {
    std::vector<ParetoEntry> out;
    for (std::size_t i = 0; i < entries.size(); ++i) {
        const auto& a = entries[i];
        bool dominated = false;
        for (std::size_t j = 0; j < entries.size() && !dominated; ++j) {
            if (i == j) continue;
            const auto& b = entries[j];
            const double epi_gap = z * std::hypot(a.epi_se, b.epi_se);
            const double econ_gap = z * std::hypot(a.econ_se, b.econ_se);
            dominated = b.epi_mean + epi_gap < a.epi_mean && b.econ_mean + econ_gap < a.econ_mean;
        }
        if (!dominated) out.push_back(a);
    }
    return out;
}

std::pair<ActionLevel, ParetoEntry> recommend(const std::vector<ParetoEntry>& entries, TradeoffWeight weight) {
    for (const auto& e : entries)
        if (e.weight == weight) return {e.immediate_action, e};
    std::ostringstream msg;
    msg << "no frontier entry for weight " << weight.omega;
    throw std::out_of_range(msg.str());
}

nlohmann::json band_to_json(const Band& b) { return {{"lower", b.lower}, {"mean", b.mean}, {"upper", b.upper}}; }

nlohmann::json bands_to_json(const BandSet& b) {
    return {{"coverage", b.coverage},
            {"start_day", b.start_day},
            {"epi", band_to_json(b.epi)},
            {"econ", band_to_json(b.econ)},
            {"action", band_to_json(b.action)}};
}

nlohmann::json entry_to_json(const ParetoEntry& e) {
    return {{"weight", e.weight.omega},
            {"policy", {{"kind", e.policy.kind}, {"detail", e.policy.description}}},
            {"epi_mean", e.epi_mean},
            {"econ_mean", e.econ_mean},
            {"epi_se", e.epi_se},
            {"econ_se", e.econ_se},
            {"immediate_action", e.immediate_action.value()},
            {"bands", bands_to_json(e.bands)}};
}

nlohmann::json frontier_to_json(const std::vector<ParetoEntry>& entries) {
    auto arr = nlohmann::json::array();
    for (const auto& e : entries) arr.push_back(entry_to_json(e));
    return arr;
}

std::string frontier_csv(const std::vector<ParetoEntry>& entries) {
    std::ostringstream out;
    out.precision(17);
    out << "weight,epi_mean,econ_mean,action\n";
    for (const auto& e : entries)
        out << e.weight.omega << ',' << e.epi_mean << ',' << e.econ_mean << ',' << e.immediate_action.value() << '\n';
    return out.str();
}

}  // namespace epiplan
