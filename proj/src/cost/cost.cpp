#include "epiplan/cost.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include <nlohmann/json.hpp>

#include "epiplan/variates.hpp"

namespace epiplan {

TradeoffWeight::TradeoffWeight(double w) : omega(w) {
    if (!(w >= 0.0) || !std::isfinite(w)) throw std::invalid_argument("trade-off weight must be finite and >= 0");
}

double CostModel::expected_cost(ActionLevel a) const {
    const auto& c = levels.at(static_cast<std::size_t>(a.index()));
    if (a.value() == 1) return 0.0;
    if (!(c.sd > 0.0)) return std::max(0.0, c.mean) * gdp_daily;
    const double z = c.mean / c.sd;
    const double cdf = 0.5 * std::erfc(-z / std::numbers::sqrt2);
    const double pdf = std::exp(-0.5 * z * z) / std::sqrt(2.0 * std::numbers::pi);
    return (c.mean * cdf + c.sd * pdf) * gdp_daily;
}

void CostModel::validate() const {
    if (levels.size() < 2) throw std::invalid_argument("cost model needs at least two levels");
    for (std::size_t j = 0; j < levels.size(); ++j) {
        if (levels[j].level != static_cast<int>(j) + 1) throw std::invalid_argument("cost levels must be 1..J in order");
        if (!(levels[j].sd >= 0.0)) throw std::invalid_argument("cost sd must be >= 0");
    }
    if (levels[0].mean != 0.0 || levels[0].sd != 0.0) throw std::invalid_argument("level 1 must be free");
    if (!(gdp_daily >= 0.0)) throw std::invalid_argument("gdp must be >= 0");
}

std::vector<LevelCost> default_level_costs() { return {{1, 0.0, 0.0}, {2, 0.368, 0.239}, {3, 0.484, 0.181}}; }

CostModel default_cost_model(const RegionMeta& meta) { return make_cost_model(meta, default_level_costs()); }

CostModel make_cost_model(const RegionMeta& meta, std::vector<LevelCost> levels) {
    CostModel m{std::move(levels), meta.gdp_annual / 365.0};
    m.validate();
    return m;
}

double sample_action_cost(const CostModel& model, ActionLevel action, RandomStream& rng) {
    if (action.value() == 1) return 0.0;
    const auto& c = model.levels.at(static_cast<std::size_t>(action.index()));
    const double ratio = variates::normal(rng, c.mean, c.sd);
    return std::max(0.0, ratio) * model.gdp_daily;
}

Count epidemiological_cost(const RegionState& pre, const RegionState& post) {
    if (post.susceptible() > pre.susceptible())
        throw std::invalid_argument("invalid transition: susceptible count increased");
    return pre.susceptible() - post.susceptible();
}

std::vector<TradeoffWeight> weight_grid(const std::vector<int>& exponents) {
    std::vector<TradeoffWeight> out;
    out.reserve(exponents.size());
    for (int k : exponents) out.emplace_back(std::exp(static_cast<double>(k)) / 10.0);
    return out;
}

std::vector<int> default_weight_exponents() { return {-2, 0, 1, 2, 3, 4, 5, 6}; }

nlohmann::json level_costs_to_json(const std::vector<LevelCost>& levels) {
    auto arr = nlohmann::json::array();
    for (const auto& c : levels) arr.push_back({{"level", c.level}, {"mean", c.mean}, {"sd", c.sd}});
    return arr;
}

std::vector<LevelCost> level_costs_from_json(const nlohmann::json& j) {
    std::vector<LevelCost> out;
    for (const auto& e : j) out.push_back({e.at("level").get<int>(), e.at("mean").get<double>(), e.at("sd").get<double>()});
    std::sort(out.begin(), out.end(), [](const LevelCost& a, const LevelCost& b) { return a.level < b.level; });
    return out;
}

}  // namespace epiplan
