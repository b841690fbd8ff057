#include "epiplan/types.hpp"

#include <algorithm>
#include <sstream>

namespace epiplan {

RegionState::RegionState(Count susceptible, Count infectious, Count removed, Count population)
    : s_(susceptible), i_(infectious), r_(removed), m_(population) {
    if (population <= 0) throw std::invalid_argument("RegionState: population must be positive");
    if (susceptible < 0 || infectious < 0 || removed < 0)
        throw std::invalid_argument("RegionState: negative compartment count");
    if (susceptible + infectious + removed != population) {
        std::ostringstream msg;
        msg << "RegionState: S+I+R = " << susceptible + infectious + removed << " != population " << population;
        throw std::invalid_argument(msg.str());
    }
}

RegionState RegionState::from_infectious_removed(Count infectious, Count removed, Count population) {
    return RegionState(population - infectious - removed, infectious, removed, population);
}

ActionLevel::ActionLevel(int level, int levels) : level_(level) {
    if (levels < 2) throw std::invalid_argument("ActionLevel: J must be at least 2");
    if (level < 1 || level > levels) {
        throw std::out_of_range("action out of range: " + std::to_string(level) + " not in 1.." +
                                std::to_string(levels));
    }
}

void GsirParams::validate() const {
    if (!(gamma >= 0.0 && gamma <= 1.0)) throw std::invalid_argument("GsirParams: gamma outside [0,1]");
    if (betas.size() < 2) throw std::invalid_argument("GsirParams: need at least two action levels");
    for (double b : betas)
        if (!(b >= 0.0)) throw std::invalid_argument("GsirParams: negative infection rate");
}

bool GsirParams::ordered() const {
    return std::is_sorted(betas.rbegin(), betas.rend());
}

void RegionMeta::validate() const {
    if (population <= 0) throw std::invalid_argument("region " + region_id + ": population must be positive");
    if (!(gdp_annual >= 0.0)) throw std::invalid_argument("region " + region_id + ": negative gdp_annual");
}

const RegionData& Dataset::region(const std::string& id) const { return regions.at(region_index(id)); }

std::size_t Dataset::region_index(const std::string& id) const {
    for (std::size_t i = 0; i < regions.size(); ++i)
        if (regions[i].meta.region_id == id) return i;
    throw std::out_of_range("unknown region " + id);
}

ParseError::ParseError(const std::string& file, std::size_t row, const std::string& column, const std::string& what)
    : std::runtime_error(file + (row ? ":" + std::to_string(row) : std::string()) +
                         (column.empty() ? std::string() : " [" + column + "]") + ": " + what),
      file_(file),
      row_(row),
      column_(column) {}

}  // namespace epiplan
