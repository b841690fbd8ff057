#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace epiplan {

using Count = std::int64_t;
using Day = int;

// Compartment counts of one region on one day.
class RegionState {
public:
    RegionState() = default;
    RegionState(Count susceptible, Count infectious, Count removed, Count population);

    // Builds S = M - I - R.
    static RegionState from_infectious_removed(Count infectious, Count removed, Count population);

    Count susceptible() const { return s_; }
    Count infectious() const { return i_; }
    Count removed() const { return r_; }
    Count population() const { return m_; }

    bool operator==(const RegionState&) const = default;

private:
    Count s_ = 0;
    Count i_ = 0;
    Count r_ = 0;
    Count m_ = 0;
};

// Ordinal intervention stringency, 1 = no intervention.
class ActionLevel {
public:
    constexpr ActionLevel() = default;
    explicit ActionLevel(int level, int levels);

    constexpr int value() const { return level_; }
    constexpr int index() const { return level_ - 1; }

    bool operator==(const ActionLevel&) const = default;
    auto operator<=>(const ActionLevel&) const = default;

private:
    int level_ = 1;
};

struct GsirParams {
    double gamma = 0.0;
    std::vector<double> betas;  // betas[j-1] is the infection rate under action level j

    int levels() const { return static_cast<int>(betas.size()); }
    double beta(ActionLevel a) const { return betas.at(static_cast<std::size_t>(a.index())); }

    // Throws if gamma is outside [0,1], a beta is negative, or J < 2.
    void validate() const;
    // True when betas are non-increasing in the level.
    bool ordered() const;
};

struct RegionMeta {
    std::string region_id;
    Count population = 0;
    double gdp_annual = 0.0;

    void validate() const;
};

struct SurveillanceSeries {
    std::string region_id;
    std::vector<Count> cumulative_confirmed;  // index 0 is day 1
    std::vector<int> actions;                 // recorded action level per day

    Day last_day() const { return static_cast<Day>(cumulative_confirmed.size()); }
    Count confirmed_on(Day day) const { return cumulative_confirmed.at(static_cast<std::size_t>(day - 1)); }
    int action_on(Day day) const { return actions.at(static_cast<std::size_t>(day - 1)); }
};

struct RegionData {
    RegionMeta meta;
    SurveillanceSeries series;
};

struct Dataset {
    std::vector<RegionData> regions;
    Day horizon = 0;
    int decision_interval = 7;
    int levels = 3;

    const RegionData& region(const std::string& id) const;
    std::size_t region_index(const std::string& id) const;
};

struct SeedSpec {
    std::uint64_t master_seed = 0;
    std::uint64_t stream_id = 0;
};

// Thrown for malformed input files; row/column are 1-based, 0 when not applicable.
class ParseError : public std::runtime_error {
public:
    ParseError(const std::string& file, std::size_t row, const std::string& column, const std::string& what);

    const std::string& file() const { return file_; }
    std::size_t row() const { return row_; }
    const std::string& column() const { return column_; }

private:
    std::string file_;
    std::size_t row_;
    std::string column_;
};

}  // namespace epiplan
