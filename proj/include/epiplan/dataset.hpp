#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "epiplan/types.hpp"

namespace epiplan {

// {start, start+interval, ...} restricted to [1, horizon].
std::vector<Day> decision_points(Day horizon, int interval, Day start);

bool is_decision_point(Day day, Day start, int interval);

struct LoadOptions {
    Day horizon = 0;           // 0: take the longest series
    int decision_interval = 7;
    int levels = 3;
};

// Reads `regions.csv` and `series.csv` from a directory. If the directory
// also holds a `config.json`, its `horizon`, `decision_interval` and `levels`
// keys override the options.
Dataset load_dataset(const std::filesystem::path& dir);
Dataset load_dataset(const std::filesystem::path& dir, LoadOptions options);

// Parses from in-memory CSV text (used by the HTTP service).
Dataset parse_dataset(const std::string& regions_csv, const std::string& series_csv, LoadOptions options);

// Canonical CSV form: regions in load order, series rows sorted by (region order, day).
std::string regions_csv(const Dataset& data);
std::string series_csv(const Dataset& data);
void write_dataset(const Dataset& data, const std::filesystem::path& dir);

// Replaces isolated non-monotone records by the rounded mean of their
// neighbours. Returns the number of repaired records; throws when the
// series cannot be made non-decreasing this way.
int repair_cumulative(std::vector<Count>& cumulative, const std::string& region_id);

void validate_dataset(const Dataset& data);

}  // namespace epiplan
