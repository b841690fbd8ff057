#pragma once

#include <functional>
#include <string>
#include <vector>

#include "epiplan/types.hpp"

namespace epiplan {

// Daily new-confirmed counts of one region, oldest first. The last recorded
// day is "today"; a policy reading the memory picks tomorrow's action.
class OccurrenceMemory {
public:
    explicit OccurrenceMemory(int levels = 3) : levels_(levels) {}

    void record(Count new_cases);

    const std::vector<Count>& history() const { return history_; }
    int levels() const { return levels_; }
    int days_recorded() const { return static_cast<int>(history_.size()); }
    // -1 before the first case.
    int days_since_first_case() const;
    int days_since_last_case() const;
    Count latest() const { return history_.empty() ? 0 : history_.back(); }
    // Cases in the window (today - m, today].
    Count cases_in_window(int m) const;

private:
    int levels_;
    std::vector<Count> history_;
};

using BaselinePolicy = std::function<ActionLevel(const OccurrenceMemory&)>;

// Level 2 while any case fell in the past m days, else level 1.
BaselinePolicy mitigation_policy(int m);
// Escalates 1 -> 2 -> 3 at m and 2m days after the first case of an outbreak;
// de-escalates to 2 after m zero-case days and to 1 after 2m, one level per day.
BaselinePolicy suppression_policy(int m);
// 3 when yesterday's count exceeds m, 1 when it is zero, else 2.
BaselinePolicy count_threshold_policy(int m);
ActionLevel count_threshold_action(int m, Count yesterday_new_cases, int levels = 3);

ActionLevel behavior_policy(const Dataset& data, const std::string& region_id, Day day);

struct BaselineSpec {
    std::string family;  // "mitigation", "suppression", "threshold"
    int m = 1;

    std::string label() const;
    BaselinePolicy make() const;
};

// pi^M for m = 4..12, pi^S for m = 4..10, pi^TB for m = 5..50 (even steps as configured).
std::vector<BaselineSpec> default_baselines();

}  // namespace epiplan
