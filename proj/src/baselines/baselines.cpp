#include "epiplan/baselines.hpp"

#include <algorithm>
#include <stdexcept>

namespace epiplan {

void OccurrenceMemory::record(Count new_cases) {
    if (new_cases < 0) throw std::invalid_argument("new case count must be >= 0");
    history_.push_back(new_cases);
}

int OccurrenceMemory::days_since_first_case() const {
    for (std::size_t i = 0; i < history_.size(); ++i)
        if (history_[i] > 0) return static_cast<int>(history_.size() - 1 - i);
    return -1;
}

int OccurrenceMemory::days_since_last_case() const {
    for (std::size_t i = history_.size(); i-- > 0;)
        if (history_[i] > 0) return static_cast<int>(history_.size() - 1 - i);
    return -1;
}

Count OccurrenceMemory::cases_in_window(int m) const {
    Count total = 0;
    const auto n = history_.size();
    for (std::size_t k = 0; k < static_cast<std::size_t>(std::max(m, 0)) && k < n; ++k) total += history_[n - 1 - k];
    return total;
}

BaselinePolicy mitigation_policy(int m) {
    if (m < 1) throw std::invalid_argument("mitigation window must be >= 1");
    return [m](const OccurrenceMemory& mem) {
        return ActionLevel(mem.cases_in_window(m) > 0 ? 2 : 1, mem.levels());
    };
}

BaselinePolicy suppression_policy(int m) {
    if (m < 1) throw std::invalid_argument("suppression delay must be >= 1");
    // Replays the stage machine over the whole history, so the policy stays a
    // pure function of the memory.
    return [m](const OccurrenceMemory& mem) {
        int level = 1;
        int outbreak_age = -1;  // days since the outbreak's first case
        int zero_run = 0;
        for (Count c : mem.history()) {
            if (c > 0) {
                zero_run = 0;
                if (outbreak_age < 0) outbreak_age = 0;
                else ++outbreak_age;
            } else {
                ++zero_run;
                if (outbreak_age >= 0) ++outbreak_age;
            }
            int target = 1;
            if (outbreak_age >= 2 * m) target = 3;
            else if (outbreak_age >= m) target = 2;
            if (zero_run >= 2 * m) target = std::min(target, 1);
            else if (zero_run >= m) target = std::min(target, 2);
            level = target < level ? level - 1 : target;
            if (level == 1 && zero_run >= 2 * m) outbreak_age = -1;
        }
        return ActionLevel(std::min(level, mem.levels()), mem.levels());
    };
}

ActionLevel count_threshold_action(int m, Count yesterday_new_cases, int levels) {
    if (yesterday_new_cases == 0) return ActionLevel(1, levels);
    return ActionLevel(yesterday_new_cases > m ? 3 : 2, levels);
}

BaselinePolicy count_threshold_policy(int m) {
    if (m < 1) throw std::invalid_argument("count threshold must be >= 1");
    return [m](const OccurrenceMemory& mem) { return count_threshold_action(m, mem.latest(), mem.levels()); };
}

ActionLevel behavior_policy(const Dataset& data, const std::string& region_id, Day day) {
    const auto& series = data.region(region_id).series;
    if (day < 1 || day > series.last_day())
        throw std::out_of_range("region " + region_id + ": day " + std::to_string(day) + " outside recorded series");
    return ActionLevel(series.action_on(day), data.levels);
}

std::string BaselineSpec::label() const {
    if (family == "mitigation") return "M" + std::to_string(m);
    if (family == "suppression") return "S" + std::to_string(m);
    if (family == "threshold") return "TB" + std::to_string(m);
    throw std::invalid_argument("unknown baseline family: " + family);
}

BaselinePolicy BaselineSpec::make() const {
    if (family == "mitigation") return mitigation_policy(m);
    if (family == "suppression") return suppression_policy(m);
    if (family == "threshold") return count_threshold_policy(m);
    throw std::invalid_argument("unknown baseline family: " + family);
}

std::vector<BaselineSpec> default_baselines() {
    std::vector<BaselineSpec> out;
    for (int m = 4; m <= 12; m += 2) out.push_back({"mitigation", m});
    for (int m = 4; m <= 10; m += 2) out.push_back({"suppression", m});
    for (int m = 5; m <= 50; m += 5) out.push_back({"threshold", m});
    return out;
}

}  // namespace epiplan
