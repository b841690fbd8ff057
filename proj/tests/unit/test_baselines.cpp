#include <gtest/gtest.h>

#include "epiplan/baselines.hpp"

using namespace epiplan;

namespace {

OccurrenceMemory memory(const std::vector<Count>& cases) {
    OccurrenceMemory m(3);
    for (Count c : cases) m.record(c);
    return m;
}

// Levels chosen day by day as the history grows.
std::vector<int> trace(const BaselinePolicy& p, const std::vector<Count>& cases) {
    std::vector<int> out;
    OccurrenceMemory m(3);
    for (Count c : cases) {
        m.record(c);
        out.push_back(p(m).value());
    }
    return out;
}

}  // namespace

TEST(Memory, Windows) {
    const auto m = memory({0, 0, 3, 0, 1, 0, 0});
    EXPECT_EQ(m.days_since_first_case(), 4);
    EXPECT_EQ(m.days_since_last_case(), 2);
    EXPECT_EQ(m.cases_in_window(2), 0);
    EXPECT_EQ(m.cases_in_window(3), 1);
    EXPECT_EQ(m.cases_in_window(100), 4);
    EXPECT_EQ(m.latest(), 0);
    EXPECT_EQ(memory({0, 0}).days_since_first_case(), -1);
    OccurrenceMemory bad;
    EXPECT_THROW(bad.record(-1), std::invalid_argument);
}

TEST(Mitigation, CasesInWindow) {
    const auto p = mitigation_policy(3);
    EXPECT_EQ(trace(p, {0, 1, 0, 0, 0, 0}), (std::vector<int>{1, 2, 2, 2, 1, 1}));
    EXPECT_THROW(mitigation_policy(0), std::invalid_argument);
}

TEST(Suppression, EscalatesAndDeescalates) {
    const auto p = suppression_policy(2);
    // Outbreak starts on day 1: level 2 after 2 days, level 3 after 4.
    EXPECT_EQ(trace(p, {1, 1, 1, 1, 1, 1}), (std::vector<int>{1, 1, 2, 2, 3, 3}));
    // Then cases stop: down to 2 after 2 zero days, to 1 after 4, one step per day.
    const auto t = trace(p, {1, 1, 1, 1, 1, 0, 0, 0, 0, 0});
    EXPECT_EQ(t, (std::vector<int>{1, 1, 2, 2, 3, 3, 2, 2, 1, 1}));
}

TEST(Suppression, NewCaseResetsZeroRun) {
    const auto p = suppression_policy(2);
    const auto t = trace(p, {1, 1, 1, 1, 1, 0, 1, 0, 0, 0});
    // Case on day 7 keeps level 3 until two zero days pass again.
    EXPECT_EQ(t[6], 3);
    EXPECT_EQ(t[8], 2);
}

TEST(Suppression, PureFunctionOfMemory) {
    const auto p = suppression_policy(3);
    const std::vector<Count> cases{0, 2, 1, 0, 0, 5, 0, 0, 0, 0, 0, 0, 0, 1};
    const auto t = trace(p, cases);
    for (std::size_t k = 0; k < cases.size(); ++k) {
        std::vector<Count> prefix(cases.begin(), cases.begin() + static_cast<long>(k) + 1);
        EXPECT_EQ(p(memory(prefix)).value(), t[k]);
    }
}

TEST(CountThreshold, Levels) {
    EXPECT_EQ(count_threshold_action(5, 0).value(), 1);
    EXPECT_EQ(count_threshold_action(5, 5).value(), 2);
    EXPECT_EQ(count_threshold_action(5, 6).value(), 3);
    EXPECT_EQ(count_threshold_policy(5)(memory({10, 3})).value(), 2);
}

TEST(Behavior, ReplaysRecordedActions) {
    Dataset d;
    d.levels = 3;
    RegionData r;
    r.meta = {"A", 100, 70};
    r.series.cumulative_confirmed = {0, 1, 2};
    r.series.actions = {1, 3, 2};
    d.regions.push_back(r);
    EXPECT_EQ(behavior_policy(d, "A", 2).value(), 3);
    EXPECT_THROW(behavior_policy(d, "A", 4), std::out_of_range);
    EXPECT_THROW(behavior_policy(d, "B", 1), std::out_of_range);
}

TEST(BaselineSpec, LabelsAndDefaults) {
    const auto all = default_baselines();
    EXPECT_EQ(all.size(), 5u + 4u + 10u);
    EXPECT_EQ(all.front().label(), "M4");
    EXPECT_EQ(all[5].label(), "S4");
    EXPECT_EQ(all.back().label(), "TB50");
    EXPECT_THROW((BaselineSpec{"lockdown", 3}.make()), std::invalid_argument);
}
