#include "epiplan/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <map>
#include <sstream>

#include <nlohmann/json.hpp>

namespace epiplan {

std::vector<Day> decision_points(Day horizon, int interval, Day start) {
    if (interval <= 0) throw std::invalid_argument("decision interval must be positive");
    std::vector<Day> out;
    for (Day t = std::max(start, 1); t <= horizon; t += interval) out.push_back(t);
    return out;
}

bool is_decision_point(Day day, Day start, int interval) {
    return day >= start && (day - start) % interval == 0;
}

namespace {

std::string read_file(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    if (!in) throw ParseError(p.filename().string(), 0, "", "cannot open file");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> cells;
    std::string cell;
    std::istringstream ss(line);
    while (std::getline(ss, cell, ',')) {
        while (!cell.empty() && (cell.back() == '\r' || cell.back() == ' ')) cell.pop_back();
        while (!cell.empty() && cell.front() == ' ') cell.erase(cell.begin());
        cells.push_back(cell);
    }
    if (!line.empty() && line.back() == ',') cells.emplace_back();
    return cells;
}

struct CsvTable {
    std::string file;
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;  // rows[i] is file row i + 2

    std::size_t column(const std::string& name) const {
        auto it = std::find(header.begin(), header.end(), name);
        if (it == header.end()) throw ParseError(file, 1, name, "missing column");
        return static_cast<std::size_t>(it - header.begin());
    }
};

CsvTable parse_csv(const std::string& text, const std::string& file) {
    CsvTable table{file, {}, {}};
    std::istringstream in(text);
    std::string line;
    bool first = true;
    std::size_t row = 0;
    while (std::getline(in, line)) {
        ++row;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (first) {
            if (line.size() >= 3 && static_cast<unsigned char>(line[0]) == 0xEF) line.erase(0, 3);
            table.header = split_csv_line(line);
            first = false;
            continue;
        }
        if (line.empty()) continue;
        auto cells = split_csv_line(line);
        if (cells.size() != table.header.size())
            throw ParseError(file, row, "", "expected " + std::to_string(table.header.size()) + " cells, got " +
                                                std::to_string(cells.size()));
        table.rows.push_back(std::move(cells));
    }
    if (first) throw ParseError(file, 0, "", "empty file");
    return table;
}

template <typename T>
T parse_number(const std::string& cell, const std::string& file, std::size_t row, const std::string& col) {
    T value{};
    if constexpr (std::is_floating_point_v<T>) {
        try {
            std::size_t used = 0;
            value = std::stod(cell, &used);
            if (used != cell.size()) throw std::invalid_argument("trailing");
        } catch (const std::exception&) {
            throw ParseError(file, row, col, "not a number: '" + cell + "'");
        }
    } else {
        auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), value);
        if (ec != std::errc() || ptr != cell.data() + cell.size())
            throw ParseError(file, row, col, "not an integer: '" + cell + "'");
    }
    return value;
}

void apply_config_overrides(const std::filesystem::path& dir, LoadOptions& options) {
    const auto cfg = dir / "config.json";
    if (!std::filesystem::exists(cfg)) return;
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(read_file(cfg));
    } catch (const nlohmann::json::exception& e) {
        throw ParseError("config.json", 0, "", e.what());
    }
    if (j.contains("horizon")) options.horizon = j["horizon"].get<Day>();
    if (j.contains("decision_interval")) options.decision_interval = j["decision_interval"].get<int>();
    if (j.contains("levels")) options.levels = j["levels"].get<int>();
}

}  // namespace

int repair_cumulative(std::vector<Count>& c, const std::string& region_id) {
    int repaired = 0;
    const std::size_t n = c.size();
    for (std::size_t pass = 0; pass <= n; ++pass) {
        std::size_t t = 1;
        while (t < n && c[t] >= c[t - 1]) ++t;
        if (t >= n) return repaired;
        // c[t] < c[t-1]: either c[t] is a dip or c[t-1] is a spike.
        if (t + 1 < n && c[t - 1] <= c[t + 1]) {
            c[t] = (c[t - 1] + c[t + 1] + 1) / 2;
        } else if (t + 1 == n) {
            c[t] = c[t - 1];
        } else if (t == 1) {
            c[0] = c[1];
        } else if (c[t - 2] <= c[t]) {
            c[t - 1] = (c[t - 2] + c[t] + 1) / 2;
        } else {
            throw std::invalid_argument("region " + region_id + ": cumulative counts decrease at day " +
                                        std::to_string(t + 1) + " and cannot be repaired by neighbour averaging");
        }
        ++repaired;
    }
    throw std::invalid_argument("region " + region_id + ": cumulative count repair did not converge");
}

void validate_dataset(const Dataset& data) {
    if (data.decision_interval < 1) throw std::invalid_argument("decision_interval must be >= 1");
    if (data.levels < 2) throw std::invalid_argument("levels must be >= 2");
    for (const auto& r : data.regions) {
        r.meta.validate();
        const auto& s = r.series;
        if (s.actions.size() != s.cumulative_confirmed.size())
            throw std::invalid_argument("region " + r.meta.region_id + ": actions and counts differ in length");
        for (std::size_t t = 0; t < s.cumulative_confirmed.size(); ++t) {
            if (s.cumulative_confirmed[t] < 0) throw std::invalid_argument("negative count");
            if (t > 0 && s.cumulative_confirmed[t] < s.cumulative_confirmed[t - 1])
                throw std::invalid_argument("region " + r.meta.region_id + ": cumulative counts decrease");
            if (s.cumulative_confirmed[t] > r.meta.population)
                throw std::invalid_argument("region " + r.meta.region_id + ": count exceeds population");
            if (s.actions[t] < 1 || s.actions[t] > data.levels) throw std::out_of_range("action out of range");
        }
    }
}

Dataset parse_dataset(const std::string& regions_text, const std::string& series_text, LoadOptions options) {
    if (options.levels < 2) throw std::invalid_argument("levels must be >= 2");
    Dataset data;
    data.decision_interval = options.decision_interval;
    data.levels = options.levels;
    if (data.decision_interval < 1) throw std::invalid_argument("decision_interval must be >= 1");

    const auto regions = parse_csv(regions_text, "regions.csv");
    const auto c_id = regions.column("region_id");
    const auto c_pop = regions.column("population");
    const auto c_gdp = regions.column("gdp_annual");
    for (std::size_t i = 0; i < regions.rows.size(); ++i) {
        const auto& row = regions.rows[i];
        const std::size_t line = i + 2;
        RegionData r;
        r.meta.region_id = row[c_id];
        if (r.meta.region_id.empty()) throw ParseError("regions.csv", line, "region_id", "empty region id");
        r.meta.population = parse_number<Count>(row[c_pop], "regions.csv", line, "population");
        if (r.meta.population <= 0) throw ParseError("regions.csv", line, "population", "population must be positive");
        r.meta.gdp_annual = parse_number<double>(row[c_gdp], "regions.csv", line, "gdp_annual");
        if (r.meta.gdp_annual < 0) throw ParseError("regions.csv", line, "gdp_annual", "negative gdp_annual");
        for (const auto& other : data.regions)
            if (other.meta.region_id == r.meta.region_id)
                throw ParseError("regions.csv", line, "region_id", "duplicate region " + r.meta.region_id);
        r.series.region_id = r.meta.region_id;
        data.regions.push_back(std::move(r));
    }
    if (data.regions.empty()) throw ParseError("regions.csv", 0, "", "no regions");

    const auto series = parse_csv(series_text, "series.csv");
    const auto s_id = series.column("region_id");
    const auto s_day = series.column("day");
    const auto s_cum = series.column("cumulative_confirmed");
    const auto s_act = series.column("action_level");

    std::vector<std::map<Day, std::pair<Count, int>>> rows_by_region(data.regions.size());
    std::vector<std::map<Day, std::size_t>> line_by_day(data.regions.size());
    for (std::size_t i = 0; i < series.rows.size(); ++i) {
        const auto& row = series.rows[i];
        const std::size_t line = i + 2;
        std::size_t idx = data.regions.size();
        for (std::size_t k = 0; k < data.regions.size(); ++k)
            if (data.regions[k].meta.region_id == row[s_id]) idx = k;
        if (idx == data.regions.size()) throw ParseError("series.csv", line, "region_id", "unknown region " + row[s_id]);
        const Day day = parse_number<Day>(row[s_day], "series.csv", line, "day");
        if (day < 1 || (options.horizon > 0 && day > options.horizon))
            throw ParseError("series.csv", line, "day", "day out of range");
        const Count cum = parse_number<Count>(row[s_cum], "series.csv", line, "cumulative_confirmed");
        if (cum < 0) throw ParseError("series.csv", line, "cumulative_confirmed", "negative count");
        if (cum > data.regions[idx].meta.population)
            throw ParseError("series.csv", line, "cumulative_confirmed", "count exceeds population");
        const int act = parse_number<int>(row[s_act], "series.csv", line, "action_level");
        if (act < 1 || act > options.levels) throw ParseError("series.csv", line, "action_level", "action out of range");
        if (!rows_by_region[idx].emplace(day, std::make_pair(cum, act)).second)
            throw ParseError("series.csv", line, "day", "duplicate day");
        line_by_day[idx][day] = line;
    }

    Day longest = 0;
    for (std::size_t k = 0; k < data.regions.size(); ++k) {
        auto& s = data.regions[k].series;
        const auto& rows = rows_by_region[k];
        if (rows.empty()) throw ParseError("series.csv", 0, "region_id", "no rows for region " + s.region_id);
        Day expect = 1;
        for (const auto& [day, v] : rows) {
            if (day != expect)
                throw ParseError("series.csv", line_by_day[k].at(day), "day",
                                 "inconsistent lengths: region " + s.region_id + " is missing day " + std::to_string(expect));
            s.cumulative_confirmed.push_back(v.first);
            s.actions.push_back(v.second);
            ++expect;
        }
        repair_cumulative(s.cumulative_confirmed, s.region_id);
        longest = std::max(longest, s.last_day());
    }
    data.horizon = options.horizon > 0 ? options.horizon : longest;
    validate_dataset(data);
    return data;
}

Dataset load_dataset(const std::filesystem::path& dir) { return load_dataset(dir, LoadOptions{}); }

Dataset load_dataset(const std::filesystem::path& dir, LoadOptions options) {
    apply_config_overrides(dir, options);
    return parse_dataset(read_file(dir / "regions.csv"), read_file(dir / "series.csv"), options);
}

namespace {

std::string format_double(double v) {
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, ptr);
}

}  // namespace

std::string regions_csv(const Dataset& data) {
    std::string out = "region_id,population,gdp_annual\n";
    for (const auto& r : data.regions)
        out += r.meta.region_id + "," + std::to_string(r.meta.population) + "," + format_double(r.meta.gdp_annual) + "\n";
    return out;
}

std::string series_csv(const Dataset& data) {
    std::string out = "region_id,day,cumulative_confirmed,action_level\n";
    for (const auto& r : data.regions) {
        const auto& s = r.series;
        for (Day d = 1; d <= s.last_day(); ++d)
            out += s.region_id + "," + std::to_string(d) + "," + std::to_string(s.confirmed_on(d)) + "," +
                   std::to_string(s.action_on(d)) + "\n";
    }
    return out;
}

void write_dataset(const Dataset& data, const std::filesystem::path& dir) {
    std::filesystem::create_directories(dir);
    std::ofstream(dir / "regions.csv", std::ios::binary) << regions_csv(data);
    std::ofstream(dir / "series.csv", std::ios::binary) << series_csv(data);
}

}  // namespace epiplan
