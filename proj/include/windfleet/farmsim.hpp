#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <initializer_list>
#include <limits>
#include <map>
#include <optional>
#include <random>
#include <vector>

#include "windfleet/detection.hpp"
#include "windfleet/error.hpp"
#include "windfleet/farm.hpp"

namespace windfleet {

/// Independent generator for one (seed, tags...) stream.
inline std::mt19937_64 make_rng(std::uint64_t seed, std::initializer_list<std::uint32_t> tags = {}) {
    std::vector<std::uint32_t> words{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)};
    words.insert(words.end(), tags.begin(), tags.end());
    std::seed_seq seq(words.begin(), words.end());
    return std::mt19937_64(seq);
}

namespace stream {
inline constexpr std::uint32_t kRowJitter = 0x6a177e01;
inline constexpr std::uint32_t kGust = 0x6a177e02;
}  // namespace stream

/// Planar storm front sweeping the farm west to east.
struct StormScenario {
    /// Bearing the storm comes from, degrees.
    double direction = 265.4;
    double front_speed = 5.0;
    /// Linear-trend arrival time at row 1, seconds from the start of the log.
    double onset = 900.0;
    double alarm_threshold = 25.0;
    double row_jitter_std = 10.0;
    double gust_noise_std = 1.0;
    int horizon = 3600;
    /// How much earlier the beacon rows (1 and 2) see the storm.
    double beacon_lead = 300.0;
    /// Wind level before and after the front passes.
    double base_speed = 12.0;
    double storm_speed = 30.0;

    void validate() const {
        if (!(front_speed > 0.0)) throw ConfigError("storm front speed must be positive");
        if (horizon < 0) throw ConfigError("storm horizon must be non-negative");
        if (!(alarm_threshold > 0.0)) throw ConfigError("alarm threshold must be positive");
        if (row_jitter_std < 0.0 || gust_noise_std < 0.0) throw ConfigError("noise levels must be non-negative");
    }
};

/// Arrival time of the storm front at `row`, in seconds from the log start.
inline double storm_arrival(const StormScenario& s, const FarmLayout& layout, int row, std::uint64_t seed) {
    if (row < 1 || row > layout.rows) throw DomainError("row " + std::to_string(row) + " outside layout");
    double t = s.onset + (row - 1) * layout.spacing_m / s.front_speed;
    if (row <= 2) t -= s.beacon_lead;
    if (s.row_jitter_std > 0.0) {
        auto rng = make_rng(seed, {stream::kRowJitter, static_cast<std::uint32_t>(row)});
        t += std::normal_distribution<double>(0.0, s.row_jitter_std)(rng);
    }
    return t;
}

enum class ShutdownKind { planned, emergency };

struct Shutdown {
    std::int64_t timestamp = 0;
    TurbineId turbine;
    ShutdownKind kind = ShutdownKind::emergency;
};

struct EventLog {
    std::vector<Alarm> alarms;
    std::vector<Shutdown> shutdowns;
};

/// Row shutdown plan relative to storm detection: row `first_row + j` stops
/// at T_detect + delays[0] + ... + delays[j].
struct RowSchedule {
    int first_row = 3;
    std::vector<double> delays;
    DetectionRule rule;

    std::vector<double> cumulative() const {
        std::vector<double> out;
        double acc = 0.0;
        for (double d : delays) out.push_back(acc += std::max(0.0, d));
        return out;
    }
};

struct SimulationOptions {
    bool record_traces = true;
};

struct SimulationResult {
    EventLog log;
    std::vector<double> row_arrivals;  // index row - 1
    std::optional<std::int64_t> detection;
    /// 1 Hz wind speed per active turbine, in layout order.
    std::map<TurbineId, std::vector<double>> traces;
};

inline SimulationResult simulate(const FarmLayout& layout, const StormScenario& scenario,
                                 const std::optional<RowSchedule>& schedule, std::uint64_t seed,
                                 const SimulationOptions& opt = {}) {
    layout.validate();
    scenario.validate();
    SimulationResult res;
    for (int r = 1; r <= layout.rows; ++r) res.row_arrivals.push_back(storm_arrival(scenario, layout, r, seed));

    const std::int64_t horizon = scenario.horizon;
    std::map<TurbineId, std::int64_t> first_alarm;
    for (const auto& id : layout.active_turbines()) {
        const double arrival = res.row_arrivals[static_cast<std::size_t>(id.row - 1)];
        auto rng = make_rng(seed, {stream::kGust, static_cast<std::uint32_t>(id.row), static_cast<std::uint32_t>(id.column)});
        std::normal_distribution<double> gust(0.0, scenario.gust_noise_std > 0.0 ? scenario.gust_noise_std : 1.0);
        std::vector<double>* trace = nullptr;
        if (opt.record_traces) {
            trace = &res.traces[id];
            trace->reserve(static_cast<std::size_t>(horizon));
        }
        for (std::int64_t t = 0; t < horizon; ++t) {
            double wind = static_cast<double>(t) >= arrival ? scenario.storm_speed : scenario.base_speed;
            if (scenario.gust_noise_std > 0.0) wind += gust(rng);
            wind = std::max(0.0, wind);
            if (trace) trace->push_back(wind);
            if (wind > scenario.alarm_threshold && !first_alarm.contains(id)) {
                first_alarm[id] = t;
                if (!trace) break;
            }
        }
    }
    for (const auto& [id, t] : first_alarm) res.log.alarms.push_back({t, id});
    std::sort(res.log.alarms.begin(), res.log.alarms.end());

    std::map<int, double> shutdown_at;  // row -> absolute shutdown time
    if (schedule) {
        res.detection = detect_event(res.log.alarms, schedule->rule);
        if (res.detection) {
            const auto cum = schedule->cumulative();
            for (std::size_t j = 0; j < cum.size(); ++j)
                shutdown_at[schedule->first_row + static_cast<int>(j)] = static_cast<double>(*res.detection) + cum[j];
        }
    }

    for (const auto& id : layout.active_turbines()) {
        const auto alarm = first_alarm.find(id);
        const auto planned = shutdown_at.find(id.row);
        if (planned != shutdown_at.end()) {
            // Active through second floor(shutdown); the storm catches the
            // turbine only if it alarms while still active.
            if (alarm != first_alarm.end() && static_cast<double>(alarm->second) <= planned->second) {
                res.log.shutdowns.push_back({alarm->second, id, ShutdownKind::emergency});
            } else {
                const auto t = static_cast<std::int64_t>(std::floor(planned->second));
                if (t < horizon) res.log.shutdowns.push_back({t, id, ShutdownKind::planned});
            }
        } else if (alarm != first_alarm.end()) {
            res.log.shutdowns.push_back({alarm->second, id, ShutdownKind::emergency});
        }
    }
    std::stable_sort(res.log.shutdowns.begin(), res.log.shutdowns.end(), [](const Shutdown& a, const Shutdown& b) {
        return a.timestamp != b.timestamp ? a.timestamp < b.timestamp : a.turbine < b.turbine;
    });
    return res;
}

/// Emergency stops per row, index row - 1.
inline std::vector<int> count_emergency_stops(const EventLog& log, const FarmLayout& layout) {
    std::vector<int> counts(static_cast<std::size_t>(layout.rows), 0);
    for (const auto& s : log.shutdowns)
        if (s.kind == ShutdownKind::emergency && s.turbine.row >= 1 && s.turbine.row <= layout.rows)
            ++counts[static_cast<std::size_t>(s.turbine.row - 1)];
    return counts;
}

/// First alarm time of every turbine placed on the farm grid.
inline Grid<double> alarm_timestamp_grid(const EventLog& log, const FarmLayout& layout) {
    Grid<double> grid(layout.rows, layout.columns);
    for (const auto& a : log.alarms) {
        if (!layout.is_active(a.turbine)) continue;
        auto& cell = grid.at(a.turbine);
        if (!cell || static_cast<double>(a.timestamp) < *cell) cell = static_cast<double>(a.timestamp);
    }
    return grid;
}

}  // namespace windfleet
