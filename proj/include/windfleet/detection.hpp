#pragma once

#include <cstdint>
#include <optional>
#include <set>
#include <span>

#include "windfleet/error.hpp"
#include "windfleet/farm.hpp"

namespace windfleet {

struct Alarm {
    std::int64_t timestamp = 0;
    TurbineId turbine;

    auto operator<=>(const Alarm&) const = default;
};

/// Storm onset is declared once `alarm_quorum` distinct turbines in the
/// beacon rows have raised a high-wind alarm.
struct DetectionRule {
    std::set<int> beacon_rows{1, 2};
    int alarm_quorum = 3;

    void validate() const {
        if (alarm_quorum < 1) throw ConfigError("alarm quorum must be at least 1");
        if (beacon_rows.empty()) throw ConfigError("detection needs at least one beacon row");
    }
};

/// Time of the alarm that brings the count of distinct beacon turbines to the
/// quorum. Alarms are expected in time order.
inline std::optional<std::int64_t> detect_event(std::span<const Alarm> alarms, const DetectionRule& rule = {}) {
    rule.validate();
    std::set<TurbineId> seen;
    for (const auto& a : alarms) {
        if (!rule.beacon_rows.contains(a.turbine.row)) continue;
        if (!seen.insert(a.turbine).second) continue;
        if (static_cast<int>(seen.size()) >= rule.alarm_quorum) return a.timestamp;
    }
    return std::nullopt;
}

}  // namespace windfleet
