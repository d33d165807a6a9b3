#pragma once

#include <algorithm>
#include <charconv>
#include <cstdlib>
#include <cmath>
#include <cstdint>
#include <istream>
#include <map>
#include <numbers>
#include <optional>
#include <span>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "windfleet/error.hpp"
#include "windfleet/farm.hpp"

namespace windfleet {

using Timestamp = std::int64_t;

struct ScadaRecord {
    Timestamp timestamp = 0;
    TurbineId turbine;
    double power_kw = 0.0;
    double rotor_rpm = 0.0;
    double wind_ms = 0.0;
    double wind_dir_deg = 0.0;
};

/// Per-turbine operating point averaged over one window.
struct FeatureVector {
    TurbineId turbine;
    double power_mean = 0.0;
    double rotor_mean = 0.0;
    Timestamp window_start = 0;
    int window_len = 0;
};

struct WindVector {
    double speed = 0.0;
    double direction = 0.0;
    /// False when the directions cancel and no mean direction exists.
    bool direction_defined = true;
};

struct ScadaTable {
    std::vector<ScadaRecord> records;
    std::size_t dropped = 0;
};

inline constexpr std::string_view kScadaHeader = "timestamp,turbine,power_kw,rotor_rpm,wind_ms,wind_dir_deg";

namespace detail {

inline std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
    return s;
}

inline std::vector<std::string_view> split_csv(std::string_view line) {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    for (;;) {
        const auto comma = line.find(',', start);
        out.push_back(trim(line.substr(start, comma - start)));
        if (comma == std::string_view::npos) break;
        start = comma + 1;
    }
    return out;
}

inline std::optional<double> parse_double(std::string_view s) {
    if (s.empty()) return std::nullopt;
    std::string tmp(s);
    char* end = nullptr;
    const double v = std::strtod(tmp.c_str(), &end);
    if (end != tmp.c_str() + tmp.size() || !std::isfinite(v)) return std::nullopt;
    return v;
}

inline std::optional<std::int64_t> parse_int(std::string_view s) {
    std::int64_t v = 0;
    if (s.empty()) return std::nullopt;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || ptr != s.data() + s.size()) return std::nullopt;
    return v;
}

inline double deg2rad(double d) { return d * std::numbers::pi / 180.0; }
inline double rad2deg(double r) { return r * 180.0 / std::numbers::pi; }

inline double wrap_degrees(double d) {
    double w = std::fmod(d, 360.0);
    if (w < 0.0) w += 360.0;
    if (w >= 360.0) w = 0.0;
    return w;
}

/// Smallest absolute angle between two bearings, in degrees.
inline double angular_distance(double a, double b) {
    const double d = std::fabs(wrap_degrees(a) - wrap_degrees(b));
    return std::min(d, 360.0 - d);
}

}  // namespace detail

/// Reads SCADA CSV. Rows for turbines the layout marks missing are dropped
/// and counted; turbines outside the layout are a configuration error.
inline ScadaTable parse_scada(std::istream& in, const FarmLayout& layout) {
    ScadaTable table;
    std::string line;
    std::size_t line_no = 0;
    bool header_seen = false;
    while (std::getline(in, line)) {
        ++line_no;
        const auto text = detail::trim(line);
        if (text.empty()) continue;
        if (!header_seen) {
            if (text != kScadaHeader) throw ParseError(line_no, "expected header '" + std::string(kScadaHeader) + "'");
            header_seen = true;
            continue;
        }
        const auto fields = detail::split_csv(text);
        if (fields.size() != 6) throw ParseError(line_no, "expected 6 fields, got " + std::to_string(fields.size()));

        ScadaRecord rec;
        auto ts = detail::parse_int(fields[0]);
        if (!ts) throw ParseError(line_no, "bad timestamp '" + std::string(fields[0]) + "'");
        rec.timestamp = *ts;
        auto id = TurbineId::parse(fields[1]);
        if (!id) throw ParseError(line_no, "bad turbine id '" + std::string(fields[1]) + "'");
        rec.turbine = *id;

        double* targets[] = {&rec.power_kw, &rec.rotor_rpm, &rec.wind_ms, &rec.wind_dir_deg};
        for (std::size_t i = 0; i < 4; ++i) {
            auto v = detail::parse_double(fields[i + 2]);
            if (!v) throw ParseError(line_no, "bad numeric value '" + std::string(fields[i + 2]) + "'");
            *targets[i] = *v;
        }
        if (rec.rotor_rpm < 0.0) throw ParseError(line_no, "negative rotor speed");
        if (rec.wind_ms < 0.0) throw ParseError(line_no, "negative wind speed");
        if (rec.wind_dir_deg < 0.0 || rec.wind_dir_deg >= 360.0) throw ParseError(line_no, "wind direction outside [0, 360)");

        if (!layout.contains(rec.turbine)) throw ConfigError("unknown turbine " + rec.turbine.str() + " on line " + std::to_string(line_no));
        if (layout.missing.contains(rec.turbine)) {
            ++table.dropped;
            continue;
        }
        table.records.push_back(rec);
    }
    if (!header_seen) throw ParseError(line_no == 0 ? 1 : line_no, "empty input, no header");
    return table;
}

inline ScadaTable parse_scada(std::string_view text, const FarmLayout& layout) {
    std::istringstream in{std::string(text)};
    return parse_scada(in, layout);
}

/// Fraction of nominal samples a window needs to count as full.
inline constexpr double kFullWindowFraction = 0.9;

/// Averages each turbine's records over consecutive windows anchored at its
/// first timestamp. A window is emitted when the series extends to its last
/// second and it holds at least 90% of its nominal samples.
inline std::vector<FeatureVector> window_average(std::span<const ScadaRecord> records, int window_seconds = 120) {
    if (window_seconds <= 0) throw DomainError("window length must be positive");
    std::map<TurbineId, std::vector<const ScadaRecord*>> by_turbine;
    for (const auto& r : records) by_turbine[r.turbine].push_back(&r);

    std::vector<FeatureVector> out;
    const auto min_samples = static_cast<std::size_t>(std::ceil(kFullWindowFraction * window_seconds));
    for (auto& [turbine, rows] : by_turbine) {
        std::stable_sort(rows.begin(), rows.end(), [](auto* a, auto* b) { return a->timestamp < b->timestamp; });
        const Timestamp first = rows.front()->timestamp;
        const Timestamp last = rows.back()->timestamp;
        std::size_t i = 0;
        for (Timestamp start = first; start + window_seconds - 1 <= last; start += window_seconds) {
            const Timestamp end = start + window_seconds;
            double p = 0.0, w = 0.0;
            std::size_t n = 0;
            while (i < rows.size() && rows[i]->timestamp < end) {
                p += rows[i]->power_kw;
                w += rows[i]->rotor_rpm;
                ++n;
                ++i;
            }
            if (n < min_samples) continue;
            out.push_back({turbine, p / static_cast<double>(n), w / static_cast<double>(n), start, window_seconds});
        }
    }
    return out;
}

/// Mean speed and circular mean direction, every record weighted equally.
inline WindVector farm_wind_vector(std::span<const ScadaRecord> records) {
    if (records.empty()) throw DomainError("farm wind vector of empty record set");
    double speed = 0.0, sx = 0.0, sy = 0.0;
    for (const auto& r : records) {
        speed += r.wind_ms;
        const double a = detail::deg2rad(r.wind_dir_deg);
        sx += std::cos(a);
        sy += std::sin(a);
    }
    const double n = static_cast<double>(records.size());
    WindVector v;
    v.speed = speed / n;
    const double resultant = std::hypot(sx, sy) / n;
    if (resultant < 1e-6) {
        v.direction_defined = false;
        v.direction = 0.0;
    } else {
        v.direction = detail::wrap_degrees(detail::rad2deg(std::atan2(sy, sx)));
    }
    return v;
}

struct SteadyStateOptions {
    /// Start of the analysis window; defaults to the last full window in the data.
    std::optional<Timestamp> window_start;
    int pre_window_s = 600;
    int window_s = 120;
    /// Relative deviation allowed from the mean speed.
    double speed_tol = 0.10;
    /// Degrees allowed from the mean direction.
    double dir_tol = 2.0;
};

struct SteadyStateResult {
    bool steady = false;
    WindVector mean;
    WindVector min;
    WindVector max;
    std::size_t seconds = 0;
};

/// Checks that the per-second farm wind vector stays near its mean over the
/// pre-window plus the analysis window. Extremes are ordered by speed.
inline SteadyStateResult check_steady_state(std::span<const ScadaRecord> records, const SteadyStateOptions& opt = {}) {
    if (opt.pre_window_s < 0 || opt.window_s <= 0) throw DomainError("invalid steady-state window lengths");
    if (records.empty()) throw DomainError("insufficient data for steady-state check");
    Timestamp last = records.front().timestamp;
    for (const auto& r : records) last = std::max(last, r.timestamp);
    const Timestamp start = opt.window_start.value_or(last - opt.window_s + 1);
    const Timestamp from = start - opt.pre_window_s;
    const Timestamp to = start + opt.window_s;

    std::map<Timestamp, std::vector<ScadaRecord>> per_second;
    for (const auto& r : records)
        if (r.timestamp >= from && r.timestamp < to) per_second[r.timestamp].push_back(r);

    const auto span_len = static_cast<std::size_t>(to - from);
    const auto needed = static_cast<std::size_t>(std::ceil(kFullWindowFraction * static_cast<double>(span_len)));
    if (per_second.size() < needed) throw DomainError("insufficient data for steady-state check");

    std::vector<WindVector> seconds;
    seconds.reserve(per_second.size());
    std::vector<ScadaRecord> pooled;
    for (const auto& [t, recs] : per_second) {
        seconds.push_back(farm_wind_vector(recs));
        pooled.insert(pooled.end(), recs.begin(), recs.end());
    }

    // Mean of the per-second vectors, so every second carries equal weight.
    double speed = 0.0, sx = 0.0, sy = 0.0;
    for (const auto& v : seconds) {
        speed += v.speed;
        sx += std::cos(detail::deg2rad(v.direction));
        sy += std::sin(detail::deg2rad(v.direction));
    }
    SteadyStateResult res;
    res.seconds = seconds.size();
    res.mean.speed = speed / static_cast<double>(seconds.size());
    res.mean.direction = detail::wrap_degrees(detail::rad2deg(std::atan2(sy, sx)));
    res.mean.direction_defined = std::hypot(sx, sy) / static_cast<double>(seconds.size()) >= 1e-6;

    res.min = res.max = seconds.front();
    bool steady = res.mean.direction_defined;
    for (const auto& v : seconds) {
        if (v.speed < res.min.speed) res.min = v;
        if (v.speed > res.max.speed) res.max = v;
        if (std::fabs(v.speed - res.mean.speed) > opt.speed_tol * res.mean.speed) steady = false;
        if (!v.direction_defined || detail::angular_distance(v.direction, res.mean.direction) > opt.dir_tol) steady = false;
    }
    res.steady = steady;
    return res;
}

/// Fixed physical range used to map a quantity onto [0, 1].
struct Bounds {
    double min = 0.0;
    double max = 1.0;

    void validate() const {
        if (!(min < max)) throw ConfigError("normalization bounds need min < max");
    }
};

inline double normalize(double v, const Bounds& b) {
    b.validate();
    return std::clamp((v - b.min) / (b.max - b.min), 0.0, 1.0);
}

inline std::vector<double> normalize(std::span<const double> values, const Bounds& b) {
    b.validate();
    std::vector<double> out;
    out.reserve(values.size());
    for (double v : values) out.push_back(normalize(v, b));
    return out;
}

}  // namespace windfleet
