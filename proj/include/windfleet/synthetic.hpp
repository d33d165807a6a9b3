#pragma once

// Planted-zone SCADA generator. Each zone has a Gaussian operating point;
// turbines get a fixed offset around it and 1 Hz noise on top.

#include <cstdint>
#include <map>
#include <random>
#include <string>
#include <vector>

#include "windfleet/error.hpp"
#include "windfleet/farm.hpp"
#include "windfleet/farmsim.hpp"
#include "windfleet/scada.hpp"

namespace windfleet {

struct PlantedZone {
    std::vector<int> rows;
    double power_kw = 1000.0;
    double rotor_rpm = 12.0;
    /// Turbine-to-turbine spread of the operating point.
    double power_spread_kw = 30.0;
    double rotor_spread_rpm = 0.15;
};

struct SyntheticScadaSpec {
    std::vector<PlantedZone> zones;
    Timestamp start = 0;
    int duration_s = 720;
    double power_noise_kw = 80.0;
    double rotor_noise_rpm = 0.4;
    double wind_speed = 8.2;
    double wind_direction = 235.4;
    double wind_speed_noise = 0.3;
    double wind_direction_noise = 1.0;
    std::uint64_t seed = 0;

    /// Four zones stacked upstream to downstream, rows 1-2, 3-5, 6-8, 9-11.
    static SyntheticScadaSpec four_zone() {
        SyntheticScadaSpec s;
        s.zones = {
            {{1, 2}, 1800.0, 14.5, 30.0, 0.15},
            {{3, 4, 5}, 1300.0, 13.0, 30.0, 0.15},
            {{6, 7, 8}, 900.0, 11.5, 30.0, 0.15},
            {{9, 10, 11}, 600.0, 10.0, 30.0, 0.15},
        };
        return s;
    }
};

struct SyntheticScada {
    std::vector<ScadaRecord> records;
    /// Planted zone of every active turbine.
    std::map<TurbineId, int> truth;
};

namespace stream {
inline constexpr std::uint32_t kScadaOffset = 0x5cada001;
inline constexpr std::uint32_t kScadaNoise = 0x5cada002;
}  // namespace stream

inline SyntheticScada generate_scada(const FarmLayout& layout, const SyntheticScadaSpec& spec) {
    layout.validate();
    if (spec.duration_s < 0) throw ConfigError("synthetic duration must be non-negative");
    std::map<int, int> zone_of_row;
    for (std::size_t z = 0; z < spec.zones.size(); ++z)
        for (int r : spec.zones[z].rows) {
            if (r < 1 || r > layout.rows) throw ConfigError("planted zone row " + std::to_string(r) + " outside layout");
            if (!zone_of_row.emplace(r, static_cast<int>(z)).second)
                throw ConfigError("row " + std::to_string(r) + " planted in two zones");
        }

    SyntheticScada out;
    std::vector<std::pair<TurbineId, std::mt19937_64>> noise;
    std::vector<std::pair<double, double>> centre;
    for (const auto& id : layout.active_turbines()) {
        const auto z = zone_of_row.find(id.row);
        if (z == zone_of_row.end()) continue;
        const auto& zone = spec.zones[static_cast<std::size_t>(z->second)];
        auto rng = make_rng(spec.seed, {stream::kScadaOffset, static_cast<std::uint32_t>(id.row), static_cast<std::uint32_t>(id.column)});
        std::normal_distribution<double> std_normal;
        const double p = zone.power_kw + zone.power_spread_kw * std_normal(rng);
        const double w = zone.rotor_rpm + zone.rotor_spread_rpm * std_normal(rng);
        out.truth[id] = z->second;
        centre.emplace_back(p, w);
        noise.emplace_back(id, make_rng(spec.seed, {stream::kScadaNoise, static_cast<std::uint32_t>(id.row), static_cast<std::uint32_t>(id.column)}));
    }

    out.records.reserve(noise.size() * static_cast<std::size_t>(spec.duration_s));
    std::normal_distribution<double> std_normal;
    for (int t = 0; t < spec.duration_s; ++t)
        for (std::size_t i = 0; i < noise.size(); ++i) {
            auto& rng = noise[i].second;
            ScadaRecord r;
            r.timestamp = spec.start + t;
            r.turbine = noise[i].first;
            r.power_kw = std::max(0.0, centre[i].first + spec.power_noise_kw * std_normal(rng));
            r.rotor_rpm = std::max(0.0, centre[i].second + spec.rotor_noise_rpm * std_normal(rng));
            r.wind_ms = std::max(0.0, spec.wind_speed + spec.wind_speed_noise * std_normal(rng));
            r.wind_dir_deg = detail::wrap_degrees(spec.wind_direction + spec.wind_direction_noise * std_normal(rng));
            out.records.push_back(r);
        }
    return out;
}

}  // namespace windfleet
