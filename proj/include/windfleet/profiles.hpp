#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <random>
#include <set>
#include <span>
#include <string>
#include <tuple>
#include <vector>

#include "windfleet/error.hpp"
#include "windfleet/farm.hpp"
#include "windfleet/normality.hpp"
#include "windfleet/scada.hpp"

namespace windfleet {

enum class HistogramKind { duration, revolution };

inline const char* to_string(HistogramKind k) { return k == HistogramKind::duration ? "duration" : "revolution"; }

/// Counts over uniform bins of normalized power. Duration histograms count
/// seconds, revolution histograms count rotor revolutions.
struct LoadHistogram {
    HistogramKind kind = HistogramKind::duration;
    std::vector<double> bin_edges;
    std::vector<double> counts;

    std::size_t bins() const { return counts.size(); }

    double total() const {
        double s = 0.0;
        for (double c : counts) s += c;
        return s;
    }

    static LoadHistogram empty(HistogramKind kind, int bin_count) {
        if (bin_count < 1) throw DomainError("bin count must be at least 1");
        LoadHistogram h;
        h.kind = kind;
        h.counts.assign(static_cast<std::size_t>(bin_count), 0.0);
        for (int i = 0; i <= bin_count; ++i) h.bin_edges.push_back(static_cast<double>(i) / bin_count);
        return h;
    }

    /// Bin of a normalized value; 1.0 falls in the last bin.
    std::size_t bin_of(double v) const {
        if (!(v >= 0.0 && v <= 1.0)) throw DomainError("value outside [0, 1]; normalize first");
        const auto b = static_cast<std::size_t>(std::floor(v * static_cast<double>(bins())));
        return std::min(b, bins() - 1);
    }

    LoadHistogram& operator+=(const LoadHistogram& other) {
        if (other.kind != kind || other.bins() != bins()) throw DomainError("histograms differ in kind or binning");
        for (std::size_t i = 0; i < counts.size(); ++i) counts[i] += other.counts[i];
        return *this;
    }

    friend LoadHistogram operator+(LoadHistogram a, const LoadHistogram& b) { return a += b; }
};

inline LoadHistogram compute_ldd(std::span<const double> power, int bin_count) {
    auto h = LoadHistogram::empty(HistogramKind::duration, bin_count);
    for (double v : power) h.counts[h.bin_of(v)] += 1.0;
    return h;
}

/// Each second adds rpm / 60 revolutions to the bin of its power value.
inline LoadHistogram compute_lrd(std::span<const double> power, std::span<const double> rotor_rpm, int bin_count) {
    if (power.size() != rotor_rpm.size()) throw DomainError("power and rotor series differ in length");
    auto h = LoadHistogram::empty(HistogramKind::revolution, bin_count);
    for (std::size_t i = 0; i < power.size(); ++i) h.counts[h.bin_of(power[i])] += rotor_rpm[i] / 60.0;
    return h;
}

namespace detail {

inline std::vector<double> probabilities(const LoadHistogram& h) {
    const double total = h.total();
    if (!(total > 0.0)) throw DomainError("histogram has no mass");
    std::vector<double> p(h.counts.size());
    for (std::size_t i = 0; i < p.size(); ++i) p[i] = h.counts[i] / total;
    return p;
}

inline void check_comparable(const LoadHistogram& a, const LoadHistogram& b) {
    if (a.kind != b.kind || a.bins() != b.bins()) throw DomainError("histograms differ in kind or binning");
}

}  // namespace detail

/// Hellinger distance between the mass-normalized histograms, in [0, 1].
inline double hellinger(const LoadHistogram& a, const LoadHistogram& b) {
    detail::check_comparable(a, b);
    const auto p = detail::probabilities(a);
    const auto q = detail::probabilities(b);
    double bc = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) bc += std::sqrt(p[i] * q[i]);
    return std::sqrt(std::max(0.0, 1.0 - bc));
}

/// Shared mass of the normalized histograms, sum of min(p_i, q_i).
inline double overlap_coefficient(const LoadHistogram& a, const LoadHistogram& b) {
    detail::check_comparable(a, b);
    const auto p = detail::probabilities(a);
    const auto q = detail::probabilities(b);
    double s = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) s += std::min(p[i], q[i]);
    return s;
}

struct LoadProfile {
    int zone = 0;
    LoadHistogram ldd;
    LoadHistogram lrd;
    double power_mean = 0.0;  // normalized
    double power_std = 0.0;
    double rotor_mean = 0.0;  // rpm
    double rotor_std = 0.0;
    WindVector wind_context;
    Timestamp window_start = 0;
    int window_len = 0;
    std::size_t samples = 0;
    std::vector<TurbineId> turbines;
};

struct ProfileOptions {
    int bin_count = 50;
    Bounds power_bounds{0.0, 3000.0};
};

struct ProfileSet {
    std::vector<LoadProfile> profiles;
    std::vector<std::string> warnings;
};

namespace detail {

inline std::pair<double, double> mean_std(std::span<const double> v) {
    if (v.empty()) return {0.0, 0.0};
    double m = 0.0;
    for (double x : v) m += x;
    m /= static_cast<double>(v.size());
    if (v.size() < 2) return {m, 0.0};
    double ss = 0.0;
    for (double x : v) ss += (x - m) * (x - m);
    return {m, std::sqrt(ss / static_cast<double>(v.size() - 1))};
}

}  // namespace detail

/// Builds one profile per zone from 1-second records; histograms pool every
/// turbine of the zone. `zones` lists the zones to report; a listed zone
/// without samples is omitted with a warning.
inline ProfileSet build_profiles(std::span<const ScadaRecord> records, const std::map<TurbineId, int>& labels,
                                 std::span<const int> zones, const ProfileOptions& opt, const WindVector& wind_context) {
    opt.power_bounds.validate();
    struct Pool {
        std::vector<double> power, rotor;
        std::set<TurbineId> turbines;
        Timestamp first = 0, last = 0;
    };
    std::map<int, Pool> pools;
    for (const auto& r : records) {
        const auto it = labels.find(r.turbine);
        if (it == labels.end()) throw ConfigError("no zone assignment for turbine " + r.turbine.str());
        auto& pool = pools[it->second];
        if (pool.power.empty()) pool.first = pool.last = r.timestamp;
        pool.first = std::min(pool.first, r.timestamp);
        pool.last = std::max(pool.last, r.timestamp);
        pool.power.push_back(normalize(r.power_kw, opt.power_bounds));
        pool.rotor.push_back(r.rotor_rpm);
        pool.turbines.insert(r.turbine);
    }

    ProfileSet out;
    for (int zone : zones) {
        const auto it = pools.find(zone);
        if (it == pools.end() || it->second.power.empty()) {
            out.warnings.push_back("zone " + std::to_string(zone) + " has no samples, profile omitted");
            continue;
        }
        const auto& pool = it->second;
        LoadProfile p;
        p.zone = zone;
        p.ldd = compute_ldd(pool.power, opt.bin_count);
        p.lrd = compute_lrd(pool.power, pool.rotor, opt.bin_count);
        std::tie(p.power_mean, p.power_std) = detail::mean_std(pool.power);
        std::tie(p.rotor_mean, p.rotor_std) = detail::mean_std(pool.rotor);
        p.wind_context = wind_context;
        p.window_start = pool.first;
        p.window_len = static_cast<int>(pool.last - pool.first + 1);
        p.samples = pool.power.size();
        p.turbines.assign(pool.turbines.begin(), pool.turbines.end());
        out.profiles.push_back(std::move(p));
    }
    return out;
}

/// Hellinger distance of an observed histogram from the baseline profile's
/// histogram of the same kind.
inline double profile_discrepancy(const LoadProfile& baseline, const LoadHistogram& observed) {
    if (observed.total() <= 0.0) throw DomainError("observed histogram has no mass");
    return hellinger(observed.kind == HistogramKind::duration ? baseline.ldd : baseline.lrd, observed);
}

struct ZoneNormality {
    int zone = 0;
    std::size_t samples = 0;
    ShapiroWilkResult power;
    ShapiroWilkResult rotor;
    bool power_pass = false;
    bool rotor_pass = false;
};

inline constexpr std::size_t kShapiroWilkMaxN = 5000;

/// Deterministic subsample of at most `limit` values: a uniform stride with a
/// seed-chosen offset.
inline std::vector<double> stride_subsample(std::span<const double> v, std::size_t limit, std::uint64_t seed) {
    if (v.size() <= limit) return {v.begin(), v.end()};
    const double stride = static_cast<double>(v.size()) / static_cast<double>(limit);
    auto rng = std::mt19937_64(seed);
    const double offset = std::uniform_real_distribution<double>(0.0, stride)(rng);
    std::vector<double> out;
    out.reserve(limit);
    for (std::size_t i = 0; i < limit; ++i) {
        const auto idx = std::min(v.size() - 1, static_cast<std::size_t>(offset + static_cast<double>(i) * stride));
        out.push_back(v[idx]);
    }
    return out;
}

/// Shapiro-Wilk on each zone's pooled power (normalized) and rotor speed.
/// A parameter passes when p > level.
inline std::vector<ZoneNormality> normality_report(std::span<const ScadaRecord> records, const std::map<TurbineId, int>& labels,
                                                   const Bounds& power_bounds, std::uint64_t seed = 0, double level = 0.05) {
    std::map<int, std::pair<std::vector<double>, std::vector<double>>> pools;
    for (const auto& r : records) {
        const auto it = labels.find(r.turbine);
        if (it == labels.end()) throw ConfigError("no zone assignment for turbine " + r.turbine.str());
        pools[it->second].first.push_back(normalize(r.power_kw, power_bounds));
        pools[it->second].second.push_back(r.rotor_rpm);
    }
    std::vector<ZoneNormality> out;
    for (const auto& [zone, pool] : pools) {
        ZoneNormality z;
        z.zone = zone;
        z.samples = pool.first.size();
        z.power = shapiro_wilk(stride_subsample(pool.first, kShapiroWilkMaxN, seed));
        z.rotor = shapiro_wilk(stride_subsample(pool.second, kShapiroWilkMaxN, seed));
        z.power_pass = z.power.normal_at(level);
        z.rotor_pass = z.rotor.normal_at(level);
        out.push_back(z);
    }
    return out;
}

}  // namespace windfleet
