#pragma once

#include <charconv>
#include <cstdint>
#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "json.hpp"

#include "windfleet/controller.hpp"
#include "windfleet/dpgmm.hpp"
#include "windfleet/error.hpp"
#include "windfleet/farm.hpp"
#include "windfleet/farmsim.hpp"
#include "windfleet/profiles.hpp"
#include "windfleet/scada.hpp"

namespace windfleet {

using json = nlohmann::ordered_json;

namespace detail {

/// Shortest decimal text that reads back to the same double.
inline std::string fmt(double v) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

/// Fixed-point text, for bulky CSVs where full precision is noise.
inline std::string fmt_fixed(double v, int decimals) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::fixed, decimals);
    return std::string(buf, res.ptr);
}

inline double get_number(const json& j, const char* key) {
    if (!j.contains(key) || !j.at(key).is_number()) throw ConfigError(std::string("missing numeric field '") + key + "'");
    return j.at(key).get<double>();
}

}  // namespace detail

// ---- mixture model ----

inline json to_json(const MixtureModel& m) {
    json comps = json::array();
    for (std::size_t k = 0; k < m.components.size(); ++k) {
        const auto& c = m.components[k];
        json mean = json::array(), cov = json::array();
        for (Eigen::Index i = 0; i < c.mean.size(); ++i) mean.push_back(c.mean(i));
        for (Eigen::Index i = 0; i < c.covariance.rows(); ++i)
            for (Eigen::Index j = 0; j < c.covariance.cols(); ++j) cov.push_back(c.covariance(i, j));
        comps.push_back({{"weight", c.weight}, {"effective", m.is_effective(k)}, {"mean", mean}, {"covariance", cov}});
    }
    return {
        {"truncation", m.truncation},
        {"concentration", m.concentration},
        {"seed", m.seed},
        {"dimension", m.dimension()},
        {"n_points", m.n_points},
        {"effective_threshold", m.effective_threshold()},
        {"effective_components", m.effective_count()},
        {"components", comps},
        {"diagnostics",
         {{"converged", m.converged}, {"iterations", m.iterations_run}, {"elbo", m.elbo}, {"final_elbo_delta", m.final_elbo_delta}}},
    };
}

inline MixtureModel mixture_from_json(const json& j) {
    try {
        MixtureModel m;
        m.truncation = j.at("truncation").get<int>();
        m.concentration = j.at("concentration").get<double>();
        m.seed = j.at("seed").get<std::uint64_t>();
        m.n_points = j.at("n_points").get<std::size_t>();
        const auto d = j.at("dimension").get<Eigen::Index>();
        for (const auto& jc : j.at("components")) {
            GaussianComponent c;
            c.weight = jc.at("weight").get<double>();
            const auto& mean = jc.at("mean");
            const auto& cov = jc.at("covariance");
            if (static_cast<Eigen::Index>(mean.size()) != d || static_cast<Eigen::Index>(cov.size()) != d * d)
                throw ConfigError("component dimension does not match model dimension");
            c.mean.resize(d);
            c.covariance.resize(d, d);
            for (Eigen::Index i = 0; i < d; ++i) c.mean(i) = mean.at(static_cast<std::size_t>(i)).get<double>();
            for (Eigen::Index i = 0; i < d; ++i)
                for (Eigen::Index k = 0; k < d; ++k) c.covariance(i, k) = cov.at(static_cast<std::size_t>(i * d + k)).get<double>();
            m.components.push_back(std::move(c));
        }
        const auto& diag = j.at("diagnostics");
        m.converged = diag.at("converged").get<bool>();
        m.iterations_run = diag.at("iterations").get<int>();
        m.elbo = diag.at("elbo").get<double>();
        m.final_elbo_delta = diag.at("final_elbo_delta").get<double>();
        return m;
    } catch (const json::exception& e) {
        throw ConfigError(std::string("malformed mixture model: ") + e.what());
    }
}

// ---- policy ----

struct PolicyMetadata {
    std::uint64_t seed = 0;
    int iterations = 0;
    double penalty = 10.0;
    double final_mean_return = 0.0;
    bool converged = false;
};

inline json to_json(const ShutdownPolicy& p, const PolicyMetadata& meta) {
    json rows = json::array();
    const auto cum = p.cumulative_theta();
    for (std::size_t j = 0; j < p.theta.size(); ++j)
        rows.push_back({{"row", p.first_row + static_cast<int>(j)}, {"theta", p.theta[j]}, {"cumulative", cum[j]}});
    return {
        {"first_row", p.first_row},
        {"theta", p.theta},
        {"rows", rows},
        {"sigma0", p.sigma0},
        {"decay", p.decay},
        {"training",
         {{"seed", meta.seed},
          {"iterations", meta.iterations},
          {"penalty", meta.penalty},
          {"final_mean_return", meta.final_mean_return},
          {"converged", meta.converged}}},
    };
}

inline ShutdownPolicy policy_from_json(const json& j) {
    try {
        ShutdownPolicy p;
        p.first_row = j.at("first_row").get<int>();
        p.theta = j.at("theta").get<std::vector<double>>();
        p.sigma0 = j.at("sigma0").get<double>();
        p.decay = j.at("decay").get<double>();
        for (double t : p.theta)
            if (!std::isfinite(t)) throw ConfigError("policy theta is not finite");
        p.validate();
        return p;
    } catch (const json::exception& e) {
        throw ConfigError(std::string("malformed policy: ") + e.what());
    }
}

inline PolicyMetadata policy_metadata_from_json(const json& j) {
    PolicyMetadata m;
    if (!j.contains("training")) return m;
    const auto& t = j.at("training");
    m.seed = t.value("seed", std::uint64_t{0});
    m.iterations = t.value("iterations", 0);
    m.penalty = t.value("penalty", 10.0);
    m.final_mean_return = t.value("final_mean_return", 0.0);
    m.converged = t.value("converged", false);
    return m;
}

inline void write_learning_curve_csv(std::ostream& out, const std::vector<IterationRecord>& curve) {
    out << "iteration,return,sigma_i\n";
    for (const auto& r : curve) out << r.iteration << ',' << detail::fmt(r.ret) << ',' << detail::fmt(r.sigma) << '\n';
}

// ---- SCADA ----

inline void write_scada_csv(std::ostream& out, const std::vector<ScadaRecord>& records) {
    out << kScadaHeader << '\n';
    for (const auto& r : records)
        out << r.timestamp << ',' << r.turbine.str() << ',' << detail::fmt_fixed(r.power_kw, 1) << ','
            << detail::fmt_fixed(r.rotor_rpm, 3) << ',' << detail::fmt_fixed(r.wind_ms, 2) << ','
            << detail::fmt_fixed(r.wind_dir_deg, 1) << '\n';
}

// ---- event log ----

inline const char* event_name(ShutdownKind k) { return k == ShutdownKind::planned ? "SHUTDOWN_PLANNED" : "SHUTDOWN_EMERGENCY"; }

inline constexpr const char* kAlarmEvent = "ALARM_HIGH_WIND";

/// One line per event, ordered by time, then turbine; an alarm precedes a
/// shutdown of the same turbine in the same second.
inline void write_event_log_csv(std::ostream& out, const EventLog& log) {
    struct Line {
        std::int64_t t;
        TurbineId id;
        int order;
        const char* name;
    };
    std::vector<Line> lines;
    for (const auto& a : log.alarms) lines.push_back({a.timestamp, a.turbine, 0, kAlarmEvent});
    for (const auto& s : log.shutdowns) lines.push_back({s.timestamp, s.turbine, 1, event_name(s.kind)});
    std::stable_sort(lines.begin(), lines.end(), [](const Line& a, const Line& b) {
        if (a.t != b.t) return a.t < b.t;
        if (a.id != b.id) return a.id < b.id;
        return a.order < b.order;
    });
    out << "timestamp,turbine,event\n";
    for (const auto& l : lines) out << l.t << ',' << l.id.str() << ',' << l.name << '\n';
}

inline EventLog read_event_log_csv(std::istream& in) {
    EventLog log;
    std::string line;
    std::size_t line_no = 0;
    bool header = false;
    while (std::getline(in, line)) {
        ++line_no;
        const auto text = detail::trim(line);
        if (text.empty()) continue;
        if (!header) {
            if (text != "timestamp,turbine,event") throw ParseError(line_no, "expected header timestamp,turbine,event");
            header = true;
            continue;
        }
        const auto f = detail::split_csv(text);
        if (f.size() != 3) throw ParseError(line_no, "expected 3 fields");
        const auto t = detail::parse_int(f[0]);
        const auto id = TurbineId::parse(f[1]);
        if (!t || !id) throw ParseError(line_no, "bad timestamp or turbine");
        const auto ev = detail::trim(f[2]);
        if (ev == kAlarmEvent)
            log.alarms.push_back({*t, *id});
        else if (ev == "SHUTDOWN_PLANNED")
            log.shutdowns.push_back({*t, *id, ShutdownKind::planned});
        else if (ev == "SHUTDOWN_EMERGENCY")
            log.shutdowns.push_back({*t, *id, ShutdownKind::emergency});
        else
            throw ParseError(line_no, "unknown event '" + std::string(ev) + "'");
    }
    if (!header) throw ParseError(line_no, "event log is empty");
    return log;
}

/// Wide table: one column per turbine, one row per second.
inline void write_traces_csv(std::ostream& out, const std::map<TurbineId, std::vector<double>>& traces) {
    out << "t";
    std::size_t len = 0;
    for (const auto& [id, v] : traces) {
        out << ',' << id.str();
        len = std::max(len, v.size());
    }
    out << '\n';
    for (std::size_t t = 0; t < len; ++t) {
        out << t;
        for (const auto& [id, v] : traces) {
            out << ',';
            if (t < v.size()) out << detail::fmt_fixed(v[t], 3);
        }
        out << '\n';
    }
}

// ---- zone assignment ----

struct AssignmentRow {
    TurbineId turbine;
    int zone = 0;
    int parent_zone = 0;
    double power_norm = 0.0;
    double rotor_norm = 0.0;
    double responsibility = 1.0;
};

inline void write_assignment_csv(std::ostream& out, const std::vector<AssignmentRow>& rows) {
    out << "turbine,zone,parent_zone,power_norm,rotor_norm,responsibility\n";
    for (const auto& r : rows)
        out << r.turbine.str() << ',' << r.zone << ',' << r.parent_zone << ',' << detail::fmt(r.power_norm) << ','
            << detail::fmt(r.rotor_norm) << ',' << detail::fmt(r.responsibility) << '\n';
}

inline std::vector<AssignmentRow> read_assignment_csv(std::istream& in) {
    std::vector<AssignmentRow> rows;
    std::string line;
    std::size_t line_no = 0;
    bool header = false;
    while (std::getline(in, line)) {
        ++line_no;
        const auto text = detail::trim(line);
        if (text.empty()) continue;
        if (!header) {
            if (text.substr(0, 13) != "turbine,zone,") throw ParseError(line_no, "expected assignment header");
            header = true;
            continue;
        }
        const auto f = detail::split_csv(text);
        if (f.size() != 6) throw ParseError(line_no, "expected 6 fields");
        AssignmentRow r;
        const auto id = TurbineId::parse(f[0]);
        const auto zone = detail::parse_int(f[1]);
        const auto parent = detail::parse_int(f[2]);
        const auto p = detail::parse_double(f[3]), w = detail::parse_double(f[4]), resp = detail::parse_double(f[5]);
        if (!id || !zone || !parent || !p || !w || !resp) throw ParseError(line_no, "malformed assignment row");
        r.turbine = *id;
        r.zone = static_cast<int>(*zone);
        r.parent_zone = static_cast<int>(*parent);
        r.power_norm = *p;
        r.rotor_norm = *w;
        r.responsibility = *resp;
        rows.push_back(r);
    }
    if (!header) throw ParseError(line_no, "assignment file is empty");
    return rows;
}

// ---- profiles ----

inline void write_profiles_csv(std::ostream& out, const std::vector<LoadProfile>& profiles) {
    out << "zone,bin_lo,bin_hi,ldd_counts,lrd_counts\n";
    for (const auto& p : profiles)
        for (std::size_t b = 0; b < p.ldd.bins(); ++b)
            out << p.zone << ',' << detail::fmt(p.ldd.bin_edges[b]) << ',' << detail::fmt(p.ldd.bin_edges[b + 1]) << ','
                << detail::fmt(p.ldd.counts[b]) << ',' << detail::fmt(p.lrd.counts[b]) << '\n';
}

inline json to_json(const WindVector& w) {
    return {{"speed", w.speed}, {"direction", w.direction_defined ? json(w.direction) : json(nullptr)}};
}

inline json to_json(const LoadProfile& p) {
    json turbines = json::array();
    for (const auto& id : p.turbines) turbines.push_back(id.str());
    return {
        {"zone", p.zone},
        {"power_mean", p.power_mean},
        {"power_std", p.power_std},
        {"rotor_mean", p.rotor_mean},
        {"rotor_std", p.rotor_std},
        {"wind_context", to_json(p.wind_context)},
        {"window_start", p.window_start},
        {"window_len", p.window_len},
        {"samples", p.samples},
        {"ldd_total_seconds", p.ldd.total()},
        {"lrd_total_revolutions", p.lrd.total()},
        {"turbines", turbines},
    };
}

inline json to_json(const ZoneNormality& z) {
    auto one = [](const ShapiroWilkResult& r, bool pass) { return json{{"w", r.w}, {"p", r.p}, {"pass", pass}}; };
    return {{"zone", z.zone}, {"samples", z.samples}, {"power", one(z.power, z.power_pass)}, {"rotor", one(z.rotor, z.rotor_pass)}};
}

}  // namespace windfleet
