#pragma once

// Run configuration: one JSON document, every key optional. Unknown keys are
// rejected so that a typo cannot silently fall back to a default.

#include <cstdint>
#include <fstream>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"

#include "windfleet/controller.hpp"
#include "windfleet/detection.hpp"
#include "windfleet/dpgmm.hpp"
#include "windfleet/error.hpp"
#include "windfleet/farm.hpp"
#include "windfleet/farmsim.hpp"
#include "windfleet/io.hpp"
#include "windfleet/profiles.hpp"
#include "windfleet/scada.hpp"
#include "windfleet/synthetic.hpp"

namespace windfleet {

struct RunConfig {
    std::uint64_t seed = 0;

    /// Storm-case layout.
    FarmLayout layout{.missing = {{5, 5}, {6, 5}, {7, 5}, {8, 5}}};
    /// Turbines absent from the SCADA export.
    std::set<TurbineId> scada_missing{{10, 4}};

    Bounds power_bounds{0.0, 3000.0};
    Bounds rotor_bounds{0.0, 20.0};
    int window_seconds = 120;
    std::optional<Timestamp> window_start;
    int pre_window_seconds = 600;
    double steady_speed_tol = 0.10;
    double steady_dir_tol = 2.0;

    int truncation = 6;
    double tol = 1e-5;
    int max_iter = 1000;
    std::optional<double> concentration;
    int restarts = 1;
    double prior_mean_precision = 0.1;
    double prior_scale = 1.0;
    double prior_extra_dof = 2.0;
    bool subcluster = true;
    // A zone is expected to hold one group, so its refit uses a broader,
    // looser covariance prior than the farm-wide fit.
    double subcluster_prior_scale = 2.0;
    double subcluster_extra_dof = 0.0;

    int bin_count = 50;
    bool pool_windows = false;

    StormScenario scenario;
    DetectionRule detection;
    int timestamp_truncation = 2;
    int timestamp_restarts = 5;
    // Lloyd refinement pulls the boundary toward equal halves of a spread-out
    // front and loses the small early group, so the seeding is used as is.
    int timestamp_kmeans_iter = 0;

    std::vector<double> penalties{1.0, 5.0, 10.0};

    int first_row = 3;
    int iterations = 1000;
    double learning_rate = 1.0;
    double sigma0 = 30.0;
    double decay = 0.99;
    double initial_delay = 0.0;

    SyntheticScadaSpec synthetic = SyntheticScadaSpec::four_zone();

    std::string scada_path;
    std::string assignment_path;
    std::string policy_path;
    std::string out_dir = "out";

    FarmLayout scada_layout() const {
        FarmLayout l = layout;
        l.missing = scada_missing;
        return l;
    }

    DpgmmOptions clustering() const {
        DpgmmOptions o;
        o.truncation = truncation;
        o.tol = tol;
        o.max_iter = max_iter;
        o.seed = seed;
        o.concentration = concentration;
        o.restarts = restarts;
        o.prior_mean_precision = prior_mean_precision;
        o.prior_scale = prior_scale;
        o.prior_extra_dof = prior_extra_dof;
        return o;
    }

    DpgmmOptions subclustering() const {
        DpgmmOptions o = clustering();
        o.prior_scale = subcluster_prior_scale;
        o.prior_extra_dof = subcluster_extra_dof;
        return o;
    }

    DpgmmOptions timestamp_clustering() const {
        DpgmmOptions o = clustering();
        o.truncation = timestamp_truncation;
        o.restarts = timestamp_restarts;
        o.kmeans_iter = timestamp_kmeans_iter;
        o.concentration.reset();
        return o;
    }

    SteadyStateOptions steady_state() const {
        SteadyStateOptions o;
        o.window_start = window_start;
        o.pre_window_s = pre_window_seconds;
        o.window_s = window_seconds;
        o.speed_tol = steady_speed_tol;
        o.dir_tol = steady_dir_tol;
        return o;
    }

    TrainingConfig training() const {
        TrainingConfig t;
        t.iterations = iterations;
        t.learning_rate = learning_rate;
        t.seed = seed;
        return t;
    }

    ShutdownPolicy initial_policy() const {
        auto p = ShutdownPolicy::for_layout(layout, first_row, initial_delay);
        p.sigma0 = sigma0;
        p.decay = decay;
        return p;
    }

    void validate() const {
        layout.validate();
        scada_layout().validate();
        power_bounds.validate();
        rotor_bounds.validate();
        scenario.validate();
        detection.validate();
        if (window_seconds < 1) throw ConfigError("window_seconds must be positive");
        if (pre_window_seconds < 0) throw ConfigError("pre_window_seconds must be non-negative");
        if (truncation < 1 || timestamp_truncation < 1) throw ConfigError("truncation must be at least 1");
        if (!(tol > 0.0)) throw ConfigError("tol must be positive");
        if (max_iter < 1) throw ConfigError("max_iter must be at least 1");
        if (restarts < 1 || timestamp_restarts < 1) throw ConfigError("restarts must be at least 1");
        if (timestamp_kmeans_iter < 0) throw ConfigError("kmeans_iter must be non-negative");
        if (!(prior_mean_precision > 0.0) || !(prior_scale > 0.0) || !(subcluster_prior_scale > 0.0))
            throw ConfigError("clustering prior precision and scales must be positive");
        if (!(prior_extra_dof >= 0.0) || !(subcluster_extra_dof >= 0.0))
            throw ConfigError("clustering prior extra degrees of freedom must be non-negative");
        if (concentration && !(*concentration > 0.0)) throw ConfigError("concentration must be positive");
        if (bin_count < 1) throw ConfigError("bin_count must be at least 1");
        if (penalties.empty()) throw ConfigError("at least one penalty is required");
        for (double p : penalties)
            if (!(p >= 0.0) || !std::isfinite(p)) throw ConfigError("penalties must be finite and non-negative");
        if (first_row < 1 || first_row > layout.rows) throw ConfigError("first_row outside layout");
        if (iterations < 1) throw ConfigError("iterations must be at least 1");
        if (!(learning_rate > 0.0)) throw ConfigError("learning_rate must be positive");
        initial_policy().validate();
    }
};

namespace detail {

inline void reject_unknown(const json& obj, std::initializer_list<const char*> known, const std::string& where) {
    if (!obj.is_object()) throw ConfigError("'" + where + "' must be an object");
    for (const auto& [key, value] : obj.items()) {
        bool ok = false;
        for (const char* k : known) ok = ok || key == k;
        if (!ok) throw ConfigError("unknown key '" + (where.empty() ? key : where + "." + key) + "'");
    }
}

template <typename T>
void read_key(const json& obj, const char* key, T& out) {
    if (obj.contains(key)) out = obj.at(key).get<T>();
}

inline std::set<TurbineId> read_turbines(const json& arr, const std::string& where) {
    std::set<TurbineId> out;
    for (const auto& v : arr) {
        const auto id = TurbineId::parse(v.get<std::string>());
        if (!id) throw ConfigError("bad turbine id in " + where + ": " + v.dump());
        out.insert(*id);
    }
    return out;
}

inline json turbines_json(const std::set<TurbineId>& ids) {
    json arr = json::array();
    for (const auto& id : ids) arr.push_back(id.str());
    return arr;
}

}  // namespace detail

inline RunConfig config_from_json(const json& j) {
    RunConfig c;
    try {
        detail::reject_unknown(j, {"seed", "layout", "scada", "normalization", "window", "clustering", "profiling", "scenario",
                                   "detection", "timestamp_clustering", "reward", "training", "synthetic", "paths"},
                               "");
        detail::read_key(j, "seed", c.seed);
        if (j.contains("layout")) {
            const auto& l = j.at("layout");
            detail::reject_unknown(l, {"rows", "columns", "spacing_m", "missing"}, "layout");
            detail::read_key(l, "rows", c.layout.rows);
            detail::read_key(l, "columns", c.layout.columns);
            detail::read_key(l, "spacing_m", c.layout.spacing_m);
            if (l.contains("missing")) c.layout.missing = detail::read_turbines(l.at("missing"), "layout.missing");
        }
        if (j.contains("scada")) {
            const auto& s = j.at("scada");
            detail::reject_unknown(s, {"missing"}, "scada");
            if (s.contains("missing")) c.scada_missing = detail::read_turbines(s.at("missing"), "scada.missing");
        }
        if (j.contains("normalization")) {
            const auto& n = j.at("normalization");
            detail::reject_unknown(n, {"power_kw", "rotor_rpm"}, "normalization");
            if (n.contains("power_kw")) c.power_bounds = {n.at("power_kw").at(0).get<double>(), n.at("power_kw").at(1).get<double>()};
            if (n.contains("rotor_rpm")) c.rotor_bounds = {n.at("rotor_rpm").at(0).get<double>(), n.at("rotor_rpm").at(1).get<double>()};
        }
        if (j.contains("window")) {
            const auto& w = j.at("window");
            detail::reject_unknown(w, {"seconds", "start", "pre_window_seconds", "speed_tol", "dir_tol_deg"}, "window");
            detail::read_key(w, "seconds", c.window_seconds);
            if (w.contains("start") && !w.at("start").is_null()) c.window_start = w.at("start").get<Timestamp>();
            detail::read_key(w, "pre_window_seconds", c.pre_window_seconds);
            detail::read_key(w, "speed_tol", c.steady_speed_tol);
            detail::read_key(w, "dir_tol_deg", c.steady_dir_tol);
        }
        if (j.contains("clustering")) {
            const auto& k = j.at("clustering");
            detail::reject_unknown(k, {"truncation", "tol", "max_iter", "concentration", "restarts", "prior_mean_precision", "prior_scale",
                                     "prior_extra_dof", "subcluster", "subcluster_prior_scale", "subcluster_extra_dof"},
                                 "clustering");
            detail::read_key(k, "truncation", c.truncation);
            detail::read_key(k, "tol", c.tol);
            detail::read_key(k, "max_iter", c.max_iter);
            if (k.contains("concentration") && !k.at("concentration").is_null()) c.concentration = k.at("concentration").get<double>();
            detail::read_key(k, "restarts", c.restarts);
            detail::read_key(k, "prior_mean_precision", c.prior_mean_precision);
            detail::read_key(k, "prior_scale", c.prior_scale);
            detail::read_key(k, "prior_extra_dof", c.prior_extra_dof);
            detail::read_key(k, "subcluster", c.subcluster);
            detail::read_key(k, "subcluster_prior_scale", c.subcluster_prior_scale);
            detail::read_key(k, "subcluster_extra_dof", c.subcluster_extra_dof);
        }
        if (j.contains("profiling")) {
            const auto& p = j.at("profiling");
            detail::reject_unknown(p, {"bin_count", "pool_windows"}, "profiling");
            detail::read_key(p, "bin_count", c.bin_count);
            detail::read_key(p, "pool_windows", c.pool_windows);
        }
        if (j.contains("scenario")) {
            const auto& s = j.at("scenario");
            detail::reject_unknown(s, {"direction_deg", "front_speed", "onset", "alarm_threshold", "row_jitter_std", "gust_noise_std",
                                       "horizon", "beacon_lead", "base_speed", "storm_speed"},
                                   "scenario");
            detail::read_key(s, "direction_deg", c.scenario.direction);
            detail::read_key(s, "front_speed", c.scenario.front_speed);
            detail::read_key(s, "onset", c.scenario.onset);
            detail::read_key(s, "alarm_threshold", c.scenario.alarm_threshold);
            detail::read_key(s, "row_jitter_std", c.scenario.row_jitter_std);
            detail::read_key(s, "gust_noise_std", c.scenario.gust_noise_std);
            detail::read_key(s, "horizon", c.scenario.horizon);
            detail::read_key(s, "beacon_lead", c.scenario.beacon_lead);
            detail::read_key(s, "base_speed", c.scenario.base_speed);
            detail::read_key(s, "storm_speed", c.scenario.storm_speed);
        }
        if (j.contains("detection")) {
            const auto& d = j.at("detection");
            detail::reject_unknown(d, {"beacon_rows", "alarm_quorum"}, "detection");
            if (d.contains("beacon_rows")) c.detection.beacon_rows = d.at("beacon_rows").get<std::set<int>>();
            detail::read_key(d, "alarm_quorum", c.detection.alarm_quorum);
        }
        if (j.contains("timestamp_clustering")) {
            const auto& t = j.at("timestamp_clustering");
            detail::reject_unknown(t, {"truncation", "restarts", "kmeans_iter"}, "timestamp_clustering");
            detail::read_key(t, "truncation", c.timestamp_truncation);
            detail::read_key(t, "restarts", c.timestamp_restarts);
            detail::read_key(t, "kmeans_iter", c.timestamp_kmeans_iter);
        }
        if (j.contains("reward")) {
            const auto& r = j.at("reward");
            detail::reject_unknown(r, {"penalties"}, "reward");
            detail::read_key(r, "penalties", c.penalties);
        }
        if (j.contains("training")) {
            const auto& t = j.at("training");
            detail::reject_unknown(t, {"first_row", "iterations", "learning_rate", "sigma0", "decay", "initial_delay"}, "training");
            detail::read_key(t, "first_row", c.first_row);
            detail::read_key(t, "iterations", c.iterations);
            detail::read_key(t, "learning_rate", c.learning_rate);
            detail::read_key(t, "sigma0", c.sigma0);
            detail::read_key(t, "decay", c.decay);
            detail::read_key(t, "initial_delay", c.initial_delay);
        }
        if (j.contains("synthetic")) {
            const auto& s = j.at("synthetic");
            detail::reject_unknown(s, {"start", "duration_s", "power_noise_kw", "rotor_noise_rpm", "wind_speed", "wind_direction_deg"},
                                   "synthetic");
            detail::read_key(s, "start", c.synthetic.start);
            detail::read_key(s, "duration_s", c.synthetic.duration_s);
            detail::read_key(s, "power_noise_kw", c.synthetic.power_noise_kw);
            detail::read_key(s, "rotor_noise_rpm", c.synthetic.rotor_noise_rpm);
            detail::read_key(s, "wind_speed", c.synthetic.wind_speed);
            detail::read_key(s, "wind_direction_deg", c.synthetic.wind_direction);
        }
        if (j.contains("paths")) {
            const auto& p = j.at("paths");
            detail::reject_unknown(p, {"scada", "assignment", "policy", "out"}, "paths");
            detail::read_key(p, "scada", c.scada_path);
            detail::read_key(p, "assignment", c.assignment_path);
            detail::read_key(p, "policy", c.policy_path);
            detail::read_key(p, "out", c.out_dir);
        }
    } catch (const json::exception& e) {
        throw ConfigError(std::string("bad configuration value: ") + e.what());
    }
    c.validate();
    return c;
}

inline json to_json(const RunConfig& c) {
    return {
        {"seed", c.seed},
        {"layout",
         {{"rows", c.layout.rows},
          {"columns", c.layout.columns},
          {"spacing_m", c.layout.spacing_m},
          {"missing", detail::turbines_json(c.layout.missing)}}},
        {"scada", {{"missing", detail::turbines_json(c.scada_missing)}}},
        {"normalization",
         {{"power_kw", {c.power_bounds.min, c.power_bounds.max}}, {"rotor_rpm", {c.rotor_bounds.min, c.rotor_bounds.max}}}},
        {"window",
         {{"seconds", c.window_seconds},
          {"start", c.window_start ? json(*c.window_start) : json(nullptr)},
          {"pre_window_seconds", c.pre_window_seconds},
          {"speed_tol", c.steady_speed_tol},
          {"dir_tol_deg", c.steady_dir_tol}}},
        {"clustering",
         {{"truncation", c.truncation},
          {"tol", c.tol},
          {"max_iter", c.max_iter},
          {"concentration", c.concentration ? json(*c.concentration) : json(nullptr)},
          {"restarts", c.restarts},
          {"prior_mean_precision", c.prior_mean_precision},
          {"prior_scale", c.prior_scale},
          {"prior_extra_dof", c.prior_extra_dof},
          {"subcluster", c.subcluster},
          {"subcluster_prior_scale", c.subcluster_prior_scale},
          {"subcluster_extra_dof", c.subcluster_extra_dof}}},
        {"profiling", {{"bin_count", c.bin_count}, {"pool_windows", c.pool_windows}}},
        {"scenario",
         {{"direction_deg", c.scenario.direction},
          {"front_speed", c.scenario.front_speed},
          {"onset", c.scenario.onset},
          {"alarm_threshold", c.scenario.alarm_threshold},
          {"row_jitter_std", c.scenario.row_jitter_std},
          {"gust_noise_std", c.scenario.gust_noise_std},
          {"horizon", c.scenario.horizon},
          {"beacon_lead", c.scenario.beacon_lead},
          {"base_speed", c.scenario.base_speed},
          {"storm_speed", c.scenario.storm_speed}}},
        {"detection", {{"beacon_rows", c.detection.beacon_rows}, {"alarm_quorum", c.detection.alarm_quorum}}},
        {"timestamp_clustering",
         {{"truncation", c.timestamp_truncation}, {"restarts", c.timestamp_restarts}, {"kmeans_iter", c.timestamp_kmeans_iter}}},
        {"reward", {{"penalties", c.penalties}}},
        {"training",
         {{"first_row", c.first_row},
          {"iterations", c.iterations},
          {"learning_rate", c.learning_rate},
          {"sigma0", c.sigma0},
          {"decay", c.decay},
          {"initial_delay", c.initial_delay}}},
        {"synthetic",
         {{"start", c.synthetic.start},
          {"duration_s", c.synthetic.duration_s},
          {"power_noise_kw", c.synthetic.power_noise_kw},
          {"rotor_noise_rpm", c.synthetic.rotor_noise_rpm},
          {"wind_speed", c.synthetic.wind_speed},
          {"wind_direction_deg", c.synthetic.wind_direction}}},
        {"paths", {{"scada", c.scada_path}, {"assignment", c.assignment_path}, {"policy", c.policy_path}, {"out", c.out_dir}}},
    };
}

inline RunConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config " + path);
    json j;
    try {
        j = json::parse(in);
    } catch (const json::exception& e) {
        throw ConfigError("config " + path + " is not valid JSON: " + e.what());
    }
    return config_from_json(j);
}

struct DefaultExplanation {
    std::string key;
    std::string value;
    std::string origin;
};

/// Where every default comes from: a value reported for the field study, or
/// a choice made here.
inline std::vector<DefaultExplanation> explain_defaults() {
    const RunConfig c;
    auto num = [](double v) { return detail::fmt(v); };
    return {
        {"layout.rows x layout.columns", "11 x 5", "field study farm geometry"},
        {"layout.spacing_m", num(c.layout.spacing_m), "chosen: typical row spacing, gives 120 s between rows at 5 m/s"},
        {"layout.missing", "05/5 06/5 07/5 08/5", "field study storm case, four turbines absent"},
        {"scada.missing", "10/4", "field study SCADA case, one turbine absent"},
        {"normalization.power_kw", "[0, 3000]", "chosen: rated power range of a multi-MW turbine"},
        {"normalization.rotor_rpm", "[0, 20]", "chosen: rotor speed range of a multi-MW turbine"},
        {"window.seconds", "120", "field study: 2-minute averaging window"},
        {"window.pre_window_seconds", "600", "field study: 10 minutes of steady wind before the window"},
        {"window.speed_tol", "0.1", "chosen: steady-state threshold, none reported"},
        {"window.dir_tol_deg", "2", "chosen: steady-state threshold, none reported"},
        {"clustering.truncation", "6", "field study: expected maximum number of zones"},
        {"clustering.tol", "1e-05", "field study: ELBO convergence threshold, applied per point here"},
        {"clustering.max_iter", "1000", "chosen: non-convergence is reported with exit code 2"},
        {"clustering.concentration", "1/truncation", "chosen: not reported"},
        {"clustering.restarts", "1", "chosen"},
        {"clustering.prior_mean_precision", "0.1", "chosen: weak prior on component means"},
        {"clustering.prior_scale", "1", "chosen: expected component covariance is the data covariance shared among truncation components"},
        {"clustering.prior_extra_dof", "2", "chosen"},
        {"clustering.subcluster", "true", "field study: second clustering pass inside a zone"},
        {"clustering.subcluster_prior_scale", "2", "chosen: keeps single-group zones whole"},
        {"clustering.subcluster_extra_dof", "0", "chosen"},
        {"profiling.bin_count", "50", "chosen: bin count not reported"},
        {"scenario.direction_deg", "265.4", "field study storm direction"},
        {"scenario.front_speed", "5", "chosen: storm front speed not reported"},
        {"scenario.onset", "900", "chosen"},
        {"scenario.alarm_threshold", "25", "field study: high wind alarm at 25 m/s"},
        {"scenario.row_jitter_std", "10", "chosen: alarm dispersion not reported"},
        {"scenario.gust_noise_std", "1", "chosen"},
        {"scenario.horizon", "3600", "field study: one hour of event logs"},
        {"scenario.beacon_lead", "300", "chosen: early beacon trigger observed but not quantified"},
        {"detection.beacon_rows", "[1, 2]", "field study: two upstream beacon rows"},
        {"detection.alarm_quorum", "3", "field study: three beacon turbines signal the storm"},
        {"timestamp_clustering.truncation", "2", "field study: alarm times split into two groups"},
        {"timestamp_clustering.restarts", "5", "chosen"},
        {"timestamp_clustering.kmeans_iter", "0", "chosen: k-means++ seeding without Lloyd refinement"},
        {"reward.penalties", "[1, 5, 10]", "field study: risky to conservative penalties"},
        {"training.first_row", "3", "field study: rows after the beacon rows are controlled"},
        {"training.iterations", "1000", "field study"},
        {"training.sigma0", "30", "field study: 30 s exploration spread"},
        {"training.decay", "0.99", "field study: spread decay per iteration"},
        {"training.learning_rate", "1", "chosen: learning rate not reported"},
        {"training.initial_delay", "0", "chosen"},
        {"seed", "0", "chosen"},
    };
}

}  // namespace windfleet
