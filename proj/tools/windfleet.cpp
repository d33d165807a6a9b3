// windfleet: command-line front end.
//
//   windfleet [--config PATH] [--seed N] [--out DIR] <command> [options]
//
// Exit codes: 0 ok, 1 input or configuration error, 2 numerical non-convergence.

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "windfleet/config.hpp"
#include "windfleet/controller.hpp"
#include "windfleet/dpgmm.hpp"
#include "windfleet/farmsim.hpp"
#include "windfleet/io.hpp"
#include "windfleet/label_grid.hpp"
#include "windfleet/profiles.hpp"
#include "windfleet/scada.hpp"
#include "windfleet/synthetic.hpp"

namespace fs = std::filesystem;
using namespace windfleet;

namespace {

constexpr int kOk = 0;
constexpr int kInputError = 1;
constexpr int kNonConvergence = 2;

/// Input-side failure that should name the offending file.
struct InputError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct Context {
    RunConfig cfg;
    fs::path config_dir = ".";
    fs::path out;
};

fs::path resolve_input(const Context& ctx, const std::string& flag_value, const std::string& config_value) {
    if (!flag_value.empty()) return flag_value;
    if (config_value.empty()) return {};
    fs::path p(config_value);
    return p.is_absolute() ? p : ctx.config_dir / p;
}

std::string read_file(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw InputError("cannot open " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

json read_json(const fs::path& path) {
    const auto text = read_file(path);
    try {
        return json::parse(text);
    } catch (const json::exception& e) {
        throw InputError(path.string() + ": invalid JSON: " + e.what());
    }
}

void write_text(const fs::path& path, const std::string& text) {
    fs::create_directories(path.parent_path().empty() ? fs::path(".") : path.parent_path());
    std::ofstream out(path, std::ios::binary);
    if (!out) throw InputError("cannot write " + path.string());
    out << text;
}

void write_json(const fs::path& path, const json& j) { write_text(path, j.dump(2) + "\n"); }

template <typename F>
void write_with(const fs::path& path, F&& f) {
    std::ostringstream ss;
    f(ss);
    write_text(path, ss.str());
}

/// Parse errors come back tagged with the file they came from.
template <typename F>
auto with_file(const fs::path& path, F&& f) {
    try {
        return f();
    } catch (const ParseError& e) {
        throw InputError(path.string() + ": " + e.what());
    } catch (const ConfigError& e) {
        throw InputError(path.string() + ": " + e.what());
    }
}

ScadaTable load_scada(const Context& ctx, const fs::path& path) {
    if (path.empty()) throw InputError("no SCADA file given (use --scada or paths.scada)");
    const auto text = read_file(path);
    auto table = with_file(path, [&] { return parse_scada(std::string_view(text), ctx.cfg.scada_layout()); });
    if (table.records.empty()) throw InputError(path.string() + ": no records for active turbines");
    if (table.dropped > 0) std::cerr << "note: dropped " << table.dropped << " records of missing turbines\n";
    return table;
}

Timestamp analysis_window_start(const Context& ctx, const std::vector<ScadaRecord>& records) {
    if (ctx.cfg.window_start) return *ctx.cfg.window_start;
    Timestamp last = records.front().timestamp;
    for (const auto& r : records) last = std::max(last, r.timestamp);
    return last - ctx.cfg.window_seconds + 1;
}

std::vector<ScadaRecord> records_in(const std::vector<ScadaRecord>& records, Timestamp from, Timestamp to) {
    std::vector<ScadaRecord> out;
    for (const auto& r : records)
        if (r.timestamp >= from && r.timestamp < to) out.push_back(r);
    return out;
}

std::string penalty_tag(double p) { return "P" + detail::fmt(p); }

// ---------------------------------------------------------------- generate

int cmd_generate(const Context& ctx) {
    auto spec = ctx.cfg.synthetic;
    spec.seed = ctx.cfg.seed;
    const auto data = generate_scada(ctx.cfg.scada_layout(), spec);
    write_with(ctx.out / "synthetic_scada.csv", [&](std::ostream& o) { write_scada_csv(o, data.records); });
    write_with(ctx.out / "synthetic_truth.csv", [&](std::ostream& o) {
        o << "turbine,zone\n";
        for (const auto& [id, z] : data.truth) o << id.str() << ',' << z << '\n';
    });
    std::cout << "generated " << data.records.size() << " records for " << data.truth.size() << " turbines\n";
    return kOk;
}

// ---------------------------------------------------------------- cluster

int cmd_cluster(const Context& ctx, const std::string& scada_flag) {
    const auto& cfg = ctx.cfg;
    const auto path = resolve_input(ctx, scada_flag, cfg.scada_path);
    const auto table = load_scada(ctx, path);

    const Timestamp start = analysis_window_start(ctx, table.records);
    const auto window = records_in(table.records, start, start + cfg.window_seconds);
    const auto features = window_average(window, cfg.window_seconds);
    std::set<TurbineId> with_features;
    for (const auto& f : features) with_features.insert(f.turbine);
    for (const auto& id : cfg.scada_layout().active_turbines())
        if (!with_features.contains(id)) std::cerr << "warning: turbine " << id.str() << " has no full window, excluded\n";
    if (features.size() < 3) throw InputError(path.string() + ": fewer than 3 turbines with a full analysis window");

    Eigen::MatrixXd x(static_cast<Eigen::Index>(features.size()), 2);
    for (std::size_t i = 0; i < features.size(); ++i) {
        x(static_cast<Eigen::Index>(i), 0) = normalize(features[i].power_mean, cfg.power_bounds);
        x(static_cast<Eigen::Index>(i), 1) = normalize(features[i].rotor_mean, cfg.rotor_bounds);
    }

    const auto opt = cfg.clustering();
    const auto model = fit_dpgmm(x, opt);
    const auto first = assign(model, x);
    bool converged = model.converged;

    // Final zone ids follow component order; an adopted split replaces its
    // parent by the subcomponents that received members.
    std::vector<int> zone_of(features.size(), -1);
    json zones = json::array(), splits = json::array();
    int next_zone = 0;
    for (int k = 0; k < static_cast<int>(model.components.size()); ++k) {
        std::vector<std::size_t> members;
        for (std::size_t i = 0; i < first.labels.size(); ++i)
            if (first.labels[i] == k) members.push_back(i);
        if (members.empty()) continue;

        std::optional<Subclustering> split;
        if (cfg.subcluster && members.size() >= 4) {
            auto s = subcluster(x, first, k, cfg.subclustering());
            const bool adopted = adopt_split(s);
            splits.push_back({{"component", k}, {"members", members.size()}, {"adopted", adopted}, {"model", to_json(s.model)}});
            if (adopted) {
                converged = converged && s.model.converged;
                split = std::move(s);
            }
        }

        auto emit_zone = [&](const std::vector<std::size_t>& idx, std::optional<int> sub) {
            json ids = json::array();
            double p = 0.0, w = 0.0;
            for (std::size_t i : idx) {
                zone_of[i] = next_zone;
                ids.push_back(features[i].turbine.str());
                p += features[i].power_mean;
                w += features[i].rotor_mean;
            }
            const double n = static_cast<double>(idx.size());
            zones.push_back({{"zone", next_zone},
                             {"component", k},
                             {"subcomponent", sub ? json(*sub) : json(nullptr)},
                             {"members", ids},
                             {"power_mean_kw", p / n},
                             {"rotor_mean_rpm", w / n}});
            ++next_zone;
        };

        if (split) {
            for (int s = 0; s < static_cast<int>(split->model.components.size()); ++s) {
                std::vector<std::size_t> sub;
                for (std::size_t m = 0; m < split->members.size(); ++m)
                    if (split->assignment.labels[m] == s) sub.push_back(static_cast<std::size_t>(split->members[m]));
                if (!sub.empty()) emit_zone(sub, s);
            }
        } else {
            emit_zone(members, std::nullopt);
        }
    }

    std::vector<AssignmentRow> rows;
    for (std::size_t i = 0; i < features.size(); ++i) {
        const auto& r = first.responsibilities[i];
        rows.push_back({features[i].turbine, zone_of[i], first.labels[i], x(static_cast<Eigen::Index>(i), 0),
                        x(static_cast<Eigen::Index>(i), 1), r(first.labels[i])});
    }

    json steady;
    try {
        const auto ss = check_steady_state(table.records, cfg.steady_state());
        steady = {{"steady", ss.steady}, {"seconds", ss.seconds}, {"mean", to_json(ss.mean)}, {"min", to_json(ss.min)}, {"max", to_json(ss.max)}};
        if (!ss.steady) std::cerr << "warning: wind is not steady around the analysis window\n";
    } catch (const DomainError& e) {
        steady = {{"steady", nullptr}, {"reason", e.what()}};
        std::cerr << "warning: " << e.what() << "\n";
    }

    const json doc = {
        {"window_start", start},
        {"window_seconds", cfg.window_seconds},
        {"turbines", features.size()},
        {"dropped_records", table.dropped},
        {"wind_vector", to_json(farm_wind_vector(window))},
        {"steady_state", steady},
        {"effective_components", model.effective_count()},
        {"zone_count", next_zone},
        {"converged", converged},
        {"model", to_json(model)},
        {"zones", zones},
        {"subclustering", splits},
    };
    write_json(ctx.out / "zones.json", doc);
    write_with(ctx.out / "assignment.csv", [&](std::ostream& o) { write_assignment_csv(o, rows); });

    std::cout << "effective components: " << model.effective_count() << "\n"
              << "zones: " << next_zone << "\n";
    if (!converged) {
        std::cerr << "error: mixture fit did not converge after " << model.iterations_run
                  << " iterations (last per-point ELBO change " << model.final_elbo_delta << ")\n";
        return kNonConvergence;
    }
    return kOk;
}

// ---------------------------------------------------------------- profile

int cmd_profile(const Context& ctx, const std::string& scada_flag, const std::string& assignment_flag) {
    const auto& cfg = ctx.cfg;
    const auto scada_path = resolve_input(ctx, scada_flag, cfg.scada_path);
    auto assignment_path = resolve_input(ctx, assignment_flag, cfg.assignment_path);
    if (assignment_path.empty()) assignment_path = ctx.out / "assignment.csv";

    const auto table = load_scada(ctx, scada_path);
    const auto text = read_file(assignment_path);
    const auto rows = with_file(assignment_path, [&] {
        std::istringstream in(text);
        return read_assignment_csv(in);
    });

    std::map<TurbineId, int> labels;
    std::set<int> zone_set;
    for (const auto& r : rows) {
        labels[r.turbine] = r.zone;
        zone_set.insert(r.zone);
    }
    const std::vector<int> zones(zone_set.begin(), zone_set.end());

    const Timestamp start = analysis_window_start(ctx, table.records);
    const auto records = cfg.pool_windows ? table.records : records_in(table.records, start, start + cfg.window_seconds);
    if (records.empty()) throw InputError(scada_path.string() + ": no records in the analysis window");
    for (const auto& r : records)
        if (!labels.contains(r.turbine))
            throw InputError(assignment_path.string() + ": no zone assignment for turbine " + r.turbine.str());

    ProfileOptions popt;
    popt.bin_count = cfg.bin_count;
    popt.power_bounds = cfg.power_bounds;
    const auto set = build_profiles(records, labels, zones, popt, farm_wind_vector(records));
    for (const auto& w : set.warnings) std::cerr << "warning: " << w << "\n";

    json overlap = json::array();
    for (const auto& a : set.profiles)
        for (const auto& b : set.profiles)
            if (a.zone < b.zone)
                overlap.push_back({{"zones", {a.zone, b.zone}},
                                   {"ldd_overlap", overlap_coefficient(a.ldd, b.ldd)},
                                   {"lrd_overlap", overlap_coefficient(a.lrd, b.lrd)},
                                   {"ldd_hellinger", hellinger(a.ldd, b.ldd)}});
    json profiles = json::array();
    for (const auto& p : set.profiles) profiles.push_back(to_json(p));
    write_json(ctx.out / "profiles.json", {{"bin_count", cfg.bin_count},
                                           {"pooled_windows", cfg.pool_windows},
                                           {"profiles", profiles},
                                           {"overlap", overlap},
                                           {"warnings", set.warnings}});
    write_with(ctx.out / "profiles.csv", [&](std::ostream& o) { write_profiles_csv(o, set.profiles); });

    json normality = json::array();
    for (const auto& z : normality_report(records, labels, cfg.power_bounds, cfg.seed)) normality.push_back(to_json(z));
    write_json(ctx.out / "normality.json", {{"level", 0.05}, {"zones", normality}});

    std::cout << "profiles: " << set.profiles.size() << "\n";
    return kOk;
}

// ---------------------------------------------------------------- simulate

int cmd_simulate(const Context& ctx, const std::string& policy_flag) {
    const auto& cfg = ctx.cfg;
    std::optional<RowSchedule> schedule;
    const auto policy_path = resolve_input(ctx, policy_flag, cfg.policy_path);
    if (!policy_path.empty()) {
        const auto j = read_json(policy_path);
        const auto policy = with_file(policy_path, [&] { return policy_from_json(j); });
        if (policy.first_row > cfg.layout.rows) throw InputError(policy_path.string() + ": policy rows outside layout");
        schedule = RowSchedule{policy.first_row, policy.theta, cfg.detection};
    }

    const auto sim = simulate(cfg.layout, cfg.scenario, schedule, cfg.seed);
    const auto detection = schedule ? sim.detection : detect_event(sim.log.alarms, cfg.detection);
    const auto emergencies = count_emergency_stops(sim.log, cfg.layout);
    int planned = 0, emergency_total = 0;
    for (const auto& s : sim.log.shutdowns) planned += s.kind == ShutdownKind::planned ? 1 : 0;
    for (int e : emergencies) emergency_total += e;

    json groups = nullptr;
    const auto alarm_grid = alarm_timestamp_grid(sim.log, cfg.layout);
    if (sim.log.alarms.size() >= 2) {
        try {
            const auto tz = cluster_timestamps(alarm_grid, cfg.timestamp_clustering());
            json cells = json::array();
            for (const auto& id : cfg.layout.active_turbines())
                if (const auto& t = alarm_grid.at(id))
                    cells.push_back({{"turbine", id.str()}, {"alarm", *t}, {"raw", *tz.raw.at(id)}, {"smoothed", *tz.smoothed.at(id)}});
            groups = {{"model", to_json(tz.model)}, {"cells", cells}};
        } catch (const DegenerateInputError& e) {
            std::cerr << "warning: alarm times not clustered: " << e.what() << "\n";
        }
    }

    json arrivals = json::array();
    for (double a : sim.row_arrivals) arrivals.push_back(a);
    write_json(ctx.out / "simulation.json", {{"seed", cfg.seed},
                                             {"policy", schedule ? json(policy_path.filename().string()) : json(nullptr)},
                                             {"horizon", cfg.scenario.horizon},
                                             {"detection", detection ? json(*detection) : json(nullptr)},
                                             {"alarms", sim.log.alarms.size()},
                                             {"emergency_stops", emergency_total},
                                             {"emergency_stops_by_row", emergencies},
                                             {"planned_stops", planned},
                                             {"row_arrivals", arrivals},
                                             {"alarm_groups", groups}});
    write_with(ctx.out / "events.csv", [&](std::ostream& o) { write_event_log_csv(o, sim.log); });
    write_with(ctx.out / "wind_trace.csv", [&](std::ostream& o) { write_traces_csv(o, sim.traces); });

    std::cout << "alarms: " << sim.log.alarms.size() << "\n"
              << "emergency stops: " << emergency_total << "\n"
              << "planned stops: " << planned << "\n";
    return kOk;
}

// ---------------------------------------------------------------- train

int cmd_train(const Context& ctx) {
    const auto& cfg = ctx.cfg;
    int status = kOk;
    for (double p : cfg.penalties) {
        const auto res = train(cfg.layout, cfg.scenario, RewardConfig{p}, cfg.training(), cfg.initial_policy(), cfg.detection);
        bool finite = true;
        for (const auto& r : res.curve) finite = finite && std::isfinite(r.ret);
        for (double t : res.policy.theta) finite = finite && std::isfinite(t);

        const std::size_t tail = std::max<std::size_t>(1, res.curve.size() / 10);
        double mean = 0.0;
        for (std::size_t i = res.curve.size() - tail; i < res.curve.size(); ++i) mean += res.curve[i].ret;
        mean /= static_cast<double>(tail);

        PolicyMetadata meta{cfg.seed, cfg.iterations, p, mean, res.converged};
        const auto tag = penalty_tag(p);
        write_json(ctx.out / ("policy_" + tag + ".json"), to_json(res.policy, meta));
        write_with(ctx.out / ("learning_curve_" + tag + ".csv"), [&](std::ostream& o) { write_learning_curve_csv(o, res.curve); });

        std::cout << tag << ": final mean return " << detail::fmt(mean) << (res.converged ? "" : " (not settled)") << "\n";
        if (res.undetected_episodes > 0) std::cerr << "warning: " << tag << ": " << res.undetected_episodes << " episodes without detection\n";
        if (!finite) {
            std::cerr << "error: " << tag << ": non-finite return or policy parameter\n";
            status = kNonConvergence;
        }
    }
    return status;
}

// ---------------------------------------------------------------- report

struct Artifacts {
    std::optional<json> zones, profiles, normality, simulation;
    std::map<double, json> policies;
    std::map<double, fs::path> curves;
    bool assignment = false, profiles_csv = false, events = false;
};

Artifacts collect_artifacts(const fs::path& dir) {
    if (!fs::is_directory(dir)) throw InputError("artifact directory " + dir.string() + " does not exist");
    Artifacts a;
    auto load = [&](const char* name, std::optional<json>& slot) {
        const auto p = dir / name;
        if (fs::exists(p)) slot = read_json(p);
    };
    load("zones.json", a.zones);
    load("profiles.json", a.profiles);
    load("normality.json", a.normality);
    load("simulation.json", a.simulation);
    a.assignment = fs::exists(dir / "assignment.csv");
    a.profiles_csv = fs::exists(dir / "profiles.csv");
    a.events = fs::exists(dir / "events.csv");

    std::vector<fs::path> entries;
    for (const auto& e : fs::directory_iterator(dir)) entries.push_back(e.path());
    std::sort(entries.begin(), entries.end());
    for (const auto& p : entries) {
        const auto name = p.filename().string();
        if (name.rfind("policy_P", 0) != 0 || p.extension() != ".json") continue;
        const auto j = read_json(p);
        with_file(p, [&] { return policy_from_json(j); });
        const double pen = policy_metadata_from_json(j).penalty;
        a.policies[pen] = j;
        const auto curve = dir / ("learning_curve_" + penalty_tag(pen) + ".csv");
        if (fs::exists(curve)) a.curves[pen] = curve;
    }
    if (a.zones && !a.assignment) throw InputError((dir / "assignment.csv").string() + ": missing artifact");
    if (a.profiles && !a.profiles_csv) throw InputError((dir / "profiles.csv").string() + ": missing artifact");
    if (a.simulation && !a.events) throw InputError((dir / "events.csv").string() + ": missing artifact");
    if (!a.zones && !a.profiles && !a.simulation && a.policies.empty())
        throw InputError("no artifacts found in " + dir.string() + " (run cluster, profile, simulate or train first)");
    return a;
}

int cmd_report(const Context& ctx, const std::string& artifacts_flag) {
    const auto& cfg = ctx.cfg;
    const fs::path dir = artifacts_flag.empty() ? ctx.out : fs::path(artifacts_flag);
    const auto a = collect_artifacts(dir);
    std::ostringstream md;
    md << "# Wind farm run report\n\n";
    std::vector<std::string> written;

    try {
        if (a.zones) {
            const auto& z = *a.zones;
            const auto text = read_file(dir / "assignment.csv");
            std::istringstream in(text);
            const auto rows = with_file(dir / "assignment.csv", [&] { return read_assignment_csv(in); });

            write_with(dir / "zone_scatter.csv", [&](std::ostream& o) {
                o << "turbine,power_norm,rotor_norm,zone\n";
                for (const auto& r : rows) o << r.turbine.str() << ',' << detail::fmt(r.power_norm) << ',' << detail::fmt(r.rotor_norm) << ',' << r.zone << '\n';
            });
            write_with(dir / "farm_grid_labels.csv", [&](std::ostream& o) {
                Grid<int> grid(cfg.layout.rows, cfg.layout.columns);
                for (const auto& r : rows)
                    if (cfg.layout.contains(r.turbine)) grid.at(r.turbine) = r.zone;
                o << "row";
                for (int c = 1; c <= cfg.layout.columns; ++c) o << ",c" << c;
                o << '\n';
                for (int r = 1; r <= cfg.layout.rows; ++r) {
                    o << r;
                    for (int c = 1; c <= cfg.layout.columns; ++c) {
                        o << ',';
                        if (const auto& v = grid.at({r, c})) o << *v;
                    }
                    o << '\n';
                }
            });
            written.insert(written.end(), {"zone_scatter.csv", "farm_grid_labels.csv"});

            md << "## Operational zones\n\n"
               << "Analysis window starts at " << z.at("window_start").dump() << " and lasts " << z.at("window_seconds").dump()
               << " s. Effective mixture components: " << z.at("effective_components").dump() << ". Zones after subclustering: "
               << z.at("zone_count").dump() << ". Fit converged: " << (z.at("converged").get<bool>() ? "yes" : "no") << ".\n\n";
            const auto& wind = z.at("wind_vector");
            md << "Farm wind vector: " << detail::fmt_fixed(wind.at("speed").get<double>(), 2) << " m/s";
            if (!wind.at("direction").is_null()) md << " at " << detail::fmt_fixed(wind.at("direction").get<double>(), 1) << " deg";
            md << ".\n\n| zone | members | power kW | rotor rpm |\n|---|---|---|---|\n";
            for (const auto& zone : z.at("zones"))
                md << "| " << zone.at("zone").dump() << " | " << zone.at("members").size() << " | "
                   << detail::fmt_fixed(zone.at("power_mean_kw").get<double>(), 1) << " | "
                   << detail::fmt_fixed(zone.at("rotor_mean_rpm").get<double>(), 2) << " |\n";
            md << "\nData: zone_scatter.csv, farm_grid_labels.csv\n\n";
        }

        if (a.profiles) {
            const auto& p = *a.profiles;
            const auto csv = read_file(dir / "profiles.csv");
            // Plot-ready copy with each zone's counts scaled to unit mass.
            std::map<int, std::pair<double, double>> totals;
            for (const auto& prof : p.at("profiles"))
                totals[prof.at("zone").get<int>()] = {prof.at("ldd_total_seconds").get<double>(), prof.at("lrd_total_revolutions").get<double>()};
            write_with(dir / "load_profiles.csv", [&](std::ostream& o) {
                o << "zone,bin_lo,bin_hi,ldd_counts,lrd_counts,ldd_fraction,lrd_fraction\n";
                std::istringstream in(csv);
                std::string line;
                std::size_t line_no = 0;
                while (std::getline(in, line)) {
                    if (++line_no == 1 || detail::trim(line).empty()) continue;
                    const auto f = detail::split_csv(line);
                    const auto zone = f.size() == 5 ? detail::parse_int(f[0]) : std::nullopt;
                    const auto ldd = f.size() == 5 ? detail::parse_double(f[3]) : std::nullopt;
                    const auto lrd = f.size() == 5 ? detail::parse_double(f[4]) : std::nullopt;
                    if (!zone || !ldd || !lrd || !totals.contains(static_cast<int>(*zone)))
                        throw InputError((dir / "profiles.csv").string() + ": line " + std::to_string(line_no) + ": malformed row");
                    const auto [tl, tr] = totals.at(static_cast<int>(*zone));
                    o << line << ',' << detail::fmt(tl > 0 ? *ldd / tl : 0.0) << ',' << detail::fmt(tr > 0 ? *lrd / tr : 0.0) << '\n';
                }
            });
            written.push_back("load_profiles.csv");

            md << "## Load profiles\n\n| zone | samples | power mean | power std | rotor mean rpm | rotor std rpm |\n|---|---|---|---|---|---|\n";
            for (const auto& prof : p.at("profiles"))
                md << "| " << prof.at("zone").dump() << " | " << prof.at("samples").dump() << " | "
                   << detail::fmt_fixed(prof.at("power_mean").get<double>(), 4) << " | " << detail::fmt_fixed(prof.at("power_std").get<double>(), 4)
                   << " | " << detail::fmt_fixed(prof.at("rotor_mean").get<double>(), 3) << " | "
                   << detail::fmt_fixed(prof.at("rotor_std").get<double>(), 3) << " |\n";
            if (!p.at("overlap").empty()) {
                md << "\n| zones | LDD overlap | LRD overlap | LDD Hellinger |\n|---|---|---|---|\n";
                for (const auto& o : p.at("overlap"))
                    md << "| " << o.at("zones").at(0).dump() << "-" << o.at("zones").at(1).dump() << " | "
                       << detail::fmt_fixed(o.at("ldd_overlap").get<double>(), 4) << " | " << detail::fmt_fixed(o.at("lrd_overlap").get<double>(), 4)
                       << " | " << detail::fmt_fixed(o.at("ldd_hellinger").get<double>(), 4) << " |\n";
            }
            if (a.normality) {
                md << "\n| zone | power W | power p | rotor W | rotor p |\n|---|---|---|---|---|\n";
                for (const auto& n : a.normality->at("zones"))
                    md << "| " << n.at("zone").dump() << " | " << detail::fmt_fixed(n.at("power").at("w").get<double>(), 4) << " | "
                       << detail::fmt_fixed(n.at("power").at("p").get<double>(), 4) << " | "
                       << detail::fmt_fixed(n.at("rotor").at("w").get<double>(), 4) << " | "
                       << detail::fmt_fixed(n.at("rotor").at("p").get<double>(), 4) << " |\n";
            }
            md << "\nData: load_profiles.csv\n\n";
        }

        if (a.simulation) {
            const auto& s = *a.simulation;
            const auto text = read_file(dir / "events.csv");
            std::istringstream in(text);
            const auto log = with_file(dir / "events.csv", [&] { return read_event_log_csv(in); });
            std::map<std::string, std::pair<int, int>> groups;
            if (!s.at("alarm_groups").is_null())
                for (const auto& c : s.at("alarm_groups").at("cells"))
                    groups[c.at("turbine").get<std::string>()] = {c.at("raw").get<int>(), c.at("smoothed").get<int>()};
            std::map<TurbineId, std::int64_t> first;
            for (const auto& al : log.alarms)
                if (!first.contains(al.turbine) || al.timestamp < first[al.turbine]) first[al.turbine] = al.timestamp;
            write_with(dir / "alarm_grid.csv", [&](std::ostream& o) {
                o << "turbine,row,column,alarm_timestamp,raw_group,smoothed_group\n";
                for (const auto& [id, t] : first) {
                    o << id.str() << ',' << id.row << ',' << id.column << ',' << t << ',';
                    if (const auto g = groups.find(id.str()); g != groups.end()) o << g->second.first << ',' << g->second.second;
                    else o << ',';
                    o << '\n';
                }
            });
            written.push_back("alarm_grid.csv");

            md << "## Storm simulation\n\nSeed " << s.at("seed").dump() << ", horizon " << s.at("horizon").dump() << " s. Alarms: "
               << s.at("alarms").dump() << ". Detection at: " << (s.at("detection").is_null() ? std::string("none") : s.at("detection").dump())
               << ". Emergency stops: " << s.at("emergency_stops").dump() << ", planned stops: " << s.at("planned_stops").dump() << ".\n\n"
               << "| row | emergency stops |\n|---|---|\n";
            const auto& by_row = s.at("emergency_stops_by_row");
            for (std::size_t r = 0; r < by_row.size(); ++r) md << "| " << r + 1 << " | " << by_row.at(r).dump() << " |\n";
            md << "\nData: alarm_grid.csv\n\n";
        }

        if (!a.policies.empty()) {
            write_with(dir / "learned_delays.csv", [&](std::ostream& o) {
                o << "penalty,row,delay,cumulative_delay\n";
                for (const auto& [pen, j] : a.policies)
                    for (const auto& r : j.at("rows"))
                        o << detail::fmt(pen) << ',' << r.at("row").dump() << ',' << detail::fmt(r.at("theta").get<double>()) << ','
                          << detail::fmt(r.at("cumulative").get<double>()) << '\n';
            });
            written.push_back("learned_delays.csv");

            md << "## Learned shutdown policies\n\nCumulative shutdown time after detection, seconds.\n\n| row |";
            for (const auto& [pen, j] : a.policies) md << " P=" << detail::fmt(pen) << " |";
            md << "\n|---|";
            for (std::size_t i = 0; i < a.policies.size(); ++i) md << "---|";
            md << "\n";
            const auto& ref = a.policies.begin()->second.at("rows");
            for (std::size_t r = 0; r < ref.size(); ++r) {
                md << "| " << ref.at(r).at("row").dump() << " |";
                for (const auto& [pen, j] : a.policies) {
                    const auto& rows = j.at("rows");
                    md << ' ' << (r < rows.size() ? detail::fmt_fixed(rows.at(r).at("cumulative").get<double>(), 1) : std::string("")) << " |";
                }
                md << "\n";
            }
            md << "\n| penalty | final mean return | settled |\n|---|---|---|\n";
            for (const auto& [pen, j] : a.policies) {
                const auto m = policy_metadata_from_json(j);
                md << "| " << detail::fmt(pen) << " | " << detail::fmt_fixed(m.final_mean_return, 1) << " | " << (m.converged ? "yes" : "no") << " |\n";
            }
            md << "\nData: learned_delays.csv";
            for (const auto& [pen, path] : a.curves) md << ", " << path.filename().string();
            md << "\n";
        }
    } catch (const json::exception& e) {
        throw InputError(dir.string() + ": artifact has unexpected structure: " + e.what());
    }

    write_text(dir / "report.md", md.str());
    std::cout << "report.md";
    for (const auto& w : written) std::cout << ' ' << w;
    std::cout << "\n";
    return kOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Wind farm zoning, load profiling and storm shutdown control"};
    app.require_subcommand(0, 1);
    app.fallthrough();

    std::string config_path;
    std::optional<std::uint64_t> seed;
    std::string out_dir;
    bool explain = false;
    app.add_option("--config", config_path, "Run configuration (JSON)");
    app.add_option("--seed", seed, "Seed for every random stream");
    app.add_option("--out", out_dir, "Output directory");
    app.add_flag("--explain-defaults", explain, "Print every default and where it comes from");

    std::string scada_flag, assignment_flag, policy_flag, artifacts_flag;
    auto* generate = app.add_subcommand("generate", "Write the planted four-zone synthetic SCADA data set");
    auto* cluster = app.add_subcommand("cluster", "Cluster turbines into operational zones");
    cluster->add_option("--scada", scada_flag, "SCADA CSV (overrides paths.scada)");
    auto* profile = app.add_subcommand("profile", "Build load duration and revolution profiles per zone");
    profile->add_option("--scada", scada_flag, "SCADA CSV (overrides paths.scada)");
    profile->add_option("--assignment", assignment_flag, "Zone assignment CSV (default OUT/assignment.csv)");
    auto* simulate_cmd = app.add_subcommand("simulate", "Simulate the storm and write the event log");
    simulate_cmd->add_option("--policy", policy_flag, "Shutdown policy JSON");
    auto* train_cmd = app.add_subcommand("train", "Train one shutdown policy per penalty");
    auto* report = app.add_subcommand("report", "Aggregate artifacts into a report");
    report->add_option("--artifacts", artifacts_flag, "Artifact directory (default OUT)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kOk : kInputError;
    }

    if (explain) {
        for (const auto& d : explain_defaults()) std::cout << d.key << " = " << d.value << "  # " << d.origin << "\n";
        if (app.get_subcommands().empty()) return kOk;
    }
    if (app.get_subcommands().empty()) {
        std::cerr << app.help();
        return kInputError;
    }

    try {
        Context ctx;
        if (!config_path.empty()) {
            ctx.cfg = load_config(config_path);
            ctx.config_dir = fs::path(config_path).parent_path();
            if (ctx.config_dir.empty()) ctx.config_dir = ".";
        }
        if (seed) ctx.cfg.seed = *seed;
        ctx.out = out_dir.empty() ? fs::path(ctx.cfg.out_dir) : fs::path(out_dir);

        if (generate->parsed()) return cmd_generate(ctx);
        if (cluster->parsed()) return cmd_cluster(ctx, scada_flag);
        if (profile->parsed()) return cmd_profile(ctx, scada_flag, assignment_flag);
        if (simulate_cmd->parsed()) return cmd_simulate(ctx, policy_flag);
        if (train_cmd->parsed()) return cmd_train(ctx);
        if (report->parsed()) return cmd_report(ctx, artifacts_flag);
    } catch (const InputError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kInputError;
    } catch (const ConfigError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kInputError;
    } catch (const ParseError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kInputError;
    } catch (const DegenerateInputError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kInputError;
    } catch (const DomainError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kInputError;
    } catch (const fs::filesystem_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kInputError;
    }
    return kOk;
}
