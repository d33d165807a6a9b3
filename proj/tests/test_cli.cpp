#include <gtest/gtest.h>

#include <cmath>

#include "support.hpp"
#include "windfleet/config.hpp"
#include "windfleet/io.hpp"

using namespace windfleet;
using testsupport::read_file;
using testsupport::run_cli;
using testsupport::TempDir;
using testsupport::write_file;
namespace fs = std::filesystem;

namespace {

json default_json() { return json::parse(read_file(testsupport::default_config())); }

// The shipped config with `patch` merged in, written next to the run's outputs.
std::string config_with(const TempDir& dir, const json& patch = json::object()) {
    auto j = default_json();
    j["paths"]["scada"] = (testsupport::source_dir() / "data" / "synthetic_scada.csv").string();
    j.merge_patch(patch);
    const auto path = dir.path / "config.json";
    write_file(path, j.dump(2));
    return path.string();
}

json read_json(const fs::path& p) { return json::parse(read_file(p)); }

}  // namespace

TEST(CliCluster, BundledDataGivesFourComponents) {
    TempDir dir("cli_cluster");
    const auto r = run_cli({"--config", testsupport::default_config().string(), "--out", dir.path.string(), "cluster"});
    ASSERT_EQ(r.status, 0) << r.output;
    EXPECT_NE(r.output.find("effective components: 4"), std::string::npos) << r.output;
    const auto zones = read_json(dir.path / "zones.json");
    EXPECT_EQ(zones["effective_components"].get<int>(), 4);
    EXPECT_EQ(zones["turbines"].get<int>(), 54);  // SCADA case: only 10/4 absent
    EXPECT_TRUE(fs::exists(dir.path / "assignment.csv"));
}

TEST(CliCluster, DeterministicOutputs) {
    TempDir a("cli_det_a"), b("cli_det_b");
    const auto cfg = config_with(a);
    ASSERT_EQ(run_cli({"--config", cfg, "--seed", "5", "--out", a.path.string(), "cluster"}).status, 0);
    ASSERT_EQ(run_cli({"--config", cfg, "--seed", "5", "--out", b.path.string(), "cluster"}).status, 0);
    EXPECT_EQ(read_file(a.path / "zones.json"), read_file(b.path / "zones.json"));
    EXPECT_EQ(read_file(a.path / "assignment.csv"), read_file(b.path / "assignment.csv"));
}

TEST(CliCluster, EmptyCsvNamesFile) {
    TempDir dir("cli_empty");
    const auto csv = dir.path / "empty_export.csv";
    write_file(csv, "");
    const auto r = run_cli({"--out", dir.path.string(), "cluster", "--scada", csv.string()});
    EXPECT_EQ(r.status, 1);
    EXPECT_NE(r.output.find("empty_export.csv"), std::string::npos) << r.output;
}

TEST(CliCluster, MissingFileIsInputError) {
    TempDir dir("cli_nofile");
    const auto r = run_cli({"--out", dir.path.string(), "cluster", "--scada", (dir.path / "nope.csv").string()});
    EXPECT_EQ(r.status, 1);
    EXPECT_NE(r.output.find("nope.csv"), std::string::npos);
}

TEST(CliCluster, NonConvergenceExitsTwo) {
    TempDir dir("cli_maxiter");
    const auto cfg = config_with(dir, {{"clustering", {{"max_iter", 1}}}});
    const auto r = run_cli({"--config", cfg, "--out", dir.path.string(), "cluster"});
    EXPECT_EQ(r.status, 2) << r.output;
    EXPECT_NE(r.output.find("did not converge"), std::string::npos);
}

TEST(CliConfig, UnknownKeyAndBadJsonAreInputErrors) {
    TempDir dir("cli_badcfg");
    const auto cfg = config_with(dir, {{"clustering", {{"truncaton", 3}}}});
    EXPECT_EQ(run_cli({"--config", cfg, "cluster"}).status, 1);
    const auto broken = dir.path / "broken.json";
    write_file(broken, "{ \"seed\": ");
    const auto r = run_cli({"--config", broken.string(), "simulate"});
    EXPECT_EQ(r.status, 1);
    EXPECT_NE(r.output.find("broken.json"), std::string::npos);
}

TEST(CliConfig, SeedFlagOverridesConfig) {
    TempDir a("cli_seed_a"), b("cli_seed_b");
    const auto cfg = config_with(a, {{"seed", 3}});
    ASSERT_EQ(run_cli({"--config", cfg, "--out", a.path.string(), "simulate"}).status, 0);
    ASSERT_EQ(run_cli({"--config", cfg, "--seed", "4", "--out", b.path.string(), "simulate"}).status, 0);
    EXPECT_EQ(read_json(a.path / "simulation.json")["seed"].get<int>(), 3);
    EXPECT_EQ(read_json(b.path / "simulation.json")["seed"].get<int>(), 4);
}

TEST(CliExplainDefaults, ListsDefaults) {
    const auto r = run_cli({"--explain-defaults"});
    EXPECT_EQ(r.status, 0);
    for (const char* key : {"clustering.truncation = 6", "clustering.tol = 1e-05", "training.sigma0 = 30", "training.decay = 0.99",
                            "training.iterations = 1000", "detection.alarm_quorum = 3", "scenario.alarm_threshold = 25"})
        EXPECT_NE(r.output.find(key), std::string::npos) << key;
}

TEST(CliProfile, WritesProfilesAfterCluster) {
    TempDir dir("cli_profile");
    const auto cfg = config_with(dir);
    ASSERT_EQ(run_cli({"--config", cfg, "--out", dir.path.string(), "cluster"}).status, 0);
    const auto r = run_cli({"--config", cfg, "--out", dir.path.string(), "profile"});
    ASSERT_EQ(r.status, 0) << r.output;
    const auto profiles = read_json(dir.path / "profiles.json");
    const auto zones = read_json(dir.path / "zones.json");
    EXPECT_EQ(profiles["profiles"].size(), zones["zones"].size());
    EXPECT_TRUE(fs::exists(dir.path / "profiles.csv"));
    EXPECT_TRUE(fs::exists(dir.path / "normality.json"));
}

TEST(CliProfile, MissingAssignmentNamesTurbine) {
    TempDir dir("cli_profile_missing");
    const auto cfg = config_with(dir);
    ASSERT_EQ(run_cli({"--config", cfg, "--out", dir.path.string(), "cluster"}).status, 0);
    // drop the row of turbine 03/2
    const auto text = read_file(dir.path / "assignment.csv");
    std::string kept;
    std::istringstream in(text);
    for (std::string line; std::getline(in, line);)
        if (line.rfind("03/2,", 0) != 0) kept += line + "\n";
    write_file(dir.path / "assignment.csv", kept);
    const auto r = run_cli({"--config", cfg, "--out", dir.path.string(), "profile"});
    EXPECT_EQ(r.status, 1);
    EXPECT_NE(r.output.find("03/2"), std::string::npos) << r.output;
}

TEST(CliSimulate, DefaultRunEmergencyStopsEveryTurbine) {
    TempDir dir("cli_sim");
    const auto r = run_cli({"--config", testsupport::default_config().string(), "--out", dir.path.string(), "simulate"});
    ASSERT_EQ(r.status, 0) << r.output;
    const auto sim = read_json(dir.path / "simulation.json");
    EXPECT_EQ(sim["emergency_stops"].get<int>(), 51);
    EXPECT_EQ(sim["planned_stops"].get<int>(), 0);
    EXPECT_TRUE(fs::exists(dir.path / "events.csv"));
    EXPECT_TRUE(fs::exists(dir.path / "wind_trace.csv"));
}

TEST(CliSimulate, OraclePolicyAvoidsEmergenciesInPolicyRows) {
    TempDir dir("cli_oracle");
    const auto cfg = load_config(config_with(dir));
    const auto oracle = grid_search_oracle(cfg.layout, cfg.scenario, RewardConfig{10}, 1, cfg.first_row, cfg.detection, cfg.seed);
    ASSERT_TRUE(oracle.detection);
    ShutdownPolicy policy = cfg.initial_policy();
    policy.theta = oracle.delays;
    const auto policy_path = dir.path / "oracle_policy.json";
    write_file(policy_path, to_json(policy, PolicyMetadata{}).dump(2));

    const auto r = run_cli({"--config", config_with(dir), "--out", dir.path.string(), "simulate", "--policy", policy_path.string()});
    ASSERT_EQ(r.status, 0) << r.output;
    const auto sim = read_json(dir.path / "simulation.json");
    const auto by_row = sim["emergency_stops_by_row"].get<std::vector<int>>();
    ASSERT_EQ(by_row.size(), 11u);
    for (int row = 3; row <= 11; ++row) EXPECT_EQ(by_row[static_cast<std::size_t>(row - 1)], 0) << "row " << row;
    EXPECT_EQ(sim["planned_stops"].get<int>(), 41);
}

TEST(CliSimulate, ZeroHorizonGivesEmptyLog) {
    TempDir dir("cli_h0");
    const auto r = run_cli({"--config", config_with(dir, {{"scenario", {{"horizon", 0}}}}), "--out", dir.path.string(), "simulate"});
    ASSERT_EQ(r.status, 0) << r.output;
    EXPECT_EQ(read_file(dir.path / "events.csv"), "timestamp,turbine,event\n");
}

TEST(CliSimulate, InvalidPolicyRejected) {
    TempDir dir("cli_badpolicy");
    const auto cfg = config_with(dir);
    const auto bad = dir.path / "policy.json";
    write_file(bad, R"({"first_row": 3, "theta": "soon"})");
    auto r = run_cli({"--config", cfg, "--out", dir.path.string(), "simulate", "--policy", bad.string()});
    EXPECT_EQ(r.status, 1);
    EXPECT_NE(r.output.find("policy.json"), std::string::npos);
    write_file(bad, "not json");
    r = run_cli({"--config", cfg, "--out", dir.path.string(), "simulate", "--policy", bad.string()});
    EXPECT_EQ(r.status, 1);
}

TEST(CliTrain, SameSeedSamePolicies) {
    TempDir a("cli_train_a"), b("cli_train_b");
    const auto cfg = config_with(a, {{"training", {{"iterations", 60}}}});
    ASSERT_EQ(run_cli({"--config", cfg, "--seed", "2", "--out", a.path.string(), "train"}).status, 0);
    ASSERT_EQ(run_cli({"--config", cfg, "--seed", "2", "--out", b.path.string(), "train"}).status, 0);
    for (const char* tag : {"P1", "P5", "P10"}) {
        const std::string policy = std::string("policy_") + tag + ".json", curve = std::string("learning_curve_") + tag + ".csv";
        ASSERT_TRUE(fs::exists(a.path / policy)) << policy;
        EXPECT_EQ(read_file(a.path / policy), read_file(b.path / policy));
        EXPECT_EQ(read_file(a.path / curve), read_file(b.path / curve));
    }
}

TEST(CliTrain, SingleIterationStaysNearInitialPolicy) {
    TempDir dir("cli_train_one");
    const auto cfg_path = config_with(dir, {{"training", {{"iterations", 1}, {"initial_delay", 60.0}}}});
    const auto cfg = load_config(cfg_path);
    ASSERT_EQ(run_cli({"--config", cfg_path, "--out", dir.path.string(), "train"}).status, 0);
    const auto initial = cfg.initial_policy().cumulative_theta();
    for (const char* tag : {"P1", "P5", "P10"}) {
        const auto p = policy_from_json(read_json(dir.path / (std::string("policy_") + tag + ".json")));
        const auto cum = p.cumulative_theta();
        ASSERT_EQ(cum.size(), initial.size());
        // a single step moves each shutdown time by at most one exploration draw
        for (std::size_t j = 0; j < cum.size(); ++j)
            EXPECT_LE(std::fabs(cum[j] - initial[j]), 5 * cfg.sigma0 * std::sqrt(static_cast<double>(j + 1))) << tag << " row " << j;
    }
}

TEST(CliReport, FullArtifactsGiveAllFiveCsvs) {
    TempDir dir("cli_report_full");
    const auto cfg = config_with(dir, {{"training", {{"iterations", 40}}}});
    for (const char* cmd : {"cluster", "profile", "simulate", "train"})
        ASSERT_EQ(run_cli({"--config", cfg, "--out", dir.path.string(), cmd}).status, 0) << cmd;
    const auto r = run_cli({"--config", cfg, "--out", dir.path.string(), "report"});
    ASSERT_EQ(r.status, 0) << r.output;
    for (const char* f : {"report.md", "zone_scatter.csv", "farm_grid_labels.csv", "load_profiles.csv", "alarm_grid.csv", "learned_delays.csv"})
        EXPECT_TRUE(fs::exists(dir.path / f)) << f;
}

TEST(CliReport, ClusterOnlyGivesZoneSections) {
    TempDir dir("cli_report_zones");
    const auto cfg = config_with(dir);
    ASSERT_EQ(run_cli({"--config", cfg, "--out", dir.path.string(), "cluster"}).status, 0);
    const auto r = run_cli({"--config", cfg, "--out", dir.path.string(), "report"});
    ASSERT_EQ(r.status, 0) << r.output;
    EXPECT_TRUE(fs::exists(dir.path / "zone_scatter.csv"));
    EXPECT_TRUE(fs::exists(dir.path / "farm_grid_labels.csv"));
    for (const char* f : {"load_profiles.csv", "alarm_grid.csv", "learned_delays.csv"}) EXPECT_FALSE(fs::exists(dir.path / f)) << f;
}

TEST(CliReport, CorruptedJsonNamesFile) {
    TempDir dir("cli_report_bad");
    const auto cfg = config_with(dir);
    ASSERT_EQ(run_cli({"--config", cfg, "--out", dir.path.string(), "cluster"}).status, 0);
    write_file(dir.path / "zones.json", "{\"zones\": [");
    const auto r = run_cli({"--config", cfg, "--out", dir.path.string(), "report"});
    EXPECT_EQ(r.status, 1);
    EXPECT_NE(r.output.find("zones.json"), std::string::npos) << r.output;
}

TEST(CliReport, MissingArtifactIsInputError) {
    TempDir dir("cli_report_missing");
    const auto cfg = config_with(dir);
    ASSERT_EQ(run_cli({"--config", cfg, "--out", dir.path.string(), "cluster"}).status, 0);
    fs::remove(dir.path / "assignment.csv");
    const auto r = run_cli({"--config", cfg, "--out", dir.path.string(), "report"});
    EXPECT_EQ(r.status, 1);
    EXPECT_NE(r.output.find("assignment.csv"), std::string::npos);
    TempDir empty("cli_report_empty");
    EXPECT_EQ(run_cli({"--out", empty.path.string(), "report"}).status, 1);
}
