#pragma once

// Helpers shared by the unit tests and the acceptance binary.

#include <array>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <random>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <sys/wait.h>
#include <unistd.h>

#include <Eigen/Dense>

namespace testsupport {

namespace fs = std::filesystem;

// Hubert-Arabie adjusted Rand index from the contingency table.
inline double adjusted_rand_index(const std::vector<int>& a, const std::vector<int>& b) {
    std::map<std::pair<int, int>, double> joint;
    std::map<int, double> ra, rb;
    for (std::size_t i = 0; i < a.size(); ++i) {
        joint[{a[i], b[i]}] += 1;
        ra[a[i]] += 1;
        rb[b[i]] += 1;
    }
    auto pairs = [](double x) { return x * (x - 1) / 2; };
    double index = 0, sa = 0, sb = 0;
    for (const auto& [k, v] : joint) index += pairs(v);
    for (const auto& [k, v] : ra) sa += pairs(v);
    for (const auto& [k, v] : rb) sb += pairs(v);
    const double expected = sa * sb / pairs(static_cast<double>(a.size()));
    const double max_index = (sa + sb) / 2;
    if (max_index == expected) return 1.0;
    return (index - expected) / (max_index - expected);
}

struct Planted {
    Eigen::MatrixXd points;
    std::vector<int> truth;
};

// 15 points around each corner of a square with side 6, unit spread.
inline Planted four_blobs(std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> nd;
    const double centres[4][2] = {{0, 0}, {6, 0}, {0, 6}, {6, 6}};
    Planted p;
    p.points.resize(60, 2);
    for (int k = 0; k < 4; ++k)
        for (int i = 0; i < 15; ++i) {
            p.points(k * 15 + i, 0) = centres[k][0] + nd(rng);
            p.points(k * 15 + i, 1) = centres[k][1] + nd(rng);
            p.truth.push_back(k);
        }
    return p;
}

struct TempDir {
    fs::path path;
    explicit TempDir(const std::string& tag) {
        path = fs::temp_directory_path() / ("windfleet_" + tag + "_" + std::to_string(::getpid()));
        fs::remove_all(path);
        fs::create_directories(path);
    }
    ~TempDir() {
        std::error_code ec;
        fs::remove_all(path, ec);
    }
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;
};

inline std::string read_file(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

inline void write_file(const fs::path& p, const std::string& text) {
    std::ofstream out(p, std::ios::binary);
    out << text;
}

inline std::string quote(const std::string& s) {
    std::string out = "'";
    for (char c : s) {
        if (c == '\'') out += "'\\''";
        else out += c;
    }
    return out + "'";
}

struct RunResult {
    int status = -1;
    std::string output;  // stdout and stderr
};

// Runs the CLI with the given arguments and captures its combined output.
inline RunResult run_cli(const std::vector<std::string>& args) {
    std::string cmd = quote(WINDFLEET_CLI);
    for (const auto& a : args) cmd += " " + quote(a);
    cmd += " 2>&1";
    RunResult r;
    FILE* pipe = ::popen(cmd.c_str(), "r");
    if (!pipe) return r;
    std::array<char, 4096> buf{};
    std::size_t got = 0;
    while ((got = std::fread(buf.data(), 1, buf.size(), pipe)) > 0) r.output.append(buf.data(), got);
    const int raw = ::pclose(pipe);
    r.status = WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
    return r;
}

inline fs::path source_dir() { return fs::path(WINDFLEET_SOURCE_DIR); }
inline fs::path default_config() { return source_dir() / "configs" / "default.json"; }

}  // namespace testsupport
