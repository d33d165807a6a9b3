#pragma once

// Row-based preventive shutdown learned with REINFORCE. Time is measured in
// seconds from storm detection; row r (r >= first_row) stops once the
// cumulative delay d_first_row + ... + d_r has elapsed.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "windfleet/detection.hpp"
#include "windfleet/error.hpp"
#include "windfleet/farm.hpp"
#include "windfleet/farmsim.hpp"

namespace windfleet {

struct ShutdownPolicy {
    int first_row = 3;
    /// Mean delay per row, theta[j] belongs to row first_row + j.
    std::vector<double> theta;
    double sigma0 = 30.0;
    double decay = 0.99;

    void validate() const {
        if (!(sigma0 > 0.0)) throw ConfigError("sigma0 must be positive");
        if (!(decay > 0.0 && decay <= 1.0)) throw ConfigError("decay must lie in (0, 1]");
        if (first_row < 1) throw ConfigError("first policy row must be at least 1");
    }

    int last_row() const { return first_row + static_cast<int>(theta.size()) - 1; }

    /// Exploration spread at iteration i.
    double sigma(int iteration) const { return sigma0 * std::pow(decay, iteration); }

    std::vector<double> cumulative_theta() const {
        std::vector<double> out;
        double acc = 0.0;
        for (double t : theta) out.push_back(acc += std::max(0.0, t));
        return out;
    }

    static ShutdownPolicy for_layout(const FarmLayout& layout, int first_row = 3, double initial_delay = 0.0) {
        ShutdownPolicy p;
        p.first_row = first_row;
        p.theta.assign(static_cast<std::size_t>(std::max(0, layout.rows - first_row + 1)), initial_delay);
        return p;
    }
};

struct RewardConfig {
    double penalty = 10.0;

    void validate() const {
        if (!(penalty > 0.0)) throw ConfigError("penalty P must be positive");
    }
};

/// Which return weights each score term.
///  - episode: the whole episode return for every row's delay.
///  - rows_to_go: row j's delay is scored with the return of rows j..last,
///    the only rows it can influence.
///  - cumulative: the update is applied to each row's cumulative shutdown
///    time, whose sampling distribution is N(sum theta, (j+1) sigma^2), using
///    only that row's own return, then mapped back to per-row delays.
enum class GradientEstimator { episode, rows_to_go, cumulative };

/// Advantage baseline.
///  - moving_average: exponential moving average of past returns.
///  - counterfactual: the same episode's return with the sampled action
///    replaced by its mean; independent of the draw being scored.
enum class BaselineKind { none, moving_average, counterfactual };

struct TrainingConfig {
    int iterations = 1000;
    double learning_rate = 1.0;
    GradientEstimator estimator = GradientEstimator::cumulative;
    BaselineKind baseline = BaselineKind::counterfactual;
    double baseline_decay = 0.9;
    /// Divide advantages by their running root-mean-square.
    bool normalize_returns = true;
    double normalizer_decay = 0.9;
    /// Scale the step by sigma^2, the inverse Fisher information of a
    /// Gaussian mean, so the step size stays commensurate with exploration.
    bool natural_gradient = true;
    std::uint64_t seed = 0;

    void validate() const {
        if (iterations < 1) throw ConfigError("iterations must be at least 1");
        if (!(learning_rate >= 0.0)) throw ConfigError("learning rate must be non-negative");
        if (!(baseline_decay >= 0.0 && baseline_decay < 1.0)) throw ConfigError("baseline decay must lie in [0, 1)");
        if (!(normalizer_decay >= 0.0 && normalizer_decay < 1.0)) throw ConfigError("normalizer decay must lie in [0, 1)");
    }
};

struct SampledDelays {
    /// Gaussian draws before clamping; these enter the score function.
    std::vector<double> raw;
    /// Executed delays, negative draws clamped to zero.
    std::vector<double> delays;
};

inline SampledDelays sample_delays(const ShutdownPolicy& policy, int iteration, std::mt19937_64& rng) {
    if (iteration < 0) throw DomainError("iteration must be non-negative");
    const double sigma = policy.sigma(iteration);
    SampledDelays out;
    for (double mean : policy.theta) {
        const double d = std::normal_distribution<double>(mean, sigma)(rng);
        out.raw.push_back(d);
        out.delays.push_back(std::max(0.0, d));
    }
    return out;
}

/// +1 while producing before the storm, -P while producing in it, 0 once stopped.
inline double reward(double t, double storm_time, double cum_delay, double penalty) {
    if (t <= cum_delay) return t < storm_time ? 1.0 : -penalty;
    return 0.0;
}

/// Storm arrival of one turbine relative to detection.
struct TurbineExposure {
    int row = 0;
    double storm_time = std::numeric_limits<double>::infinity();
};

namespace detail {

/// Sum of reward(t, storm, cum, P) over integer t in [0, horizon].
inline double row_seconds_return(double storm_time, double cum_delay, double horizon, double penalty) {
    const double upper = std::min(std::floor(horizon), std::floor(cum_delay));
    if (upper < 0.0) return 0.0;
    // t < storm_time  <=>  t <= ceil(storm_time) - 1 for integer t
    const double first_storm_second = std::isinf(storm_time) ? std::numeric_limits<double>::infinity() : std::ceil(storm_time);
    const double pos_end = std::min(upper, first_storm_second - 1.0);
    const double positive = pos_end >= 0.0 ? pos_end + 1.0 : 0.0;
    const double pen_start = std::max(0.0, first_storm_second);
    const double negative = upper >= pen_start ? upper - pen_start + 1.0 : 0.0;
    return positive - penalty * negative;
}

}  // namespace detail

/// Episode return for per-turbine exposures. `cum_delays[j]` is the
/// cumulative delay of row first_row + j; other rows earn nothing.
inline double episode_return(std::span<const double> cum_delays, int first_row, std::span<const TurbineExposure> turbines,
                             double horizon, double penalty) {
    double total = 0.0;
    for (const auto& tb : turbines) {
        const int j = tb.row - first_row;
        if (j < 0 || j >= static_cast<int>(cum_delays.size())) continue;
        total += detail::row_seconds_return(tb.storm_time, cum_delays[static_cast<std::size_t>(j)], horizon, penalty);
    }
    return total;
}

/// Row form: `delays` and `arrivals` are indexed from the first policy row,
/// every active turbine of a row shares the row's arrival.
inline double episode_return(std::span<const double> delays, std::span<const double> arrivals, double horizon,
                             double penalty, std::span<const int> active_per_row) {
    if (delays.size() != arrivals.size() || delays.size() != active_per_row.size())
        throw DomainError("delays, arrivals and row counts must align");
    double total = 0.0, cum = 0.0;
    for (std::size_t j = 0; j < delays.size(); ++j) {
        cum += std::max(0.0, delays[j]);
        total += active_per_row[j] * detail::row_seconds_return(arrivals[j], cum, horizon, penalty);
    }
    return total;
}

struct UpdateResult {
    std::vector<double> theta;
    bool skipped = false;
    std::string warning;
};

/// theta_r += alpha (G - b) (d_r - theta_r) / sigma^2
inline UpdateResult reinforce_update(std::span<const double> theta, std::span<const double> sampled, double ret,
                                     double baseline, double sigma, double alpha) {
    if (!(sigma > 0.0)) throw DomainError("sigma must be positive");
    if (theta.size() != sampled.size()) throw DomainError("theta and samples must align");
    UpdateResult out{{theta.begin(), theta.end()}, false, {}};
    if (!std::isfinite(ret) || !std::isfinite(baseline)) {
        out.skipped = true;
        out.warning = "non-finite return, update skipped";
        return out;
    }
    const double advantage = ret - baseline;
    for (std::size_t j = 0; j < theta.size(); ++j)
        out.theta[j] += alpha * advantage * (sampled[j] - theta[j]) / (sigma * sigma);
    return out;
}

/// What the controller sees of one storm realization.
struct StormObservation {
    std::optional<std::int64_t> detection;
    std::vector<TurbineExposure> turbines;
    double horizon = 0.0;  // relative to detection
};

inline StormObservation observe_storm(const FarmLayout& layout, const StormScenario& scenario, const DetectionRule& rule,
                                      std::uint64_t seed) {
    const auto sim = simulate(layout, scenario, std::nullopt, seed, {.record_traces = false});
    StormObservation obs;
    obs.detection = detect_event(sim.log.alarms, rule);
    if (!obs.detection) return obs;
    const double t0 = static_cast<double>(*obs.detection);
    obs.horizon = scenario.horizon - 1 - t0;
    std::map<TurbineId, double> alarm_at;
    for (const auto& a : sim.log.alarms) alarm_at.emplace(a.turbine, static_cast<double>(a.timestamp));
    for (const auto& id : layout.active_turbines()) {
        const auto it = alarm_at.find(id);
        obs.turbines.push_back({id.row, it == alarm_at.end() ? std::numeric_limits<double>::infinity() : it->second - t0});
    }
    return obs;
}

struct IterationRecord {
    int iteration = 0;
    double ret = 0.0;
    double sigma = 0.0;
    bool detected = true;
};

struct TrainingResult {
    ShutdownPolicy policy;
    std::vector<IterationRecord> curve;
    /// Relative change of the mean return between the two halves of the last 10% of iterations.
    double final_relative_change = 0.0;
    bool converged = false;
    int undetected_episodes = 0;
    int skipped_updates = 0;
};

/// Episodes use storm realizations drawn from `episode_seed(seed, i)`;
/// a noise-free scenario gives the same storm every episode.
inline std::uint64_t episode_seed(std::uint64_t seed, int iteration) {
    return seed * 0x9E3779B97F4A7C15ULL + static_cast<std::uint64_t>(iteration) + 1;
}

namespace detail {

/// Return of each policy row for the executed (clamped) delays.
inline std::vector<double> row_returns(const StormObservation& obs, int first_row, std::span<const double> delays,
                                       double penalty) {
    std::vector<double> cum(delays.size()), out(delays.size(), 0.0);
    double acc = 0.0;
    for (std::size_t j = 0; j < delays.size(); ++j) cum[j] = acc += std::max(0.0, delays[j]);
    for (const auto& tb : obs.turbines) {
        const int j = tb.row - first_row;
        if (j < 0 || j >= static_cast<int>(delays.size())) continue;
        out[static_cast<std::size_t>(j)] += row_seconds_return(tb.storm_time, cum[static_cast<std::size_t>(j)], obs.horizon, penalty);
    }
    return out;
}

inline std::vector<double> suffix_sums(std::span<const double> v) {
    std::vector<double> out(v.size(), 0.0);
    for (std::size_t j = v.size(); j-- > 0;) out[j] = v[j] + (j + 1 < v.size() ? out[j + 1] : 0.0);
    return out;
}

inline std::vector<double> prefix_sums(std::span<const double> v) {
    std::vector<double> out(v.size(), 0.0);
    double acc = 0.0;
    for (std::size_t j = 0; j < v.size(); ++j) out[j] = acc += v[j];
    return out;
}

}  // namespace detail

inline TrainingResult train(const FarmLayout& layout, const StormScenario& scenario, const RewardConfig& reward_cfg,
                            const TrainingConfig& cfg, ShutdownPolicy policy, const DetectionRule& rule = {}) {
    layout.validate();
    scenario.validate();
    reward_cfg.validate();
    cfg.validate();
    policy.validate();
    rule.validate();

    TrainingResult result;
    auto rng = make_rng(cfg.seed, {0x7a11u});
    const bool stochastic_env = scenario.row_jitter_std > 0.0 || scenario.gust_noise_std > 0.0;
    std::optional<StormObservation> fixed_obs;
    if (!stochastic_env) fixed_obs = observe_storm(layout, scenario, rule, cfg.seed);

    const std::size_t rows = policy.theta.size();
    const double penalty = reward_cfg.penalty;
    std::vector<double> moving(rows, 0.0), mean_square(rows, 0.0);
    bool have_moving = false;
    double ms_weight = 0.0;  // bias correction of the running mean square

    // Per-coordinate return for the given delays; coordinates are rows for
    // the delay estimators and cumulative shutdown times otherwise.
    auto coordinate_returns = [&](const StormObservation& obs, std::span<const double> delays) {
        const auto per_row = detail::row_returns(obs, policy.first_row, delays, penalty);
        switch (cfg.estimator) {
            case GradientEstimator::episode: {
                double total = 0.0;
                for (double r : per_row) total += r;
                return std::vector<double>(rows, total);
            }
            case GradientEstimator::rows_to_go: return detail::suffix_sums(per_row);
            case GradientEstimator::cumulative: return per_row;
        }
        return per_row;
    };

    for (int i = 0; i < cfg.iterations; ++i) {
        const double sigma = policy.sigma(i);
        const auto sample = sample_delays(policy, i, rng);
        const StormObservation obs = fixed_obs ? *fixed_obs : observe_storm(layout, scenario, rule, episode_seed(cfg.seed, i));

        IterationRecord rec{i, 0.0, sigma, obs.detection.has_value()};
        if (!obs.detection) {
            ++result.undetected_episodes;
            result.curve.push_back(rec);
            continue;
        }
        for (double r : detail::row_returns(obs, policy.first_row, sample.delays, penalty)) rec.ret += r;
        result.curve.push_back(rec);

        const auto value = coordinate_returns(obs, sample.delays);
        std::vector<double> base(rows, 0.0);
        if (cfg.baseline == BaselineKind::moving_average) {
            if (!have_moving) {
                moving = value;
                have_moving = true;
            }
            base = moving;
        } else if (cfg.baseline == BaselineKind::counterfactual) {
            if (cfg.estimator == GradientEstimator::rows_to_go) {
                for (std::size_t j = 0; j < rows; ++j) {
                    auto delays = sample.delays;
                    delays[j] = std::max(0.0, policy.theta[j]);
                    base[j] = coordinate_returns(obs, delays)[j];
                }
            } else {
                base = coordinate_returns(obs, policy.theta);
            }
        }

        // Coordinates being updated: the delays themselves, or their prefix sums.
        const bool cumulative = cfg.estimator == GradientEstimator::cumulative;
        std::vector<double> mean = cumulative ? detail::prefix_sums(policy.theta) : policy.theta;
        const std::vector<double> drawn = cumulative ? detail::prefix_sums(sample.raw) : sample.raw;

        ms_weight = cfg.normalizer_decay * ms_weight + (1.0 - cfg.normalizer_decay);
        for (std::size_t j = 0; j < rows; ++j) {
            const double spread = cumulative ? sigma * std::sqrt(static_cast<double>(j + 1)) : sigma;
            double scale = 1.0;
            if (cfg.normalize_returns) {
                const double dev = value[j] - base[j];
                mean_square[j] = cfg.normalizer_decay * mean_square[j] + (1.0 - cfg.normalizer_decay) * dev * dev;
                scale = std::sqrt(mean_square[j] / ms_weight) + 1e-8;
            }
            const double alpha = cfg.learning_rate * (cfg.natural_gradient ? spread * spread : 1.0);
            const double m[] = {mean[j]};
            const double d[] = {drawn[j]};
            auto upd = reinforce_update(m, d, value[j] / scale, base[j] / scale, spread, alpha);
            if (upd.skipped) {
                ++result.skipped_updates;
                continue;
            }
            mean[j] = upd.theta[0];
        }
        if (cumulative) {
            // Back to delays, keeping shutdown times non-decreasing.
            double prev = 0.0;
            for (std::size_t j = 0; j < rows; ++j) {
                policy.theta[j] = std::max(0.0, mean[j] - prev);
                prev += policy.theta[j];
            }
        } else {
            // Negative means only ever execute as zero delay.
            for (std::size_t j = 0; j < rows; ++j) policy.theta[j] = std::max(0.0, mean[j]);
        }
        if (cfg.baseline == BaselineKind::moving_average)
            for (std::size_t j = 0; j < rows; ++j)
                if (std::isfinite(value[j])) moving[j] = cfg.baseline_decay * moving[j] + (1.0 - cfg.baseline_decay) * value[j];
    }

    // Convergence: mean return over the two halves of the final 10% agree within 1%.
    const std::size_t tail = std::max<std::size_t>(2, result.curve.size() / 10);
    if (result.curve.size() >= tail) {
        const std::size_t start = result.curve.size() - tail, mid = start + tail / 2;
        double a = 0.0, b = 0.0;
        for (std::size_t k = start; k < mid; ++k) a += result.curve[k].ret;
        for (std::size_t k = mid; k < result.curve.size(); ++k) b += result.curve[k].ret;
        a /= static_cast<double>(mid - start);
        b /= static_cast<double>(result.curve.size() - mid);
        result.final_relative_change = std::fabs(b - a) / std::max(1e-12, std::fabs(a));
        result.converged = result.final_relative_change < 0.01;
    }
    result.policy = std::move(policy);
    return result;
}

struct OracleResult {
    std::vector<double> cum_delays;
    std::vector<double> delays;
    double optimal_return = 0.0;
    std::optional<std::int64_t> detection;
};

/// Exhaustive search over cumulative shutdown times on a grid of
/// `resolution_s`, subject to non-decreasing shutdown times across rows.
inline OracleResult grid_search_oracle(const FarmLayout& layout, const StormScenario& scenario, const RewardConfig& reward_cfg,
                                       int resolution_s = 1, int first_row = 3, const DetectionRule& rule = {},
                                       std::uint64_t seed = 0) {
    reward_cfg.validate();
    if (resolution_s < 1) throw DomainError("oracle resolution must be at least 1 s");
    const auto obs = observe_storm(layout, scenario, rule, seed);
    OracleResult out;
    out.detection = obs.detection;
    const int rows = std::max(0, layout.rows - first_row + 1);
    if (!obs.detection || rows == 0) {
        out.cum_delays.assign(static_cast<std::size_t>(rows), 0.0);
        out.delays = out.cum_delays;
        return out;
    }
    const int steps = obs.horizon >= 0 ? static_cast<int>(obs.horizon) / resolution_s + 1 : 1;

    // best[j][g]: optimal return of rows first_row..first_row+j with row j stopping at g * resolution.
    std::vector<std::vector<double>> best(static_cast<std::size_t>(rows), std::vector<double>(static_cast<std::size_t>(steps)));
    std::vector<std::vector<int>> from(static_cast<std::size_t>(rows), std::vector<int>(static_cast<std::size_t>(steps), 0));
    for (int j = 0; j < rows; ++j) {
        std::vector<TurbineExposure> row_turbines;
        for (const auto& t : obs.turbines)
            if (t.row == first_row + j) row_turbines.push_back(t);
        double prefix_best = -std::numeric_limits<double>::infinity();
        int prefix_arg = 0;
        for (int g = 0; g < steps; ++g) {
            const double c = static_cast<double>(g) * resolution_s;
            double row_ret = 0.0;
            for (const auto& t : row_turbines)
                row_ret += detail::row_seconds_return(t.storm_time, c, obs.horizon, reward_cfg.penalty);
            if (j == 0) {
                best[0][static_cast<std::size_t>(g)] = row_ret;
            } else {
                if (best[static_cast<std::size_t>(j - 1)][static_cast<std::size_t>(g)] > prefix_best) {
                    prefix_best = best[static_cast<std::size_t>(j - 1)][static_cast<std::size_t>(g)];
                    prefix_arg = g;
                }
                best[static_cast<std::size_t>(j)][static_cast<std::size_t>(g)] = row_ret + prefix_best;
                from[static_cast<std::size_t>(j)][static_cast<std::size_t>(g)] = prefix_arg;
            }
        }
    }
    const auto& last = best.back();
    int g = static_cast<int>(std::max_element(last.begin(), last.end()) - last.begin());
    out.optimal_return = last[static_cast<std::size_t>(g)];
    out.cum_delays.assign(static_cast<std::size_t>(rows), 0.0);
    for (int j = rows - 1; j >= 0; --j) {
        out.cum_delays[static_cast<std::size_t>(j)] = static_cast<double>(g) * resolution_s;
        g = from[static_cast<std::size_t>(j)][static_cast<std::size_t>(g)];
    }
    double prev = 0.0;
    for (double c : out.cum_delays) {
        out.delays.push_back(c - prev);
        prev = c;
    }
    return out;
}

}  // namespace windfleet
