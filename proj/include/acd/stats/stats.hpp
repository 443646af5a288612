#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <vector>

#include <json.hpp>

namespace acd::stats {

struct InsufficientDataError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct Interval {
    double mean = 0.0;
    double ci_low = 0.0;
    double ci_high = 0.0;
};

// Student-t interval on the mean: mean +/- t_{level, n-1} * s / sqrt(n).
// Requires n >= 2.
Interval mean_ci(const std::vector<double>& samples, double level = 0.95);

// Percentile bootstrap alternative (10,000 resamples, seeded).
Interval mean_ci_bootstrap(const std::vector<double>& samples, double level, uint64_t seed,
                           int resamples = 10'000);

// Linear-interpolation quantiles at 0.25 / 0.75. Requires n >= 4.
std::pair<double, double> iqr(const std::vector<double>& samples);

// Mean of the worst ceil(alpha * n) samples (lowest values). 0 < alpha <= 1.
double cvar(const std::vector<double>& samples, double alpha);

// The full per-condition summary reported in tables.
struct EvalStats {
    int n_runs = 0;
    double mean = 0.0;
    double ci_low = 0.0;
    double ci_high = 0.0;
    double ci_level = 0.95;
    double q1 = 0.0;
    double q3 = 0.0;
    double cvar_alpha = 0.25;
    double cvar_value = 0.0;

    bool operator==(const EvalStats&) const = default;
};

// Aggregates per-run mean returns (one sample per run). IQR fields fall back
// to the min/max when n < 4; CI requires n >= 2.
EvalStats summarize(const std::vector<double>& per_run_means, double ci_level = 0.95,
                    double cvar_alpha = 0.25);

nlohmann::json eval_stats_to_json(const EvalStats& s);
EvalStats eval_stats_from_json(const nlohmann::json& j);

// "-17.2 (-16.7, -17.7)": mean then (upper, lower), one decimal place.
std::string format_score(const EvalStats& s);

struct ConvergenceVerdict {
    bool converged = false;
    std::optional<int64_t> step_of_convergence;  // timestep of the deciding evaluation
    int window = 10;
    double epsilon = 0.05;
};

// Plateau detector: converged at the first index where the last `window`
// evaluations differ from the previous window's mean by at most
// epsilon * |previous mean| and their standard deviation stays within the
// same tolerance. Requires at least 2 * window points.
ConvergenceVerdict detect_convergence(const std::vector<double>& values,
                                      const std::vector<int64_t>& timesteps, int window = 10,
                                      double epsilon = 0.05);
ConvergenceVerdict detect_convergence(const std::vector<double>& values, int window = 10,
                                      double epsilon = 0.05);

}  // namespace acd::stats
