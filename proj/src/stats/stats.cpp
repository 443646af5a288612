#include "acd/stats/stats.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>

#include <boost/math/distributions/students_t.hpp>

#include "acd/common/rand.hpp"

namespace acd::stats {

namespace {

double mean_of(const std::vector<double>& v) {
    return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

double sample_std(const std::vector<double>& v, double mean) {
    double ss = 0.0;
    for (double x : v) ss += (x - mean) * (x - mean);
    return std::sqrt(ss / static_cast<double>(v.size() - 1));
}

}  // namespace

Interval mean_ci(const std::vector<double>& samples, double level) {
    const size_t n = samples.size();
    if (n < 2) throw InsufficientDataError("mean_ci needs at least 2 samples");
    const double m = mean_of(samples);
    const double s = sample_std(samples, m);
    boost::math::students_t dist(static_cast<double>(n - 1));
    const double t = boost::math::quantile(dist, 0.5 + level / 2.0);
    const double half = t * s / std::sqrt(static_cast<double>(n));
    return {m, m - half, m + half};
}

Interval mean_ci_bootstrap(const std::vector<double>& samples, double level, uint64_t seed,
                           int resamples) {
    const size_t n = samples.size();
    if (n < 2) throw InsufficientDataError("mean_ci_bootstrap needs at least 2 samples");
    Rng rng(seed);
    std::vector<double> means(static_cast<size_t>(resamples));
    for (auto& m : means) {
        double acc = 0.0;
        for (size_t i = 0; i < n; ++i) acc += samples[uniform_index(rng, n)];
        m = acc / static_cast<double>(n);
    }
    std::sort(means.begin(), means.end());
    const double tail = (1.0 - level) / 2.0;
    auto pick = [&](double q) {
        double pos = q * static_cast<double>(means.size() - 1);
        size_t lo = static_cast<size_t>(pos);
        size_t hi = std::min(lo + 1, means.size() - 1);
        double frac = pos - static_cast<double>(lo);
        return means[lo] + frac * (means[hi] - means[lo]);
    };
    return {mean_of(samples), pick(tail), pick(1.0 - tail)};
}

std::pair<double, double> iqr(const std::vector<double>& samples) {
    if (samples.size() < 4) throw InsufficientDataError("iqr needs at least 4 samples");
    std::vector<double> v(samples);
    std::sort(v.begin(), v.end());
    auto quantile = [&](double q) {
        double pos = q * static_cast<double>(v.size() - 1);
        size_t lo = static_cast<size_t>(pos);
        size_t hi = std::min(lo + 1, v.size() - 1);
        double frac = pos - static_cast<double>(lo);
        return v[lo] + frac * (v[hi] - v[lo]);
    };
    return {quantile(0.25), quantile(0.75)};
}

double cvar(const std::vector<double>& samples, double alpha) {
    if (!(alpha > 0.0 && alpha <= 1.0)) throw std::invalid_argument("cvar alpha must be in (0, 1]");
    if (samples.empty()) throw InsufficientDataError("cvar needs at least 1 sample");
    std::vector<double> v(samples);
    std::sort(v.begin(), v.end());
    const size_t k = static_cast<size_t>(
        std::ceil(alpha * static_cast<double>(v.size()) - 1e-12));
    double acc = 0.0;
    for (size_t i = 0; i < k; ++i) acc += v[i];
    return acc / static_cast<double>(k);
}

EvalStats summarize(const std::vector<double>& per_run_means, double ci_level,
                    double cvar_alpha) {
    EvalStats s;
    s.n_runs = static_cast<int>(per_run_means.size());
    s.ci_level = ci_level;
    s.cvar_alpha = cvar_alpha;
    Interval ci = mean_ci(per_run_means, ci_level);
    s.mean = ci.mean;
    s.ci_low = ci.ci_low;
    s.ci_high = ci.ci_high;
    if (per_run_means.size() >= 4) {
        auto [q1, q3] = iqr(per_run_means);
        s.q1 = q1;
        s.q3 = q3;
    } else {
        s.q1 = *std::min_element(per_run_means.begin(), per_run_means.end());
        s.q3 = *std::max_element(per_run_means.begin(), per_run_means.end());
    }
    s.cvar_value = cvar(per_run_means, cvar_alpha);
    return s;
}

nlohmann::json eval_stats_to_json(const EvalStats& s) {
    return nlohmann::json{{"n_runs", s.n_runs}, {"mean", s.mean},
                          {"ci_low", s.ci_low}, {"ci_high", s.ci_high},
                          {"ci_level", s.ci_level}, {"iqr", {{"q1", s.q1}, {"q3", s.q3}}},
                          {"cvar", {{"alpha", s.cvar_alpha}, {"value", s.cvar_value}}}};
}

EvalStats eval_stats_from_json(const nlohmann::json& j) {
    EvalStats s;
    s.n_runs = j.at("n_runs").get<int>();
    s.mean = j.at("mean").get<double>();
    s.ci_low = j.at("ci_low").get<double>();
    s.ci_high = j.at("ci_high").get<double>();
    s.ci_level = j.at("ci_level").get<double>();
    s.q1 = j.at("iqr").at("q1").get<double>();
    s.q3 = j.at("iqr").at("q3").get<double>();
    s.cvar_alpha = j.at("cvar").at("alpha").get<double>();
    s.cvar_value = j.at("cvar").at("value").get<double>();
    return s;
}

std::string format_score(const EvalStats& s) {
    char buf[96];
    std::snprintf(buf, sizeof buf, "%.1f (%.1f, %.1f)", s.mean, s.ci_high, s.ci_low);
    return buf;
}

ConvergenceVerdict detect_convergence(const std::vector<double>& values,
                                      const std::vector<int64_t>& timesteps, int window,
                                      double epsilon) {
    ConvergenceVerdict verdict;
    verdict.window = window;
    verdict.epsilon = epsilon;
    const int n = static_cast<int>(values.size());
    if (n < 2 * window)
        throw InsufficientDataError("convergence detection needs at least 2*window points");
    if (!timesteps.empty() && timesteps.size() != values.size())
        throw std::invalid_argument("timesteps/values length mismatch");

    auto window_mean = [&](int end_inclusive) {
        double acc = 0.0;
        for (int i = end_inclusive - window + 1; i <= end_inclusive; ++i)
            acc += values[static_cast<size_t>(i)];
        return acc / window;
    };

    for (int i = 2 * window - 1; i < n; ++i) {
        const double prev = window_mean(i - window);
        const double last = window_mean(i);
        const double tol = epsilon * std::abs(prev);
        double ss = 0.0;
        for (int k = i - window + 1; k <= i; ++k) {
            const double d = values[static_cast<size_t>(k)] - last;
            ss += d * d;
        }
        const double sd = std::sqrt(ss / window);
        if (std::abs(last - prev) <= tol && sd <= tol) {
            verdict.converged = true;
            verdict.step_of_convergence =
                timesteps.empty() ? static_cast<int64_t>(i) : timesteps[static_cast<size_t>(i)];
            return verdict;
        }
    }
    return verdict;
}

ConvergenceVerdict detect_convergence(const std::vector<double>& values, int window,
                                      double epsilon) {
    return detect_convergence(values, {}, window, epsilon);
}

}  // namespace acd::stats
