#pragma once

#include "acd/exp/plan.hpp"
#include "acd/stats/stats.hpp"

namespace acd::exp {

struct CellStats {
    stats::EvalStats stats;
    std::vector<double> per_run_means;
    bool failed = false;

    bool operator==(const CellStats&) const = default;
};

struct MatrixResult {
    std::string name;
    std::vector<std::string> row_labels;
    std::vector<std::string> col_labels;
    std::vector<std::vector<CellStats>> cells;   // [row][col]
    std::vector<CellStats> random_baseline;      // one per evaluation column
    nlohmann::json metadata;
};

struct CurveSet {
    std::string label;
    std::vector<int64_t> timesteps;
    std::vector<double> mean, ci_low, ci_high;        // across runs, per checkpoint
    std::vector<std::vector<double>> run_values;      // [run][checkpoint]
    CellStats final_stats;                            // final-checkpoint summary
    bool failed = false;
};

struct AblationResult {
    std::string name;
    std::vector<CurveSet> variants;
    CellStats random_baseline;
    nlohmann::json metadata;
};

// Mean return per episode for the uniform-random defender.
std::vector<double> random_episode_returns(const env::EnvConfig& cfg, uint64_t seed,
                                           int episodes);
// The gain-attribution baseline: n_runs independent random-policy evaluations.
stats::EvalStats run_random_baseline(const env::EnvConfig& cfg, int n_runs, int eval_episodes,
                                     uint64_t seed);

// Matrix experiments: train one policy per (row, run), evaluate it under
// every column, aggregate per-run means per cell. Artifacts land under
// plan.out_dir (cells/<row>/train/<run>, cells/<row>/<col>/<run>); completed
// cells are reused on re-run, so interrupted plans resume where they stopped.
MatrixResult run_turn_order_matrix(const ExperimentPlan& plan, int jobs = 1);
MatrixResult run_adversary_matrix(const ExperimentPlan& plan, int jobs = 1);

// Hyperparameter ablation: per-variant training curves with cross-run CI bands.
AblationResult run_hparam_ablation(const ExperimentPlan& plan, int jobs = 1);

// Re-aggregates results from an existing plan directory without running
// anything; throws if artifacts are missing.
MatrixResult collect_matrix(const ExperimentPlan& plan);
AblationResult collect_ablation(const ExperimentPlan& plan);

}  // namespace acd::exp
