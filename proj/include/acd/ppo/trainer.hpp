#pragma once

#include <string>
#include <vector>

#include "acd/env/environment.hpp"
#include "acd/ppo/ppo.hpp"

namespace acd::ppo {

struct TrainOptions {
    int64_t eval_every = 50'000;
    int eval_episodes = 100;
    Topology topology = Topology::Separate;
};

struct EvalPoint {
    int64_t timestep;
    double mean_return;
};

struct MetricsPoint {
    int64_t timestep;
    UpdateMetrics metrics;
};

struct RunRecord {
    uint64_t seed = 0;
    Hyperparameters hparams;
    std::vector<EvalPoint> eval_curve;       // greedy-policy mean return over eval_episodes
    std::vector<MetricsPoint> metrics_curve; // one entry per ppo_update
    ActorCritic final_params;
    double wall_time = 0.0;
    bool aborted = false;                    // numeric failure; curves up to that point kept
    std::string abort_note;

    double final_return() const { return eval_curve.empty() ? 0.0 : eval_curve.back().mean_return; }
};

// Mean episodic return of the greedy policy over `episodes` fresh episodes.
double evaluate_policy(const ActorCritic& net, const env::EnvConfig& cfg, uint64_t seed,
                       int episodes);
// Per-episode returns, for callers that aggregate their own statistics.
std::vector<double> evaluate_episode_returns(const ActorCritic& net, const env::EnvConfig& cfg,
                                             uint64_t seed, int episodes);

// Full training run: alternating rollout collection and PPO updates until
// total_timesteps, greedy evaluation on a fixed cadence. Deterministic in
// (seed, configs).
RunRecord train(const env::EnvConfig& env_cfg, const Hyperparameters& h, uint64_t seed,
                const TrainOptions& opts = {});

nlohmann::json run_record_to_json(const RunRecord& rec);
// Inverse of run_record_to_json minus final_params (weights live in a
// sidecar binary; pass load_params=false to skip it when only curves matter).
void save_run_record(const std::string& dir, const RunRecord& rec);
RunRecord load_run_record(const std::string& dir, bool load_params = true);

}  // namespace acd::ppo
