#pragma once

#include <string>
#include <vector>

#include <json.hpp>

#include "acd/env/types.hpp"
#include "acd/ppo/trainer.hpp"

namespace acd::exp {

// Alternate single-parameter values for the hyperparameter ablation.
struct AltValues {
    double learning_rate = 3e-5;
    double gamma = 0.90;
    double clip_range = 0.05;
};

enum class PlanKind { TurnOrderMatrix, AdversaryMatrix, HparamAblation, RandomBaseline };

std::string plan_kind_name(PlanKind k);
PlanKind plan_kind_from_name(const std::string& s);

struct ExperimentPlan {
    PlanKind kind = PlanKind::TurnOrderMatrix;
    uint64_t seed = 1;
    int n_runs = 20;
    int eval_episodes = 100;
    env::EnvConfig base_env;         // turn_order / red_policy_name overridden per variant
    ppo::Hyperparameters base_hparams;
    ppo::TrainOptions train_options; // eval cadence and network topology
    AltValues alt;
    std::string out_dir = "out";
};

void validate(const ExperimentPlan& p);
// Strict JSON: unknown keys rejected; known keys override defaults.
ExperimentPlan plan_from_json(const nlohmann::json& j);
nlohmann::json plan_to_json(const ExperimentPlan& p);
ExperimentPlan load_plan(const std::string& path);

// n_runs 5 at 500k steps, or n_runs 20 at 2.5M steps.
void apply_preset(ExperimentPlan& p, const std::string& preset);

// One trained or evaluated condition in a plan.
struct Variant {
    std::string label;
    env::EnvConfig env;
    ppo::Hyperparameters hparams;
};

// Training-side (rows) and evaluation-side (columns) variants for matrix
// plans; for the ablation the rows are hparam variants and columns are unused.
std::vector<Variant> plan_rows(const ExperimentPlan& p);
std::vector<Variant> plan_cols(const ExperimentPlan& p);

}  // namespace acd::exp
