#include "acd/exp/plan.hpp"

#include <fstream>
#include <set>

namespace acd::exp {

std::string plan_kind_name(PlanKind k) {
    switch (k) {
        case PlanKind::TurnOrderMatrix: return "turn_order";
        case PlanKind::AdversaryMatrix: return "adversary";
        case PlanKind::HparamAblation: return "hparam";
        case PlanKind::RandomBaseline: return "random_baseline";
    }
    return "?";
}

PlanKind plan_kind_from_name(const std::string& s) {
    if (s == "turn_order") return PlanKind::TurnOrderMatrix;
    if (s == "adversary") return PlanKind::AdversaryMatrix;
    if (s == "hparam") return PlanKind::HparamAblation;
    if (s == "random_baseline") return PlanKind::RandomBaseline;
    throw env::ConfigError("unknown plan name: " + s);
}

void validate(const ExperimentPlan& p) {
    if (p.n_runs < 2) throw env::ConfigError("n_runs must be at least 2 for confidence intervals");
    if (p.eval_episodes < 1) throw env::ConfigError("eval_episodes must be positive");
    env::validate(p.base_env);
    ppo::validate(p.base_hparams);
}

ExperimentPlan plan_from_json(const nlohmann::json& j) {
    static const std::set<std::string> known = {"name",   "seed",       "n_runs",
                                                "eval_episodes", "eval_every", "env",
                                                "hparams", "alt",       "out_dir",
                                                "topology"};
    for (auto it = j.begin(); it != j.end(); ++it)
        if (!known.count(it.key())) throw env::ConfigError("unknown plan key: " + it.key());
    ExperimentPlan p;
    if (j.contains("name")) p.kind = plan_kind_from_name(j.at("name").get<std::string>());
    if (j.contains("seed")) p.seed = j.at("seed").get<uint64_t>();
    if (j.contains("n_runs")) p.n_runs = j.at("n_runs").get<int>();
    if (j.contains("eval_episodes")) p.eval_episodes = j.at("eval_episodes").get<int>();
    if (j.contains("eval_every")) p.train_options.eval_every = j.at("eval_every").get<int64_t>();
    if (j.contains("env")) p.base_env = env::env_config_from_json(j.at("env"));
    if (j.contains("hparams")) p.base_hparams = ppo::hparams_from_json(j.at("hparams"));
    if (j.contains("topology"))
        p.train_options.topology = ppo::topology_from_name(j.at("topology").get<std::string>());
    if (j.contains("alt")) {
        const auto& a = j.at("alt");
        static const std::set<std::string> alt_known = {"learning_rate", "gamma", "clip_range"};
        for (auto it = a.begin(); it != a.end(); ++it)
            if (!alt_known.count(it.key())) throw env::ConfigError("unknown alt key: " + it.key());
        if (a.contains("learning_rate")) p.alt.learning_rate = a.at("learning_rate").get<double>();
        if (a.contains("gamma")) p.alt.gamma = a.at("gamma").get<double>();
        if (a.contains("clip_range")) p.alt.clip_range = a.at("clip_range").get<double>();
    }
    if (j.contains("out_dir")) p.out_dir = j.at("out_dir").get<std::string>();
    p.train_options.eval_episodes = p.eval_episodes;
    validate(p);
    return p;
}

nlohmann::json plan_to_json(const ExperimentPlan& p) {
    return nlohmann::json{{"name", plan_kind_name(p.kind)},
                          {"seed", p.seed},
                          {"n_runs", p.n_runs},
                          {"eval_episodes", p.eval_episodes},
                          {"eval_every", p.train_options.eval_every},
                          {"env", env::env_config_to_json(p.base_env)},
                          {"hparams", ppo::hparams_to_json(p.base_hparams)},
                          {"topology", ppo::topology_name(p.train_options.topology)},
                          {"alt",
                           {{"learning_rate", p.alt.learning_rate},
                            {"gamma", p.alt.gamma},
                            {"clip_range", p.alt.clip_range}}},
                          {"out_dir", p.out_dir}};
}

ExperimentPlan load_plan(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw env::ConfigError("cannot read plan file: " + path);
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(in);
    } catch (const nlohmann::json::parse_error& e) {
        throw env::ConfigError("plan parse error in " + path + ": " + e.what());
    }
    return plan_from_json(j);
}

void apply_preset(ExperimentPlan& p, const std::string& preset) {
    if (preset == "desk") {
        p.n_runs = 5;
        p.base_hparams.total_timesteps = 500'000;
    } else if (preset == "full") {
        p.n_runs = 20;
        p.base_hparams.total_timesteps = 2'500'000;
    } else {
        throw env::ConfigError("unknown preset: " + preset + " (expected desk or full)");
    }
}

namespace {

std::vector<Variant> turn_order_variants(const ExperimentPlan& p) {
    std::vector<Variant> v;
    for (env::TurnOrder order : {env::TurnOrder::RedThenBlue, env::TurnOrder::BlueThenRed,
                                 env::TurnOrder::MixedPerStep}) {
        Variant var{env::turn_order_name(order), p.base_env, p.base_hparams};
        var.env.turn_order = order;
        v.push_back(std::move(var));
    }
    return v;
}

std::vector<Variant> adversary_variants(const ExperimentPlan& p) {
    std::vector<Variant> v;
    for (env::RedPolicyName red : {env::RedPolicyName::BLine, env::RedPolicyName::Meander,
                                   env::RedPolicyName::MixedPerEpisode}) {
        Variant var{env::red_policy_name_str(red), p.base_env, p.base_hparams};
        // Action order stays fixed at blue-then-red so rows differ only by attacker.
        var.env.turn_order = env::TurnOrder::BlueThenRed;
        var.env.red_policy_name = red;
        v.push_back(std::move(var));
    }
    return v;
}

std::vector<Variant> hparam_variants(const ExperimentPlan& p) {
    std::vector<Variant> v;
    v.push_back({"Default", p.base_env, p.base_hparams});
    Variant lr{"AltLR", p.base_env, p.base_hparams};
    lr.hparams.learning_rate = p.alt.learning_rate;
    v.push_back(std::move(lr));
    Variant gamma{"AltGamma", p.base_env, p.base_hparams};
    gamma.hparams.gamma = p.alt.gamma;
    v.push_back(std::move(gamma));
    Variant clip{"AltClip", p.base_env, p.base_hparams};
    clip.hparams.clip_range = p.alt.clip_range;
    v.push_back(std::move(clip));
    return v;
}

}  // namespace

std::vector<Variant> plan_rows(const ExperimentPlan& p) {
    switch (p.kind) {
        case PlanKind::TurnOrderMatrix: return turn_order_variants(p);
        case PlanKind::AdversaryMatrix: return adversary_variants(p);
        case PlanKind::HparamAblation: return hparam_variants(p);
        case PlanKind::RandomBaseline: return {};
    }
    return {};
}

std::vector<Variant> plan_cols(const ExperimentPlan& p) {
    switch (p.kind) {
        case PlanKind::TurnOrderMatrix: return turn_order_variants(p);
        case PlanKind::AdversaryMatrix: return adversary_variants(p);
        case PlanKind::HparamAblation: return {};
        case PlanKind::RandomBaseline: return {{"Default", p.base_env, p.base_hparams}};
    }
    return {};
}

}  // namespace acd::exp
