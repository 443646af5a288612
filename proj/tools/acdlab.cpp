#include <filesystem>
#include <fstream>
#include <iostream>

#include <CLI11.hpp>

#include "acd/agents/blue.hpp"
#include "acd/env/environment.hpp"
#include "acd/exp/report.hpp"
#include "acd/exp/runner.hpp"
#include "acd/ppo/gae.hpp"
#include "acd/ppo/trainer.hpp"
#include "acd/stats/stats.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr const char* kVersion = "0.1.0";

json read_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw acd::env::ConfigError("cannot read config: " + path);
    try {
        return json::parse(in);
    } catch (const json::parse_error& e) {
        throw acd::env::ConfigError("config parse error in " + path + ": " + e.what());
    }
}

void write_manifest(const std::string& dir, const std::string& command, const json& config,
                    const json& overrides) {
    fs::create_directories(dir);
    std::ofstream out(dir + "/manifest.json");
    out << json{{"tool", "acdlab"},
                {"version", kVersion},
                {"command", command},
                {"config", config},
                {"overrides", overrides}}
               .dump(2)
        << "\n";
}

struct TrainConfig {
    acd::env::EnvConfig env;
    acd::ppo::Hyperparameters hparams;
    acd::ppo::TrainOptions options;
    std::vector<uint64_t> seeds{1};
};

TrainConfig parse_train_config(const json& j) {
    static const std::set<std::string> known = {"env", "hparams", "seeds", "eval_every",
                                                "eval_episodes", "topology"};
    for (auto it = j.begin(); it != j.end(); ++it)
        if (!known.count(it.key()))
            throw acd::env::ConfigError("unknown train config key: " + it.key());
    TrainConfig cfg;
    if (j.contains("env")) cfg.env = acd::env::env_config_from_json(j.at("env"));
    if (j.contains("hparams")) cfg.hparams = acd::ppo::hparams_from_json(j.at("hparams"));
    if (j.contains("seeds")) cfg.seeds = j.at("seeds").get<std::vector<uint64_t>>();
    if (j.contains("eval_every")) cfg.options.eval_every = j.at("eval_every").get<int64_t>();
    if (j.contains("eval_episodes")) cfg.options.eval_episodes = j.at("eval_episodes").get<int>();
    if (j.contains("topology"))
        cfg.options.topology = acd::ppo::topology_from_name(j.at("topology").get<std::string>());
    if (cfg.seeds.empty()) throw acd::env::ConfigError("seeds must be non-empty");
    return cfg;
}

int cmd_train(const std::string& config_path, const std::string& out_dir, int64_t seed_override) {
    json config = read_config(config_path);
    TrainConfig cfg = parse_train_config(config);
    if (seed_override >= 0) cfg.seeds = {static_cast<uint64_t>(seed_override)};
    write_manifest(out_dir, "train", config,
                   json{{"out", out_dir}, {"seed", seed_override >= 0 ? json(seed_override) : json()}});
    bool any_aborted = false;
    for (uint64_t seed : cfg.seeds) {
        std::cout << "training seed " << seed << " for " << cfg.hparams.total_timesteps
                  << " steps...\n";
        acd::ppo::RunRecord rec = acd::ppo::train(cfg.env, cfg.hparams, seed, cfg.options);
        acd::ppo::save_run_record(out_dir + "/" + std::to_string(seed), rec);
        if (rec.aborted) {
            any_aborted = true;
            std::cerr << "run " << seed << " aborted: " << rec.abort_note << "\n";
        } else {
            std::cout << "  final eval return " << rec.final_return() << " (wall "
                      << rec.wall_time << "s)\n";
        }
    }
    return any_aborted ? 1 : 0;
}

// Streams one line-delimited JSON record per step for each episode.
void write_trace(const std::string& path, const acd::env::EnvConfig& env_cfg,
                 const acd::ppo::ActorCritic* net, uint64_t seed, int episodes) {
    std::ofstream out(path);
    acd::env::Environment environment(env_cfg);
    acd::agents::RandomBlue random_blue(acd::derive_seed(seed, 0xB1));
    for (int e = 0; e < episodes; ++e) {
        acd::env::BlueObservation obs =
            environment.reset(acd::derive_seed(seed, 0xE5, static_cast<uint64_t>(e)));
        int step_index = 0;
        while (!environment.done()) {
            acd::env::BlueAction action;
            if (net) {
                Eigen::VectorXd x =
                    Eigen::Map<const Eigen::VectorXd>(obs.values.data(), acd::ppo::kObsDim);
                acd::ppo::ActorCritic::Trace t = net->forward(x.transpose());
                action = acd::env::blue_action_from_index(
                    acd::ppo::argmax_action(t.logits.row(0).transpose()));
            } else {
                action = random_blue.next();
            }
            acd::env::StepResult step = environment.step(action);
            acd::env::StepTraceRecord record;
            record.step = step_index++;
            record.blue_action = acd::env::blue_action_name(action);
            record.red_action = acd::env::red_action_name(environment.last_red_action());
            record.reward = step.reward;
            record.events = step.events;
            record.observation = step.observation;
            json line = acd::env::trace_record_to_json(record);
            line["episode"] = e;
            out << line.dump() << "\n";
            obs = step.observation;
        }
    }
}

int cmd_evaluate(const std::string& config_path, const std::string& out_dir,
                 int64_t seed_override, const std::string& trace_path) {
    json config = read_config(config_path);
    static const std::set<std::string> known = {"env", "episodes", "weights", "seed"};
    for (auto it = config.begin(); it != config.end(); ++it)
        if (!known.count(it.key()))
            throw acd::env::ConfigError("unknown evaluate config key: " + it.key());
    acd::env::EnvConfig env_cfg;
    if (config.contains("env")) env_cfg = acd::env::env_config_from_json(config.at("env"));
    const int episodes = config.value("episodes", 100);
    uint64_t seed = config.value("seed", 1);
    if (seed_override >= 0) seed = static_cast<uint64_t>(seed_override);

    std::optional<acd::ppo::ActorCritic> net;
    if (config.contains("weights")) {
        const std::string dir = config.at("weights").get<std::string>();
        net = acd::ppo::ActorCritic::load_weights(dir + "/weights.bin",
                                                  dir + "/weights_manifest.json");
    }

    std::vector<double> returns =
        net ? acd::ppo::evaluate_episode_returns(*net, env_cfg, seed, episodes)
            : acd::exp::random_episode_returns(env_cfg, seed, episodes);
    double mean = 0.0;
    for (double r : returns) mean += r;
    mean /= static_cast<double>(returns.size());

    json summary{{"policy", net ? "trained" : "random"},
                 {"episodes", episodes},
                 {"seed", seed},
                 {"mean_return", mean}};
    if (returns.size() >= 2) {
        acd::stats::EvalStats stats = acd::stats::summarize(returns);
        summary["stats"] = acd::stats::eval_stats_to_json(stats);
        std::cout << "mean return over " << episodes << " episodes: "
                  << acd::stats::format_score(stats) << "\n";
    } else {
        std::cout << "mean return: " << mean << "\n";
    }
    if (!out_dir.empty()) {
        write_manifest(out_dir, "evaluate", config, json{{"out", out_dir}, {"seed", seed}});
        std::ofstream out(out_dir + "/evaluation.json");
        summary["episode_returns"] = returns;
        out << summary.dump(2) << "\n";
    }
    if (!trace_path.empty()) {
        write_trace(trace_path, env_cfg, net ? &*net : nullptr, seed, episodes);
        std::cout << "wrote step trace to " << trace_path << "\n";
    }
    return 0;
}

int cmd_ablate(const std::string& config_path, const std::string& out_dir,
               int64_t seed_override, int jobs, const std::string& preset) {
    json config = config_path.empty() ? json::object() : read_config(config_path);
    acd::exp::ExperimentPlan plan = acd::exp::plan_from_json(config);
    if (!preset.empty()) acd::exp::apply_preset(plan, preset);
    if (seed_override >= 0) plan.seed = static_cast<uint64_t>(seed_override);
    if (!out_dir.empty()) plan.out_dir = out_dir;
    write_manifest(plan.out_dir, "ablate", config,
                   json{{"out", plan.out_dir},
                        {"seed", plan.seed},
                        {"jobs", jobs},
                        {"preset", preset.empty() ? json() : json(preset)},
                        {"resolved_plan", acd::exp::plan_to_json(plan)}});

    bool any_failed = false;
    if (plan.kind == acd::exp::PlanKind::HparamAblation) {
        acd::exp::AblationResult result = acd::exp::run_hparam_ablation(plan, jobs);
        acd::exp::emit_ablation_report(result, plan.out_dir);
        for (const auto& v : result.variants) any_failed |= v.failed;
        std::cout << acd::exp::render_ablation(result, "txt");
    } else if (plan.kind == acd::exp::PlanKind::RandomBaseline) {
        acd::stats::EvalStats stats = acd::exp::run_random_baseline(
            plan.base_env, plan.n_runs, plan.eval_episodes, plan.seed);
        std::ofstream out(plan.out_dir + "/report.json");
        out << json{{"name", "random_baseline"},
                    {"stats", acd::stats::eval_stats_to_json(stats)}}
                   .dump(2)
            << "\n";
        std::cout << "random baseline: " << acd::stats::format_score(stats) << "\n";
    } else {
        acd::exp::MatrixResult result = plan.kind == acd::exp::PlanKind::TurnOrderMatrix
                                            ? acd::exp::run_turn_order_matrix(plan, jobs)
                                            : acd::exp::run_adversary_matrix(plan, jobs);
        acd::exp::emit_matrix_report(result, plan.out_dir);
        for (const auto& row : result.cells)
            for (const auto& cell : row) any_failed |= cell.failed;
        std::cout << acd::exp::render_matrix(result, "txt");
    }
    if (any_failed) std::cerr << "one or more cells failed; see report artifacts\n";
    return any_failed ? 1 : 0;
}

int cmd_report(const std::string& out_dir) {
    acd::exp::ExperimentPlan plan = acd::exp::load_plan(out_dir + "/plan.json");
    plan.out_dir = out_dir;  // the artifacts live where we found the plan
    if (plan.kind == acd::exp::PlanKind::HparamAblation) {
        acd::exp::AblationResult result = acd::exp::collect_ablation(plan);
        acd::exp::emit_ablation_report(result, out_dir);
        std::cout << acd::exp::render_ablation(result, "txt");
    } else {
        acd::exp::MatrixResult result = acd::exp::collect_matrix(plan);
        acd::exp::emit_matrix_report(result, out_dir);
        std::cout << acd::exp::render_matrix(result, "txt");
    }
    return 0;
}

// ---- selftest ----------------------------------------------------------

struct SelftestReport {
    bool all_ok = true;
    void check(const std::string& name, bool ok) {
        std::cout << (ok ? "PASS  " : "FAIL  ") << name << "\n";
        all_ok &= ok;
    }
};

bool selftest_encoding() {
    using namespace acd::env;
    if (all_blue_actions().size() != kNumBlueActions) return false;
    if (all_red_actions().size() != kNumRedActions) return false;
    for (int i = 0; i < kNumBlueActions; ++i)
        if (blue_action_index(blue_action_from_index(i)) != i) return false;
    for (int i = 0; i < kNumRedActions; ++i)
        if (red_action_index(red_action_from_index(i)) != i) return false;
    return true;
}

// Random-policy episodes: observation legality and the score bound.
bool selftest_episode_invariants() {
    using namespace acd::env;
    EnvConfig cfg;
    cfg.red_policy_name = RedPolicyName::MixedPerEpisode;
    Environment env(cfg);
    acd::agents::RandomBlue blue(7);
    for (int e = 0; e < 20; ++e) {
        env.reset(acd::derive_seed(99, static_cast<uint64_t>(e)));
        double total = 0.0;
        while (!env.done()) {
            StepResult step = env.step(blue.next());
            total += step.reward.total;
            for (int h = 0; h < kNumHosts; ++h) {
                const double act = step.observation.values[static_cast<size_t>(4 * h)];
                const double exp = step.observation.values[static_cast<size_t>(4 * h + 1)];
                if (act == 0.0 && exp == 1.0) return false;  // (0,1) never occurs
            }
        }
        if (total > 0.0) return false;
    }
    return true;
}

bool selftest_gradient(bool inject_bug) {
    using namespace acd::ppo;
    acd::Rng rng(12345);
    ActorCritic net(Topology::Separate, 5, 4, 3);
    net.init(rng);
    Hyperparameters h;
    h.entropy_coef = 0.01;
    RolloutBuffer buf(8, 5);
    for (int i = 0; i < 8; ++i) {
        for (int k = 0; k < 5; ++k) buf.observations(i, k) = acd::normal(rng);
        buf.actions[static_cast<size_t>(i)] = static_cast<int>(acd::uniform_index(rng, 3));
        buf.log_probs[static_cast<size_t>(i)] = -std::log(3.0) + 0.1 * acd::normal(rng);
        buf.advantages[static_cast<size_t>(i)] = acd::normal(rng);
        buf.returns[static_cast<size_t>(i)] = acd::normal(rng);
    }
    std::vector<int> idx{0, 1, 2, 3, 4, 5, 6, 7};
    net.zero_grad();
    minibatch_loss_backward(net, buf, idx, h, false);
    Eigen::VectorXd analytic = net.flat_grads();
    if (inject_bug) analytic(3) += 0.5;  // simulated backprop defect
    Eigen::VectorXd theta = net.flat_params();
    const double eps = 1e-5;
    double max_rel = 0.0;
    for (long p = 0; p < theta.size(); ++p) {
        Eigen::VectorXd plus = theta, minus = theta;
        plus(p) += eps;
        minus(p) -= eps;
        net.set_flat_params(plus);
        const double lp = minibatch_loss_value(net, buf, idx, h, false);
        net.set_flat_params(minus);
        const double lm = minibatch_loss_value(net, buf, idx, h, false);
        net.set_flat_params(theta);
        const double fd = (lp - lm) / (2 * eps);
        const double denom = std::max({std::abs(fd), std::abs(analytic(p)), 1e-8});
        max_rel = std::max(max_rel, std::abs(fd - analytic(p)) / denom);
    }
    return max_rel < 1e-4;
}

bool selftest_gae() {
    using namespace acd::ppo;
    {  // undiscounted Monte-Carlo sums
        GaeResult g = compute_gae({1, 1, 1}, {0, 0, 0}, {0, 0, 1}, 0.0, 1.0, 1.0);
        if (g.returns != std::vector<double>({3, 2, 1})) return false;
    }
    {  // lambda 0 reduces to the one-step TD error
        std::vector<double> r{0.5, -1.0, 2.0}, v{0.1, 0.2, 0.3};
        GaeResult g = compute_gae(r, v, {0, 0, 0}, 0.4, 0.9, 0.0);
        const double expected0 = r[0] + 0.9 * v[1] - v[0];
        if (std::abs(g.advantages[0] - expected0) > 1e-15) return false;
    }
    {  // brute-force weighted-sum oracle on a random instance
        acd::Rng rng(5);
        const int n = 10;
        std::vector<double> r(n), v(n);
        std::vector<uint8_t> ends(n, 0);
        ends[4] = 1;
        for (int i = 0; i < n; ++i) {
            r[static_cast<size_t>(i)] = acd::normal(rng);
            v[static_cast<size_t>(i)] = acd::normal(rng);
        }
        const double gamma = 0.97, lambda = 0.8, bootstrap = 0.33;
        GaeResult g = compute_gae(r, v, ends, bootstrap, gamma, lambda);
        for (int t = 0; t < n; ++t) {
            double acc = 0.0, w = 1.0;
            for (int k = t; k < n; ++k) {
                const double next_v = ends[static_cast<size_t>(k)]
                                          ? 0.0
                                          : (k + 1 < n ? v[static_cast<size_t>(k + 1)] : bootstrap);
                acc += w * (r[static_cast<size_t>(k)] + gamma * next_v - v[static_cast<size_t>(k)]);
                if (ends[static_cast<size_t>(k)]) break;
                w *= gamma * lambda;
            }
            if (std::abs(acc - g.advantages[static_cast<size_t>(t)]) > 1e-10) return false;
        }
    }
    return true;
}

bool selftest_stats() {
    using namespace acd::stats;
    {  // frozen textbook t-quantile oracle: n=20, level 0.95
        std::vector<double> xs;
        acd::Rng rng(17);
        for (int i = 0; i < 20; ++i) xs.push_back(acd::normal(rng));
        Interval ci = mean_ci(xs, 0.95);
        double mean = 0.0;
        for (double x : xs) mean += x;
        mean /= 20.0;
        double ss = 0.0;
        for (double x : xs) ss += (x - mean) * (x - mean);
        const double s = std::sqrt(ss / 19.0);
        const double t_crit = 2.093024054408263;  // t(0.975, df=19)
        const double half = t_crit * s / std::sqrt(20.0);
        if (std::abs(ci.ci_low - (mean - half)) > 1e-9) return false;
        if (std::abs(ci.ci_high - (mean + half)) > 1e-9) return false;
    }
    {  // CVaR(1) is the plain mean
        std::vector<double> xs{-5, -1, -3, -2};
        if (std::abs(cvar(xs, 1.0) - (-2.75)) > 1e-12) return false;
        if (std::abs(cvar(xs, 0.5) - (-4.0)) > 1e-12) return false;
    }
    {  // synthetic coverage: 95% interval contains the true mean ~95% of trials
        acd::Rng rng(31);
        int hits = 0;
        const int trials = 1000;
        for (int trial = 0; trial < trials; ++trial) {
            std::vector<double> xs(20);
            for (auto& x : xs) x = 3.0 + 2.0 * acd::normal(rng);
            Interval ci = mean_ci(xs, 0.95);
            if (ci.ci_low <= 3.0 && 3.0 <= ci.ci_high) hits += 1;
        }
        const double coverage = static_cast<double>(hits) / trials;
        if (coverage < 0.93 || coverage > 0.97) return false;
    }
    return true;
}

bool selftest_determinism() {
    acd::env::EnvConfig env_cfg;
    acd::ppo::Hyperparameters h;
    h.n_steps = 256;
    h.batch_size = 64;
    h.total_timesteps = 512;
    acd::ppo::TrainOptions opts;
    opts.eval_every = 256;
    opts.eval_episodes = 3;
    acd::ppo::RunRecord a = acd::ppo::train(env_cfg, h, 42, opts);
    acd::ppo::RunRecord b = acd::ppo::train(env_cfg, h, 42, opts);
    nlohmann::json ja = acd::ppo::run_record_to_json(a);
    nlohmann::json jb = acd::ppo::run_record_to_json(b);
    ja.erase("wall_time");
    jb.erase("wall_time");
    return ja.dump() == jb.dump();
}

int cmd_selftest(bool inject_gradient_bug) {
    SelftestReport report;
    report.check("action-space encoding round-trips (53 blue / 56 red)", selftest_encoding());
    report.check("episode invariants: activity encoding legal, return <= 0",
                 selftest_episode_invariants());
    report.check("analytic gradients match central finite differences (< 1e-4)",
                 selftest_gradient(inject_gradient_bug));
    report.check("gae: td identity, monte-carlo identity, brute-force oracle",
                 selftest_gae());
    report.check("stats: t-interval oracle, cvar, synthetic coverage", selftest_stats());
    report.check("training determinism: identical records for identical seeds",
                 selftest_determinism());
    return report.all_ok ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"acdlab: autonomous cyber defense training and evaluation harness"};
    app.require_subcommand(1);
    app.set_version_flag("--version", kVersion);

    std::string config_path, out_dir, trace_path, preset;
    int64_t seed = -1;
    int jobs = 1;

    CLI::App* train = app.add_subcommand("train", "train PPO policies from a JSON config");
    train->add_option("--config", config_path, "JSON config file")->required();
    train->add_option("--out", out_dir, "output directory")->required();
    train->add_option("--seed", seed, "override: train this single seed");

    CLI::App* evaluate = app.add_subcommand("evaluate", "evaluate a stored or random policy");
    evaluate->add_option("--config", config_path, "JSON config file")->required();
    evaluate->add_option("--out", out_dir, "optional output directory");
    evaluate->add_option("--seed", seed, "evaluation seed");
    evaluate->add_option("--trace", trace_path, "write line-delimited JSON step trace here");

    CLI::App* ablate = app.add_subcommand("ablate", "run an experiment plan");
    ablate->add_option("--config", config_path, "plan JSON file")->required();
    ablate->add_option("--out", out_dir, "output directory (overrides plan out_dir)");
    ablate->add_option("--seed", seed, "override plan seed");
    ablate->add_option("--jobs", jobs, "parallel cell jobs")->check(CLI::PositiveNumber);
    ablate->add_option("--preset", preset, "scale preset")
        ->check(CLI::IsMember({"desk", "full"}));

    CLI::App* report = app.add_subcommand("report", "re-emit reports from a finished plan dir");
    report->add_option("--out", out_dir, "plan output directory")->required();

    bool inject_gradient_bug = false;
    CLI::App* selftest = app.add_subcommand("selftest", "run the invariant suite");
    selftest
        ->add_flag("--inject-gradient-bug", inject_gradient_bug,
                   "perturb the analytic gradient to demonstrate failure detection")
        ->group("");  // hidden: test fixture only

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) return app.exit(e);  // --help / --version
        app.exit(e);
        return 2;
    }

    try {
        if (train->parsed()) return cmd_train(config_path, out_dir, seed);
        if (evaluate->parsed()) return cmd_evaluate(config_path, out_dir, seed, trace_path);
        if (ablate->parsed()) return cmd_ablate(config_path, out_dir, seed, jobs, preset);
        if (report->parsed()) return cmd_report(out_dir);
        if (selftest->parsed()) return cmd_selftest(inject_gradient_bug);
    } catch (const acd::env::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const acd::env::UsageError& e) {
        std::cerr << "usage error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 2;
}
