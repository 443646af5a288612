#include "acd/ppo/trainer.hpp"

#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>

#include "acd/ppo/gae.hpp"

namespace acd::ppo {

namespace {

Eigen::VectorXd obs_vector(const env::BlueObservation& obs) {
    return Eigen::Map<const Eigen::VectorXd>(obs.values.data(), kObsDim);
}

// Seed-space tags so the trainer's rng streams never collide.
enum : uint64_t { kInitTag = 1, kRolloutTag = 2, kSampleTag = 3, kShuffleTag = 4, kEvalTag = 5 };

void check_metric_invariants(const UpdateMetrics& m) {
    const double ln_actions = std::log(static_cast<double>(kActionDim));
    if (m.clip_fraction < 0.0 || m.clip_fraction > 1.0)
        throw NumericError("clip fraction outside [0,1]");
    if (m.entropy < -1e-9 || m.entropy > ln_actions + 1e-9)
        throw NumericError("entropy outside [0, ln(num_actions)]");
    if (m.value_loss < 0.0) throw NumericError("negative value loss");
}

}  // namespace

double evaluate_policy(const ActorCritic& net, const env::EnvConfig& cfg, uint64_t seed,
                       int episodes) {
    std::vector<double> returns = evaluate_episode_returns(net, cfg, seed, episodes);
    double total = 0.0;
    for (double r : returns) total += r;
    return total / static_cast<double>(returns.size());
}

std::vector<double> evaluate_episode_returns(const ActorCritic& net, const env::EnvConfig& cfg,
                                             uint64_t seed, int episodes) {
    env::Environment env(cfg);
    std::vector<double> returns;
    returns.reserve(static_cast<size_t>(episodes));
    for (int e = 0; e < episodes; ++e) {
        env::BlueObservation obs = env.reset(derive_seed(seed, kEvalTag, static_cast<uint64_t>(e)));
        double episode_return = 0.0;
        while (!env.done()) {
            ActorCritic::Trace t = net.forward(obs_vector(obs).transpose());
            int action = argmax_action(t.logits.row(0).transpose());
            env::StepResult step = env.step(env::blue_action_from_index(action));
            episode_return += step.reward.total;
            obs = step.observation;
        }
        returns.push_back(episode_return);
    }
    return returns;
}

RunRecord train(const env::EnvConfig& env_cfg, const Hyperparameters& h, uint64_t seed,
                const TrainOptions& opts) {
    validate(h);
    env::validate(env_cfg);
    const auto start = std::chrono::steady_clock::now();

    RunRecord rec;
    rec.seed = seed;
    rec.hparams = h;
    rec.final_params = ActorCritic(opts.topology);

    Rng init_rng(derive_seed(seed, kInitTag));
    ActorCritic net(opts.topology);
    net.init(init_rng);
    Adam adam(net.param_count(), h.learning_rate, h.adam_epsilon);
    Rng sample_rng(derive_seed(seed, kSampleTag));
    Rng shuffle_rng(derive_seed(seed, kShuffleTag));

    env::Environment env(env_cfg);
    uint64_t episode_counter = 0;
    env::BlueObservation obs = env.reset(derive_seed(seed, kRolloutTag, episode_counter++));

    auto run_eval = [&](int64_t timestep) {
        rec.eval_curve.push_back(
            {timestep, evaluate_policy(net, env_cfg, derive_seed(seed, kEvalTag,
                                                                 static_cast<uint64_t>(timestep)),
                                       opts.eval_episodes)});
    };

    run_eval(0);
    int64_t t = 0;
    int64_t next_eval = opts.eval_every;

    try {
        while (t < h.total_timesteps) {
            RolloutBuffer buf(h.n_steps);
            for (int i = 0; i < h.n_steps; ++i) {
                Eigen::VectorXd x = obs_vector(obs);
                ActorCritic::Trace trace = net.forward(x.transpose());
                auto [action, logp] = sample_action(trace.logits.row(0).transpose(), sample_rng);
                env::StepResult step = env.step(env::blue_action_from_index(action));

                buf.observations.row(i) = x.transpose();
                buf.actions[static_cast<size_t>(i)] = action;
                buf.log_probs[static_cast<size_t>(i)] = logp;
                buf.rewards[static_cast<size_t>(i)] = step.reward.total;
                buf.values[static_cast<size_t>(i)] = trace.values(0);
                buf.episode_ends[static_cast<size_t>(i)] = step.done ? 1 : 0;

                obs = step.done ? env.reset(derive_seed(seed, kRolloutTag, episode_counter++))
                                : step.observation;
                t += 1;
            }

            double bootstrap = 0.0;
            if (!buf.episode_ends.back()) {
                ActorCritic::Trace trace = net.forward(obs_vector(obs).transpose());
                bootstrap = trace.values(0);
            }
            GaeResult gae = compute_gae(buf.rewards, buf.values, buf.episode_ends, bootstrap,
                                        h.gamma, h.gae_lambda);
            buf.advantages = std::move(gae.advantages);
            buf.returns = std::move(gae.returns);

            UpdateMetrics metrics = ppo_update(net, adam, buf, h, shuffle_rng);
            check_metric_invariants(metrics);
            rec.metrics_curve.push_back({t, metrics});

            if (t >= next_eval || t >= h.total_timesteps) {
                run_eval(t);
                while (next_eval <= t) next_eval += opts.eval_every;
            }
        }
    } catch (const NumericError& e) {
        rec.aborted = true;
        rec.abort_note = e.what();
    }

    rec.final_params = net;
    rec.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return rec;
}

nlohmann::json run_record_to_json(const RunRecord& rec) {
    nlohmann::json eval_curve = nlohmann::json::array();
    for (const auto& p : rec.eval_curve) eval_curve.push_back({p.timestep, p.mean_return});
    nlohmann::json metrics_curve = nlohmann::json::array();
    for (const auto& p : rec.metrics_curve) {
        nlohmann::json m = metrics_to_json(p.metrics);
        m["timestep"] = p.timestep;
        metrics_curve.push_back(m);
    }
    return nlohmann::json{{"seed", rec.seed},
                          {"hparams", hparams_to_json(rec.hparams)},
                          {"topology", topology_name(rec.final_params.topology())},
                          {"eval_curve", eval_curve},
                          {"metrics_curve", metrics_curve},
                          {"wall_time", rec.wall_time},
                          {"aborted", rec.aborted},
                          {"abort_note", rec.abort_note}};
}

void save_run_record(const std::string& dir, const RunRecord& rec) {
    namespace fs = std::filesystem;
    fs::create_directories(dir);
    {
        std::ofstream out(dir + "/run_record.json");
        out << run_record_to_json(rec).dump(2) << "\n";
    }
    rec.final_params.save_weights(dir + "/weights.bin");
    std::ofstream mf(dir + "/weights_manifest.json");
    mf << rec.final_params.shape_manifest().dump(2) << "\n";
}

RunRecord load_run_record(const std::string& dir, bool load_params) {
    std::ifstream in(dir + "/run_record.json");
    if (!in) throw std::runtime_error("cannot read " + dir + "/run_record.json");
    nlohmann::json j = nlohmann::json::parse(in);
    RunRecord rec;
    rec.seed = j.at("seed").get<uint64_t>();
    rec.hparams = hparams_from_json(j.at("hparams"));
    for (const auto& p : j.at("eval_curve"))
        rec.eval_curve.push_back({p.at(0).get<int64_t>(), p.at(1).get<double>()});
    for (const auto& m : j.at("metrics_curve")) {
        MetricsPoint pt;
        pt.timestep = m.at("timestep").get<int64_t>();
        pt.metrics.surrogate_loss = m.at("surrogate_loss").get<double>();
        pt.metrics.value_loss = m.at("value_loss").get<double>();
        pt.metrics.entropy = m.at("entropy").get<double>();
        pt.metrics.clip_fraction = m.at("clip_fraction").get<double>();
        pt.metrics.approx_kl = m.at("approx_kl").get<double>();
        rec.metrics_curve.push_back(pt);
    }
    rec.wall_time = j.at("wall_time").get<double>();
    rec.aborted = j.at("aborted").get<bool>();
    rec.abort_note = j.at("abort_note").get<std::string>();
    if (load_params)
        rec.final_params = ActorCritic::load_weights(dir + "/weights.bin",
                                                     dir + "/weights_manifest.json");
    else
        rec.final_params = ActorCritic(topology_from_name(j.at("topology").get<std::string>()));
    return rec;
}

}  // namespace acd::ppo
