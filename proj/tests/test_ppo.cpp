#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>

#include "acd/ppo/gae.hpp"
#include "acd/ppo/net.hpp"
#include "acd/ppo/ppo.hpp"
#include "acd/ppo/trainer.hpp"

using namespace acd;
using namespace acd::ppo;
namespace fs = std::filesystem;

namespace {

constexpr double kLn53 = 3.970291913552122;  // ln(53)

fs::path scratch_dir(const std::string& tag) {
    fs::path p = fs::temp_directory_path() / ("acd_ppo_" + tag);
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
}

// Tiny random buffer for loss/gradient tests.
RolloutBuffer make_buffer(int n, int obs_dim, int n_actions, ActorCritic& net, Rng& rng,
                          double logp_jitter) {
    RolloutBuffer buf(n, obs_dim);
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < obs_dim; ++j) buf.observations(i, j) = normal(rng);
        buf.actions[i] = static_cast<int>(uniform_index(rng, static_cast<size_t>(n_actions)));
        buf.advantages[i] = normal(rng);
        buf.returns[i] = normal(rng);
        buf.rewards[i] = 0.0;
        buf.values[i] = 0.0;
        buf.episode_ends[i] = 0;
    }
    auto t = net.forward(buf.observations);
    Eigen::MatrixXd logp = log_softmax(t.logits);
    for (int i = 0; i < n; ++i)
        buf.log_probs[i] = logp(i, buf.actions[i]) + logp_jitter * (uniform01(rng) - 0.5);
    return buf;
}

std::vector<int> all_rows(int n) {
    std::vector<int> idx(static_cast<size_t>(n));
    for (int i = 0; i < n; ++i) idx[static_cast<size_t>(i)] = i;
    return idx;
}

// Direct expansion of the GAE sum: adv[t] = sum_l (gamma*lambda)^l * delta[t+l],
// cut at episode ends. Slow but obviously correct.
std::vector<double> gae_by_hand(const std::vector<double>& r, const std::vector<double>& v,
                                const std::vector<uint8_t>& ends, double bootstrap, double gamma,
                                double lambda) {
    const int n = static_cast<int>(r.size());
    auto delta = [&](int t) {
        double next = ends[static_cast<size_t>(t)]
                          ? 0.0
                          : (t + 1 < n ? v[static_cast<size_t>(t + 1)] : bootstrap);
        return r[static_cast<size_t>(t)] + gamma * next - v[static_cast<size_t>(t)];
    };
    std::vector<double> adv(static_cast<size_t>(n), 0.0);
    for (int t = 0; t < n; ++t) {
        double acc = 0.0, w = 1.0;
        for (int l = t; l < n; ++l) {
            acc += w * delta(l);
            if (ends[static_cast<size_t>(l)]) break;
            w *= gamma * lambda;
        }
        adv[static_cast<size_t>(t)] = acc;
    }
    return adv;
}

}  // namespace

TEST_CASE("fresh net with zero weights is a uniform policy with zero value") {
    ActorCritic net;  // real dims, weights default to zero
    Eigen::MatrixXd x = Eigen::MatrixXd::Random(3, kObsDim);
    auto t = net.forward(x);
    CHECK(t.logits.isZero(0.0));
    CHECK(t.values.isZero(0.0));
    Eigen::MatrixXd logp = log_softmax(t.logits);
    for (int k = 0; k < kActionDim; ++k) CHECK(logp(0, k) == doctest::Approx(-kLn53).epsilon(1e-12));
}

TEST_CASE("hand-checked forward pass on a 2-2-2 network") {
    ActorCritic net(Topology::Separate, 2, 2, 2);
    auto Ls = net.layers();
    REQUIRE(Ls.size() == 6);
    Ls[0]->W << 1, 0, 0, 1;          // policy h1: identity
    Ls[0]->b << 0.5, 0;
    Ls[1]->W << 2, 1, 0, 1;          // policy h2
    Ls[2]->W << 0.5, 0, 1.0 / 3, 0;  // policy head
    Ls[3]->W << 1, 0, 0, 1;          // value h1: identity
    Ls[4]->W << 1, 0, 0, 1;          // value h2: identity
    Ls[4]->b << 1.5, 0;
    Ls[5]->W << 2.5, 0;              // value head
    Eigen::MatrixXd x(1, 2);
    x << 1, -2;
    auto t = net.forward(x);
    CHECK(t.logits(0, 0) == doctest::Approx(1.5).epsilon(1e-14));
    CHECK(t.logits(0, 1) == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(t.values(0) == doctest::Approx(6.25).epsilon(1e-14));
    // log-softmax of [1.5, 1.0]: -softplus(-0.5) and -softplus(0.5).
    Eigen::MatrixXd logp = log_softmax(t.logits);
    CHECK(logp(0, 0) == doctest::Approx(-0.474076984180107).epsilon(1e-12));
    CHECK(logp(0, 1) == doctest::Approx(-0.974076984180107).epsilon(1e-12));
}

TEST_CASE("log-softmax stays finite for huge logits and sums to one") {
    Eigen::MatrixXd logits(1, 2);
    logits << 1000.0, 1000.5;
    Eigen::MatrixXd logp = log_softmax(logits);
    CHECK(std::isfinite(logp(0, 0)));
    CHECK(logp(0, 0) == doctest::Approx(-0.974076984180107).epsilon(1e-12));
    CHECK(logp(0, 1) == doctest::Approx(-0.474076984180107).epsilon(1e-12));
    CHECK(logp.array().exp().sum() == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("sampling concentrates on a dominant logit and matches probabilities") {
    Rng rng(7);
    Eigen::VectorXd logits = Eigen::VectorXd::Zero(kActionDim);
    logits(7) = 25.0;
    for (int i = 0; i < 1000; ++i) {
        auto [a, lp] = sample_action(logits, rng);
        CHECK(a == 7);
        CHECK(lp == doctest::Approx(0.0).epsilon(1e-9));
    }

    Eigen::VectorXd three(3);
    three << std::log(0.2), std::log(0.3), std::log(0.5);
    std::array<int, 3> counts = {0, 0, 0};
    const int draws = 30'000;
    for (int i = 0; i < draws; ++i) {
        auto [a, lp] = sample_action(three, rng);
        counts[static_cast<size_t>(a)] += 1;
        CHECK(lp == doctest::Approx(three(a) - std::log(1.0)).epsilon(1e-9));
    }
    CHECK(std::abs(counts[0] / double(draws) - 0.2) < 0.02);
    CHECK(std::abs(counts[1] / double(draws) - 0.3) < 0.02);
    CHECK(std::abs(counts[2] / double(draws) - 0.5) < 0.02);
    CHECK(argmax_action(three) == 2);
}

TEST_CASE("orthogonal init: scaled orthonormal rows/columns, zero bias") {
    Rng rng(11);
    Linear tall(4, 16);  // out > in: columns orthonormal
    tall.init_orthogonal(rng, std::sqrt(2.0));
    Eigen::MatrixXd q = tall.W / std::sqrt(2.0);
    CHECK((q.transpose() * q - Eigen::MatrixXd::Identity(4, 4)).norm() < 1e-9);
    CHECK(tall.b.isZero(0.0));

    Linear wide(16, 4);  // out < in: rows orthonormal
    wide.init_orthogonal(rng, 0.01);
    Eigen::MatrixXd r = wide.W / 0.01;
    CHECK((r * r.transpose() - Eigen::MatrixXd::Identity(4, 4)).norm() < 1e-9);

    Rng rng2(11);
    Linear tall2(4, 16);
    tall2.init_orthogonal(rng2, std::sqrt(2.0));
    CHECK(tall2.W == tall.W);  // same seed, same matrix
}

TEST_CASE("parameter counts and shape manifest") {
    ActorCritic sep(Topology::Separate);
    CHECK(sep.param_count() == 21942);
    ActorCritic shared(Topology::SharedTrunk);
    CHECK(shared.param_count() == 12726);
    auto m = sep.shape_manifest();
    CHECK(m.at("topology") == "separate");
    CHECK(m.at("total_params") == 21942);
    CHECK(m.at("dtype") == "float64");
    CHECK(shared.shape_manifest().at("topology") == "shared_trunk");
}

TEST_CASE("flat params round-trip through set_flat_params") {
    Rng rng(3);
    ActorCritic net(Topology::Separate, 5, 4, 3);
    net.init(rng);
    Eigen::VectorXd theta = net.flat_params();
    ActorCritic other(Topology::Separate, 5, 4, 3);
    other.set_flat_params(theta);
    CHECK(other.flat_params() == theta);
    Eigen::MatrixXd x = Eigen::MatrixXd::Random(2, 5);
    CHECK(net.forward(x).logits == other.forward(x).logits);
}

TEST_CASE("weights file round-trips through save/load for both topologies") {
    for (Topology topo : {Topology::Separate, Topology::SharedTrunk}) {
        fs::path dir = scratch_dir(topo == Topology::Separate ? "wsep" : "wshared");
        Rng rng(5);
        ActorCritic net(topo, 6, 4, 3);
        net.init(rng);
        net.save_weights((dir / "weights.bin").string());
        std::ofstream((dir / "manifest.json").string()) << net.shape_manifest().dump(2);
        ActorCritic loaded = ActorCritic::load_weights((dir / "weights.bin").string(),
                                                       (dir / "manifest.json").string());
        CHECK(loaded.topology() == topo);
        CHECK(loaded.flat_params() == net.flat_params());
    }
}

TEST_CASE("gae: lambda=0 reduces to one-step TD errors") {
    std::vector<double> r = {1.0, -2.0, 0.5, 3.0};
    std::vector<double> v = {0.3, -0.1, 0.7, 0.2};
    std::vector<uint8_t> ends = {0, 1, 0, 0};
    double boot = 0.9, gamma = 0.97;
    auto g = compute_gae(r, v, ends, boot, gamma, 0.0);
    CHECK(g.advantages[0] == doctest::Approx(r[0] + gamma * v[1] - v[0]).epsilon(1e-12));
    CHECK(g.advantages[1] == doctest::Approx(r[1] - v[1]).epsilon(1e-12));  // cut: no next value
    CHECK(g.advantages[2] == doctest::Approx(r[2] + gamma * v[3] - v[2]).epsilon(1e-12));
    CHECK(g.advantages[3] == doctest::Approx(r[3] + gamma * boot - v[3]).epsilon(1e-12));
}

TEST_CASE("gae: lambda=1 with zero values is the discounted return") {
    std::vector<double> r = {3.0, 2.0, 1.0};
    std::vector<double> v = {0.0, 0.0, 0.0};
    std::vector<uint8_t> ends = {0, 0, 1};
    auto g = compute_gae(r, v, ends, 0.0, 0.5, 1.0);
    CHECK(g.advantages[0] == doctest::Approx(4.25).epsilon(1e-12));  // 3 + 1 + 0.25
    CHECK(g.advantages[1] == doctest::Approx(2.5).epsilon(1e-12));
    CHECK(g.advantages[2] == doctest::Approx(1.0).epsilon(1e-12));
    for (size_t i = 0; i < r.size(); ++i)
        CHECK(g.returns[i] == doctest::Approx(g.advantages[i] + v[i]).epsilon(1e-12));
}

TEST_CASE("gae: matches the direct sum on a mixed 10-step rollout") {
    Rng rng(17);
    std::vector<double> r(10), v(10);
    for (int i = 0; i < 10; ++i) {
        r[static_cast<size_t>(i)] = normal(rng);
        v[static_cast<size_t>(i)] = normal(rng);
    }
    std::vector<uint8_t> ends = {0, 0, 0, 1, 0, 0, 1, 0, 0, 0};  // truncated tail
    double boot = 0.42, gamma = 0.99, lambda = 0.95;
    auto g = compute_gae(r, v, ends, boot, gamma, lambda);
    auto ref = gae_by_hand(r, v, ends, boot, gamma, lambda);
    for (int t = 0; t < 10; ++t) {
        CHECK(std::abs(g.advantages[static_cast<size_t>(t)] - ref[static_cast<size_t>(t)]) <
              1e-10);
        CHECK(std::abs(g.returns[static_cast<size_t>(t)] -
                       (ref[static_cast<size_t>(t)] + v[static_cast<size_t>(t)])) < 1e-10);
    }
}

TEST_CASE("gae: a finished episode's advantages ignore whatever follows") {
    std::vector<double> r = {1.0, -1.0, 2.0, 5.0, -3.0};
    std::vector<double> v = {0.5, 0.1, -0.2, 1.0, 0.3};
    std::vector<uint8_t> ends = {0, 0, 1, 0, 0};
    auto whole = compute_gae(r, v, ends, 0.7, 0.98, 0.9);
    std::vector<double> rp(r.begin(), r.begin() + 3), vp(v.begin(), v.begin() + 3);
    std::vector<uint8_t> ep = {0, 0, 1};
    auto prefix = compute_gae(rp, vp, ep, 123.0, 0.98, 0.9);  // bootstrap is irrelevant here
    for (size_t t = 0; t < 3; ++t)
        CHECK(whole.advantages[t] == doctest::Approx(prefix.advantages[t]).epsilon(1e-12));
}

TEST_CASE("analytic gradients match central finite differences") {
    for (Topology topo : {Topology::Separate, Topology::SharedTrunk}) {
        CAPTURE(topology_name(topo));
        Rng rng(23);
        ActorCritic net(topo, 5, 4, 3);
        net.init(rng);
        // Jitter every parameter (biases included) so no relu pre-activation
        // sits exactly on its kink: orthogonal init zeroes the biases, and a
        // fully dead hidden row would otherwise park the next layer at 0,
        // where one-sided slopes poison the finite differences.
        {
            Eigen::VectorXd theta = net.flat_params();
            for (long i = 0; i < theta.size(); ++i) theta(i) += 0.2 * (uniform01(rng) - 0.5);
            net.set_flat_params(theta);
        }
        // Ratios land in [~0.95, ~1.05], far from the clip kink at 0.8/1.2,
        // so the loss is smooth at this point and differences are meaningful.
        RolloutBuffer buf = make_buffer(6, 5, 3, net, rng, 0.1);
        Hyperparameters h;
        h.clip_range = 0.2;
        h.entropy_coef = 0.01;
        h.value_coef = 0.5;
        auto idx = all_rows(6);

        net.zero_grad();
        minibatch_loss_backward(net, buf, idx, h);
        Eigen::VectorXd analytic = net.flat_grads();

        Eigen::VectorXd theta = net.flat_params();
        const double step = 1e-6;
        double worst = 0.0;
        for (long i = 0; i < theta.size(); ++i) {
            Eigen::VectorXd tp = theta, tm = theta;
            tp(i) += step;
            tm(i) -= step;
            ActorCritic probe(topo, 5, 4, 3);
            probe.set_flat_params(tp);
            double lp = minibatch_loss_value(probe, buf, idx, h);
            probe.set_flat_params(tm);
            double lm = minibatch_loss_value(probe, buf, idx, h);
            double fd = (lp - lm) / (2 * step);
            double rel = std::abs(fd - analytic(i)) / std::max(1.0, std::abs(fd) + std::abs(analytic(i)));
            worst = std::max(worst, rel);
        }
        CHECK(worst < 1e-4);
    }
}

TEST_CASE("clipped-out samples contribute no policy gradient") {
    Rng rng(29);
    ActorCritic net(Topology::Separate, 5, 4, 3);
    net.init(rng);
    RolloutBuffer buf = make_buffer(4, 5, 3, net, rng, 0.0);
    // Push every ratio to exp(0.5) ~ 1.65 with positive advantages: the
    // clipped branch wins everywhere and its gradient through theta is zero.
    for (int i = 0; i < 4; ++i) {
        buf.log_probs[i] -= 0.5;
        buf.advantages[i] = 1.0 + 0.1 * i;
    }
    Hyperparameters h;
    h.clip_range = 0.2;
    h.entropy_coef = 0.0;
    h.value_coef = 0.0;
    net.zero_grad();
    UpdateMetrics m = minibatch_loss_backward(net, buf, all_rows(4), h, false);
    CHECK(m.clip_fraction == doctest::Approx(1.0));
    CHECK(net.flat_grads().norm() == doctest::Approx(0.0).epsilon(1e-15));
}

TEST_CASE("at ratio=1 the update is exactly the vanilla policy gradient") {
    Rng rng(31);
    ActorCritic net(Topology::Separate, 5, 4, 3);
    net.init(rng);
    RolloutBuffer buf = make_buffer(8, 5, 3, net, rng, 0.0);  // old logp = current logp
    Hyperparameters h;
    h.entropy_coef = 0.0;
    h.value_coef = 0.0;
    auto idx = all_rows(8);

    net.zero_grad();
    UpdateMetrics m = minibatch_loss_backward(net, buf, idx, h, false);
    Eigen::VectorXd ppo_grads = net.flat_grads();

    double mean_adv = 0.0;
    for (int i = 0; i < 8; ++i) mean_adv += buf.advantages[i] / 8.0;
    CHECK(m.surrogate_loss == doctest::Approx(-mean_adv).epsilon(1e-12));
    CHECK(m.clip_fraction == 0.0);
    CHECK(m.approx_kl == doctest::Approx(0.0).epsilon(1e-12));

    // Hand-built REINFORCE gradient: dlogits = -A * (1[k=a] - p) / m.
    ActorCritic ref(Topology::Separate, 5, 4, 3);
    ref.set_flat_params(net.flat_params());
    auto t = ref.forward(buf.observations);
    Eigen::MatrixXd p = log_softmax(t.logits).array().exp();
    Eigen::MatrixXd dlogits = Eigen::MatrixXd::Zero(8, 3);
    for (int i = 0; i < 8; ++i) {
        for (int k = 0; k < 3; ++k) {
            double ind = (k == buf.actions[i]) ? 1.0 : 0.0;
            dlogits(i, k) = -buf.advantages[i] * (ind - p(i, k)) / 8.0;
        }
    }
    ref.zero_grad();
    ref.backward(t, dlogits, Eigen::VectorXd::Zero(8));
    CHECK((ppo_grads - ref.flat_grads()).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("normalized equal advantages null out the policy gradient") {
    Rng rng(37);
    ActorCritic net(Topology::Separate, 5, 4, 3);
    net.init(rng);
    RolloutBuffer buf = make_buffer(6, 5, 3, net, rng, 0.0);
    for (int i = 0; i < 6; ++i) buf.advantages[i] = 2.5;  // zero variance
    Hyperparameters h;
    h.entropy_coef = 0.0;
    h.value_coef = 0.5;
    net.zero_grad();
    minibatch_loss_backward(net, buf, all_rows(6), h, true);
    auto Ls = net.layers();
    // Policy tower (p1, p2, head) sees advantage 0/(0+eps) = 0.
    for (int li : {0, 1, 2}) {
        CHECK(Ls[static_cast<size_t>(li)]->gW.cwiseAbs().maxCoeff() < 1e-12);
        CHECK(Ls[static_cast<size_t>(li)]->gb.cwiseAbs().maxCoeff() < 1e-12);
    }
    // The value tower still trains.
    CHECK(Ls[5]->gW.cwiseAbs().maxCoeff() > 1e-8);
}

TEST_CASE("uniform policy entropy equals ln 53") {
    ActorCritic net;  // zero weights: uniform over all 53 actions
    RolloutBuffer buf(4, kObsDim);
    Rng rng(41);
    for (int i = 0; i < 4; ++i) {
        for (int j = 0; j < kObsDim; ++j) buf.observations(i, j) = uniform01(rng);
        buf.actions[i] = i;
        buf.log_probs[i] = -kLn53;
        buf.advantages[i] = normal(rng);
        buf.returns[i] = 0.0;
    }
    net.zero_grad();
    UpdateMetrics m = minibatch_loss_backward(net, buf, all_rows(4), Hyperparameters{}, false);
    CHECK(m.entropy == doctest::Approx(kLn53).epsilon(1e-12));
    CHECK(m.clip_fraction == 0.0);
    CHECK(m.approx_kl == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("adam: constant gradient moves parameters by the closed-form step") {
    Eigen::VectorXd p(2), g(2);
    p << 1.0, -2.0;
    g << 0.5, -3.0;
    Adam adam(2, 0.1, 1e-5);
    // With a constant gradient, bias correction makes mhat=g and vhat=g*g at
    // every step, so each step moves by lr * g / (|g| + eps).
    double step0 = 0.1 * 0.5 / (0.5 + 1e-5);
    double step1 = 0.1 * 3.0 / (3.0 + 1e-5);
    adam.step(p, g);
    CHECK(p(0) == doctest::Approx(1.0 - step0).epsilon(1e-12));
    CHECK(p(1) == doctest::Approx(-2.0 + step1).epsilon(1e-12));
    adam.step(p, g);
    CHECK(p(0) == doctest::Approx(1.0 - 2 * step0).epsilon(1e-12));
    CHECK(p(1) == doctest::Approx(-2.0 + 2 * step1).epsilon(1e-12));
}

TEST_CASE("zero learning rate leaves parameters bit-identical") {
    Rng rng(43);
    ActorCritic net(Topology::Separate, 5, 4, 3);
    net.init(rng);
    Eigen::VectorXd before = net.flat_params();
    RolloutBuffer buf = make_buffer(8, 5, 3, net, rng, 0.05);
    Hyperparameters h;
    h.learning_rate = 0.0;
    h.n_steps = 8;
    h.batch_size = 4;
    h.epochs = 2;
    Adam adam(net.param_count(), h.learning_rate, h.adam_epsilon);
    Rng shuffle(1);
    ppo_update(net, adam, buf, h, shuffle);
    CHECK(net.flat_params() == before);
}

TEST_CASE("hyperparameter json is strict and round-trips") {
    Hyperparameters h;
    h.learning_rate = 1e-3;
    h.total_timesteps = 12345;
    auto j = hparams_to_json(h);
    CHECK(hparams_from_json(j) == h);
    CHECK(hparams_from_json(nlohmann::json::object()) == Hyperparameters{});
    CHECK_THROWS_AS(hparams_from_json({{"learning_rat", 0.1}}), env::ConfigError);

    Hyperparameters bad = h;
    bad.gamma = 0.0;
    CHECK_THROWS_AS(validate(bad), env::ConfigError);
    bad = h;
    bad.gae_lambda = 1.5;
    CHECK_THROWS_AS(validate(bad), env::ConfigError);
    bad = h;
    bad.batch_size = 7;  // does not divide n_steps
    CHECK_THROWS_AS(validate(bad), env::ConfigError);
    bad = h;
    bad.clip_range = 0.0;
    CHECK_THROWS_AS(validate(bad), env::ConfigError);
    bad = h;
    bad.epochs = 0;
    CHECK_THROWS_AS(validate(bad), env::ConfigError);
    bad = h;
    bad.total_timesteps = 0;
    CHECK_THROWS_AS(validate(bad), env::ConfigError);
}

TEST_CASE("smoke train: eval cadence, metrics bounds, usable final policy") {
    env::EnvConfig cfg;
    Hyperparameters h;
    h.n_steps = 2048;
    h.batch_size = 64;
    h.epochs = 2;
    h.total_timesteps = 4096;
    TrainOptions opts;
    opts.eval_every = 2048;
    opts.eval_episodes = 2;
    RunRecord rec = train(cfg, h, 123, opts);
    CHECK_FALSE(rec.aborted);
    REQUIRE(rec.eval_curve.size() == 3);
    CHECK(rec.eval_curve[0].timestep == 0);
    CHECK(rec.eval_curve[1].timestep == 2048);
    CHECK(rec.eval_curve[2].timestep == 4096);
    REQUIRE(rec.metrics_curve.size() == 2);
    for (const auto& mp : rec.metrics_curve) {
        CHECK(mp.metrics.clip_fraction >= 0.0);
        CHECK(mp.metrics.clip_fraction <= 1.0);
        CHECK(mp.metrics.entropy >= 0.0);
        CHECK(mp.metrics.entropy <= kLn53 + 1e-9);
        CHECK(mp.metrics.approx_kl >= -1e-12);  // (r-1) - log r is nonnegative
    }
    for (const auto& ep : rec.eval_curve) CHECK(ep.mean_return <= 0.0);
    double score = evaluate_policy(rec.final_params, cfg, 99, 3);
    CHECK(score <= 0.0);
    CHECK(evaluate_episode_returns(rec.final_params, cfg, 99, 3).size() == 3);
}

TEST_CASE("training is deterministic in the seed") {
    env::EnvConfig cfg;
    Hyperparameters h;
    h.n_steps = 256;
    h.batch_size = 64;
    h.epochs = 2;
    h.total_timesteps = 512;
    TrainOptions opts;
    opts.eval_every = 256;
    opts.eval_episodes = 2;
    auto strip = [](RunRecord rec) {
        auto j = run_record_to_json(rec);
        j.erase("wall_time");
        return j;
    };
    auto a = strip(train(cfg, h, 7, opts));
    auto b = strip(train(cfg, h, 7, opts));
    CHECK(a == b);
    auto c = strip(train(cfg, h, 8, opts));
    CHECK(a != c);
}

TEST_CASE("run records survive a save/load round trip, shared trunk included") {
    env::EnvConfig cfg;
    Hyperparameters h;
    h.n_steps = 256;
    h.batch_size = 64;
    h.epochs = 1;
    h.total_timesteps = 256;
    TrainOptions opts;
    opts.eval_every = 256;
    opts.eval_episodes = 2;
    opts.topology = Topology::SharedTrunk;
    RunRecord rec = train(cfg, h, 21, opts);
    CHECK(rec.final_params.topology() == Topology::SharedTrunk);

    fs::path dir = scratch_dir("runrec");
    save_run_record(dir.string(), rec);
    RunRecord back = load_run_record(dir.string());
    CHECK(back.final_params.topology() == Topology::SharedTrunk);
    CHECK(back.final_params.flat_params() == rec.final_params.flat_params());
    auto ja = run_record_to_json(rec);
    auto jb = run_record_to_json(back);
    CHECK(ja == jb);  // wall_time is stored, so it round-trips too
}
