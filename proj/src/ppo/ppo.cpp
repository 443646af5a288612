#include "acd/ppo/ppo.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>

namespace acd::ppo {

void validate(const Hyperparameters& h) {
    if (!(h.gamma > 0.0 && h.gamma <= 1.0)) throw env::ConfigError("gamma must be in (0, 1]");
    if (!(h.gae_lambda >= 0.0 && h.gae_lambda <= 1.0))
        throw env::ConfigError("gae_lambda must be in [0, 1]");
    if (!(h.clip_range > 0.0)) throw env::ConfigError("clip_range must be positive");
    if (h.batch_size <= 0 || h.n_steps <= 0 || h.n_steps % h.batch_size != 0)
        throw env::ConfigError("batch_size must divide n_steps");
    if (h.epochs <= 0) throw env::ConfigError("epochs must be positive");
    if (h.learning_rate < 0.0) throw env::ConfigError("learning_rate must be non-negative");
    if (h.total_timesteps <= 0) throw env::ConfigError("total_timesteps must be positive");
}

nlohmann::json hparams_to_json(const Hyperparameters& h) {
    return nlohmann::json{{"learning_rate", h.learning_rate},
                          {"gamma", h.gamma},
                          {"clip_range", h.clip_range},
                          {"epochs", h.epochs},
                          {"batch_size", h.batch_size},
                          {"n_steps", h.n_steps},
                          {"gae_lambda", h.gae_lambda},
                          {"entropy_coef", h.entropy_coef},
                          {"value_coef", h.value_coef},
                          {"total_timesteps", h.total_timesteps},
                          {"max_grad_norm", h.max_grad_norm},
                          {"adam_epsilon", h.adam_epsilon}};
}

Hyperparameters hparams_from_json(const nlohmann::json& j) {
    static const std::set<std::string> known = {
        "learning_rate", "gamma",        "clip_range",      "epochs",
        "batch_size",    "n_steps",      "gae_lambda",      "entropy_coef",
        "value_coef",    "total_timesteps", "max_grad_norm", "adam_epsilon"};
    for (auto it = j.begin(); it != j.end(); ++it)
        if (!known.count(it.key()))
            throw env::ConfigError("unknown hyperparameter: " + it.key());
    Hyperparameters h;
    if (j.contains("learning_rate")) h.learning_rate = j.at("learning_rate").get<double>();
    if (j.contains("gamma")) h.gamma = j.at("gamma").get<double>();
    if (j.contains("clip_range")) h.clip_range = j.at("clip_range").get<double>();
    if (j.contains("epochs")) h.epochs = j.at("epochs").get<int>();
    if (j.contains("batch_size")) h.batch_size = j.at("batch_size").get<int>();
    if (j.contains("n_steps")) h.n_steps = j.at("n_steps").get<int>();
    if (j.contains("gae_lambda")) h.gae_lambda = j.at("gae_lambda").get<double>();
    if (j.contains("entropy_coef")) h.entropy_coef = j.at("entropy_coef").get<double>();
    if (j.contains("value_coef")) h.value_coef = j.at("value_coef").get<double>();
    if (j.contains("total_timesteps")) h.total_timesteps = j.at("total_timesteps").get<int64_t>();
    if (j.contains("max_grad_norm")) h.max_grad_norm = j.at("max_grad_norm").get<double>();
    if (j.contains("adam_epsilon")) h.adam_epsilon = j.at("adam_epsilon").get<double>();
    validate(h);
    return h;
}

RolloutBuffer::RolloutBuffer(int n_steps, int obs_dim) {
    observations.resize(n_steps, obs_dim);
    actions.resize(n_steps);
    log_probs.resize(n_steps);
    rewards.resize(n_steps);
    values.resize(n_steps);
    episode_ends.resize(n_steps);
    advantages.resize(n_steps);
    returns.resize(n_steps);
}

nlohmann::json metrics_to_json(const UpdateMetrics& m) {
    return nlohmann::json{{"surrogate_loss", m.surrogate_loss},
                          {"value_loss", m.value_loss},
                          {"entropy", m.entropy},
                          {"clip_fraction", m.clip_fraction},
                          {"approx_kl", m.approx_kl}};
}

Adam::Adam(long n, double lr, double eps)
    : lr_(lr), eps_(eps), m_(Eigen::VectorXd::Zero(n)), v_(Eigen::VectorXd::Zero(n)) {}

void Adam::step(Eigen::VectorXd& params, const Eigen::VectorXd& grad) {
    constexpr double beta1 = 0.9, beta2 = 0.999;
    t_ += 1;
    m_ = beta1 * m_ + (1.0 - beta1) * grad;
    v_.array() = beta2 * v_.array() + (1.0 - beta2) * grad.array().square();
    const double bc1 = 1.0 - std::pow(beta1, static_cast<double>(t_));
    const double bc2 = 1.0 - std::pow(beta2, static_cast<double>(t_));
    params.array() -= lr_ * (m_.array() / bc1) / ((v_.array() / bc2).sqrt() + eps_);
}

namespace {

UpdateMetrics minibatch_core(const ActorCritic& net, const RolloutBuffer& buffer,
                             const std::vector<int>& idx, const Hyperparameters& h,
                             bool normalize_advantages, ActorCritic* grad_target) {
    const int m = static_cast<int>(idx.size());
    const int n_actions = net.n_actions();
    Eigen::MatrixXd x(m, net.obs_dim());
    Eigen::VectorXd adv(m), old_logp(m), ret(m);
    std::vector<int> acts(static_cast<size_t>(m));
    for (int i = 0; i < m; ++i) {
        const auto row = static_cast<size_t>(idx[static_cast<size_t>(i)]);
        x.row(i) = buffer.observations.row(static_cast<Eigen::Index>(row));
        adv(i) = buffer.advantages[row];
        old_logp(i) = buffer.log_probs[row];
        ret(i) = buffer.returns[row];
        acts[static_cast<size_t>(i)] = buffer.actions[row];
    }

    if (normalize_advantages) {
        const double mean = adv.mean();
        const double var = m > 1 ? (adv.array() - mean).square().sum() / (m - 1) : 0.0;
        adv = (adv.array() - mean) / (std::sqrt(var) + 1e-8);
    }

    ActorCritic::Trace trace = net.forward(x);
    Eigen::MatrixXd logp_all = log_softmax(trace.logits);
    Eigen::MatrixXd probs = logp_all.array().exp().matrix();

    UpdateMetrics metrics;
    Eigen::MatrixXd dlogits = Eigen::MatrixXd::Zero(m, n_actions);
    Eigen::VectorXd dvalues(m);
    int clipped = 0;
    const double inv_m = 1.0 / m;

    for (int i = 0; i < m; ++i) {
        const int a = acts[static_cast<size_t>(i)];
        const double logp = logp_all(i, a);
        const double ratio = std::exp(logp - old_logp(i));
        const double unclipped = ratio * adv(i);
        const double clipped_ratio = std::clamp(ratio, 1.0 - h.clip_range, 1.0 + h.clip_range);
        const double surrogate = std::min(unclipped, clipped_ratio * adv(i));
        metrics.surrogate_loss += -surrogate * inv_m;
        if (std::abs(ratio - 1.0) > h.clip_range) clipped += 1;
        metrics.approx_kl += ((ratio - 1.0) - std::log(ratio)) * inv_m;

        // d(-surrogate)/d logits: flows only when the unclipped branch is active.
        const double dsurr_dlogp = unclipped <= clipped_ratio * adv(i) ? ratio * adv(i) : 0.0;
        const double coeff = -dsurr_dlogp * inv_m;
        for (int k = 0; k < n_actions; ++k) dlogits(i, k) += coeff * -probs(i, k);
        dlogits(i, a) += coeff;

        // Entropy bonus and its gradient.
        double entropy_i = 0.0;
        for (int k = 0; k < n_actions; ++k) entropy_i -= probs(i, k) * logp_all(i, k);
        metrics.entropy += entropy_i * inv_m;
        if (h.entropy_coef != 0.0) {
            const double ec = h.entropy_coef * inv_m;
            for (int k = 0; k < n_actions; ++k)
                dlogits(i, k) -= ec * -probs(i, k) * (logp_all(i, k) + entropy_i);
        }

        // Value loss: value_coef * mean squared error.
        const double err = trace.values(i) - ret(i);
        metrics.value_loss += err * err * inv_m;
        dvalues(i) = h.value_coef * 2.0 * err * inv_m;
    }
    metrics.clip_fraction = static_cast<double>(clipped) / m;

    if (!std::isfinite(metrics.surrogate_loss) || !std::isfinite(metrics.value_loss) ||
        !std::isfinite(metrics.entropy))
        throw NumericError("non-finite loss in ppo update");

    if (grad_target) grad_target->backward(trace, dlogits, dvalues);
    return metrics;
}

}  // namespace

UpdateMetrics minibatch_loss_backward(ActorCritic& net, const RolloutBuffer& buffer,
                                      const std::vector<int>& idx, const Hyperparameters& h,
                                      bool normalize_advantages) {
    return minibatch_core(net, buffer, idx, h, normalize_advantages, &net);
}

double minibatch_loss_value(const ActorCritic& net, const RolloutBuffer& buffer,
                            const std::vector<int>& idx, const Hyperparameters& h,
                            bool normalize_advantages) {
    UpdateMetrics m = minibatch_core(net, buffer, idx, h, normalize_advantages, nullptr);
    return m.surrogate_loss + h.value_coef * m.value_loss - h.entropy_coef * m.entropy;
}

UpdateMetrics ppo_update(ActorCritic& net, Adam& adam, const RolloutBuffer& buffer,
                         const Hyperparameters& h, Rng& rng) {
    const int n = buffer.size();
    std::vector<int> order(static_cast<size_t>(n));
    std::iota(order.begin(), order.end(), 0);

    UpdateMetrics total;
    int batches = 0;
    for (int epoch = 0; epoch < h.epochs; ++epoch) {
        // Fisher-Yates with the portable rng, so shuffles replay across platforms.
        for (int i = n - 1; i > 0; --i) {
            const auto j = uniform_index(rng, static_cast<size_t>(i) + 1);
            std::swap(order[static_cast<size_t>(i)], order[j]);
        }
        for (int start = 0; start + h.batch_size <= n; start += h.batch_size) {
            std::vector<int> idx(order.begin() + start, order.begin() + start + h.batch_size);
            net.zero_grad();
            UpdateMetrics m = minibatch_loss_backward(net, buffer, idx, h);

            Eigen::VectorXd grad = net.flat_grads();
            if (!grad.allFinite()) throw NumericError("non-finite gradient in ppo update");
            const double norm = grad.norm();
            if (h.max_grad_norm > 0.0 && norm > h.max_grad_norm)
                grad *= h.max_grad_norm / norm;
            Eigen::VectorXd params = net.flat_params();
            adam.step(params, grad);
            net.set_flat_params(params);

            total.surrogate_loss += m.surrogate_loss;
            total.value_loss += m.value_loss;
            total.entropy += m.entropy;
            total.clip_fraction += m.clip_fraction;
            total.approx_kl += m.approx_kl;
            batches += 1;
        }
    }
    total.surrogate_loss /= batches;
    total.value_loss /= batches;
    total.entropy /= batches;
    total.clip_fraction /= batches;
    total.approx_kl /= batches;
    return total;
}

}  // namespace acd::ppo
