#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <vector>

#include <json.hpp>

#include "acd/common/rand.hpp"
#include "acd/ppo/net.hpp"

namespace acd::ppo {

struct Hyperparameters {
    double learning_rate = 3e-4;
    double gamma = 0.99;
    double clip_range = 0.2;
    int epochs = 6;
    int batch_size = 64;
    int n_steps = 2048;
    double gae_lambda = 0.95;
    double entropy_coef = 0.0;
    double value_coef = 0.5;
    int64_t total_timesteps = 2'500'000;
    double max_grad_norm = 0.5;
    double adam_epsilon = 1e-5;

    bool operator==(const Hyperparameters&) const = default;
};

void validate(const Hyperparameters& h);
nlohmann::json hparams_to_json(const Hyperparameters& h);
// Strict: unknown keys are rejected, known keys override defaults.
Hyperparameters hparams_from_json(const nlohmann::json& j);

// Flat storage for one n_steps rollout segment.
struct RolloutBuffer {
    Eigen::MatrixXd observations;  // n_steps x 78
    std::vector<int> actions;
    std::vector<double> log_probs;
    std::vector<double> rewards;
    std::vector<double> values;
    std::vector<uint8_t> episode_ends;
    std::vector<double> advantages;
    std::vector<double> returns;

    explicit RolloutBuffer(int n_steps = 0, int obs_dim = kObsDim);
    int size() const { return static_cast<int>(actions.size()); }
};

struct UpdateMetrics {
    double surrogate_loss = 0.0;
    double value_loss = 0.0;
    double entropy = 0.0;
    double clip_fraction = 0.0;
    double approx_kl = 0.0;
};

nlohmann::json metrics_to_json(const UpdateMetrics& m);

// Raised when a loss or gradient goes non-finite; the trainer catches it and
// emits a partial run record with the diagnostic.
struct NumericError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

class Adam {
public:
    Adam(long n, double lr, double eps);
    // In-place parameter update from a gradient of the loss.
    void step(Eigen::VectorXd& params, const Eigen::VectorXd& grad);

private:
    double lr_, eps_;
    int64_t t_ = 0;
    Eigen::VectorXd m_, v_;
};

// One loss/gradient evaluation on a minibatch (rows `idx` of the buffer).
// Gradients are accumulated into `net`; callers own zero_grad().
// normalize_advantages is always on in training; tests switch it off to
// compare against the plain policy gradient.
UpdateMetrics minibatch_loss_backward(ActorCritic& net, const RolloutBuffer& buffer,
                                      const std::vector<int>& idx, const Hyperparameters& h,
                                      bool normalize_advantages = true);

// Scalar loss only (surrogate + value_coef * mse - entropy_coef * entropy),
// used by finite-difference gradient checks.
double minibatch_loss_value(const ActorCritic& net, const RolloutBuffer& buffer,
                            const std::vector<int>& idx, const Hyperparameters& h,
                            bool normalize_advantages = true);

// Full PPO update: epochs x shuffled minibatches, Adam with global-norm
// gradient clipping. Mutates net in place; returns per-minibatch-averaged
// metrics. The caller's Adam instance carries moments across updates.
UpdateMetrics ppo_update(ActorCritic& net, Adam& adam, const RolloutBuffer& buffer,
                         const Hyperparameters& h, Rng& rng);

}  // namespace acd::ppo
