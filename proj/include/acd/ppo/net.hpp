#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

#include <json.hpp>

#include "acd/common/rand.hpp"
#include "acd/env/types.hpp"

namespace acd::ppo {

inline constexpr int kObsDim = env::kObservationSize;
inline constexpr int kActionDim = env::kNumBlueActions;
inline constexpr int kHiddenDim = 64;

// Dense layer with gradient accumulators. Weights are (out x in); batches are
// row-major, so forward is X * W^T + b.
struct Linear {
    Eigen::MatrixXd W, gW;
    Eigen::VectorXd b, gb;

    Linear() = default;
    Linear(int in, int out)
        : W(Eigen::MatrixXd::Zero(out, in)),
          gW(Eigen::MatrixXd::Zero(out, in)),
          b(Eigen::VectorXd::Zero(out)),
          gb(Eigen::VectorXd::Zero(out)) {}

    void init_orthogonal(Rng& rng, double gain);
    void zero_grad() { gW.setZero(); gb.setZero(); }
    Eigen::MatrixXd forward(const Eigen::MatrixXd& x) const {
        return (x * W.transpose()).rowwise() + b.transpose();
    }
    long param_count() const { return W.size() + b.size(); }
};

enum class Topology { Separate, SharedTrunk };

std::string topology_name(Topology t);
Topology topology_from_name(const std::string& s);

// Actor-critic MLP: 78 -> 64 -> 64 with rectified-linear hiddens, then a
// 53-way policy head and a scalar value head. Default is two fully separate
// towers; SharedTrunk reuses one pair of hidden layers for both heads.
class ActorCritic {
public:
    // Activation cache from a forward pass, consumed by backward().
    struct Trace {
        Eigen::MatrixXd x;                  // input batch, n x 78
        Eigen::MatrixXd ph1, ph2;           // post-relu policy-tower hiddens
        Eigen::MatrixXd vh1, vh2;           // post-relu value-tower hiddens (aliases in shared mode)
        Eigen::MatrixXd logits;             // n x 53
        Eigen::VectorXd values;             // n
    };

    // Defaults give the real 78 -> 64 -> 64 -> 53 / 1 shape; the dims stay
    // overridable so gradient tests can run on hand-checkable sizes.
    explicit ActorCritic(Topology topo = Topology::Separate, int obs_dim = kObsDim,
                         int hidden_dim = kHiddenDim, int n_actions = kActionDim);
    void init(Rng& rng);  // orthogonal init; hidden gain sqrt(2), heads 0.01 / 1.0

    int obs_dim() const { return obs_dim_; }
    int n_actions() const { return n_actions_; }

    Trace forward(const Eigen::MatrixXd& x) const;
    // Accumulates parameter gradients for upstream dlogits (n x 53) and
    // dvalues (n). Call zero_grad() first when starting a fresh batch.
    void backward(const Trace& t, const Eigen::MatrixXd& dlogits, const Eigen::VectorXd& dvalues);
    void zero_grad();

    Topology topology() const { return topo_; }
    std::vector<Linear*> layers();
    std::vector<const Linear*> layers() const;
    long param_count() const;
    Eigen::VectorXd flat_params() const;
    Eigen::VectorXd flat_grads() const;
    void set_flat_params(const Eigen::VectorXd& theta);

    nlohmann::json shape_manifest() const;
    void save_weights(const std::string& path) const;       // raw doubles
    static ActorCritic load_weights(const std::string& weights_path,
                                    const std::string& manifest_path);

private:
    Topology topo_;
    int obs_dim_, hidden_dim_, n_actions_;
    // Separate: p1,p2,policy_head and v1,v2,value_head.
    // SharedTrunk: p1,p2 double as the trunk; v1,v2 unused.
    Linear p1_, p2_, policy_head_;
    Linear v1_, v2_, value_head_;
};

// Numerically stable row-wise log-softmax.
Eigen::MatrixXd log_softmax(const Eigen::MatrixXd& logits);

// Categorical draw from softmax(logits); returns (action, log-probability).
std::pair<int, double> sample_action(const Eigen::VectorXd& logits, Rng& rng);
int argmax_action(const Eigen::VectorXd& logits);

}  // namespace acd::ppo
