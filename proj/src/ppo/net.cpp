#include "acd/ppo/net.hpp"

#include <cmath>
#include <fstream>

namespace acd::ppo {

void Linear::init_orthogonal(Rng& rng, double gain) {
    // QR of a Gaussian matrix, sign-corrected so the factorization is unique.
    // Tall-or-square input keeps Q's columns orthonormal; transpose back if
    // the layer is wider than it is tall.
    const long rows = W.rows(), cols = W.cols();
    const bool wide = rows < cols;
    const long r = wide ? cols : rows, c = wide ? rows : cols;
    Eigen::MatrixXd a(r, c);
    for (long i = 0; i < r; ++i)
        for (long j = 0; j < c; ++j) a(i, j) = normal(rng);
    Eigen::HouseholderQR<Eigen::MatrixXd> qr(a);
    Eigen::MatrixXd q = qr.householderQ() * Eigen::MatrixXd::Identity(r, c);
    Eigen::MatrixXd rfac = qr.matrixQR().topRows(c);
    for (long j = 0; j < c; ++j)
        if (rfac(j, j) < 0) q.col(j) *= -1.0;
    W = gain * (wide ? q.transpose() : q);
    b.setZero();
}

std::string topology_name(Topology t) {
    return t == Topology::Separate ? "separate" : "shared_trunk";
}

Topology topology_from_name(const std::string& s) {
    if (s == "separate") return Topology::Separate;
    if (s == "shared_trunk") return Topology::SharedTrunk;
    throw env::ConfigError("unknown topology: " + s);
}

ActorCritic::ActorCritic(Topology topo, int obs_dim, int hidden_dim, int n_actions)
    : topo_(topo),
      obs_dim_(obs_dim),
      hidden_dim_(hidden_dim),
      n_actions_(n_actions),
      p1_(obs_dim, hidden_dim),
      p2_(hidden_dim, hidden_dim),
      policy_head_(hidden_dim, n_actions),
      v1_(obs_dim, hidden_dim),
      v2_(hidden_dim, hidden_dim),
      value_head_(hidden_dim, 1) {}

void ActorCritic::init(Rng& rng) {
    const double hidden_gain = std::sqrt(2.0);
    p1_.init_orthogonal(rng, hidden_gain);
    p2_.init_orthogonal(rng, hidden_gain);
    policy_head_.init_orthogonal(rng, 0.01);
    if (topo_ == Topology::Separate) {
        v1_.init_orthogonal(rng, hidden_gain);
        v2_.init_orthogonal(rng, hidden_gain);
    }
    value_head_.init_orthogonal(rng, 1.0);
}

namespace {
Eigen::MatrixXd relu(const Eigen::MatrixXd& z) { return z.cwiseMax(0.0); }
}  // namespace

ActorCritic::Trace ActorCritic::forward(const Eigen::MatrixXd& x) const {
    Trace t;
    t.x = x;
    t.ph1 = relu(p1_.forward(x));
    t.ph2 = relu(p2_.forward(t.ph1));
    t.logits = policy_head_.forward(t.ph2);
    if (topo_ == Topology::Separate) {
        t.vh1 = relu(v1_.forward(x));
        t.vh2 = relu(v2_.forward(t.vh1));
        t.values = value_head_.forward(t.vh2).col(0);
    } else {
        t.vh1 = t.ph1;
        t.vh2 = t.ph2;
        t.values = value_head_.forward(t.ph2).col(0);
    }
    return t;
}

namespace {

// Backprop through one dense layer: accumulates its gradients and returns
// the gradient w.r.t. the layer input.
Eigen::MatrixXd backprop_linear(Linear& lin, const Eigen::MatrixXd& input,
                                const Eigen::MatrixXd& dout) {
    lin.gW.noalias() += dout.transpose() * input;
    lin.gb += dout.colwise().sum().transpose();
    return dout * lin.W;
}

Eigen::MatrixXd relu_mask(const Eigen::MatrixXd& post, const Eigen::MatrixXd& d) {
    return ((post.array() > 0.0).cast<double>() * d.array()).matrix();
}

}  // namespace

void ActorCritic::backward(const Trace& t, const Eigen::MatrixXd& dlogits,
                           const Eigen::VectorXd& dvalues) {
    Eigen::MatrixXd dval_out = dvalues;  // n x 1
    if (topo_ == Topology::Separate) {
        Eigen::MatrixXd d = backprop_linear(policy_head_, t.ph2, dlogits);
        d = backprop_linear(p2_, t.ph1, relu_mask(t.ph2, d));
        backprop_linear(p1_, t.x, relu_mask(t.ph1, d));

        d = backprop_linear(value_head_, t.vh2, dval_out);
        d = backprop_linear(v2_, t.vh1, relu_mask(t.vh2, d));
        backprop_linear(v1_, t.x, relu_mask(t.vh1, d));
    } else {
        Eigen::MatrixXd d = backprop_linear(policy_head_, t.ph2, dlogits);
        d += backprop_linear(value_head_, t.ph2, dval_out);
        d = backprop_linear(p2_, t.ph1, relu_mask(t.ph2, d));
        backprop_linear(p1_, t.x, relu_mask(t.ph1, d));
    }
}

void ActorCritic::zero_grad() {
    for (Linear* l : layers()) l->zero_grad();
}

std::vector<Linear*> ActorCritic::layers() {
    if (topo_ == Topology::Separate)
        return {&p1_, &p2_, &policy_head_, &v1_, &v2_, &value_head_};
    return {&p1_, &p2_, &policy_head_, &value_head_};
}

std::vector<const Linear*> ActorCritic::layers() const {
    auto mut = const_cast<ActorCritic*>(this)->layers();
    return {mut.begin(), mut.end()};
}

long ActorCritic::param_count() const {
    long n = 0;
    for (const Linear* l : layers()) n += l->param_count();
    return n;
}

Eigen::VectorXd ActorCritic::flat_params() const {
    Eigen::VectorXd theta(param_count());
    long off = 0;
    for (const Linear* l : layers()) {
        theta.segment(off, l->W.size()) = Eigen::Map<const Eigen::VectorXd>(l->W.data(), l->W.size());
        off += l->W.size();
        theta.segment(off, l->b.size()) = l->b;
        off += l->b.size();
    }
    return theta;
}

Eigen::VectorXd ActorCritic::flat_grads() const {
    Eigen::VectorXd g(param_count());
    long off = 0;
    for (const Linear* l : layers()) {
        g.segment(off, l->gW.size()) = Eigen::Map<const Eigen::VectorXd>(l->gW.data(), l->gW.size());
        off += l->gW.size();
        g.segment(off, l->gb.size()) = l->gb;
        off += l->gb.size();
    }
    return g;
}

void ActorCritic::set_flat_params(const Eigen::VectorXd& theta) {
    long off = 0;
    for (Linear* l : layers()) {
        Eigen::Map<Eigen::VectorXd>(l->W.data(), l->W.size()) = theta.segment(off, l->W.size());
        off += l->W.size();
        l->b = theta.segment(off, l->b.size());
        off += l->b.size();
    }
}

nlohmann::json ActorCritic::shape_manifest() const {
    nlohmann::json layers_json = nlohmann::json::array();
    static const char* sep_names[] = {"policy_h1", "policy_h2", "policy_head",
                                      "value_h1", "value_h2", "value_head"};
    static const char* shared_names[] = {"trunk_h1", "trunk_h2", "policy_head", "value_head"};
    auto ls = layers();
    const char** names = topo_ == Topology::Separate ? sep_names : shared_names;
    for (size_t i = 0; i < ls.size(); ++i) {
        layers_json.push_back({{"name", names[i]},
                               {"in", ls[i]->W.cols()},
                               {"out", ls[i]->W.rows()}});
    }
    return nlohmann::json{{"dtype", "float64"},
                          {"topology", topology_name(topo_)},
                          {"order", "per layer: weight (column-major), then bias"},
                          {"layers", layers_json},
                          {"total_params", param_count()}};
}

void ActorCritic::save_weights(const std::string& path) const {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path);
    Eigen::VectorXd theta = flat_params();
    out.write(reinterpret_cast<const char*>(theta.data()),
              static_cast<std::streamsize>(sizeof(double) * theta.size()));
}

ActorCritic ActorCritic::load_weights(const std::string& weights_path,
                                      const std::string& manifest_path) {
    std::ifstream mf(manifest_path);
    if (!mf) throw std::runtime_error("cannot read " + manifest_path);
    nlohmann::json manifest = nlohmann::json::parse(mf);
    int obs_dim = kObsDim, hidden_dim = kHiddenDim, n_actions = kActionDim;
    for (const auto& layer : manifest.at("layers")) {
        const std::string name = layer.at("name").get<std::string>();
        if (name == "policy_h1" || name == "trunk_h1") {
            obs_dim = layer.at("in").get<int>();
            hidden_dim = layer.at("out").get<int>();
        } else if (name == "policy_head") {
            n_actions = layer.at("out").get<int>();
        }
    }
    ActorCritic net(topology_from_name(manifest.at("topology").get<std::string>()), obs_dim,
                    hidden_dim, n_actions);
    std::ifstream in(weights_path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot read " + weights_path);
    Eigen::VectorXd theta(net.param_count());
    in.read(reinterpret_cast<char*>(theta.data()),
            static_cast<std::streamsize>(sizeof(double) * theta.size()));
    if (in.gcount() != static_cast<std::streamsize>(sizeof(double) * theta.size()))
        throw std::runtime_error("weight file truncated: " + weights_path);
    net.set_flat_params(theta);
    return net;
}

Eigen::MatrixXd log_softmax(const Eigen::MatrixXd& logits) {
    Eigen::VectorXd row_max = logits.rowwise().maxCoeff();
    Eigen::MatrixXd shifted = logits.colwise() - row_max;
    Eigen::VectorXd lse = shifted.array().exp().rowwise().sum().log();
    return shifted.colwise() - lse;
}

std::pair<int, double> sample_action(const Eigen::VectorXd& logits, Rng& rng) {
    Eigen::VectorXd logp = log_softmax(logits.transpose()).row(0).transpose();
    Eigen::VectorXd p = logp.array().exp();
    double u = uniform01(rng);
    double acc = 0.0;
    int n = static_cast<int>(p.size());
    for (int i = 0; i < n; ++i) {
        acc += p(i);
        if (u < acc) return {i, logp(i)};
    }
    return {n - 1, logp(n - 1)};  // guard against rounding in the final bin
}

int argmax_action(const Eigen::VectorXd& logits) {
    Eigen::Index idx = 0;
    logits.maxCoeff(&idx);
    return static_cast<int>(idx);
}

}  // namespace acd::ppo
