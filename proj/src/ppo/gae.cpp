#include "acd/ppo/gae.hpp"

#include <cassert>

namespace acd::ppo {

GaeResult compute_gae(const std::vector<double>& rewards, const std::vector<double>& values,
                      const std::vector<uint8_t>& episode_ends, double bootstrap_value,
                      double gamma, double lambda) {
    const size_t n = rewards.size();
    assert(values.size() == n && episode_ends.size() == n);
    GaeResult out;
    out.advantages.resize(n);
    out.returns.resize(n);
    double next_advantage = 0.0;
    double next_value = bootstrap_value;
    for (size_t i = n; i-- > 0;) {
        const double live = episode_ends[i] ? 0.0 : 1.0;
        const double delta = rewards[i] + gamma * next_value * live - values[i];
        next_advantage = delta + gamma * lambda * live * next_advantage;
        out.advantages[i] = next_advantage;
        out.returns[i] = next_advantage + values[i];
        next_value = values[i];
    }
    return out;
}

}  // namespace acd::ppo
