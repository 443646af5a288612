#pragma once

#include <cstdint>
#include <vector>

namespace acd::ppo {

struct GaeResult {
    std::vector<double> advantages;
    std::vector<double> returns;  // advantages + values
};

// Generalized advantage estimation over a flat rollout. episode_ends[t] marks
// that the episode terminated at step t, which cuts the recursion there; the
// bootstrap value stands in for the state after the final step when the
// rollout was truncated mid-episode.
GaeResult compute_gae(const std::vector<double>& rewards, const std::vector<double>& values,
                      const std::vector<uint8_t>& episode_ends, double bootstrap_value,
                      double gamma, double lambda);

}  // namespace acd::ppo
