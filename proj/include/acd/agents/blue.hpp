#pragma once

#include "acd/common/rand.hpp"
#include "acd/env/types.hpp"

namespace acd::agents {

// Uniform-random defender, the floor any trained policy has to beat.
class RandomBlue {
public:
    explicit RandomBlue(uint64_t seed) : rng_(seed) {}
    env::BlueAction next() {
        return env::blue_action_from_index(
            static_cast<int>(uniform_index(rng_, env::kNumBlueActions)));
    }

private:
    Rng rng_;
};

}  // namespace acd::agents
