#pragma once

#include <memory>
#include <vector>

#include "acd/agents/knowledge.hpp"
#include "acd/common/rand.hpp"
#include "acd/env/types.hpp"

namespace acd::env {

struct StepResult {
    BlueObservation observation;
    RewardBreakdown reward;
    bool done = false;
    std::vector<StepEvent> events;
};

// One line of the ndjson episode trace.
struct StepTraceRecord {
    int step = 0;
    std::string blue_action;
    std::string red_action;
    RewardBreakdown reward;
    std::vector<StepEvent> events;
    BlueObservation observation;
};
nlohmann::json trace_record_to_json(const StepTraceRecord& r);

// Known-good image of a host: what Restore reverts to.
HostTrueState initial_host_state(int host, const EnvConfig& cfg);

// State immediately after reset: every host at its known-good image, plus
// red's user-level foothold on the entry host (hidden from the defender).
// A Sleep attacker gets no foothold: it models an absent adversary.
NetworkState make_reset_state(const EnvConfig& cfg);

// Action resolution. Both mutate state/knowledge in place and append the
// events they emit. Illegal or no-effect actions resolve to no-ops. Defender-
// view updates happen at event emission time, which is where observation
// noise (suppressed exploit evidence) is drawn.
void resolve_blue(NetworkState& state, agents::RedKnowledge& knowledge, const EnvConfig& cfg,
                  const BlueAction& action, std::vector<StepEvent>& events);
void resolve_red(NetworkState& state, agents::RedKnowledge& knowledge, const EnvConfig& cfg,
                 const RedAction& action, Rng& rng, std::vector<StepEvent>& events);

// Penalties over the post-step state plus this step's events. Compromise
// penalties count hosts at privileged access and recur every step the
// condition holds.
RewardBreakdown compute_reward(const NetworkState& state, const std::vector<StepEvent>& events);

// Pure function of the state: [52 activity/access bits | 13 scan | 13 decoys].
BlueObservation encode_observation(const NetworkState& state);

class Environment {
public:
    explicit Environment(EnvConfig cfg);  // validates; reset() required before stepping

    BlueObservation reset(uint64_t seed);
    StepResult step(const BlueAction& blue_action);

    bool initialized() const { return initialized_; }
    bool done() const { return done_; }
    const EnvConfig& config() const { return cfg_; }
    const NetworkState& state() const { return state_; }
    const agents::RedKnowledge& red_knowledge() const { return knowledge_; }
    const RedAction& last_red_action() const { return last_red_; }

private:
    EnvConfig cfg_;
    NetworkState state_;
    agents::RedKnowledge knowledge_;
    std::unique_ptr<agents::RedPolicy> red_;
    Rng rng_;
    bool initialized_ = false;
    bool done_ = false;
    RedAction last_red_;
};

}  // namespace acd::env
