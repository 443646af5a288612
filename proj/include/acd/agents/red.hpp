#pragma once

#include <memory>

#include "acd/agents/knowledge.hpp"
#include "acd/common/rand.hpp"

namespace acd::agents {

// Straight-line attacker: shortest path to the critical server, nothing else.
// Re-derives its next move from ground truth every step, so it resumes from
// the deepest surviving stage after blue knocks part of the chain out.
class BLineRed : public RedPolicy {
public:
    void begin_episode(uint64_t seed) override;
    env::RedAction next(const env::NetworkState& state, RedKnowledge& knowledge) override;
    std::string name() const override { return "BLine"; }
};

// Breadth-first attacker: takes privileged access on every host it can see,
// lowest index first, leaving the critical server for last, then impacts.
class MeanderRed : public RedPolicy {
public:
    void begin_episode(uint64_t seed) override;
    env::RedAction next(const env::NetworkState& state, RedKnowledge& knowledge) override;
    std::string name() const override { return "Meander"; }
};

// Coin-flips between BLine and Meander at each episode start.
class MixedRed : public RedPolicy {
public:
    void begin_episode(uint64_t seed) override;
    env::RedAction next(const env::NetworkState& state, RedKnowledge& knowledge) override;
    std::string name() const override { return "MixedPerEpisode"; }

private:
    Rng rng_;
    BLineRed bline_;
    MeanderRed meander_;
    RedPolicy* active_ = &bline_;
};

// Inert attacker, useful as a control: the defender can always score 0.
class SleepRed : public RedPolicy {
public:
    void begin_episode(uint64_t) override {}
    env::RedAction next(const env::NetworkState&, RedKnowledge&) override {
        return {env::RedActionKind::Sleep, -1};
    }
    std::string name() const override { return "Sleep"; }
};

std::unique_ptr<RedPolicy> make_red_policy(env::RedPolicyName name);

}  // namespace acd::agents
