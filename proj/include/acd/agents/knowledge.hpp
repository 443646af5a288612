#pragma once

#include <map>
#include <set>
#include <string>

#include "acd/env/types.hpp"

namespace acd::agents {

// Attacker-side bookkeeping. The environment owns one instance and updates
// it as red actions resolve; scripted policies read it to decide their next
// move. Footholds mirror simulator ground truth (red knows its own shells).
struct RedKnowledge {
    std::set<int> known_subnets;                 // Subnet enum values
    std::set<int> known_hosts;
    std::map<int, std::set<int>> known_services; // snapshot taken at scan time;
                                                 // erased when blue restores the host
    std::map<int, env::RedAccess> footholds;
    std::string phase;                           // progress marker set by the policy

    bool knows_subnet(env::Subnet s) const { return known_subnets.count(static_cast<int>(s)) > 0; }
    bool knows_services(int host) const { return known_services.count(host) > 0; }
};

class RedPolicy {
public:
    virtual ~RedPolicy() = default;
    // Called at env reset; the seed makes stochastic policies replayable.
    virtual void begin_episode(uint64_t seed) = 0;
    virtual env::RedAction next(const env::NetworkState& state, RedKnowledge& knowledge) = 0;
    virtual std::string name() const = 0;
};

}  // namespace acd::agents
