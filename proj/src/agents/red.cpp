#include "acd/agents/red.hpp"

#include <vector>

namespace acd::agents {

using env::RedAccess;
using env::RedAction;
using env::RedActionKind;
using env::Subnet;

namespace {

RedAccess access_of(const env::NetworkState& state, int host) {
    return state.hosts[static_cast<size_t>(host)].red_access;
}

// One rung of the kill chain against a single host. Returns Sleep when the
// host is already owned (caller moves on to the next objective).
RedAction advance_on_host(const env::NetworkState& state, const RedKnowledge& k, int host) {
    RedAccess access = access_of(state, host);
    if (access == RedAccess::Privileged) return {RedActionKind::Sleep, -1};
    if (access == RedAccess::User) return {RedActionKind::Escalate, host};
    if (k.knows_services(host)) return {RedActionKind::ExploitNetworkServices, host};
    return {RedActionKind::DiscoverNetworkServices, host};
}

}  // namespace

void BLineRed::begin_episode(uint64_t) {}

RedAction BLineRed::next(const env::NetworkState& state, RedKnowledge& knowledge) {
    constexpr int kWaypoint = 5;  // first enterprise host; the defender box is avoided

    if (access_of(state, env::kCriticalServer) == RedAccess::Privileged) {
        knowledge.phase = "impact";
        return {RedActionKind::Impact, env::kCriticalServer};
    }
    if (knowledge.knows_subnet(Subnet::Operational)) {
        knowledge.phase = "operational";
        return advance_on_host(state, knowledge, env::kCriticalServer);
    }
    if (access_of(state, kWaypoint) == RedAccess::Privileged) {
        knowledge.phase = "pivot";
        return {RedActionKind::DiscoverRemoteSystems, static_cast<int>(Subnet::Operational)};
    }
    if (knowledge.knows_subnet(Subnet::Enterprise)) {
        knowledge.phase = "enterprise";
        return advance_on_host(state, knowledge, kWaypoint);
    }
    knowledge.phase = "recon";
    return {RedActionKind::DiscoverRemoteSystems, static_cast<int>(Subnet::Enterprise)};
}

void MeanderRed::begin_episode(uint64_t) {}

RedAction MeanderRed::next(const env::NetworkState& state, RedKnowledge& knowledge) {
    // Sweep known hosts in index order, saving the critical server for last.
    std::vector<int> order(knowledge.known_hosts.begin(), knowledge.known_hosts.end());
    std::erase(order, env::kCriticalServer);
    if (knowledge.known_hosts.count(env::kCriticalServer)) order.push_back(env::kCriticalServer);

    for (int host : order) {
        RedAction a = advance_on_host(state, knowledge, host);
        if (a.kind != RedActionKind::Sleep) {
            knowledge.phase = "sweep";
            return a;
        }
    }
    // Everything visible is owned; widen the view or start doing damage.
    for (Subnet s : {Subnet::Enterprise, Subnet::Operational}) {
        if (!knowledge.knows_subnet(s)) {
            knowledge.phase = "recon";
            return {RedActionKind::DiscoverRemoteSystems, static_cast<int>(s)};
        }
    }
    knowledge.phase = "impact";
    return {RedActionKind::Impact, env::kCriticalServer};
}

void MixedRed::begin_episode(uint64_t seed) {
    rng_.seed(seed);
    active_ = bernoulli(rng_, 0.5) ? static_cast<RedPolicy*>(&bline_) : &meander_;
    active_->begin_episode(seed);
}

RedAction MixedRed::next(const env::NetworkState& state, RedKnowledge& knowledge) {
    return active_->next(state, knowledge);
}

std::unique_ptr<RedPolicy> make_red_policy(env::RedPolicyName name) {
    switch (name) {
        case env::RedPolicyName::BLine: return std::make_unique<BLineRed>();
        case env::RedPolicyName::Meander: return std::make_unique<MeanderRed>();
        case env::RedPolicyName::MixedPerEpisode: return std::make_unique<MixedRed>();
        case env::RedPolicyName::Sleep: return std::make_unique<SleepRed>();
    }
    throw env::ConfigError("unknown red policy");
}

}  // namespace acd::agents
