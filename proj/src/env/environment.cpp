#include "acd/env/environment.hpp"

#include <algorithm>

#include "acd/agents/red.hpp"

namespace acd::env {

using agents::RedKnowledge;

HostTrueState initial_host_state(int host, const EnvConfig& cfg) {
    HostTrueState h;
    h.real_services = {0, 1};
    h.decoys_remaining = cfg.decoy_budget(host);
    return h;
}

NetworkState make_reset_state(const EnvConfig& cfg) {
    NetworkState s;
    for (int i = 0; i < kNumHosts; ++i) s.hosts[static_cast<size_t>(i)] = initial_host_state(i, cfg);
    // A Sleep attacker models an empty threat landscape: no entry foothold,
    // so a defender restore never evicts anyone and the score stays 0.
    if (cfg.red_policy_name != RedPolicyName::Sleep) {
        // The foothold arrived via a pre-episode exploit; the defender's view
        // of it stays clean.
        s.hosts[kEntryHost].red_access = RedAccess::User;
        s.hosts[kEntryHost].red_activity = RedActivity::Exploited;
    }
    return s;
}

namespace {

RedKnowledge make_reset_knowledge(const EnvConfig& cfg) {
    RedKnowledge k;
    k.known_subnets.insert(static_cast<int>(Subnet::User));
    for (int h : hosts_in(Subnet::User)) k.known_hosts.insert(h);
    if (cfg.red_policy_name != RedPolicyName::Sleep) k.footholds[kEntryHost] = RedAccess::User;
    return k;
}

RedAccess max_access(RedAccess a, RedAccess b) { return a < b ? b : a; }

}  // namespace

void resolve_blue(NetworkState& state, RedKnowledge& knowledge, const EnvConfig& cfg,
                  const BlueAction& action, std::vector<StepEvent>& events) {
    if (action.kind == BlueActionKind::Sleep) return;
    auto& host = state.hosts[static_cast<size_t>(action.host)];
    switch (action.kind) {
        case BlueActionKind::Analyze:
            host.observed_access = host.red_access;
            break;
        case BlueActionKind::Decoy:
            if (host.decoys_remaining > 0) {
                int budget = cfg.decoy_budget(action.host);
                host.decoy_services.insert(100 + (budget - host.decoys_remaining));
                host.decoys_remaining -= 1;
            }
            break;
        case BlueActionKind::Remove:
            // Only works before red escalates.
            if (host.red_access == RedAccess::Unknown || host.red_access == RedAccess::User) {
                host.red_access = RedAccess::None;
                host.observed_access = RedAccess::None;
                knowledge.footholds.erase(action.host);
            }
            break;
        case BlueActionKind::Restore: {
            bool evicted = host.red_access != RedAccess::None;
            host = initial_host_state(action.host, cfg);
            knowledge.footholds.erase(action.host);
            knowledge.known_services.erase(action.host);  // red's service intel is stale
            if (evicted) events.push_back({EventKind::BlueRestored, action.host});
            break;
        }
        default:
            break;
    }
}

void resolve_red(NetworkState& state, RedKnowledge& knowledge, const EnvConfig& cfg,
                 const RedAction& action, Rng& rng, std::vector<StepEvent>& events) {
    switch (action.kind) {
        case RedActionKind::Sleep:
            return;
        case RedActionKind::DiscoverRemoteSystems: {
            knowledge.known_subnets.insert(action.target);
            for (int h : hosts_in(static_cast<Subnet>(action.target))) knowledge.known_hosts.insert(h);
            return;  // not visible to the defender
        }
        case RedActionKind::DiscoverNetworkServices: {
            if (!knowledge.known_hosts.count(action.target)) return;
            auto& host = state.hosts[static_cast<size_t>(action.target)];
            host.scan_recency = ScanRecency::Current;
            if (host.red_activity == RedActivity::None) host.red_activity = RedActivity::Scanned;
            std::set<int> services = host.real_services;
            services.insert(host.decoy_services.begin(), host.decoy_services.end());
            knowledge.known_services[action.target] = services;  // decoys indistinguishable
            events.push_back({EventKind::ScanObserved, action.target});
            if (host.observed_activity == RedActivity::None)
                host.observed_activity = RedActivity::Scanned;
            return;
        }
        case RedActionKind::ExploitNetworkServices: {
            if (!knowledge.knows_services(action.target)) return;
            auto& host = state.hosts[static_cast<size_t>(action.target)];
            // The target service is drawn uniformly from what the host
            // currently exposes; deployed decoys dilute the real ones.
            std::vector<int> live(host.real_services.begin(), host.real_services.end());
            live.insert(live.end(), host.decoy_services.begin(), host.decoy_services.end());
            if (live.empty()) return;
            int service = live[uniform_index(rng, live.size())];
            host.red_activity = RedActivity::Exploited;
            if (host.decoy_services.count(service)) {
                events.push_back({EventKind::ExploitFailed, action.target});
                events.push_back({EventKind::DecoyTriggered, action.target});
                // A tripped decoy always alerts the defender.
                host.observed_activity = RedActivity::Exploited;
                if (host.observed_access == RedAccess::None)
                    host.observed_access = RedAccess::Unknown;
            } else {
                host.red_access = max_access(host.red_access, RedAccess::User);
                auto& foothold = knowledge.footholds[action.target];
                foothold = max_access(foothold, RedAccess::User);
                events.push_back({EventKind::ExploitSucceeded, action.target});
                // Exploit evidence reaches the defender unless noise eats it.
                if (!bernoulli(rng, cfg.observation_noise_prob)) {
                    host.observed_activity = RedActivity::Exploited;
                    host.observed_access = max_access(host.observed_access, RedAccess::User);
                }
            }
            return;
        }
        case RedActionKind::Escalate: {
            auto& host = state.hosts[static_cast<size_t>(action.target)];
            if (host.red_access != RedAccess::User) return;
            host.red_access = RedAccess::Privileged;
            knowledge.footholds[action.target] = RedAccess::Privileged;
            events.push_back({EventKind::EscalateSucceeded, action.target});
            // Escalation is silent; only Analyze reveals privileged access.
            return;
        }
        case RedActionKind::Impact: {
            if (action.target != kCriticalServer) return;
            const auto& host = state.hosts[kCriticalServer];
            if (host.red_access != RedAccess::Privileged) return;
            events.push_back({EventKind::ImpactSucceeded, action.target});
            return;
        }
    }
}

RewardBreakdown compute_reward(const NetworkState& state, const std::vector<StepEvent>& events) {
    RewardBreakdown r;
    for (const auto& id : host_table()) {
        if (state.hosts[static_cast<size_t>(id.index)].red_access != RedAccess::Privileged) continue;
        if (id.subnet == Subnet::User) {
            r.per_host_compromise_penalty += -0.1;
        } else if (id.subnet == Subnet::Enterprise) {
            r.per_host_compromise_penalty += -1.0;
        } else {
            r.per_host_compromise_penalty += id.is_critical_server ? -1.0 : -0.1;
        }
    }
    for (const auto& e : events) {
        if (e.kind == EventKind::ImpactSucceeded) r.impact_penalty += -10.0;
        if (e.kind == EventKind::BlueRestored) r.restore_penalty += -1.0;
    }
    r.total = r.per_host_compromise_penalty + r.impact_penalty + r.restore_penalty;
    return r;
}

BlueObservation encode_observation(const NetworkState& state) {
    BlueObservation obs;
    for (int h = 0; h < kNumHosts; ++h) {
        const auto& host = state.hosts[static_cast<size_t>(h)];
        double* quad = &obs.values[static_cast<size_t>(4 * h)];
        switch (host.observed_activity) {
            case RedActivity::None: break;
            case RedActivity::Scanned: quad[0] = 1.0; break;
            case RedActivity::Exploited: quad[0] = 1.0; quad[1] = 1.0; break;
        }
        switch (host.observed_access) {
            case RedAccess::None: break;
            case RedAccess::Unknown: quad[2] = 1.0; break;
            case RedAccess::User: quad[3] = 1.0; break;
            case RedAccess::Privileged: quad[2] = 1.0; quad[3] = 1.0; break;
        }
        obs.values[static_cast<size_t>(52 + h)] = static_cast<double>(host.scan_recency);
        obs.values[static_cast<size_t>(65 + h)] = static_cast<double>(host.decoys_remaining);
    }
    return obs;
}

Environment::Environment(EnvConfig cfg) : cfg_(std::move(cfg)) {
    validate(cfg_);
    red_ = agents::make_red_policy(cfg_.red_policy_name);
}

BlueObservation Environment::reset(uint64_t seed) {
    rng_.seed(derive_seed(seed, 0xE9));
    state_ = make_reset_state(cfg_);
    knowledge_ = make_reset_knowledge(cfg_);
    red_->begin_episode(derive_seed(seed, 0x7ed));
    initialized_ = true;
    done_ = false;
    last_red_ = {};
    return encode_observation(state_);
}

StepResult Environment::step(const BlueAction& blue_action) {
    if (!initialized_) throw UsageError("step() before reset()");
    if (done_) throw UsageError("step() on a finished episode");

    // Per-step decay: activity alerts last one step; current scans age to past.
    for (auto& host : state_.hosts) {
        host.observed_activity = RedActivity::None;
        if (host.scan_recency == ScanRecency::Current) host.scan_recency = ScanRecency::Past;
    }

    // Both sides choose from the pre-step state; resolution order then applies.
    RedAction red_action = red_->next(state_, knowledge_);
    last_red_ = red_action;

    TurnOrder order = cfg_.turn_order;
    if (order == TurnOrder::MixedPerStep)
        order = bernoulli(rng_, 0.5) ? TurnOrder::RedThenBlue : TurnOrder::BlueThenRed;

    std::vector<StepEvent> events;
    if (order == TurnOrder::RedThenBlue) {
        resolve_red(state_, knowledge_, cfg_, red_action, rng_, events);
        resolve_blue(state_, knowledge_, cfg_, blue_action, events);
    } else {
        resolve_blue(state_, knowledge_, cfg_, blue_action, events);
        resolve_red(state_, knowledge_, cfg_, red_action, rng_, events);
    }

    state_.step_index += 1;
    done_ = state_.step_index >= cfg_.episode_length;
    state_.pending_events = events;

    StepResult result;
    result.reward = compute_reward(state_, events);
    result.observation = encode_observation(state_);
    result.done = done_;
    result.events = std::move(events);
    return result;
}

nlohmann::json trace_record_to_json(const StepTraceRecord& r) {
    nlohmann::json ev = nlohmann::json::array();
    for (const auto& e : r.events) ev.push_back({{"kind", event_kind_name(e.kind)}, {"host", e.host}});
    nlohmann::json obs = nlohmann::json::array();
    for (double v : r.observation.values) obs.push_back(v);
    return nlohmann::json{{"step", r.step},
                          {"blue_action", r.blue_action},
                          {"red_action", r.red_action},
                          {"reward_breakdown", reward_to_json(r.reward)},
                          {"events", ev},
                          {"observation", obs}};
}

}  // namespace acd::env
