#include "acd/env/types.hpp"

#include <json.hpp>

namespace acd::env {

using nlohmann::json;

const std::array<HostId, kNumHosts>& host_table() {
    static const std::array<HostId, kNumHosts> table = [] {
        std::array<HostId, kNumHosts> t{};
        for (int i = 0; i < kNumHosts; ++i) {
            t[i].index = i;
            if (i <= 4) {
                t[i].subnet = Subnet::User;
            } else if (i <= 8) {
                t[i].subnet = Subnet::Enterprise;
            } else {
                t[i].subnet = Subnet::Operational;
            }
            t[i].is_defender_host = (i == kDefenderHost);
            t[i].is_critical_server = (i == kCriticalServer);
        }
        return t;
    }();
    return table;
}

Subnet subnet_of(int host) { return host_table()[static_cast<size_t>(host)].subnet; }

const std::vector<int>& hosts_in(Subnet s) {
    static const std::array<std::vector<int>, 3> groups = [] {
        std::array<std::vector<int>, 3> g;
        for (const auto& h : host_table()) g[static_cast<size_t>(h.subnet)].push_back(h.index);
        return g;
    }();
    return groups[static_cast<size_t>(s)];
}

std::string event_kind_name(EventKind k) {
    switch (k) {
        case EventKind::ExploitSucceeded: return "ExploitSucceeded";
        case EventKind::ExploitFailed: return "ExploitFailed";
        case EventKind::DecoyTriggered: return "DecoyTriggered";
        case EventKind::ImpactSucceeded: return "ImpactSucceeded";
        case EventKind::BlueRestored: return "BlueRestored";
        case EventKind::EscalateSucceeded: return "EscalateSucceeded";
        case EventKind::ScanObserved: return "ScanObserved";
    }
    return "?";
}

BlueAction blue_action_from_index(int idx) {
    if (idx == 0) return {BlueActionKind::Sleep, -1};
    int block = (idx - 1) / kNumHosts;
    int host = (idx - 1) % kNumHosts;
    switch (block) {
        case 0: return {BlueActionKind::Analyze, host};
        case 1: return {BlueActionKind::Decoy, host};
        case 2: return {BlueActionKind::Remove, host};
        default: return {BlueActionKind::Restore, host};
    }
}

int blue_action_index(const BlueAction& a) {
    switch (a.kind) {
        case BlueActionKind::Sleep: return 0;
        case BlueActionKind::Analyze: return 1 + a.host;
        case BlueActionKind::Decoy: return 1 + kNumHosts + a.host;
        case BlueActionKind::Remove: return 1 + 2 * kNumHosts + a.host;
        case BlueActionKind::Restore: return 1 + 3 * kNumHosts + a.host;
    }
    return 0;
}

RedAction red_action_from_index(int idx) {
    if (idx == 0) return {RedActionKind::Sleep, -1};
    if (idx <= 3) return {RedActionKind::DiscoverRemoteSystems, idx - 1};
    int rest = idx - 4;
    int block = rest / kNumHosts;
    int host = rest % kNumHosts;
    switch (block) {
        case 0: return {RedActionKind::DiscoverNetworkServices, host};
        case 1: return {RedActionKind::ExploitNetworkServices, host};
        case 2: return {RedActionKind::Escalate, host};
        default: return {RedActionKind::Impact, host};
    }
}

int red_action_index(const RedAction& a) {
    switch (a.kind) {
        case RedActionKind::Sleep: return 0;
        case RedActionKind::DiscoverRemoteSystems: return 1 + a.target;
        case RedActionKind::DiscoverNetworkServices: return 4 + a.target;
        case RedActionKind::ExploitNetworkServices: return 4 + kNumHosts + a.target;
        case RedActionKind::Escalate: return 4 + 2 * kNumHosts + a.target;
        case RedActionKind::Impact: return 4 + 3 * kNumHosts + a.target;
    }
    return 0;
}

std::vector<BlueAction> all_blue_actions() {
    std::vector<BlueAction> v;
    v.reserve(kNumBlueActions);
    for (int i = 0; i < kNumBlueActions; ++i) v.push_back(blue_action_from_index(i));
    return v;
}

std::vector<RedAction> all_red_actions() {
    std::vector<RedAction> v;
    v.reserve(kNumRedActions);
    for (int i = 0; i < kNumRedActions; ++i) v.push_back(red_action_from_index(i));
    return v;
}

std::string blue_action_name(const BlueAction& a) {
    switch (a.kind) {
        case BlueActionKind::Sleep: return "Sleep";
        case BlueActionKind::Analyze: return "Analyze(" + std::to_string(a.host) + ")";
        case BlueActionKind::Decoy: return "Decoy(" + std::to_string(a.host) + ")";
        case BlueActionKind::Remove: return "Remove(" + std::to_string(a.host) + ")";
        case BlueActionKind::Restore: return "Restore(" + std::to_string(a.host) + ")";
    }
    return "?";
}

std::string red_action_name(const RedAction& a) {
    static const char* subnets[] = {"User", "Enterprise", "Operational"};
    switch (a.kind) {
        case RedActionKind::Sleep: return "Sleep";
        case RedActionKind::DiscoverRemoteSystems:
            return std::string("DiscoverRemoteSystems(") + subnets[a.target] + ")";
        case RedActionKind::DiscoverNetworkServices:
            return "DiscoverNetworkServices(" + std::to_string(a.target) + ")";
        case RedActionKind::ExploitNetworkServices:
            return "ExploitNetworkServices(" + std::to_string(a.target) + ")";
        case RedActionKind::Escalate: return "Escalate(" + std::to_string(a.target) + ")";
        case RedActionKind::Impact: return "Impact(" + std::to_string(a.target) + ")";
    }
    return "?";
}

std::string turn_order_name(TurnOrder t) {
    switch (t) {
        case TurnOrder::RedThenBlue: return "RedThenBlue";
        case TurnOrder::BlueThenRed: return "BlueThenRed";
        case TurnOrder::MixedPerStep: return "MixedPerStep";
    }
    return "?";
}

TurnOrder turn_order_from_name(const std::string& s) {
    if (s == "RedThenBlue") return TurnOrder::RedThenBlue;
    if (s == "BlueThenRed") return TurnOrder::BlueThenRed;
    if (s == "MixedPerStep") return TurnOrder::MixedPerStep;
    throw ConfigError("unknown turn_order: " + s);
}

std::string red_policy_name_str(RedPolicyName r) {
    switch (r) {
        case RedPolicyName::BLine: return "BLine";
        case RedPolicyName::Meander: return "Meander";
        case RedPolicyName::MixedPerEpisode: return "MixedPerEpisode";
        case RedPolicyName::Sleep: return "Sleep";
    }
    return "?";
}

RedPolicyName red_policy_from_name(const std::string& s) {
    if (s == "BLine") return RedPolicyName::BLine;
    if (s == "Meander") return RedPolicyName::Meander;
    if (s == "MixedPerEpisode") return RedPolicyName::MixedPerEpisode;
    if (s == "Sleep") return RedPolicyName::Sleep;
    throw ConfigError("unknown red_policy_name: " + s);
}

int EnvConfig::decoy_budget(int host) const {
    auto it = decoy_budgets.find(host);
    return it == decoy_budgets.end() ? 2 : it->second;
}

void validate(const EnvConfig& c) {
    if (c.episode_length <= 0) throw ConfigError("episode_length must be positive");
    if (c.observation_noise_prob < 0.0 || c.observation_noise_prob > 1.0)
        throw ConfigError("observation_noise_prob must be in [0,1]");
    for (const auto& [host, budget] : c.decoy_budgets) {
        if (host < 0 || host >= kNumHosts) throw ConfigError("decoy_budgets host out of range");
        if (budget < 0) throw ConfigError("decoy budget must be non-negative");
    }
}

EnvConfig env_config_from_json(const json& j) {
    static const std::set<std::string> known = {"episode_length", "observation_noise_prob",
                                                "turn_order", "red_policy_name",
                                                "decoy_budgets", "seed"};
    for (const auto& [key, _] : j.items()) {
        if (!known.count(key)) throw ConfigError("unknown EnvConfig field: " + key);
    }
    EnvConfig c;
    if (j.contains("episode_length")) c.episode_length = j.at("episode_length").get<int>();
    if (j.contains("observation_noise_prob"))
        c.observation_noise_prob = j.at("observation_noise_prob").get<double>();
    if (j.contains("turn_order")) c.turn_order = turn_order_from_name(j.at("turn_order").get<std::string>());
    if (j.contains("red_policy_name"))
        c.red_policy_name = red_policy_from_name(j.at("red_policy_name").get<std::string>());
    if (j.contains("decoy_budgets")) {
        for (const auto& [key, val] : j.at("decoy_budgets").items()) {
            c.decoy_budgets[std::stoi(key)] = val.get<int>();
        }
    }
    if (j.contains("seed")) c.seed = j.at("seed").get<uint64_t>();
    validate(c);
    return c;
}

json env_config_to_json(const EnvConfig& c) {
    json budgets = json::object();
    for (const auto& [host, budget] : c.decoy_budgets) budgets[std::to_string(host)] = budget;
    return json{{"episode_length", c.episode_length},
                {"observation_noise_prob", c.observation_noise_prob},
                {"turn_order", turn_order_name(c.turn_order)},
                {"red_policy_name", red_policy_name_str(c.red_policy_name)},
                {"decoy_budgets", budgets},
                {"seed", c.seed}};
}

json reward_to_json(const RewardBreakdown& r) {
    return json{{"per_host_compromise_penalty", r.per_host_compromise_penalty},
                {"impact_penalty", r.impact_penalty},
                {"restore_penalty", r.restore_penalty},
                {"total", r.total}};
}

}  // namespace acd::env
