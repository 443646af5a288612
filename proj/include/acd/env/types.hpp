#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

namespace acd::env {

// ---------------------------------------------------------------------------
// Network topology: 13 hosts across three subnets.
//   User        : hosts 0..4   (red's entry point is host 0)
//   Enterprise  : hosts 5..8   (host 8 is the defender host)
//   Operational : hosts 9..12  (host 12 is the critical server)
// ---------------------------------------------------------------------------

inline constexpr int kNumHosts = 13;
inline constexpr int kEntryHost = 0;
inline constexpr int kDefenderHost = 8;
inline constexpr int kCriticalServer = 12;
inline constexpr int kNumBlueActions = 53;  // 1 + 13*4
inline constexpr int kNumRedActions = 56;   // 1 + 3 + 13*4
inline constexpr int kObservationSize = 78; // 52 activity/access + 13 scan + 13 decoy

enum class Subnet : uint8_t { User = 0, Enterprise = 1, Operational = 2 };

struct HostId {
    int index = 0;
    Subnet subnet = Subnet::User;
    bool is_critical_server = false;
    bool is_defender_host = false;
};

// Static host table; index i describes host i.
const std::array<HostId, kNumHosts>& host_table();
Subnet subnet_of(int host);
const std::vector<int>& hosts_in(Subnet s);

enum class RedActivity : uint8_t { None = 0, Scanned = 1, Exploited = 2 };
enum class RedAccess : uint8_t { None = 0, Unknown = 1, User = 2, Privileged = 3 };
enum class ScanRecency : uint8_t { Never = 0, Past = 1, Current = 2 };

// Ground truth for one host plus the defender-side view of it. The view
// fields are part of the state so that observation encoding is a pure
// function of NetworkState (noise is applied when events are processed,
// never at encode time).
struct HostTrueState {
    RedActivity red_activity = RedActivity::None;
    RedAccess red_access = RedAccess::None;
    ScanRecency scan_recency = ScanRecency::Never;
    int decoys_remaining = 0;
    std::set<int> decoy_services;
    std::set<int> real_services;

    // Defender view. observed_activity is this step's detected activity and
    // is cleared at the start of every step; observed_access persists until
    // new evidence (alert, analyze, remove, restore) replaces it.
    RedActivity observed_activity = RedActivity::None;
    RedAccess observed_access = RedAccess::None;

    bool operator==(const HostTrueState&) const = default;
};

enum class EventKind : uint8_t {
    ExploitSucceeded,
    ExploitFailed,
    DecoyTriggered,
    ImpactSucceeded,
    BlueRestored,
    EscalateSucceeded,
    ScanObserved,
};

struct StepEvent {
    EventKind kind;
    int host;
    bool operator==(const StepEvent&) const = default;
};

std::string event_kind_name(EventKind k);

struct NetworkState {
    std::array<HostTrueState, kNumHosts> hosts;
    int step_index = 0;
    std::vector<StepEvent> pending_events;

    bool operator==(const NetworkState&) const = default;
};

// ---------------------------------------------------------------------------
// Action spaces
// ---------------------------------------------------------------------------

enum class BlueActionKind : uint8_t { Sleep = 0, Analyze, Decoy, Remove, Restore };

struct BlueAction {
    BlueActionKind kind = BlueActionKind::Sleep;
    int host = -1;  // -1 for Sleep
    bool operator==(const BlueAction&) const = default;
};

enum class RedActionKind : uint8_t {
    Sleep = 0,
    DiscoverRemoteSystems,   // per subnet
    DiscoverNetworkServices, // per host
    ExploitNetworkServices,  // per host
    Escalate,                // per host
    Impact,                  // per host; only legal on the critical server
};

struct RedAction {
    RedActionKind kind = RedActionKind::Sleep;
    int target = -1;  // host index, or subnet index for DiscoverRemoteSystems
    bool operator==(const RedAction&) const = default;
};

// Dense index <-> action maps. Blue: [0]=Sleep, then Analyze/Decoy/Remove/
// Restore blocks of 13. Red: [0]=Sleep, [1..3]=DiscoverRemoteSystems, then
// DiscoverNetworkServices/Exploit/Escalate/Impact blocks of 13.
BlueAction blue_action_from_index(int idx);
int blue_action_index(const BlueAction& a);
RedAction red_action_from_index(int idx);
int red_action_index(const RedAction& a);
std::vector<BlueAction> all_blue_actions();
std::vector<RedAction> all_red_actions();
std::string blue_action_name(const BlueAction& a);
std::string red_action_name(const RedAction& a);

// ---------------------------------------------------------------------------
// Observation: 78 values. Per host, 4 leading values
//   activity pair: (0,0)=none, (1,0)=scan, (1,1)=exploit
//   access pair:   (0,0)=none, (1,0)=unknown, (0,1)=user, (1,1)=privileged
// then 13 scan-recency values in {0,1,2}, then 13 decoys-remaining counts.
// ---------------------------------------------------------------------------

struct BlueObservation {
    std::array<double, kObservationSize> values{};
    bool operator==(const BlueObservation&) const = default;
};

enum class TurnOrder : uint8_t { RedThenBlue = 0, BlueThenRed = 1, MixedPerStep = 2 };
enum class RedPolicyName : uint8_t { BLine = 0, Meander = 1, MixedPerEpisode = 2, Sleep = 3 };

std::string turn_order_name(TurnOrder t);
TurnOrder turn_order_from_name(const std::string& s);
std::string red_policy_name_str(RedPolicyName r);
RedPolicyName red_policy_from_name(const std::string& s);

struct EnvConfig {
    int episode_length = 100;
    double observation_noise_prob = 0.05;
    TurnOrder turn_order = TurnOrder::RedThenBlue;
    RedPolicyName red_policy_name = RedPolicyName::BLine;
    std::map<int, int> decoy_budgets;  // host -> budget; unlisted hosts get the default of 2
    uint64_t seed = 0;

    int decoy_budget(int host) const;
};

// Strict JSON load: exactly the EnvConfig field names, unknown keys rejected.
EnvConfig env_config_from_json(const nlohmann::json& j);
nlohmann::json env_config_to_json(const EnvConfig& c);

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

void validate(const EnvConfig& c);  // throws ConfigError

struct RewardBreakdown {
    double per_host_compromise_penalty = 0.0;
    double impact_penalty = 0.0;
    double restore_penalty = 0.0;
    double total = 0.0;
};

nlohmann::json reward_to_json(const RewardBreakdown& r);

}  // namespace acd::env
