// Network autoscaling decisions.
//
// Vertical: estimate bandwidth demand from the replica count and pick a
// ladder rung that leaves one rung of headroom above the rung that fits the
// demand. Downscales are held back until the lower target has persisted for
// downscale_hold_s.
//
// Horizontal: map the application's "traffic-profile" annotation to a tunnel.
#pragma once

#include "wanscale/domain.hpp"

#include <charconv>
#include <map>
#include <optional>
#include <string>
#include <variant>

namespace wanscale {

struct VerticalPolicyConfig {
    BandwidthLadder ladder;
    Mbps per_replica_bw_mbps{1};
    Seconds downscale_hold_s{60};

    void validate() const {
        if (per_replica_bw_mbps <= 0) throw ValidationError("vertical_policy.per_replica_bw_mbps", "must be positive");
        if (downscale_hold_s < 0) throw ValidationError("vertical_policy.downscale_hold_s", "must be >= 0");
    }
    friend bool operator==(const VerticalPolicyConfig&, const VerticalPolicyConfig&) = default;
};

struct ProfileMap {
    std::map<std::string, std::string> entries;  // profile -> tunnel id
    std::string default_tunnel;

    [[nodiscard]] const std::string& tunnel_for(const std::optional<std::string>& profile) const {
        if (profile) {
            if (auto it = entries.find(*profile); it != entries.end()) return it->second;
        }
        return default_tunnel;
    }
    [[nodiscard]] bool knows(const std::string& profile) const { return entries.contains(profile); }

    friend bool operator==(const ProfileMap&, const ProfileMap&) = default;
};

struct UpgradeCircuit {
    std::string circuit_id;
    Mbps target_mbps;
    friend bool operator==(const UpgradeCircuit&, const UpgradeCircuit&) = default;
};

struct SetRoute {
    FlowSelector selector;
    std::string tunnel_id;
    friend bool operator==(const SetRoute&, const SetRoute&) = default;
};

using UnderlayAction = std::variant<UpgradeCircuit, SetRoute>;

inline Mbps estimate_demand(std::int64_t replicas, const Mbps& per_replica_bw_mbps) {
    return Rational{replicas} * per_replica_bw_mbps;
}

struct CapacityChoice {
    Mbps mbps;
    bool saturated = false;
};

// Smallest k with demand <= rung(k-1), i.e. one rung above the rung that
// fits the demand; zero demand stays at the baseline. Demand above the
// ladder maximum clamps to the maximum and reports saturation.
inline CapacityChoice select_capacity_checked(const Mbps& demand, const BandwidthLadder& ladder) {
    if (demand <= 0) return {ladder.baseline(), false};
    if (demand > ladder.max()) return {ladder.max(), true};
    const std::uint64_t fits = ladder.rung_index_at_or_above(demand);
    // At the top of the ladder there is no headroom rung left.
    return {ladder.rung(fits + 1), fits >= ladder.top_index()};
}

inline Mbps select_capacity(const Mbps& demand, const BandwidthLadder& ladder) {
    return select_capacity_checked(demand, ladder).mbps;
}

// Observed underlay state for one circuit.
struct CircuitView {
    Mbps allocated;
    std::optional<Mbps> pending;
};

// Per-application hysteresis memory carried between calls.
struct VerticalHold {
    std::optional<Seconds> below_since;
    std::optional<Mbps> held_target;
    friend bool operator==(const VerticalHold&, const VerticalHold&) = default;
};

struct VerticalDecision {
    std::optional<Mbps> target;  // capacity to request, if any
    std::optional<std::string> diagnostic;
    bool saturated = false;
};

inline std::optional<std::int64_t> parse_replicas(const std::string& text) {
    std::int64_t value = 0;
    const char* first = text.data();
    const char* last = first + text.size();
    auto [ptr, ec] = std::from_chars(first, last, value);
    if (ec != std::errc{} || ptr != last || value < 0) return std::nullopt;
    return value;
}

// Decides whether the circuit should move for the replica count carried in
// `record`. Mutates `hold` to track how long a lower target has persisted.
inline VerticalDecision vertical_step(const CircuitView& current, const EndpointRecord& record,
                                      const VerticalPolicyConfig& cfg, const Seconds& t, VerticalHold& hold) {
    VerticalDecision out;
    auto it = record.metadata.find(std::string(kReplicasKey));
    if (it == record.metadata.end()) {
        out.diagnostic = "record '" + record.name + "' carries no replicas value";
        return out;
    }
    const auto replicas = parse_replicas(it->second);
    if (!replicas) {
        out.diagnostic = "record '" + record.name + "' has unparsable replicas value '" + it->second + "'";
        return out;
    }
    const auto choice = select_capacity_checked(estimate_demand(*replicas, cfg.per_replica_bw_mbps), cfg.ladder);
    out.saturated = choice.saturated;
    const Mbps target = choice.mbps;

    if (target == current.allocated || (current.pending && target == *current.pending)) {
        hold = {};
        return out;
    }
    const Mbps reference = current.pending.value_or(current.allocated);
    if (target > reference) {
        hold = {};
        out.target = target;
        return out;
    }
    // Lower target: wait for it to persist. A different lower target keeps
    // the clock running; demand has stayed below the reference throughout.
    if (!hold.below_since) hold.below_since = t;
    hold.held_target = target;
    if (t - *hold.below_since >= cfg.downscale_hold_s) {
        hold = {};
        out.target = target;
    }
    return out;
}

struct SteerDecision {
    std::optional<std::string> tunnel;  // route to request, if any
    std::optional<std::string> warning;
};

// Depends only on the record's traffic-profile value, never on replicas.
inline SteerDecision steer(const EndpointRecord& record, const ProfileMap& map,
                           const std::optional<std::string>& current_route) {
    SteerDecision out;
    std::optional<std::string> profile;
    if (auto it = record.metadata.find(std::string(kTrafficProfileKey)); it != record.metadata.end()) {
        profile = it->second;
        if (!map.knows(*profile))
            out.warning = "unknown traffic profile '" + *profile + "', using default tunnel '" + map.default_tunnel + "'";
    }
    const std::string& desired = map.tunnel_for(profile);
    if (!current_route || *current_route != desired) out.tunnel = desired;
    return out;
}

}  // namespace wanscale
