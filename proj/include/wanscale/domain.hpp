// Core value types shared by every layer: applications, the provider's
// bandwidth ladder, circuits, tunnels, endpoint records and trace events.
#pragma once

#include "wanscale/errors.hpp"
#include "wanscale/rational.hpp"

#include <algorithm>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace wanscale {

using Annotations = std::map<std::string, std::string>;

inline constexpr std::string_view kTrafficProfileKey = "traffic-profile";
inline constexpr std::string_view kReplicasKey = "replicas";

// Dotted-quad IPv4 address.
class Ipv4 {
public:
    Ipv4() = default;
    explicit Ipv4(std::uint32_t value) : value_(value) {}

    static std::optional<Ipv4> parse(std::string_view text) {
        std::uint32_t value = 0;
        int octets = 0;
        while (octets < 4) {
            std::size_t i = 0;
            unsigned octet = 0;
            while (i < text.size() && i < 4 && text[i] >= '0' && text[i] <= '9') {
                octet = octet * 10 + static_cast<unsigned>(text[i] - '0');
                ++i;
            }
            if (i == 0 || i > 3 || octet > 255 || (i > 1 && text[0] == '0')) return std::nullopt;
            value = (value << 8) | octet;
            text.remove_prefix(i);
            ++octets;
            if (octets < 4) {
                if (text.empty() || text.front() != '.') return std::nullopt;
                text.remove_prefix(1);
            }
        }
        if (!text.empty()) return std::nullopt;
        return Ipv4(value);
    }

    [[nodiscard]] std::uint32_t value() const noexcept { return value_; }

    [[nodiscard]] std::string to_string() const {
        return std::to_string(value_ >> 24) + '.' + std::to_string((value_ >> 16) & 0xff) + '.' +
               std::to_string((value_ >> 8) & 0xff) + '.' + std::to_string(value_ & 0xff);
    }

    friend auto operator<=>(const Ipv4&, const Ipv4&) = default;

private:
    std::uint32_t value_ = 0;
};

// The (ip, port) pair that identifies one application flow in the network.
struct FlowSelector {
    Ipv4 ip;
    std::uint16_t port = 0;

    [[nodiscard]] std::string to_string() const { return ip.to_string() + ':' + std::to_string(port); }
    friend auto operator<=>(const FlowSelector&, const FlowSelector&) = default;
};

struct Application {
    std::string name;
    Ipv4 ip;
    std::vector<std::uint16_t> ports;
    Annotations annotations;
    std::int64_t replicas = 1;
    std::int64_t min_replicas = 1;
    std::int64_t max_replicas = 1;
    Rational cpu_target_pct{40};
    Mbps per_replica_bw_mbps{1};

    [[nodiscard]] FlowSelector selector() const {
        return FlowSelector{ip, ports.empty() ? std::uint16_t{0} : ports.front()};
    }

    [[nodiscard]] std::optional<std::string> traffic_profile() const {
        if (auto it = annotations.find(std::string(kTrafficProfileKey)); it != annotations.end()) return it->second;
        return std::nullopt;
    }

    void validate() const {
        if (name.empty()) throw ValidationError("application.name", "must not be empty");
        if (min_replicas < 1) throw ValidationError("application.min_replicas", "must be >= 1");
        if (max_replicas < min_replicas) throw ValidationError("application.max_replicas", "must be >= min_replicas");
        if (replicas < min_replicas || replicas > max_replicas)
            throw ValidationError("application.replicas", "must lie in [min_replicas, max_replicas]");
        if (cpu_target_pct <= 0 || cpu_target_pct > 100)
            throw ValidationError("application.cpu_target_pct", "must lie in (0, 100]");
        if (per_replica_bw_mbps <= 0) throw ValidationError("application.per_replica_bw_mbps", "must be positive");
    }
};

// Capacity steps a provider allows. Geometric by default
// (baseline * factor^k, capped at max); an explicit ascending list of rungs
// is also supported, in which case the last rung is the maximum.
class BandwidthLadder {
public:
    BandwidthLadder() : BandwidthLadder(Mbps{50}, Rational{2}, Mbps{100'000}) {}

    BandwidthLadder(Mbps baseline, Rational factor, Mbps max) : baseline_(baseline), factor_(factor), max_(max) {
        if (baseline_ <= 0) throw ValidationError("ladder.baseline_mbps", "must be positive");
        if (factor_ <= 1) throw ValidationError("ladder.factor", "must be > 1");
        if (max_ < baseline_) throw ValidationError("ladder.max_mbps", "must be >= baseline_mbps");
    }

    static BandwidthLadder explicit_rungs(std::vector<Mbps> rungs) {
        if (rungs.empty()) throw ValidationError("ladder.rungs", "must not be empty");
        if (rungs.front() <= 0) throw ValidationError("ladder.rungs", "rungs must be positive");
        for (std::size_t i = 1; i < rungs.size(); ++i)
            if (rungs[i] <= rungs[i - 1]) throw ValidationError("ladder.rungs", "rungs must be strictly increasing");
        BandwidthLadder ladder;
        ladder.baseline_ = rungs.front();
        ladder.max_ = rungs.back();
        ladder.factor_ = Rational{0};
        ladder.rungs_ = std::move(rungs);
        return ladder;
    }

    [[nodiscard]] Mbps baseline() const noexcept { return baseline_; }
    [[nodiscard]] Rational factor() const noexcept { return factor_; }
    [[nodiscard]] Mbps max() const noexcept { return max_; }
    [[nodiscard]] bool is_explicit() const noexcept { return !rungs_.empty(); }
    [[nodiscard]] const std::vector<Mbps>& explicit_list() const noexcept { return rungs_; }

    // min(baseline * factor^k, max).
    [[nodiscard]] Mbps rung(std::uint64_t k) const {
        if (is_explicit()) return rungs_[std::min<std::uint64_t>(k, rungs_.size() - 1)];
        Mbps value = baseline_;
        for (std::uint64_t i = 0; i < k; ++i) {
            value = value * factor_;
            if (value >= max_) return max_;
        }
        return value;
    }

    // Index of the first rung equal to the cap. Rungs beyond it repeat the cap.
    [[nodiscard]] std::uint64_t top_index() const {
        if (is_explicit()) return rungs_.size() - 1;
        std::uint64_t k = 0;
        while (rung(k) < max_) ++k;
        return k;
    }

    // Smallest k with rung(k) >= x.
    [[nodiscard]] std::uint64_t rung_index_at_or_above(const Mbps& x) const {
        if (x > max_) throw ValidationError("ladder", "bandwidth " + x.to_string() + " exceeds ladder maximum " + max_.to_string());
        std::uint64_t k = 0;
        while (rung(k) < x) ++k;
        return k;
    }

    [[nodiscard]] bool is_rung(const Mbps& x) const {
        if (x > max_ || x < baseline_) return false;
        return rung(rung_index_at_or_above(x)) == x;
    }

    friend bool operator==(const BandwidthLadder&, const BandwidthLadder&) = default;

private:
    Mbps baseline_;
    Rational factor_;
    Mbps max_;
    std::vector<Mbps> rungs_;
};

inline Mbps rung(const BandwidthLadder& ladder, std::uint64_t k) { return ladder.rung(k); }
inline std::uint64_t rung_index_at_or_above(const BandwidthLadder& ladder, const Mbps& x) {
    return ladder.rung_index_at_or_above(x);
}

enum class CircuitState { Provisioning, Active, Deleting };

inline std::string_view to_string(CircuitState s) {
    switch (s) {
        case CircuitState::Provisioning: return "Provisioning";
        case CircuitState::Active: return "Active";
        case CircuitState::Deleting: return "Deleting";
    }
    return "?";
}

struct VirtualCircuit {
    std::string id;
    std::string loc_a;
    std::string loc_b;
    Mbps allocated_mbps;
    std::optional<Mbps> pending_mbps;
    CircuitState state = CircuitState::Active;
    BandwidthLadder ladder;
};

struct Tunnel {
    std::string id;
    std::optional<Mbps> capacity_mbps;  // nullopt: unlimited
    std::string description;
    std::optional<std::string> circuit_id;  // set when the tunnel rides a virtual circuit
};

struct EndpointRecord {
    std::string name;
    Ipv4 ip;
    std::uint16_t port = 0;
    Annotations metadata;
    std::uint64_t revision = 0;
    bool deleted = false;

    friend bool operator==(const EndpointRecord&, const EndpointRecord&) = default;
};

enum class EventKind {
    LoadChange,
    HpaSync,
    ReplicaChange,
    AnnotationChange,
    RegistryPublish,
    ReaderPoll,
    AdaptorDispatch,
    CircuitUpgradeRequested,
    CircuitUpgradeCompleted,
    RouteChangeRequested,
    RouteChangeCompleted,
    Tick,
    Diagnostic,
};

inline std::string_view to_string(EventKind k) {
    switch (k) {
        case EventKind::LoadChange: return "LoadChange";
        case EventKind::HpaSync: return "HpaSync";
        case EventKind::ReplicaChange: return "ReplicaChange";
        case EventKind::AnnotationChange: return "AnnotationChange";
        case EventKind::RegistryPublish: return "RegistryPublish";
        case EventKind::ReaderPoll: return "ReaderPoll";
        case EventKind::AdaptorDispatch: return "AdaptorDispatch";
        case EventKind::CircuitUpgradeRequested: return "CircuitUpgradeRequested";
        case EventKind::CircuitUpgradeCompleted: return "CircuitUpgradeCompleted";
        case EventKind::RouteChangeRequested: return "RouteChangeRequested";
        case EventKind::RouteChangeCompleted: return "RouteChangeCompleted";
        case EventKind::Tick: return "Tick";
        case EventKind::Diagnostic: return "Diagnostic";
    }
    return "?";
}

inline std::optional<EventKind> parse_event_kind(std::string_view name) {
    for (int i = 0; i <= static_cast<int>(EventKind::Diagnostic); ++i) {
        const auto k = static_cast<EventKind>(i);
        if (to_string(k) == name) return k;
    }
    return std::nullopt;
}

// Kind-specific payload is kept as an ordered string map so events serialize
// deterministically and can be read back without a schema per kind.
struct SimEvent {
    Seconds time_s;
    std::uint64_t seq = 0;
    EventKind kind = EventKind::Tick;
    std::map<std::string, std::string> payload;

    [[nodiscard]] const std::string& at(const std::string& key) const { return payload.at(key); }

    friend bool operator==(const SimEvent&, const SimEvent&) = default;
};

struct MetricSample {
    Seconds time_s;
    std::string series;
    Rational value;

    friend bool operator==(const MetricSample&, const MetricSample&) = default;
};

}  // namespace wanscale
