// Emulated API-driven underlay provider: virtual circuits on a capacity
// ladder, rate-limited tunnels, flow routes, and a usage meter.
//
// Capacity and route changes are asynchronous. A request returns the time at
// which it takes effect; the caller advances the underlay with apply_due().
#pragma once

#include "wanscale/domain.hpp"
#include "wanscale/latency.hpp"

#include <algorithm>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

namespace wanscale {

enum class UnderlayErrc { UnknownCircuit, UnknownTunnel, UnknownLocation, OffLadder, AboveMaximum, NoOp };

class UnderlayRejected : public UnderlayError {
public:
    UnderlayRejected(UnderlayErrc code, const std::string& message) : UnderlayError(message), code_(code) {}
    [[nodiscard]] UnderlayErrc code() const noexcept { return code_; }

private:
    UnderlayErrc code_;
};

struct BillingMeter {
    Rational accrued_mbps_seconds;
    std::vector<std::pair<Seconds, Mbps>> samples;  // (t, allocated) after each change
};

// accrued += allocated * (t1 - t0)
inline BillingMeter meter_accrue(BillingMeter meter, const Seconds& t0, const Seconds& t1, const Mbps& allocated) {
    if (t1 < t0) throw std::invalid_argument("meter_accrue: t1 < t0");
    meter.accrued_mbps_seconds += allocated * (t1 - t0);
    return meter;
}

struct UnderlayConfig {
    std::set<std::string> locations{"WDC", "SEA"};
    BandwidthLadder ladder;
    LatencyModel provisioning_delay_model =
        LatencyModel::lognormal(Seconds{20}, Rational{1, 4}, Truncation{Seconds{10}, Seconds{40}});
    LatencyModel route_apply_delay_model = LatencyModel::uniform(Seconds{10}, Seconds{20});
    // Effective times are rounded up to a multiple of this.
    Seconds time_quantum{1, 1000};
};

struct PendingCompletion {
    enum class Kind { Circuit, Route };
    Kind kind = Kind::Circuit;
    std::string circuit_id;  // Kind::Circuit
    FlowSelector selector;   // Kind::Route
    std::string target;      // rung value or tunnel id, as text
    Mbps target_mbps;
    Seconds requested_at;
    Seconds effective_at;
    std::uint64_t seq = 0;
};

struct RouteEntry {
    std::string tunnel_id;                 // currently carrying the flow
    std::optional<std::string> pending;    // switching to, once effective
};

struct TransmitResult {
    Mbps carried;
    std::optional<std::string> tunnel_id;
    std::optional<std::string> diagnostic;
};

class Underlay {
public:
    explicit Underlay(UnderlayConfig cfg = {}) : cfg_(std::move(cfg)) {}

    [[nodiscard]] const UnderlayConfig& config() const noexcept { return cfg_; }

    std::string create_circuit(const std::string& loc_a, const std::string& loc_b, const Mbps& mbps, const Seconds& t) {
        if (!cfg_.locations.contains(loc_a)) throw UnderlayRejected(UnderlayErrc::UnknownLocation, "unknown location '" + loc_a + "'");
        if (!cfg_.locations.contains(loc_b)) throw UnderlayRejected(UnderlayErrc::UnknownLocation, "unknown location '" + loc_b + "'");
        if (mbps > cfg_.ladder.max())
            throw UnderlayRejected(UnderlayErrc::AboveMaximum,
                                   mbps.to_string() + " Mbps exceeds the maximum of " + cfg_.ladder.max().to_string());
        if (!cfg_.ladder.is_rung(mbps)) throw UnderlayRejected(UnderlayErrc::OffLadder, mbps.to_string() + " Mbps is not a ladder rung");
        accrue_meter(t);
        VirtualCircuit vc;
        vc.id = "vc-" + std::to_string(++next_circuit_);
        vc.loc_a = loc_a;
        vc.loc_b = loc_b;
        vc.allocated_mbps = mbps;
        vc.state = CircuitState::Active;
        vc.ladder = cfg_.ladder;
        const std::string id = vc.id;
        circuits_.emplace(id, std::move(vc));
        record_meter_sample(t);
        return id;
    }

    // Requests a capacity change; the new capacity takes effect at the
    // returned time. A request while provisioning supersedes the pending one.
    Seconds upgrade_circuit(const std::string& id, const Mbps& target, const Seconds& t, Rng& rng) {
        VirtualCircuit& vc = circuit_mut(id);
        if (target > vc.ladder.max())
            throw UnderlayRejected(UnderlayErrc::AboveMaximum, target.to_string() + " Mbps exceeds the circuit maximum");
        if (!vc.ladder.is_rung(target)) throw UnderlayRejected(UnderlayErrc::OffLadder, target.to_string() + " Mbps is not a ladder rung");
        if (target == vc.allocated_mbps) throw UnderlayRejected(UnderlayErrc::NoOp, "circuit " + id + " already at " + target.to_string() + " Mbps");
        if (vc.pending_mbps && *vc.pending_mbps == target)
            throw UnderlayRejected(UnderlayErrc::NoOp, "circuit " + id + " already provisioning " + target.to_string() + " Mbps");

        cancel_circuit_completion(id);
        const Seconds effective_at = (t + cfg_.provisioning_delay_model.sample(rng)).ceil_to(cfg_.time_quantum);
        vc.pending_mbps = target;
        vc.state = CircuitState::Provisioning;
        PendingCompletion pc;
        pc.kind = PendingCompletion::Kind::Circuit;
        pc.circuit_id = id;
        pc.target = target.to_string();
        pc.target_mbps = target;
        pc.requested_at = t;
        pc.effective_at = effective_at;
        pc.seq = ++next_seq_;
        pending_.push_back(std::move(pc));
        return effective_at;
    }

    void delete_circuit(const std::string& id, const Seconds& t) {
        circuit_mut(id);
        accrue_meter(t);
        cancel_circuit_completion(id);
        circuits_.erase(id);
        record_meter_sample(t);
    }

    void add_tunnel(Tunnel tunnel) {
        if (tunnel.capacity_mbps && *tunnel.capacity_mbps <= 0)
            throw ValidationError("tunnels." + tunnel.id + ".capacity_mbps", "must be positive");
        if (tunnel.circuit_id && !circuits_.contains(*tunnel.circuit_id))
            throw UnderlayRejected(UnderlayErrc::UnknownCircuit, "tunnel " + tunnel.id + " rides unknown circuit " + *tunnel.circuit_id);
        const std::string id = tunnel.id;
        tunnels_[id] = std::move(tunnel);
    }

    // Installs a route immediately (initial configuration).
    void install_route(const FlowSelector& selector, const std::string& tunnel_id) {
        require_tunnel(tunnel_id);
        routes_[selector] = RouteEntry{tunnel_id, std::nullopt};
    }

    // Returns nullopt when the flow is already (or about to be) on `tunnel_id`.
    // Requesting the tunnel the flow is still on cancels a pending switch.
    std::optional<Seconds> set_route(const FlowSelector& selector, const std::string& tunnel_id, const Seconds& t, Rng& rng) {
        require_tunnel(tunnel_id);
        auto it = routes_.find(selector);
        if (it != routes_.end()) {
            RouteEntry& entry = it->second;
            if (entry.pending && *entry.pending == tunnel_id) return std::nullopt;
            if (entry.tunnel_id == tunnel_id) {
                if (!entry.pending) return std::nullopt;
                cancel_route_completion(selector);
                entry.pending.reset();
                return t;
            }
        }
        cancel_route_completion(selector);
        const Seconds effective_at = (t + cfg_.route_apply_delay_model.sample(rng)).ceil_to(cfg_.time_quantum);
        if (it == routes_.end()) {
            // Unrouted flows carry nothing until the first route lands.
            routes_[selector] = RouteEntry{"", tunnel_id};
        } else {
            it->second.pending = tunnel_id;
        }
        PendingCompletion pc;
        pc.kind = PendingCompletion::Kind::Route;
        pc.selector = selector;
        pc.target = tunnel_id;
        pc.requested_at = t;
        pc.effective_at = effective_at;
        pc.seq = ++next_seq_;
        pending_.push_back(std::move(pc));
        return effective_at;
    }

    [[nodiscard]] std::optional<Seconds> next_completion_time() const {
        std::optional<Seconds> next;
        for (const auto& pc : pending_)
            if (!next || pc.effective_at < *next) next = pc.effective_at;
        return next;
    }

    // Applies every completion with effective_at <= t, in (time, request)
    // order, and returns one completion event per change.
    std::vector<SimEvent> apply_due(const Seconds& t) {
        std::vector<SimEvent> out;
        for (;;) {
            auto due = std::min_element(pending_.begin(), pending_.end(), [](const auto& a, const auto& b) {
                return a.effective_at != b.effective_at ? a.effective_at < b.effective_at : a.seq < b.seq;
            });
            if (due == pending_.end() || due->effective_at > t) break;
            PendingCompletion pc = *due;
            pending_.erase(due);
            SimEvent ev;
            ev.time_s = pc.effective_at;
            if (pc.kind == PendingCompletion::Kind::Circuit) {
                accrue_meter(pc.effective_at);
                VirtualCircuit& vc = circuits_.at(pc.circuit_id);
                const Mbps previous = vc.allocated_mbps;
                vc.allocated_mbps = pc.target_mbps;
                vc.pending_mbps.reset();
                vc.state = CircuitState::Active;
                record_meter_sample(pc.effective_at);
                ev.kind = EventKind::CircuitUpgradeCompleted;
                ev.payload = {{"circuit", pc.circuit_id},
                              {"from_mbps", previous.to_string()},
                              {"target_mbps", pc.target},
                              {"requested_at_s", pc.requested_at.to_string()},
                              {"delay_s", (pc.effective_at - pc.requested_at).to_string()}};
            } else {
                RouteEntry& entry = routes_.at(pc.selector);
                const std::string previous = entry.tunnel_id;
                entry.tunnel_id = pc.target;
                entry.pending.reset();
                ev.kind = EventKind::RouteChangeCompleted;
                ev.payload = {{"flow", pc.selector.to_string()},
                              {"from_tunnel", previous},
                              {"tunnel", pc.target},
                              {"requested_at_s", pc.requested_at.to_string()},
                              {"delay_s", (pc.effective_at - pc.requested_at).to_string()}};
            }
            out.push_back(std::move(ev));
        }
        return out;
    }

    // Applies every outstanding completion regardless of time.
    std::vector<SimEvent> settle() {
        std::vector<SimEvent> out;
        while (auto next = next_completion_time()) {
            auto batch = apply_due(*next);
            out.insert(out.end(), batch.begin(), batch.end());
        }
        return out;
    }

    // Rate enforcement: min(offered, tunnel capacity, circuit allocation).
    [[nodiscard]] TransmitResult transmit(const Seconds& /*t*/, const Mbps& offered, const FlowSelector& selector) const {
        TransmitResult out;
        auto it = routes_.find(selector);
        if (it == routes_.end() || it->second.tunnel_id.empty()) {
            out.carried = Mbps{0};
            out.diagnostic = "flow " + selector.to_string() + " has no route";
            return out;
        }
        const Tunnel& tunnel = tunnels_.at(it->second.tunnel_id);
        Mbps carried = max(offered, Mbps{0});
        if (tunnel.capacity_mbps) carried = min(carried, *tunnel.capacity_mbps);
        if (tunnel.circuit_id) {
            if (auto c = circuits_.find(*tunnel.circuit_id); c != circuits_.end())
                carried = min(carried, c->second.allocated_mbps);
            else
                carried = Mbps{0};
        }
        out.carried = carried;
        out.tunnel_id = tunnel.id;
        return out;
    }

    void accrue_meter(const Seconds& t) {
        if (!meter_last_) {
            meter_last_ = t;
            return;
        }
        if (t < *meter_last_) return;
        meter_ = meter_accrue(std::move(meter_), *meter_last_, t, total_allocated());
        meter_last_ = t;
    }

    [[nodiscard]] Mbps total_allocated() const {
        Mbps total{0};
        for (const auto& [id, vc] : circuits_) total += vc.allocated_mbps;
        return total;
    }

    [[nodiscard]] const VirtualCircuit& circuit(const std::string& id) const {
        auto it = circuits_.find(id);
        if (it == circuits_.end()) throw UnderlayRejected(UnderlayErrc::UnknownCircuit, "unknown circuit '" + id + "'");
        return it->second;
    }
    [[nodiscard]] bool has_circuit(const std::string& id) const { return circuits_.contains(id); }
    [[nodiscard]] const std::map<std::string, VirtualCircuit>& circuits() const noexcept { return circuits_; }
    [[nodiscard]] const std::map<std::string, Tunnel>& tunnels() const noexcept { return tunnels_; }
    [[nodiscard]] const std::map<FlowSelector, RouteEntry>& routes() const noexcept { return routes_; }
    [[nodiscard]] const std::vector<PendingCompletion>& pending_completions() const noexcept { return pending_; }
    [[nodiscard]] const BillingMeter& meter() const noexcept { return meter_; }

    // The tunnel the flow is on, or will be on once a pending switch lands.
    [[nodiscard]] std::optional<std::string> intended_route(const FlowSelector& selector) const {
        auto it = routes_.find(selector);
        if (it == routes_.end()) return std::nullopt;
        if (it->second.pending) return it->second.pending;
        return it->second.tunnel_id;
    }
    [[nodiscard]] std::optional<std::string> current_route(const FlowSelector& selector) const {
        auto it = routes_.find(selector);
        if (it == routes_.end() || it->second.tunnel_id.empty()) return std::nullopt;
        return it->second.tunnel_id;
    }

private:
    VirtualCircuit& circuit_mut(const std::string& id) {
        auto it = circuits_.find(id);
        if (it == circuits_.end()) throw UnderlayRejected(UnderlayErrc::UnknownCircuit, "unknown circuit '" + id + "'");
        return it->second;
    }

    void require_tunnel(const std::string& id) const {
        if (!tunnels_.contains(id)) throw UnderlayRejected(UnderlayErrc::UnknownTunnel, "unknown tunnel '" + id + "'");
    }

    void cancel_circuit_completion(const std::string& id) {
        std::erase_if(pending_, [&](const PendingCompletion& pc) {
            return pc.kind == PendingCompletion::Kind::Circuit && pc.circuit_id == id;
        });
        if (auto it = circuits_.find(id); it != circuits_.end()) {
            it->second.pending_mbps.reset();
            it->second.state = CircuitState::Active;
        }
    }

    void cancel_route_completion(const FlowSelector& selector) {
        std::erase_if(pending_, [&](const PendingCompletion& pc) {
            return pc.kind == PendingCompletion::Kind::Route && pc.selector == selector;
        });
    }

    void record_meter_sample(const Seconds& t) { meter_.samples.emplace_back(t, total_allocated()); }

    UnderlayConfig cfg_;
    std::map<std::string, VirtualCircuit> circuits_;
    std::map<std::string, Tunnel> tunnels_;
    std::map<FlowSelector, RouteEntry> routes_;
    std::vector<PendingCompletion> pending_;
    BillingMeter meter_;
    std::optional<Seconds> meter_last_;
    std::uint64_t next_circuit_ = 0;
    std::uint64_t next_seq_ = 0;
};

}  // namespace wanscale
