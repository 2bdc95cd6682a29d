// Cloud-to-network event path.
//
//   Operator  -- publishes replica/annotation changes into a ServiceRegistry
//   Reader    -- polls the registry and batches the deltas into one
//                AdaptorEventBody (the JSON wire object)
//   Adaptor   -- turns wire events into underlay actions through the
//                vertical and horizontal policies
#pragma once

#include "wanscale/domain.hpp"
#include "wanscale/policy.hpp"
#include "wanscale/underlay.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

namespace wanscale {

struct ChangeLogEntry {
    std::uint64_t revision = 0;
    Seconds published_at;
    EndpointRecord record;
};

// Last-writer-wins per endpoint name, global revision counter, and an
// append-only change log that keeps every intermediate state.
class ServiceRegistry {
public:
    ServiceRegistry() = default;
    ServiceRegistry(const ServiceRegistry&) = delete;
    ServiceRegistry& operator=(const ServiceRegistry&) = delete;

    // Stores `record` under a fresh revision and returns the stored copy.
    EndpointRecord put(EndpointRecord record, const Seconds& t) {
        std::lock_guard lock(mutex_);
        record.revision = ++last_revision_;
        records_[record.name] = record;
        log_.push_back(ChangeLogEntry{record.revision, t, record});
        return record;
    }

    [[nodiscard]] std::optional<EndpointRecord> get(const std::string& name) const {
        std::lock_guard lock(mutex_);
        if (auto it = records_.find(name); it != records_.end()) return it->second;
        return std::nullopt;
    }

    [[nodiscard]] std::vector<EndpointRecord> snapshot() const {
        std::lock_guard lock(mutex_);
        std::vector<EndpointRecord> out;
        out.reserve(records_.size());
        for (const auto& [name, rec] : records_) out.push_back(rec);
        return out;
    }

    [[nodiscard]] std::vector<ChangeLogEntry> change_log() const {
        std::lock_guard lock(mutex_);
        return log_;
    }

    [[nodiscard]] std::uint64_t last_revision() const {
        std::lock_guard lock(mutex_);
        return last_revision_;
    }

private:
    mutable std::mutex mutex_;
    std::map<std::string, EndpointRecord> records_;
    std::vector<ChangeLogEntry> log_;
    std::uint64_t last_revision_ = 0;
};

// Metadata the operator derives from an application: every annotation is
// carried as-is, plus "replicas".
inline Annotations endpoint_metadata(const Application& app) {
    Annotations md = app.annotations;
    md[std::string(kReplicasKey)] = std::to_string(app.replicas);
    return md;
}

// Publishes the application's current state; returns nullopt (and bumps no
// revision) when the registry already holds identical state.
inline std::optional<EndpointRecord> operator_publish(ServiceRegistry& registry, const Application& app, const Seconds& t) {
    EndpointRecord rec;
    rec.name = app.name;
    rec.ip = app.ip;
    rec.port = app.selector().port;
    rec.metadata = endpoint_metadata(app);
    if (auto current = registry.get(app.name); current && !current->deleted) {
        if (current->ip == rec.ip && current->port == rec.port && current->metadata == rec.metadata) return std::nullopt;
    }
    return registry.put(std::move(rec), t);
}

// Publishes a tombstone for a removed application.
inline std::optional<EndpointRecord> operator_remove(ServiceRegistry& registry, const std::string& name, const Seconds& t) {
    auto current = registry.get(name);
    if (!current || current->deleted) return std::nullopt;
    EndpointRecord rec = *current;
    rec.metadata.clear();
    rec.deleted = true;
    return registry.put(std::move(rec), t);
}

struct ReaderState {
    std::map<std::string, std::uint64_t> last_seen_revision;
    Seconds poll_interval_s{5};
};

struct ReaderDelta {
    std::string event;  // "add" | "update" | "delete"
    EndpointRecord record;
};

// Every record newer than what was last seen for its name, in revision
// order. Only the latest state per name is visible, so intermediate
// revisions between two polls are skipped.
inline std::vector<ReaderDelta> reader_poll(const ServiceRegistry& registry, ReaderState& state, const Seconds& /*t*/) {
    std::vector<ReaderDelta> out;
    for (const auto& rec : registry.snapshot()) {
        auto it = state.last_seen_revision.find(rec.name);
        const bool known = it != state.last_seen_revision.end();
        if (known && rec.revision <= it->second) continue;
        if (!known && rec.deleted) {
            state.last_seen_revision[rec.name] = rec.revision;
            continue;
        }
        out.push_back(ReaderDelta{rec.deleted ? "delete" : (known ? "update" : "add"), rec});
    }
    std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) { return a.record.revision < b.record.revision; });
    for (const auto& d : out) state.last_seen_revision[d.record.name] = d.record.revision;
    return out;
}

// ---------------------------------------------------------------------------
// Wire format: {"events":[{"event","name","ip","port","metadata"}]}

struct WireEvent {
    std::string event;
    std::string name;
    std::string ip;
    std::int64_t port = 0;
    std::map<std::string, std::string> metadata;

    friend bool operator==(const WireEvent&, const WireEvent&) = default;
};

struct AdaptorEventBody {
    std::vector<WireEvent> events;

    friend bool operator==(const AdaptorEventBody&, const AdaptorEventBody&) = default;
};

inline AdaptorEventBody make_event_body(const std::vector<ReaderDelta>& deltas) {
    AdaptorEventBody body;
    for (const auto& d : deltas)
        body.events.push_back(WireEvent{d.event, d.record.name, d.record.ip.to_string(), d.record.port, d.record.metadata});
    return body;
}

inline AdaptorEventBody parse_event_body(const nlohmann::json& doc) {
    if (!doc.is_object()) throw ValidationError("", "body must be a JSON object");
    for (const auto& [key, value] : doc.items())
        if (key != "events") throw ValidationError(key, "unknown field");
    if (!doc.contains("events")) throw ValidationError("events", "missing field");
    const auto& events = doc.at("events");
    if (!events.is_array()) throw ValidationError("events", "must be an array");

    AdaptorEventBody body;
    for (std::size_t i = 0; i < events.size(); ++i) {
        const auto& e = events[i];
        const std::string at = "events[" + std::to_string(i) + "]";
        if (!e.is_object()) throw ValidationError(at, "must be an object");
        for (const auto& [key, value] : e.items()) {
            if (key != "event" && key != "name" && key != "ip" && key != "port" && key != "metadata")
                throw ValidationError(at + "." + key, "unknown field");
        }
        auto require = [&](const char* key) -> const nlohmann::json& {
            if (!e.contains(key)) throw ValidationError(at + "." + key, "missing field");
            return e.at(key);
        };
        WireEvent w;
        const auto& ev = require("event");
        if (!ev.is_string()) throw ValidationError(at + ".event", "must be a string");
        w.event = ev.get<std::string>();
        if (w.event != "add" && w.event != "update" && w.event != "delete")
            throw ValidationError(at + ".event", "must be one of add, update, delete");
        const auto& name = require("name");
        if (!name.is_string() || name.get<std::string>().empty())
            throw ValidationError(at + ".name", "must be a non-empty string");
        w.name = name.get<std::string>();
        const auto& ip = require("ip");
        if (!ip.is_string() || !Ipv4::parse(ip.get<std::string>()))
            throw ValidationError(at + ".ip", "must be a dotted-quad IPv4 string");
        w.ip = ip.get<std::string>();
        const auto& port = require("port");
        if (!port.is_number_integer() || port.get<std::int64_t>() < 0 || port.get<std::int64_t>() > 65535)
            throw ValidationError(at + ".port", "must be an integer in [0, 65535]");
        w.port = port.get<std::int64_t>();
        const auto& md = require("metadata");
        if (!md.is_object()) throw ValidationError(at + ".metadata", "must be an object");
        for (const auto& [key, value] : md.items()) {
            if (!value.is_string()) throw ValidationError(at + ".metadata." + key, "value must be a string");
            w.metadata[key] = value.get<std::string>();
        }
        body.events.push_back(std::move(w));
    }
    return body;
}

inline AdaptorEventBody parse_event_body(std::string_view text) {
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw ValidationError("", std::string("malformed JSON: ") + e.what());
    }
    return parse_event_body(doc);
}

inline std::string serialize_event_body(const AdaptorEventBody& body) {
    nlohmann::ordered_json doc;
    doc["events"] = nlohmann::ordered_json::array();
    for (const auto& w : body.events) {
        nlohmann::ordered_json e;
        e["event"] = w.event;
        e["name"] = w.name;
        e["ip"] = w.ip;
        e["port"] = w.port;
        e["metadata"] = nlohmann::ordered_json::object();
        for (const auto& [k, v] : w.metadata) e["metadata"][k] = v;
        doc["events"].push_back(std::move(e));
    }
    return doc.dump();
}

// ---------------------------------------------------------------------------
// Adaptor

// What the adaptor knows about one application: which circuit carries it
// (vertical scaling) and how its profiles map to tunnels (steering).
struct AdaptorBinding {
    std::optional<std::string> circuit_id;
    VerticalPolicyConfig vertical;
    std::optional<ProfileMap> profiles;
};

struct DispatchResult {
    std::vector<UnderlayAction> actions;
    std::vector<std::string> diagnostics;
    bool saturated = false;
};

class Adaptor {
public:
    Adaptor() = default;

    // Binding for a named application. The name "*" is used for applications
    // without their own binding.
    void bind(const std::string& app, AdaptorBinding binding) { bindings_[app] = std::move(binding); }

    [[nodiscard]] const AdaptorBinding* binding_for(const std::string& app) const {
        if (auto it = bindings_.find(app); it != bindings_.end()) return &it->second;
        if (auto it = bindings_.find("*"); it != bindings_.end()) return &it->second;
        return nullptr;
    }

    // Decides actions for every event in the body against the current
    // (and pending) underlay state. Replaying a body yields no new actions.
    DispatchResult dispatch(const AdaptorEventBody& body, const Underlay& underlay, const Seconds& t) {
        DispatchResult out;
        for (const auto& event : body.events) dispatch_event(event, underlay, t, out);
        return out;
    }

    void dispatch_event(const WireEvent& event, const Underlay& underlay, const Seconds& t, DispatchResult& out) {
        const AdaptorBinding* binding = binding_for(event.name);
        if (!binding) {
            out.diagnostics.push_back("no adaptor binding for application '" + event.name + "'");
            return;
        }
        AppState& st = state_for(event.name);
        std::lock_guard app_lock(st.mutex);
        const auto ip = Ipv4::parse(event.ip);
        const FlowSelector selector{ip.value_or(Ipv4{}), static_cast<std::uint16_t>(event.port)};

        EndpointRecord rec;
        rec.name = event.name;
        rec.ip = selector.ip;
        rec.port = selector.port;
        rec.metadata = event.metadata;
        rec.deleted = event.event == "delete";

        if (rec.deleted) {
            if (binding->circuit_id && underlay.has_circuit(*binding->circuit_id)) {
                const auto& vc = underlay.circuit(*binding->circuit_id);
                const Mbps baseline = binding->vertical.ladder.baseline();
                if (vc.allocated_mbps != baseline && vc.pending_mbps != baseline)
                    out.actions.emplace_back(UpgradeCircuit{*binding->circuit_id, baseline});
            }
            st.last.reset();
            st.hold = {};
            return;
        }

        const auto value_of = [](const std::optional<EndpointRecord>& r, std::string_view key) -> std::optional<std::string> {
            if (!r) return std::nullopt;
            if (auto it = r->metadata.find(std::string(key)); it != r->metadata.end()) return it->second;
            return std::nullopt;
        };
        const bool first = !st.last.has_value();
        const bool replicas_changed = first || value_of(st.last, kReplicasKey) != value_of(rec, kReplicasKey);
        const bool profile_changed = first || value_of(st.last, kTrafficProfileKey) != value_of(rec, kTrafficProfileKey);
        st.last = rec;

        if (replicas_changed && binding->circuit_id && rec.metadata.contains(std::string(kReplicasKey)))
            run_vertical(*binding, st, underlay, t, out);
        if (profile_changed && binding->profiles) {
            const auto decision = steer(rec, *binding->profiles, underlay.intended_route(selector));
            if (decision.warning) out.diagnostics.push_back(*decision.warning);
            if (decision.tunnel) out.actions.emplace_back(SetRoute{selector, *decision.tunnel});
        }
    }

    // Re-evaluates held downscales; called on every reader poll.
    DispatchResult reconcile(const Underlay& underlay, const Seconds& t) {
        DispatchResult out;
        std::vector<std::pair<std::string, AppState*>> held;
        {
            std::lock_guard lock(states_mutex_);
            for (auto& [name, st] : states_) held.emplace_back(name, st.get());
        }
        for (auto& [name, st] : held) {
            std::lock_guard app_lock(st->mutex);
            if (!st->last || !st->hold.below_since) continue;
            const AdaptorBinding* binding = binding_for(name);
            if (binding && binding->circuit_id) run_vertical(*binding, *st, underlay, t, out);
        }
        return out;
    }

private:
    struct AppState {
        std::mutex mutex;
        std::optional<EndpointRecord> last;
        VerticalHold hold;
    };

    AppState& state_for(const std::string& name) {
        std::lock_guard lock(states_mutex_);
        auto& slot = states_[name];
        if (!slot) slot = std::make_unique<AppState>();
        return *slot;
    }

    static void run_vertical(const AdaptorBinding& binding, AppState& st, const Underlay& underlay, const Seconds& t,
                             DispatchResult& out) {
        if (!underlay.has_circuit(*binding.circuit_id)) {
            out.diagnostics.push_back("unknown circuit '" + *binding.circuit_id + "'");
            return;
        }
        const auto& vc = underlay.circuit(*binding.circuit_id);
        const auto decision = vertical_step(CircuitView{vc.allocated_mbps, vc.pending_mbps}, *st.last, binding.vertical, t, st.hold);
        if (decision.diagnostic) out.diagnostics.push_back(*decision.diagnostic);
        if (decision.saturated) out.saturated = true;
        if (decision.target) out.actions.emplace_back(UpgradeCircuit{*binding.circuit_id, *decision.target});
    }

    std::map<std::string, AdaptorBinding> bindings_;
    std::mutex states_mutex_;
    std::map<std::string, std::unique_ptr<AppState>> states_;
};

// Applies one adaptor action to the underlay and returns the matching
// "requested" trace event.
inline SimEvent execute_action(Underlay& underlay, const UnderlayAction& action, const Seconds& t, Rng& rng) {
    SimEvent ev;
    ev.time_s = t;
    if (const auto* up = std::get_if<UpgradeCircuit>(&action)) {
        const Mbps from = underlay.circuit(up->circuit_id).allocated_mbps;
        const Seconds effective = underlay.upgrade_circuit(up->circuit_id, up->target_mbps, t, rng);
        ev.kind = EventKind::CircuitUpgradeRequested;
        ev.payload = {{"circuit", up->circuit_id},
                      {"from_mbps", from.to_string()},
                      {"target_mbps", up->target_mbps.to_string()},
                      {"effective_at_s", effective.to_string()}};
    } else {
        const auto& route = std::get<SetRoute>(action);
        const auto from = underlay.current_route(route.selector);
        const auto effective = underlay.set_route(route.selector, route.tunnel_id, t, rng);
        ev.kind = EventKind::RouteChangeRequested;
        ev.payload = {{"flow", route.selector.to_string()},
                      {"from_tunnel", from.value_or("")},
                      {"tunnel", route.tunnel_id},
                      {"effective_at_s", effective ? effective->to_string() : t.to_string()}};
    }
    return ev;
}

}  // namespace wanscale
