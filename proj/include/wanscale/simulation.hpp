// Deterministic discrete-event engine that runs one scenario end to end:
// load -> HPA -> operator -> registry -> reader -> adaptor -> underlay.
//
// Events at equal times run in phase order (underlay completions, load
// changes, annotation flips, HPA syncs, reader polls, measurement ticks) and
// then by insertion sequence, so a measurement tick observes every state
// change scheduled for the same instant.
#pragma once

#include "wanscale/cloudsim.hpp"
#include "wanscale/pipeline.hpp"
#include "wanscale/scenario.hpp"
#include "wanscale/underlay.hpp"

#include <map>
#include <queue>
#include <atomic>
#include <thread>
#include <string>
#include <vector>

namespace wanscale {

// Settled underlay state: capacities and routes once every pending change
// has landed.
struct FinalState {
    std::map<std::string, Mbps> circuits;
    std::map<std::string, std::string> routes;  // flow "ip:port" -> tunnel
    friend bool operator==(const FinalState&, const FinalState&) = default;
};

inline FinalState snapshot_state(const Underlay& underlay) {
    FinalState s;
    for (const auto& [id, vc] : underlay.circuits()) s.circuits[id] = vc.pending_mbps.value_or(vc.allocated_mbps);
    for (const auto& [sel, entry] : underlay.routes()) s.routes[sel.to_string()] = entry.pending.value_or(entry.tunnel_id);
    return s;
}

struct RunTrace {
    Mode mode = Mode::Vertical;
    std::uint64_t seed = 0;
    Seconds duration_s;
    Seconds tick_s;
    std::vector<std::string> tunnel_ids;
    std::vector<SimEvent> events;
    std::vector<MetricSample> metrics;
    std::vector<ChangeLogEntry> change_log;
    std::vector<PodStartup> pod_startups;
    std::vector<Seconds> provisioning_delays;
    std::vector<Seconds> route_delays;
    Rational meter_mbps_seconds;
    FinalState final_state;

    [[nodiscard]] std::vector<std::pair<Seconds, Rational>> series(const std::string& name) const {
        std::vector<std::pair<Seconds, Rational>> out;
        for (const auto& m : metrics)
            if (m.series == name) out.emplace_back(m.time_s, m.value);
        return out;
    }
};

inline std::string tunnel_series(const std::string& tunnel_id) { return "throughput_mbps@" + tunnel_id; }

// Underlay, tunnels and initial route for a scenario. Returns the circuit id
// (empty when the scenario has no circuit).
inline std::string build_underlay(const ScenarioConfig& cfg, Underlay& underlay, const Application& app) {
    std::string circuit_id;
    if (cfg.circuit) circuit_id = underlay.create_circuit(cfg.circuit->loc_a, cfg.circuit->loc_b, cfg.vertical_policy.ladder.baseline(), Seconds{0});
    for (const auto& t : cfg.tunnels)
        underlay.add_tunnel(Tunnel{t.id, t.capacity_mbps, t.description, t.rides_circuit ? std::optional(circuit_id) : std::nullopt});
    underlay.install_route(app.selector(), cfg.profile_map.default_tunnel);
    return circuit_id;
}

inline UnderlayConfig underlay_config_for(const ScenarioConfig& cfg) {
    UnderlayConfig u;
    if (cfg.circuit) u.locations = {cfg.circuit->loc_a, cfg.circuit->loc_b};
    u.ladder = cfg.vertical_policy.ladder;
    u.provisioning_delay_model = cfg.latency_models.provisioning;
    u.route_apply_delay_model = cfg.latency_models.route_apply;
    u.time_quantum = cfg.tick_s;
    return u;
}

inline AdaptorBinding binding_for(const ScenarioConfig& cfg, const std::string& circuit_id) {
    AdaptorBinding b;
    if (!circuit_id.empty()) b.circuit_id = circuit_id;
    b.vertical = cfg.vertical_policy;
    b.profiles = cfg.profile_map;
    return b;
}

inline Application make_application(const ScenarioConfig& cfg) {
    Application app;
    app.name = cfg.application.name;
    app.ip = *Ipv4::parse(cfg.application.ip);
    app.ports = {cfg.application.port};
    app.annotations = cfg.application.annotations;
    app.min_replicas = cfg.hpa.min_replicas;
    app.max_replicas = cfg.hpa.max_replicas;
    app.replicas = cfg.hpa.min_replicas;
    app.cpu_target_pct = cfg.hpa.target_pct;
    app.per_replica_bw_mbps = cfg.vertical_policy.per_replica_bw_mbps;
    app.validate();
    return app;
}

class Simulation {
public:
    explicit Simulation(ScenarioConfig cfg)
        : cfg_((cfg.validate(), std::move(cfg))),
          rng_(cfg_.seed),
          app_(make_application(cfg_)),
          hpa_(cfg_.effective_hpa()),
          underlay_(underlay_config_for(cfg_)) {
        reader_.poll_interval_s = cfg_.poll_interval_s;
    }

    RunTrace run() {
        trace_ = RunTrace{};
        trace_.mode = cfg_.mode;
        trace_.seed = cfg_.seed;
        trace_.duration_s = cfg_.duration_s;
        trace_.tick_s = cfg_.tick_s;
        for (const auto& t : cfg_.tunnels) trace_.tunnel_ids.push_back(t.id);

        const Seconds zero{0};
        circuit_id_ = build_underlay(cfg_, underlay_, app_);
        underlay_.accrue_meter(zero);
        adaptor_.bind(app_.name, binding_for(cfg_, circuit_id_));
        hpa_.adopt_existing(app_.replicas, zero);
        publish(zero);

        const auto& steps = cfg_.load_schedule.steps();
        for (std::size_t i = 0; i < steps.size(); ++i) schedule(steps[i].start_s, Phase::Load, static_cast<std::int64_t>(i));
        if (cfg_.annotation_flips)
            for (std::int64_t i = 0; i < cfg_.repetitions; ++i) schedule(cfg_.annotation_flips->time_of(i), Phase::Annotation, i);
        schedule(zero, Phase::HpaSync, 0);
        schedule(zero, Phase::ReaderPoll, 0);
        schedule(zero, Phase::Tick, 0);

        while (!queue_.empty()) {
            const Scheduled next = queue_.top();
            queue_.pop();
            if (next.time >= cfg_.duration_s) continue;
            apply_completions(next.time);
            switch (next.phase) {
                case Phase::Load: on_load_change(next); break;
                case Phase::Annotation: on_annotation_flip(next); break;
                case Phase::HpaSync: on_hpa_sync(next); break;
                case Phase::ReaderPoll: on_reader_poll(next); break;
                case Phase::Tick: on_tick(next); break;
            }
        }
        apply_completions(cfg_.duration_s);
        underlay_.accrue_meter(cfg_.duration_s);
        trace_.meter_mbps_seconds = underlay_.meter().accrued_mbps_seconds;
        trace_.change_log = registry_.change_log();

        // Settled end state: release any held downscale, then land every
        // outstanding change. Nothing below is part of the time-ordered trace.
        const Seconds after = cfg_.duration_s + cfg_.vertical_policy.downscale_hold_s;
        underlay_.settle();
        for (const auto& action : adaptor_.reconcile(underlay_, after).actions) {
            try {
                execute_action(underlay_, action, after, rng_);
            } catch (const UnderlayError&) {
            }
        }
        underlay_.settle();
        trace_.final_state = snapshot_state(underlay_);
        return std::move(trace_);
    }

private:
    enum class Phase { Load = 1, Annotation = 2, HpaSync = 3, ReaderPoll = 4, Tick = 5 };

    struct Scheduled {
        Seconds time;
        Phase phase;
        std::uint64_t seq;
        std::int64_t index;
    };
    struct Later {
        bool operator()(const Scheduled& a, const Scheduled& b) const {
            if (a.time != b.time) return a.time > b.time;
            if (a.phase != b.phase) return a.phase > b.phase;
            return a.seq > b.seq;
        }
    };

    void schedule(const Seconds& t, Phase phase, std::int64_t index) { queue_.push(Scheduled{t, phase, ++seq_, index}); }

    void record(SimEvent ev) {
        ev.seq = ++event_seq_;
        trace_.events.push_back(std::move(ev));
    }

    void record(const Seconds& t, EventKind kind, std::map<std::string, std::string> payload) {
        SimEvent ev;
        ev.time_s = t;
        ev.kind = kind;
        ev.payload = std::move(payload);
        record(std::move(ev));
    }

    void metric(const Seconds& t, std::string series, const Rational& value) {
        trace_.metrics.push_back(MetricSample{t, std::move(series), value});
    }

    void apply_completions(const Seconds& t) {
        for (auto& ev : underlay_.apply_due(t)) record(std::move(ev));
    }

    void publish(const Seconds& t) {
        if (auto rec = operator_publish(registry_, app_, t)) {
            std::map<std::string, std::string> payload{{"name", rec->name},
                                                         {"ip", rec->ip.to_string()},
                                                         {"port", std::to_string(rec->port)},
                                                         {"revision", std::to_string(rec->revision)}};
            for (const auto& [k, v] : rec->metadata) payload["metadata." + k] = v;
            record(t, EventKind::RegistryPublish, std::move(payload));
        }
    }

    void on_load_change(const Scheduled& s) {
        const auto& step = cfg_.load_schedule.steps()[static_cast<std::size_t>(s.index)];
        record(s.time, EventKind::LoadChange, {{"connections", std::to_string(step.connections)}});
    }

    void on_annotation_flip(const Scheduled& s) {
        const std::string& profile = cfg_.annotation_flips->profile_of(s.index);
        app_.annotations[std::string(kTrafficProfileKey)] = profile;
        record(s.time, EventKind::AnnotationChange,
               {{"app", app_.name},
                {"flip", std::to_string(s.index)},
                {"key", std::string(kTrafficProfileKey)},
                {"value", profile},
                {"tunnel", cfg_.profile_map.tunnel_for(profile)}});
        publish(s.time);
    }

    void on_hpa_sync(const Scheduled& s) {
        const std::int64_t connections = load_at(cfg_.load_schedule, s.time);
        const std::int64_t before = app_.replicas;
        auto result = hpa_.sync(app_, connections, s.time, rng_);
        record(s.time, EventKind::HpaSync,
               {{"connections", std::to_string(connections)},
                {"replicas_before", std::to_string(before)},
                {"replicas", std::to_string(result.new_replicas)}});
        if (result.replica_change) record(std::move(*result.replica_change));
        trace_.pod_startups.insert(trace_.pod_startups.end(), result.started.begin(), result.started.end());
        publish(s.time);
        schedule(s.time + cfg_.hpa.sync_period_s, Phase::HpaSync, 0);
    }

    void on_reader_poll(const Scheduled& s) {
        const auto deltas = reader_poll(registry_, reader_, s.time);
        if (!deltas.empty()) {
            const AdaptorEventBody body = make_event_body(deltas);
            const std::string wire = serialize_event_body(body);
            record(s.time, EventKind::ReaderPoll, {{"records", std::to_string(deltas.size())}});
            auto result = adaptor_.dispatch(body, underlay_, s.time);
            record(s.time, EventKind::AdaptorDispatch,
                   {{"reason", "event-body"}, {"body", wire}, {"actions", std::to_string(result.actions.size())}});
            finish_dispatch(s.time, result);
        }
        auto held = adaptor_.reconcile(underlay_, s.time);
        if (!held.actions.empty() || !held.diagnostics.empty()) {
            record(s.time, EventKind::AdaptorDispatch,
                   {{"reason", "downscale-hold"}, {"app", app_.name}, {"actions", std::to_string(held.actions.size())}});
            finish_dispatch(s.time, held);
        }
        schedule(s.time + cfg_.poll_interval_s, Phase::ReaderPoll, 0);
    }

    void finish_dispatch(const Seconds& t, const DispatchResult& result) {
        for (const auto& d : result.diagnostics) record(t, EventKind::Diagnostic, {{"message", d}});
        if (result.saturated) record(t, EventKind::Diagnostic, {{"message", "bandwidth demand saturates the ladder maximum"}});
        for (const auto& action : result.actions) {
            try {
                SimEvent ev = execute_action(underlay_, action, t, rng_);
                const Seconds delay = Rational::parse(ev.at("effective_at_s")) - t;
                if (ev.kind == EventKind::CircuitUpgradeRequested)
                    trace_.provisioning_delays.push_back(delay);
                else if (delay > 0)
                    trace_.route_delays.push_back(delay);
                record(std::move(ev));
            } catch (const UnderlayError& e) {
                record(t, EventKind::Diagnostic, {{"message", std::string("underlay rejected action: ") + e.what()}});
            }
        }
    }

    void on_tick(const Scheduled& s) {
        const Seconds& t = s.time;
        const std::int64_t connections = load_at(cfg_.load_schedule, t);
        Mbps offered = Rational{connections} * cfg_.per_conn_bw_mbps;
        if (cfg_.mode == Mode::Vertical)
            offered = min(offered, Rational{hpa_.ready_replicas(t)} * cfg_.vertical_policy.per_replica_bw_mbps);
        const auto tx = underlay_.transmit(t, offered, app_.selector());
        if (tx.diagnostic) record(t, EventKind::Diagnostic, {{"message", *tx.diagnostic}});

        underlay_.accrue_meter(t);
        metric(t, "offered_mbps", offered);
        metric(t, "throughput_mbps", tx.carried);
        if (!circuit_id_.empty()) metric(t, "allocated_mbps", underlay_.circuit(circuit_id_).allocated_mbps);
        metric(t, "replicas", Rational{app_.replicas});
        if (cfg_.mode == Mode::Horizontal) {
            for (const auto& id : trace_.tunnel_ids)
                metric(t, tunnel_series(id), tx.tunnel_id == id ? tx.carried : Mbps{0});
        }
        schedule(t + cfg_.tick_s, Phase::Tick, 0);
    }

    ScenarioConfig cfg_;
    Rng rng_;
    Application app_;
    HorizontalPodAutoscaler hpa_;
    Underlay underlay_;
    ServiceRegistry registry_;
    ReaderState reader_;
    Adaptor adaptor_;
    std::string circuit_id_;
    std::priority_queue<Scheduled, std::vector<Scheduled>, Later> queue_;
    std::uint64_t seq_ = 0;
    std::uint64_t event_seq_ = 0;
    RunTrace trace_;
};

inline RunTrace run_scenario(const ScenarioConfig& cfg) { return Simulation(cfg).run(); }

// Rebuilds the underlay from scratch by feeding a registry change log through
// a fresh reader and adaptor, one poll per logged revision, and returns the
// settled state. Equal to the live run's final state when the run is
// event-sourced correctly.
inline FinalState replay_change_log(const ScenarioConfig& cfg, const std::vector<ChangeLogEntry>& log) {
    Application app = make_application(cfg);
    Underlay underlay(underlay_config_for(cfg));
    const std::string circuit_id = build_underlay(cfg, underlay, app);
    Adaptor adaptor;
    adaptor.bind(app.name, binding_for(cfg, circuit_id));
    ServiceRegistry registry;
    ReaderState reader;
    Rng rng(cfg.seed ^ 0x9e3779b97f4a7c15ULL);

    auto run_actions = [&](const DispatchResult& result, const Seconds& t) {
        for (const auto& action : result.actions) {
            try {
                execute_action(underlay, action, t, rng);
            } catch (const UnderlayError&) {
            }
        }
    };
    Seconds last{0};
    for (const auto& entry : log) {
        last = entry.published_at;
        underlay.apply_due(last);
        EndpointRecord rec = entry.record;
        rec.revision = 0;
        registry.put(std::move(rec), last);
        const auto deltas = reader_poll(registry, reader, last);
        run_actions(adaptor.dispatch(make_event_body(deltas), underlay, last), last);
        run_actions(adaptor.reconcile(underlay, last), last);
    }
    const Seconds after = max(last, cfg.duration_s) + cfg.vertical_policy.downscale_hold_s;
    underlay.settle();
    run_actions(adaptor.reconcile(underlay, after), after);
    underlay.settle();
    return snapshot_state(underlay);
}

// Runs seeds cfg.seed, cfg.seed + 1, ... on independent workers; results are
// returned in seed order.
inline std::vector<RunTrace> run_sweep(const ScenarioConfig& cfg, std::size_t count, std::size_t workers = 0) {
    if (workers == 0) workers = std::max<std::size_t>(1, std::thread::hardware_concurrency());
    workers = std::min(workers, std::max<std::size_t>(count, 1));
    std::vector<RunTrace> out(count);
    std::vector<std::exception_ptr> errors(count);
    std::atomic<std::size_t> next{0};
    auto work = [&] {
        for (std::size_t i = next++; i < count; i = next++) {
            try {
                ScenarioConfig c = cfg;
                c.seed = cfg.seed + i;
                out[i] = run_scenario(c);
            } catch (...) {
                errors[i] = std::current_exception();
            }
        }
    };
    std::vector<std::thread> pool;
    for (std::size_t w = 1; w < workers; ++w) pool.emplace_back(work);
    work();
    for (auto& t : pool) t.join();
    for (auto& e : errors)
        if (e) std::rethrow_exception(e);
    return out;
}

}  // namespace wanscale
