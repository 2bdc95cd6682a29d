// Post-run analysis: empirical CDFs, percentiles, switchover measurement and
// the trace-level property checks (capacity, path exclusivity, tunnel caps,
// meter conservation, event causality).
#pragma once

#include "wanscale/simulation.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace wanscale {

struct CdfPoint {
    Seconds value;
    Rational fraction;
    friend bool operator==(const CdfPoint&, const CdfPoint&) = default;
};

// Sorted samples paired with i/n at the i-th order statistic.
inline std::vector<CdfPoint> compute_cdf(std::vector<Seconds> samples) {
    if (samples.empty()) throw std::invalid_argument("compute_cdf: no samples");
    std::sort(samples.begin(), samples.end());
    const auto n = static_cast<std::int64_t>(samples.size());
    std::vector<CdfPoint> out;
    out.reserve(samples.size());
    for (std::int64_t i = 0; i < n; ++i) out.push_back({samples[static_cast<std::size_t>(i)], Rational{i + 1, n}});
    return out;
}

// Nearest-rank percentile, p in (0, 1].
inline Seconds percentile(std::vector<Seconds> samples, const Rational& p) {
    if (samples.empty()) throw std::invalid_argument("percentile: no samples");
    if (p <= 0 || p > 1) throw std::invalid_argument("percentile: p must lie in (0, 1]");
    std::sort(samples.begin(), samples.end());
    const std::int64_t rank = (p * Rational{static_cast<std::int64_t>(samples.size())}).ceil();
    return samples[static_cast<std::size_t>(std::max<std::int64_t>(rank, 1) - 1)];
}

inline Seconds median(std::vector<Seconds> samples) { return percentile(std::move(samples), Rational{1, 2}); }

struct FlipMeasurement {
    std::int64_t flip = 0;
    Seconds flip_time;
    std::string tunnel;
    std::optional<Seconds> delay;
    bool same_tunnel = false;  // excluded: nothing to switch
    bool censored = false;     // traffic never appeared before the next flip / run end
};

struct SwitchoverReport {
    std::vector<FlipMeasurement> flips;
    std::vector<Seconds> delays;  // measured, non-excluded flips only
    std::vector<std::string> warnings;
};

namespace detail {

// Per-tunnel carried throughput indexed by tick time.
inline std::map<std::string, std::vector<std::pair<Seconds, Rational>>> tunnel_series_of(const RunTrace& trace) {
    std::map<std::string, std::vector<std::pair<Seconds, Rational>>> out;
    for (const auto& id : trace.tunnel_ids) out[id];
    for (const auto& m : trace.metrics) {
        if (m.series.starts_with("throughput_mbps@")) out[m.series.substr(16)].emplace_back(m.time_s, m.value);
    }
    return out;
}

}  // namespace detail

// Delay from each annotation flip until the newly selected tunnel first
// carries more than `threshold_mbps` at a measurement tick.
inline SwitchoverReport measure_switchover(const RunTrace& trace, const Mbps& threshold_mbps = Mbps{1}) {
    SwitchoverReport report;
    const auto series = detail::tunnel_series_of(trace);
    std::vector<const SimEvent*> flips;
    for (const auto& ev : trace.events)
        if (ev.kind == EventKind::AnnotationChange) flips.push_back(&ev);

    auto carrier_at = [&](const Seconds& t) -> std::optional<std::string> {
        for (const auto& [id, s] : series) {
            auto it = std::upper_bound(s.begin(), s.end(), t, [](const Seconds& v, const auto& p) { return v < p.first; });
            if (it != s.begin() && std::prev(it)->second > 0) return id;
        }
        return std::nullopt;
    };

    std::optional<std::string> previous;
    for (std::size_t i = 0; i < flips.size(); ++i) {
        const SimEvent& ev = *flips[i];
        FlipMeasurement fm;
        fm.flip = static_cast<std::int64_t>(i);
        fm.flip_time = ev.time_s;
        fm.tunnel = ev.at("tunnel");
        const auto before = previous ? previous : carrier_at(ev.time_s);
        previous = fm.tunnel;
        if (before && *before == fm.tunnel) {
            fm.same_tunnel = true;
            fm.delay = Seconds{0};
            report.flips.push_back(fm);
            continue;
        }
        const Seconds horizon = i + 1 < flips.size() ? flips[i + 1]->time_s : trace.duration_s;
        auto it = series.find(fm.tunnel);
        if (it != series.end()) {
            const auto& s = it->second;
            auto p = std::lower_bound(s.begin(), s.end(), fm.flip_time, [](const auto& a, const Seconds& v) { return a.first < v; });
            for (; p != s.end() && p->first < horizon; ++p) {
                if (p->second > threshold_mbps) {
                    fm.delay = p->first - fm.flip_time;
                    break;
                }
            }
        }
        if (!fm.delay) {
            fm.censored = true;
            report.warnings.push_back("flip " + std::to_string(i) + " at t=" + fm.flip_time.to_string() +
                                      " never reached tunnel '" + fm.tunnel + "'; excluded from percentiles");
        } else {
            report.delays.push_back(*fm.delay);
        }
        report.flips.push_back(fm);
    }
    return report;
}

// Ticks where carried throughput exceeded the circuit's allocation.
inline std::vector<Seconds> capacity_violations(const RunTrace& trace) {
    std::vector<Seconds> out;
    const auto carried = trace.series("throughput_mbps");
    const auto allocated = trace.series("allocated_mbps");
    for (std::size_t i = 0; i < std::min(carried.size(), allocated.size()); ++i)
        if (carried[i].second > allocated[i].second) out.push_back(carried[i].first);
    return out;
}

// Ticks where the traffic offered to the WAN exceeded the circuit's
// allocation, i.e. capacity arrived late. Stricter than capacity_violations.
inline std::vector<Seconds> proactivity_violations(const RunTrace& trace) {
    std::vector<Seconds> out;
    const auto offered = trace.series("offered_mbps");
    const auto allocated = trace.series("allocated_mbps");
    for (std::size_t i = 0; i < std::min(offered.size(), allocated.size()); ++i)
        if (offered[i].second > allocated[i].second) out.push_back(offered[i].first);
    return out;
}

// Ticks where more than one tunnel carried the flow.
inline std::vector<Seconds> exclusivity_violations(const RunTrace& trace) {
    std::map<Seconds, int> carriers;
    for (const auto& m : trace.metrics)
        if (m.series.starts_with("throughput_mbps@") && m.value > 0) ++carriers[m.time_s];
    std::vector<Seconds> out;
    for (const auto& [t, n] : carriers)
        if (n > 1) out.push_back(t);
    return out;
}

inline std::vector<Seconds> cap_violations(const RunTrace& trace, const std::string& tunnel_id, const Mbps& cap) {
    std::vector<Seconds> out;
    for (const auto& [t, v] : trace.series(tunnel_series(tunnel_id)))
        if (v > cap) out.push_back(t);
    return out;
}

// Brute-force per-tick sum of allocated x tick.
inline Rational meter_oracle(const RunTrace& trace) {
    Rational total{0};
    for (const auto& [t, v] : trace.series("allocated_mbps")) total += v * trace.tick_s;
    return total;
}

// Every completion must follow a request for the same circuit and target.
inline std::vector<std::string> causality_violations(const RunTrace& trace) {
    std::vector<std::string> out;
    std::vector<const SimEvent*> requests;
    for (const auto& ev : trace.events) {
        if (ev.kind == EventKind::CircuitUpgradeRequested) requests.push_back(&ev);
        if (ev.kind == EventKind::CircuitUpgradeCompleted) {
            const bool matched = std::any_of(requests.begin(), requests.end(), [&](const SimEvent* r) {
                return r->at("circuit") == ev.at("circuit") && r->at("target_mbps") == ev.at("target_mbps") &&
                       r->time_s <= ev.time_s;
            });
            if (!matched) out.push_back("completion at t=" + ev.time_s.to_string() + " has no matching request");
        }
    }
    for (std::size_t i = 1; i < trace.events.size(); ++i)
        if (trace.events[i].time_s < trace.events[i - 1].time_s)
            out.push_back("event " + std::to_string(trace.events[i].seq) + " goes back in time");
    return out;
}

// Distinct consecutive values of the allocated-capacity series.
inline std::vector<Mbps> capacity_steps(const RunTrace& trace) {
    std::vector<Mbps> out;
    for (const auto& [t, v] : trace.series("allocated_mbps"))
        if (out.empty() || out.back() != v) out.push_back(v);
    return out;
}

inline constexpr std::int64_t kStaticOverprovisionMbps = 200;

inline nlohmann::ordered_json json_number(const Rational& r) { return nlohmann::ordered_json::parse(r.to_string()); }

// count, median, p80 and max of a delay sample.
inline nlohmann::ordered_json delay_stats(const std::vector<Seconds>& v) {
    nlohmann::ordered_json s;
    s["count"] = v.size();
    if (!v.empty()) {
        s["median_s"] = json_number(median(v));
        s["p80_s"] = json_number(percentile(v, Rational{4, 5}));
        s["max_s"] = json_number(*std::max_element(v.begin(), v.end()));
    }
    return s;
}

inline nlohmann::ordered_json summarize(const RunTrace& trace) {
    const auto& num = json_number;
    const auto& stats = delay_stats;

    nlohmann::ordered_json j;
    j["mode"] = std::string(to_string(trace.mode));
    j["seed"] = trace.seed;
    j["duration_s"] = num(trace.duration_s);
    j["tick_s"] = num(trace.tick_s);

    std::int64_t max_replicas = 0;
    for (const auto& [t, v] : trace.series("replicas")) max_replicas = std::max(max_replicas, v.floor());
    j["max_replicas"] = max_replicas;

    nlohmann::ordered_json steps = nlohmann::ordered_json::array();
    for (const auto& s : capacity_steps(trace)) steps.push_back(num(s));
    j["capacity_steps_mbps"] = steps;

    const Rational static_total = Rational{kStaticOverprovisionMbps} * trace.duration_s;
    j["meter"] = {{"accrued_mbps_seconds", num(trace.meter_mbps_seconds)},
                  {"static_overprovision_mbps", kStaticOverprovisionMbps},
                  {"static_overprovision_mbps_seconds", num(static_total)},
                  {"autoscaled_to_static_ratio", num(trace.meter_mbps_seconds / static_total)}};

    std::vector<Seconds> pulls;
    std::vector<Seconds> runs;
    for (const auto& p : trace.pod_startups) {
        pulls.push_back(p.pull_s);
        runs.push_back(p.run_s);
    }
    j["latency"] = {{"pull", stats(pulls)},
                    {"run", stats(runs)},
                    {"provisioning", stats(trace.provisioning_delays)},
                    {"route_apply", stats(trace.route_delays)}};

    nlohmann::ordered_json checks;
    if (trace.mode == Mode::Vertical) checks["capacity_violations"] = capacity_violations(trace).size();
    checks["exclusivity_violations"] = exclusivity_violations(trace).size();
    checks["causality_violations"] = causality_violations(trace).size();
    j["checks"] = checks;
    if (trace.mode == Mode::Vertical) j["late_capacity_ticks"] = proactivity_violations(trace).size();

    if (trace.mode == Mode::Horizontal) {
        const auto sw = measure_switchover(trace);
        std::size_t censored = 0;
        std::size_t excluded = 0;
        for (const auto& f : sw.flips) {
            censored += f.censored ? 1 : 0;
            excluded += f.same_tunnel ? 1 : 0;
        }
        auto s = stats(sw.delays);
        s["flips"] = sw.flips.size();
        s["censored"] = censored;
        s["excluded_same_tunnel"] = excluded;
        s["warnings"] = sw.warnings;
        j["switchover"] = s;
    }
    return j;
}

// Trace properties checked by `--check`. Empty when the run is clean.
inline std::vector<std::string> property_violations(const RunTrace& trace, const ScenarioConfig& cfg) {
    std::vector<std::string> out;
    auto note = [&](const std::string& what, std::size_t n) {
        if (n > 0) out.push_back(what + ": " + std::to_string(n) + " violation(s)");
    };
    if (trace.mode == Mode::Vertical) note("carried above allocated", capacity_violations(trace).size());
    note("path exclusivity", exclusivity_violations(trace).size());
    for (const auto& t : cfg.tunnels)
        if (t.capacity_mbps) note("tunnel cap " + t.id, cap_violations(trace, t.id, *t.capacity_mbps).size());
    note("event causality", causality_violations(trace).size());
    if (!trace.series("allocated_mbps").empty() && meter_oracle(trace) != trace.meter_mbps_seconds)
        out.push_back("meter conservation: accrued " + trace.meter_mbps_seconds.to_string() + " != per-tick sum " +
                      meter_oracle(trace).to_string());
    return out;
}

}  // namespace wanscale
