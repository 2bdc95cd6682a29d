// Trace serialization: metrics.csv, events.jsonl, summary.json, CDF tables,
// and the inverse used by `report --trace`.
#pragma once

#include "wanscale/analysis.hpp"

#include <nlohmann/json.hpp>

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

namespace wanscale {

namespace detail {

inline void write_file(const std::filesystem::path& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot open '" + path.string() + "' for writing");
    out << content;
    out.flush();
    if (!out) throw Error("write failed for '" + path.string() + "'");
}

inline std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot open '" + path.string() + "' for reading");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

inline std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> out;
    if (s.empty()) return out;
    std::string cur;
    for (char c : s) {
        if (c == sep) {
            out.push_back(cur);
            cur.clear();
        } else {
            cur += c;
        }
    }
    out.push_back(cur);
    return out;
}

inline std::string cdf_csv(const std::vector<Seconds>& samples) {
    std::string out = "value_s,fraction\n";
    if (samples.empty()) return out;
    for (const auto& p : compute_cdf(samples)) out += p.value.to_string() + ',' + p.fraction.to_string() + '\n';
    return out;
}

}  // namespace detail

inline std::string metrics_csv(const RunTrace& trace) {
    std::string out = "time_s,series,value\n";
    for (const auto& m : trace.metrics) out += m.time_s.to_string() + ',' + m.series + ',' + m.value.to_string() + '\n';
    return out;
}

inline nlohmann::ordered_json event_to_json(const SimEvent& ev) {
    nlohmann::ordered_json j;
    j["time_s"] = ev.time_s.to_string();
    j["seq"] = ev.seq;
    j["kind"] = std::string(to_string(ev.kind));
    j["payload"] = nlohmann::ordered_json::object();
    for (const auto& [k, v] : ev.payload) j["payload"][k] = v;
    return j;
}

inline SimEvent event_from_json(const nlohmann::json& j) {
    SimEvent ev;
    ev.time_s = Rational::parse(j.at("time_s").get<std::string>());
    ev.seq = j.at("seq").get<std::uint64_t>();
    const auto kind = parse_event_kind(j.at("kind").get<std::string>());
    if (!kind) throw ValidationError("kind", "unknown event kind '" + j.at("kind").get<std::string>() + "'");
    ev.kind = *kind;
    for (const auto& [k, v] : j.at("payload").items()) ev.payload[k] = v.get<std::string>();
    return ev;
}

inline std::string events_jsonl(const RunTrace& trace) {
    std::string out;
    for (const auto& ev : trace.events) out += event_to_json(ev).dump() + '\n';
    return out;
}

// summary.json and the CDF tables. Pull and run CDFs come from pod
// start-ups, provisioning and route CDFs from underlay request delays,
// switchover from tick observation.
inline void emit_summaries(const RunTrace& trace, const std::filesystem::path& out_dir) {
    detail::write_file(out_dir / "summary.json", summarize(trace).dump(2) + '\n');
    std::vector<Seconds> pulls;
    std::vector<Seconds> runs;
    for (const auto& p : trace.pod_startups) {
        pulls.push_back(p.pull_s);
        runs.push_back(p.run_s);
    }
    detail::write_file(out_dir / "cdf_pull.csv", detail::cdf_csv(pulls));
    detail::write_file(out_dir / "cdf_run.csv", detail::cdf_csv(runs));
    detail::write_file(out_dir / "cdf_provisioning.csv", detail::cdf_csv(trace.provisioning_delays));
    detail::write_file(out_dir / "cdf_route_apply.csv", detail::cdf_csv(trace.route_delays));
    if (trace.mode == Mode::Horizontal)
        detail::write_file(out_dir / "cdf_switchover.csv", detail::cdf_csv(measure_switchover(trace).delays));
}

inline void emit_report(const RunTrace& trace, const std::filesystem::path& out_dir) {
    std::error_code ec;
    std::filesystem::create_directories(out_dir, ec);
    if (ec) throw Error("cannot create directory '" + out_dir.string() + "': " + ec.message());

    detail::write_file(out_dir / "metrics.csv", metrics_csv(trace));
    detail::write_file(out_dir / "events.jsonl", events_jsonl(trace));

    nlohmann::ordered_json meta;
    meta["mode"] = std::string(to_string(trace.mode));
    meta["seed"] = trace.seed;
    meta["duration_s"] = trace.duration_s.to_string();
    meta["tick_s"] = trace.tick_s.to_string();
    meta["tunnels"] = trace.tunnel_ids;
    detail::write_file(out_dir / "trace.json", meta.dump(2) + '\n');
    emit_summaries(trace, out_dir);
}

// Rebuilds a trace from an emitted report directory. The meter is taken from
// the per-tick allocated series; the settled final state is not recoverable.
inline RunTrace load_trace(const std::filesystem::path& dir) {
    RunTrace trace;
    const auto meta = nlohmann::json::parse(detail::read_file(dir / "trace.json"));
    const auto mode = meta.at("mode").get<std::string>();
    if (mode != "vertical" && mode != "horizontal") throw ValidationError("mode", "unknown mode '" + mode + "'");
    trace.mode = mode == "vertical" ? Mode::Vertical : Mode::Horizontal;
    trace.seed = meta.at("seed").get<std::uint64_t>();
    trace.duration_s = Rational::parse(meta.at("duration_s").get<std::string>());
    trace.tick_s = Rational::parse(meta.at("tick_s").get<std::string>());
    trace.tunnel_ids = meta.at("tunnels").get<std::vector<std::string>>();

    const std::string csv = detail::read_file(dir / "metrics.csv");
    std::istringstream lines(csv);
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(lines, line)) {
        if (lineno++ == 0) continue;
        if (line.empty()) continue;
        const auto cols = detail::split(line, ',');
        if (cols.size() != 3) throw Error((dir / "metrics.csv").string() + ":" + std::to_string(lineno) + ": expected 3 columns");
        trace.metrics.push_back(MetricSample{Rational::parse(cols[0]), cols[1], Rational::parse(cols[2])});
    }

    const std::string jsonl = detail::read_file(dir / "events.jsonl");
    std::istringstream evlines(jsonl);
    lineno = 0;
    while (std::getline(evlines, line)) {
        ++lineno;
        if (line.empty()) continue;
        try {
            trace.events.push_back(event_from_json(nlohmann::json::parse(line)));
        } catch (const std::exception& e) {
            throw Error((dir / "events.jsonl").string() + ":" + std::to_string(lineno) + ": " + e.what());
        }
    }

    for (const auto& ev : trace.events) {
        switch (ev.kind) {
            case EventKind::ReplicaChange: {
                const auto pulls = detail::split(ev.at("pull_s"), ',');
                const auto runs = detail::split(ev.at("run_s"), ',');
                for (std::size_t i = 0; i < pulls.size() && i < runs.size(); ++i)
                    trace.pod_startups.push_back(PodStartup{ev.time_s, Rational::parse(pulls[i]), Rational::parse(runs[i])});
                break;
            }
            case EventKind::CircuitUpgradeRequested:
                trace.provisioning_delays.push_back(Rational::parse(ev.at("effective_at_s")) - ev.time_s);
                break;
            case EventKind::RouteChangeRequested: {
                const Seconds d = Rational::parse(ev.at("effective_at_s")) - ev.time_s;
                if (d > 0) trace.route_delays.push_back(d);
                break;
            }
            case EventKind::RegistryPublish: {
                EndpointRecord rec;
                rec.name = ev.at("name");
                if (auto ip = Ipv4::parse(ev.at("ip"))) rec.ip = *ip;
                rec.port = static_cast<std::uint16_t>(std::stoul(ev.at("port")));
                rec.revision = std::stoull(ev.at("revision"));
                for (const auto& [k, v] : ev.payload)
                    if (k.starts_with("metadata.")) rec.metadata[k.substr(9)] = v;
                trace.change_log.push_back(ChangeLogEntry{rec.revision, ev.time_s, rec});
                break;
            }
            default: break;
        }
    }
    trace.meter_mbps_seconds = meter_oracle(trace);
    return trace;
}

// Per-seed report directories plus pooled CDFs and a sweep summary.
inline nlohmann::ordered_json emit_sweep(const std::vector<RunTrace>& traces, const std::filesystem::path& out_dir) {
    std::error_code ec;
    std::filesystem::create_directories(out_dir, ec);
    if (ec) throw Error("cannot create directory '" + out_dir.string() + "': " + ec.message());

    std::vector<Seconds> pulls;
    std::vector<Seconds> runs;
    std::vector<Seconds> provisioning;
    std::vector<Seconds> routes;
    std::vector<Seconds> switchover;
    nlohmann::ordered_json per_seed = nlohmann::ordered_json::array();
    std::size_t violations = 0;
    for (const auto& trace : traces) {
        emit_report(trace, out_dir / ("seed-" + std::to_string(trace.seed)));
        auto s = summarize(trace);
        for (const auto& [k, v] : s["checks"].items()) violations += v.get<std::size_t>();
        per_seed.push_back(std::move(s));
        for (const auto& p : trace.pod_startups) {
            pulls.push_back(p.pull_s);
            runs.push_back(p.run_s);
        }
        provisioning.insert(provisioning.end(), trace.provisioning_delays.begin(), trace.provisioning_delays.end());
        routes.insert(routes.end(), trace.route_delays.begin(), trace.route_delays.end());
        if (trace.mode == Mode::Horizontal) {
            const auto d = measure_switchover(trace).delays;
            switchover.insert(switchover.end(), d.begin(), d.end());
        }
    }
    detail::write_file(out_dir / "cdf_pull.csv", detail::cdf_csv(pulls));
    detail::write_file(out_dir / "cdf_run.csv", detail::cdf_csv(runs));
    detail::write_file(out_dir / "cdf_provisioning.csv", detail::cdf_csv(provisioning));
    detail::write_file(out_dir / "cdf_route_apply.csv", detail::cdf_csv(routes));
    if (!switchover.empty()) detail::write_file(out_dir / "cdf_switchover.csv", detail::cdf_csv(switchover));

    const auto& stats = delay_stats;
    nlohmann::ordered_json j;
    j["seeds"] = traces.size();
    j["total_check_violations"] = violations;
    j["pooled"] = {{"pull", stats(pulls)},
                   {"run", stats(runs)},
                   {"provisioning", stats(provisioning)},
                   {"route_apply", stats(routes)},
                   {"switchover", stats(switchover)}};
    j["runs"] = per_seed;
    detail::write_file(out_dir / "sweep_summary.json", j.dump(2) + '\n');
    return j;
}

}  // namespace wanscale
