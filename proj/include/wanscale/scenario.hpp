// Scenario configuration: the full description of one simulated run, its
// JSON document form, and the two stock scenarios.
#pragma once

#include "wanscale/cloudsim.hpp"
#include "wanscale/domain.hpp"
#include "wanscale/latency.hpp"
#include "wanscale/policy.hpp"
#include "wanscale/underlay.hpp"

#include <nlohmann/json.hpp>

#include <fstream>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

namespace wanscale {

enum class Mode { Vertical, Horizontal };

inline std::string_view to_string(Mode m) { return m == Mode::Vertical ? "vertical" : "horizontal"; }

struct ApplicationSpec {
    std::string name = "echo-server";
    std::string ip = "10.0.0.7";
    std::uint16_t port = 8080;
    Annotations annotations;
    friend bool operator==(const ApplicationSpec&, const ApplicationSpec&) = default;
};

struct CircuitSpec {
    std::string loc_a = "WDC";
    std::string loc_b = "SEA";
    friend bool operator==(const CircuitSpec&, const CircuitSpec&) = default;
};

struct TunnelSpec {
    std::string id;
    std::optional<Mbps> capacity_mbps;  // nullopt: unlimited
    std::string description;
    bool rides_circuit = false;
    friend bool operator==(const TunnelSpec&, const TunnelSpec&) = default;
};

struct LatencyModels {
    LatencyModel pull = HpaConfig{}.pull_latency_model;
    LatencyModel run = HpaConfig{}.run_latency_model;
    LatencyModel provisioning = UnderlayConfig{}.provisioning_delay_model;
    LatencyModel route_apply = UnderlayConfig{}.route_apply_delay_model;
    friend bool operator==(const LatencyModels&, const LatencyModels&) = default;
};

// Alternating traffic-profile annotation changes (horizontal mode).
struct FlipSchedule {
    Seconds start_s{62};
    Seconds interval_s{60};
    std::vector<std::string> profiles{"standard", "video"};
    friend bool operator==(const FlipSchedule&, const FlipSchedule&) = default;

    [[nodiscard]] Seconds time_of(std::int64_t i) const { return start_s + interval_s * Rational{i}; }
    [[nodiscard]] const std::string& profile_of(std::int64_t i) const {
        return profiles[static_cast<std::size_t>(i) % profiles.size()];
    }
};

struct ScenarioConfig {
    Mode mode = Mode::Vertical;
    Seconds duration_s{900};
    Seconds tick_s{1};
    std::uint64_t seed = 42;
    ApplicationSpec application;
    LoadSchedule load_schedule;
    HpaConfig hpa;
    VerticalPolicyConfig vertical_policy;
    std::optional<CircuitSpec> circuit;
    ProfileMap profile_map;
    std::vector<TunnelSpec> tunnels;
    LatencyModels latency_models;
    Seconds poll_interval_s{5};
    Mbps per_conn_bw_mbps{3, 100};
    std::optional<FlipSchedule> annotation_flips;
    std::int64_t repetitions = 0;

    friend bool operator==(const ScenarioConfig&, const ScenarioConfig&) = default;

    // HPA settings with the scenario's pod latency models folded in.
    [[nodiscard]] HpaConfig effective_hpa() const {
        HpaConfig h = hpa;
        h.pull_latency_model = latency_models.pull;
        h.run_latency_model = latency_models.run;
        return h;
    }

    void validate() const {
        if (duration_s <= 0) throw ValidationError("duration_s", "must be positive");
        if (tick_s <= 0) throw ValidationError("tick_s", "must be positive");
        if (!(duration_s / tick_s).is_integer()) throw ValidationError("duration_s", "must be a multiple of tick_s");
        if (poll_interval_s <= 0) throw ValidationError("poll_interval_s", "must be positive");
        if (per_conn_bw_mbps <= 0) throw ValidationError("per_conn_bw_mbps", "must be positive");
        if (application.name.empty()) throw ValidationError("application.name", "must not be empty");
        if (!Ipv4::parse(application.ip)) throw ValidationError("application.ip", "must be a dotted-quad IPv4 address");
        hpa.validate();
        vertical_policy.validate();

        std::set<std::string> tunnel_ids;
        for (std::size_t i = 0; i < tunnels.size(); ++i) {
            const auto& t = tunnels[i];
            const std::string at = "tunnels[" + std::to_string(i) + "]";
            if (t.id.empty()) throw ValidationError(at + ".id", "must not be empty");
            if (!tunnel_ids.insert(t.id).second) throw ValidationError(at + ".id", "duplicate tunnel id '" + t.id + "'");
            if (t.capacity_mbps && *t.capacity_mbps <= 0) throw ValidationError(at + ".capacity_mbps", "must be positive");
            if (t.rides_circuit && !circuit) throw ValidationError(at + ".rides_circuit", "scenario defines no circuit");
        }
        if (tunnels.empty()) throw ValidationError("tunnels", "at least one tunnel is required");
        if (!tunnel_ids.contains(profile_map.default_tunnel))
            throw ValidationError("profile_map.default_tunnel", "references undefined tunnel '" + profile_map.default_tunnel + "'");
        for (const auto& [profile, tunnel] : profile_map.entries)
            if (!tunnel_ids.contains(tunnel))
                throw ValidationError("profile_map.entries." + profile, "references undefined tunnel '" + tunnel + "'");

        if (mode == Mode::Vertical && !circuit) throw ValidationError("circuit", "vertical mode requires a circuit");
        if (mode == Mode::Horizontal) {
            if (!annotation_flips) throw ValidationError("annotation_flips", "horizontal mode requires a flip schedule");
            if (repetitions < 0) throw ValidationError("repetitions", "must be >= 0");
        }
        if (annotation_flips) {
            if (annotation_flips->profiles.empty()) throw ValidationError("annotation_flips.profiles", "must not be empty");
            if (annotation_flips->interval_s <= 0) throw ValidationError("annotation_flips.interval_s", "must be positive");
            if (annotation_flips->start_s < 0) throw ValidationError("annotation_flips.start_s", "must be >= 0");
            if (repetitions > 0 && annotation_flips->time_of(repetitions - 1) >= duration_s)
                throw ValidationError("repetitions", "last annotation flip falls outside duration_s");
        }
    }

    static ScenarioConfig default_vertical() {
        ScenarioConfig c;
        c.mode = Mode::Vertical;
        c.duration_s = Seconds{900};
        auto steps = LoadSchedule::published_ramp().steps();
        steps.push_back({Seconds{270}, 700});  // load falls back, one scale-down cycle
        c.load_schedule = LoadSchedule(steps);
        c.circuit = CircuitSpec{};
        c.tunnels = {TunnelSpec{"wan", std::nullopt, "segment-routed WAN path on the virtual circuit", true}};
        c.profile_map = ProfileMap{{}, "wan"};
        return c;
    }

    static ScenarioConfig default_horizontal() {
        ScenarioConfig c;
        c.mode = Mode::Horizontal;
        c.application = ApplicationSpec{"video-stream", "10.0.0.9", 5004, {{std::string(kTrafficProfileKey), "video"}}};
        c.load_schedule = LoadSchedule({{Seconds{0}, 1}});
        c.per_conn_bw_mbps = Mbps{5, 2};
        c.circuit.reset();
        c.tunnels = {TunnelSpec{"tunnel-3m", Mbps{3}, "rate-limited path over the public Internet", false},
                     TunnelSpec{"tunnel-1g", Mbps{1000}, "1 Gbps SD-WAN tunnel", false}};
        c.profile_map = ProfileMap{{{"video", "tunnel-1g"}, {"standard", "tunnel-3m"}}, "tunnel-3m"};
        c.annotation_flips = FlipSchedule{};
        c.repetitions = 200;
        c.duration_s = c.annotation_flips->time_of(c.repetitions - 1) + Seconds{58};
        return c;
    }
};

// ---------------------------------------------------------------------------
// JSON document form. Unknown keys are rejected at every level.

namespace detail {

class ObjectReader {
public:
    ObjectReader(const nlohmann::json& obj, std::string path) : obj_(obj), path_(std::move(path)) {
        if (!obj_.is_object()) throw ValidationError(path_, "must be an object");
    }

    [[nodiscard]] std::string child(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }

    const nlohmann::json* find(const std::string& key) {
        seen_.insert(key);
        auto it = obj_.find(key);
        return it == obj_.end() ? nullptr : &*it;
    }

    const nlohmann::json& require(const std::string& key) {
        const auto* v = find(key);
        if (!v) throw ValidationError(child(key), "missing field");
        return *v;
    }

    void finish() const {
        for (const auto& [key, value] : obj_.items())
            if (!seen_.contains(key)) throw ValidationError(child(key), "unknown field");
    }

private:
    const nlohmann::json& obj_;
    std::string path_;
    std::set<std::string> seen_;
};

inline Rational to_rational(const nlohmann::json& v, const std::string& path) {
    try {
        if (v.is_number_integer()) return Rational{v.get<std::int64_t>()};
        if (v.is_number_float()) return Rational::from_double(v.get<double>());
        if (v.is_string()) return Rational::parse(v.get<std::string>());
    } catch (const std::exception& e) {
        throw ValidationError(path, e.what());
    }
    throw ValidationError(path, "must be a number or a rational string like \"4/3\"");
}

inline std::int64_t to_int(const nlohmann::json& v, const std::string& path) {
    if (!v.is_number_integer()) throw ValidationError(path, "must be an integer");
    return v.get<std::int64_t>();
}

inline std::string to_str(const nlohmann::json& v, const std::string& path) {
    if (!v.is_string()) throw ValidationError(path, "must be a string");
    return v.get<std::string>();
}

inline Annotations to_string_map(const nlohmann::json& v, const std::string& path) {
    if (!v.is_object()) throw ValidationError(path, "must be an object");
    Annotations out;
    for (const auto& [k, val] : v.items()) out[k] = to_str(val, path + "." + k);
    return out;
}

// Integral values serialize as JSON integers; everything else as an exact
// string ("0.03", "4/3") so the document round-trips without rounding.
inline nlohmann::json from_rational(const Rational& r) {
    if (r.is_integer()) return r.num();
    const std::string decimal = r.to_string();
    if (Rational::parse(decimal) == r) return decimal;
    return std::to_string(r.num()) + "/" + std::to_string(r.den());
}

inline LatencyModel parse_latency(const nlohmann::json& v, const std::string& path) {
    ObjectReader r(v, path);
    const std::string type = to_str(r.require("type"), r.child("type"));
    std::optional<Truncation> trunc;
    if (const auto* t = r.find("truncation")) {
        if (!t->is_array() || t->size() != 2) throw ValidationError(r.child("truncation"), "must be [lo, hi]");
        trunc = Truncation{to_rational((*t)[0], r.child("truncation[0]")), to_rational((*t)[1], r.child("truncation[1]"))};
    }
    LatencyModel model;
    try {
        if (type == "constant") {
            model = LatencyModel(ConstantDelay{to_rational(r.require("value"), r.child("value"))}, trunc);
        } else if (type == "uniform") {
            model = LatencyModel(UniformDelay{to_rational(r.require("lo"), r.child("lo")), to_rational(r.require("hi"), r.child("hi"))}, trunc);
        } else if (type == "lognormal") {
            model = LatencyModel(LogNormalDelay{to_rational(r.require("median"), r.child("median")),
                                                to_rational(r.require("sigma"), r.child("sigma"))},
                                 trunc);
        } else {
            throw ValidationError(r.child("type"), "must be one of constant, uniform, lognormal");
        }
    } catch (const ValidationError& e) {
        if (e.field().starts_with(path)) throw;
        throw ValidationError(path, e.what());
    }
    r.finish();
    return model;
}

inline nlohmann::json latency_to_json(const LatencyModel& m) {
    nlohmann::json j;
    std::visit(
        [&j](const auto& d) {
            using T = std::decay_t<decltype(d)>;
            if constexpr (std::is_same_v<T, ConstantDelay>) {
                j["type"] = "constant";
                j["value"] = from_rational(d.value);
            } else if constexpr (std::is_same_v<T, UniformDelay>) {
                j["type"] = "uniform";
                j["lo"] = from_rational(d.lo);
                j["hi"] = from_rational(d.hi);
            } else {
                j["type"] = "lognormal";
                j["median"] = from_rational(d.median);
                j["sigma"] = from_rational(d.sigma);
            }
        },
        m.distribution());
    if (m.truncation()) j["truncation"] = {from_rational(m.truncation()->lo), from_rational(m.truncation()->hi)};
    return j;
}

inline BandwidthLadder parse_ladder(const nlohmann::json& v, const std::string& path) {
    ObjectReader r(v, path);
    BandwidthLadder ladder;
    try {
        if (const auto* rungs = r.find("rungs")) {
            if (!rungs->is_array()) throw ValidationError(r.child("rungs"), "must be an array");
            std::vector<Mbps> values;
            for (std::size_t i = 0; i < rungs->size(); ++i)
                values.push_back(to_rational((*rungs)[i], r.child("rungs[" + std::to_string(i) + "]")));
            ladder = BandwidthLadder::explicit_rungs(std::move(values));
        } else {
            ladder = BandwidthLadder(to_rational(r.require("baseline_mbps"), r.child("baseline_mbps")),
                                     r.find("factor") ? to_rational(*r.find("factor"), r.child("factor")) : Rational{2},
                                     to_rational(r.require("max_mbps"), r.child("max_mbps")));
        }
    } catch (const ValidationError& e) {
        if (e.field().starts_with(path)) throw;
        throw ValidationError(path, e.what());
    }
    r.finish();
    return ladder;
}

inline nlohmann::json ladder_to_json(const BandwidthLadder& l) {
    if (l.is_explicit()) {
        nlohmann::json rungs = nlohmann::json::array();
        for (const auto& r : l.explicit_list()) rungs.push_back(from_rational(r));
        return {{"rungs", rungs}};
    }
    return {{"baseline_mbps", from_rational(l.baseline())}, {"factor", from_rational(l.factor())}, {"max_mbps", from_rational(l.max())}};
}

}  // namespace detail

inline ScenarioConfig scenario_from_json(const nlohmann::json& doc) {
    using namespace detail;
    ObjectReader r(doc, "");
    ScenarioConfig c;

    const std::string mode = to_str(r.require("mode"), "mode");
    if (mode == "vertical") {
        c = ScenarioConfig::default_vertical();
    } else if (mode == "horizontal") {
        c = ScenarioConfig::default_horizontal();
    } else {
        throw ValidationError("mode", "must be \"vertical\" or \"horizontal\"");
    }

    if (const auto* v = r.find("duration_s")) c.duration_s = to_rational(*v, "duration_s");
    if (const auto* v = r.find("tick_s")) c.tick_s = to_rational(*v, "tick_s");
    if (const auto* v = r.find("seed")) {
        if (!v->is_number_unsigned() && !(v->is_number_integer() && v->get<std::int64_t>() >= 0))
            throw ValidationError("seed", "must be a non-negative integer");
        c.seed = v->get<std::uint64_t>();
    }
    if (const auto* v = r.find("application")) {
        ObjectReader a(*v, "application");
        if (const auto* x = a.find("name")) c.application.name = to_str(*x, "application.name");
        if (const auto* x = a.find("ip")) c.application.ip = to_str(*x, "application.ip");
        if (const auto* x = a.find("port")) {
            const auto port = to_int(*x, "application.port");
            if (port < 0 || port > 65535) throw ValidationError("application.port", "must lie in [0, 65535]");
            c.application.port = static_cast<std::uint16_t>(port);
        }
        if (const auto* x = a.find("annotations")) c.application.annotations = to_string_map(*x, "application.annotations");
        a.finish();
    }
    if (const auto* v = r.find("load_schedule")) {
        if (!v->is_array()) throw ValidationError("load_schedule", "must be an array of [start_s, connections]");
        std::vector<LoadStep> steps;
        for (std::size_t i = 0; i < v->size(); ++i) {
            const std::string at = "load_schedule[" + std::to_string(i) + "]";
            const auto& s = (*v)[i];
            if (!s.is_array() || s.size() != 2) throw ValidationError(at, "must be [start_s, connections]");
            steps.push_back({to_rational(s[0], at + "[0]"), to_int(s[1], at + "[1]")});
        }
        c.load_schedule = LoadSchedule(std::move(steps));
    }
    if (const auto* v = r.find("hpa")) {
        ObjectReader h(*v, "hpa");
        if (const auto* x = h.find("target_pct")) c.hpa.target_pct = to_rational(*x, "hpa.target_pct");
        if (const auto* x = h.find("min_replicas")) c.hpa.min_replicas = to_int(*x, "hpa.min_replicas");
        if (const auto* x = h.find("max_replicas")) c.hpa.max_replicas = to_int(*x, "hpa.max_replicas");
        if (const auto* x = h.find("sync_period_s")) c.hpa.sync_period_s = to_rational(*x, "hpa.sync_period_s");
        if (const auto* x = h.find("tolerance")) c.hpa.tolerance = to_rational(*x, "hpa.tolerance");
        if (const auto* x = h.find("downscale_stabilization_s"))
            c.hpa.downscale_stabilization_s = to_rational(*x, "hpa.downscale_stabilization_s");
        if (const auto* x = h.find("cpu_per_conn_pct")) c.hpa.cpu_per_conn_pct = to_rational(*x, "hpa.cpu_per_conn_pct");
        h.finish();
    }
    if (const auto* v = r.find("vertical_policy")) {
        ObjectReader p(*v, "vertical_policy");
        if (const auto* x = p.find("ladder")) c.vertical_policy.ladder = parse_ladder(*x, "vertical_policy.ladder");
        if (const auto* x = p.find("per_replica_bw_mbps"))
            c.vertical_policy.per_replica_bw_mbps = to_rational(*x, "vertical_policy.per_replica_bw_mbps");
        if (const auto* x = p.find("downscale_hold_s"))
            c.vertical_policy.downscale_hold_s = to_rational(*x, "vertical_policy.downscale_hold_s");
        p.finish();
    }
    if (const auto* v = r.find("circuit")) {
        if (v->is_null()) {
            c.circuit.reset();
        } else {
            ObjectReader cr(*v, "circuit");
            CircuitSpec spec;
            if (const auto* x = cr.find("loc_a")) spec.loc_a = to_str(*x, "circuit.loc_a");
            if (const auto* x = cr.find("loc_b")) spec.loc_b = to_str(*x, "circuit.loc_b");
            cr.finish();
            c.circuit = spec;
        }
    }
    if (const auto* v = r.find("profile_map")) {
        ObjectReader p(*v, "profile_map");
        ProfileMap map;
        if (const auto* x = p.find("entries")) map.entries = to_string_map(*x, "profile_map.entries");
        map.default_tunnel = to_str(p.require("default_tunnel"), "profile_map.default_tunnel");
        p.finish();
        c.profile_map = std::move(map);
    }
    if (const auto* v = r.find("tunnels")) {
        if (!v->is_array()) throw ValidationError("tunnels", "must be an array");
        c.tunnels.clear();
        for (std::size_t i = 0; i < v->size(); ++i) {
            const std::string at = "tunnels[" + std::to_string(i) + "]";
            ObjectReader t((*v)[i], at);
            TunnelSpec spec;
            spec.id = to_str(t.require("id"), at + ".id");
            const auto& cap = t.require("capacity_mbps");
            if (!(cap.is_string() && cap.get<std::string>() == "unlimited")) spec.capacity_mbps = to_rational(cap, at + ".capacity_mbps");
            if (const auto* x = t.find("description")) spec.description = to_str(*x, at + ".description");
            if (const auto* x = t.find("rides_circuit")) {
                if (!x->is_boolean()) throw ValidationError(at + ".rides_circuit", "must be a boolean");
                spec.rides_circuit = x->get<bool>();
            }
            t.finish();
            c.tunnels.push_back(std::move(spec));
        }
    }
    if (const auto* v = r.find("latency_models")) {
        ObjectReader l(*v, "latency_models");
        if (const auto* x = l.find("pull")) c.latency_models.pull = parse_latency(*x, "latency_models.pull");
        if (const auto* x = l.find("run")) c.latency_models.run = parse_latency(*x, "latency_models.run");
        if (const auto* x = l.find("provisioning")) c.latency_models.provisioning = parse_latency(*x, "latency_models.provisioning");
        if (const auto* x = l.find("route_apply")) c.latency_models.route_apply = parse_latency(*x, "latency_models.route_apply");
        l.finish();
    }
    if (const auto* v = r.find("poll_interval_s")) c.poll_interval_s = to_rational(*v, "poll_interval_s");
    if (const auto* v = r.find("per_conn_bw_mbps")) c.per_conn_bw_mbps = to_rational(*v, "per_conn_bw_mbps");
    if (const auto* v = r.find("annotation_flips")) {
        if (v->is_null()) {
            c.annotation_flips.reset();
        } else {
            ObjectReader f(*v, "annotation_flips");
            FlipSchedule flips;
            if (const auto* x = f.find("start_s")) flips.start_s = to_rational(*x, "annotation_flips.start_s");
            if (const auto* x = f.find("interval_s")) flips.interval_s = to_rational(*x, "annotation_flips.interval_s");
            if (const auto* x = f.find("profiles")) {
                if (!x->is_array()) throw ValidationError("annotation_flips.profiles", "must be an array of strings");
                flips.profiles.clear();
                for (std::size_t i = 0; i < x->size(); ++i)
                    flips.profiles.push_back(to_str((*x)[i], "annotation_flips.profiles[" + std::to_string(i) + "]"));
            }
            f.finish();
            c.annotation_flips = std::move(flips);
        }
    }
    if (const auto* v = r.find("repetitions")) c.repetitions = to_int(*v, "repetitions");
    r.finish();

    try {
        c.validate();
    } catch (const ValidationError&) {
        throw;
    } catch (const std::exception& e) {
        throw ValidationError("", e.what());
    }
    return c;
}

inline ScenarioConfig load_scenario(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ValidationError("", "cannot open scenario file '" + path + "'");
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(in);
    } catch (const nlohmann::json::parse_error& e) {
        throw ValidationError("", "'" + path + "' is not valid JSON: " + e.what());
    }
    return scenario_from_json(doc);
}

inline nlohmann::json scenario_to_json(const ScenarioConfig& c) {
    using namespace detail;
    nlohmann::json j;
    j["mode"] = std::string(to_string(c.mode));
    j["duration_s"] = from_rational(c.duration_s);
    j["tick_s"] = from_rational(c.tick_s);
    j["seed"] = c.seed;
    j["application"] = {{"name", c.application.name},
                        {"ip", c.application.ip},
                        {"port", c.application.port},
                        {"annotations", c.application.annotations}};
    nlohmann::json steps = nlohmann::json::array();
    for (const auto& s : c.load_schedule.steps()) steps.push_back({from_rational(s.start_s), s.connections});
    j["load_schedule"] = steps;
    j["hpa"] = {{"target_pct", from_rational(c.hpa.target_pct)},
                {"min_replicas", c.hpa.min_replicas},
                {"max_replicas", c.hpa.max_replicas},
                {"sync_period_s", from_rational(c.hpa.sync_period_s)},
                {"tolerance", from_rational(c.hpa.tolerance)},
                {"downscale_stabilization_s", from_rational(c.hpa.downscale_stabilization_s)},
                {"cpu_per_conn_pct", from_rational(c.hpa.cpu_per_conn_pct)}};
    j["vertical_policy"] = {{"ladder", ladder_to_json(c.vertical_policy.ladder)},
                            {"per_replica_bw_mbps", from_rational(c.vertical_policy.per_replica_bw_mbps)},
                            {"downscale_hold_s", from_rational(c.vertical_policy.downscale_hold_s)}};
    j["circuit"] = c.circuit ? nlohmann::json{{"loc_a", c.circuit->loc_a}, {"loc_b", c.circuit->loc_b}} : nlohmann::json(nullptr);
    j["profile_map"] = {{"entries", c.profile_map.entries}, {"default_tunnel", c.profile_map.default_tunnel}};
    nlohmann::json tunnels = nlohmann::json::array();
    for (const auto& t : c.tunnels) {
        tunnels.push_back({{"id", t.id},
                           {"capacity_mbps", t.capacity_mbps ? from_rational(*t.capacity_mbps) : nlohmann::json("unlimited")},
                           {"description", t.description},
                           {"rides_circuit", t.rides_circuit}});
    }
    j["tunnels"] = tunnels;
    j["latency_models"] = {{"pull", latency_to_json(c.latency_models.pull)},
                           {"run", latency_to_json(c.latency_models.run)},
                           {"provisioning", latency_to_json(c.latency_models.provisioning)},
                           {"route_apply", latency_to_json(c.latency_models.route_apply)}};
    j["poll_interval_s"] = from_rational(c.poll_interval_s);
    j["per_conn_bw_mbps"] = from_rational(c.per_conn_bw_mbps);
    if (c.annotation_flips) {
        j["annotation_flips"] = {{"start_s", from_rational(c.annotation_flips->start_s)},
                                 {"interval_s", from_rational(c.annotation_flips->interval_s)},
                                 {"profiles", c.annotation_flips->profiles}};
    } else {
        j["annotation_flips"] = nullptr;
    }
    j["repetitions"] = c.repetitions;
    return j;
}

}  // namespace wanscale
