// Cloud side of the model: the stepped connection load, the per-replica CPU
// model and a Horizontal Pod Autoscaler control loop with pod start-up
// latency sampling.
#pragma once

#include "wanscale/domain.hpp"
#include "wanscale/latency.hpp"

#include <algorithm>
#include <deque>
#include <optional>
#include <utility>
#include <vector>

namespace wanscale {

struct LoadStep {
    Seconds start_s;
    std::int64_t connections = 0;
    friend bool operator==(const LoadStep&, const LoadStep&) = default;
};

class LoadSchedule {
public:
    LoadSchedule() : steps_{{Seconds{0}, 0}} {}
    explicit LoadSchedule(std::vector<LoadStep> steps) : steps_(std::move(steps)) {
        if (steps_.empty()) throw ValidationError("load_schedule", "must contain at least one step");
        if (steps_.front().start_s != 0) throw ValidationError("load_schedule[0]", "first step must start at time 0");
        for (std::size_t i = 0; i < steps_.size(); ++i) {
            if (steps_[i].connections < 0)
                throw ValidationError("load_schedule[" + std::to_string(i) + "]", "connections must be >= 0");
            if (i > 0 && steps_[i].start_s <= steps_[i - 1].start_s)
                throw ValidationError("load_schedule[" + std::to_string(i) + "]", "start times must be strictly increasing");
        }
    }

    // The 700 -> 4500 connection ramp of the vertical experiment.
    static LoadSchedule published_ramp() {
        return LoadSchedule({{Seconds{0}, 700}, {Seconds{30}, 1900}, {Seconds{90}, 2900}, {Seconds{150}, 3500}, {Seconds{210}, 4500}});
    }

    [[nodiscard]] const std::vector<LoadStep>& steps() const noexcept { return steps_; }

    friend bool operator==(const LoadSchedule&, const LoadSchedule&) = default;

private:
    std::vector<LoadStep> steps_;
};

// Connections of the latest step whose start time is <= t.
inline std::int64_t load_at(const LoadSchedule& schedule, const Seconds& t) {
    const auto& steps = schedule.steps();
    auto it = std::upper_bound(steps.begin(), steps.end(), t,
                               [](const Seconds& time, const LoadStep& step) { return time < step.start_s; });
    if (it == steps.begin()) return steps.front().connections;
    return std::prev(it)->connections;
}

// Average CPU utilization (percent) across replicas: linear in load, capped at 100.
inline Rational cpu_utilization(std::int64_t connections, std::int64_t replicas, const Rational& cpu_per_conn_pct) {
    if (replicas <= 0) throw std::invalid_argument("cpu_utilization: replicas must be >= 1");
    return min(Rational{100}, Rational{connections} * cpu_per_conn_pct / Rational{replicas});
}

// CPU usage relative to the per-pod request, as the autoscaler sees it. Not
// capped: a saturated pod reports more than 100% of its request.
inline Rational cpu_request_utilization(std::int64_t connections, std::int64_t replicas, const Rational& cpu_per_conn_pct) {
    if (replicas <= 0) throw std::invalid_argument("cpu_request_utilization: replicas must be >= 1");
    return Rational{connections} * cpu_per_conn_pct / Rational{replicas};
}

struct HpaConfig {
    Rational target_pct{40};
    std::int64_t min_replicas = 1;
    std::int64_t max_replicas = 150;
    Seconds sync_period_s{15};
    Rational tolerance{1, 10};
    Seconds downscale_stabilization_s{60};
    Rational cpu_per_conn_pct{4, 3};
    LatencyModel pull_latency_model = LatencyModel::lognormal(Seconds{2}, Rational{1, 2}, Truncation{Seconds{1, 2}, Seconds{10}});
    // Extra time from "image pulled" to "running"; run delay = pull + this.
    LatencyModel run_latency_model = LatencyModel::lognormal(Seconds{3, 2}, Rational{2, 5}, Truncation{Seconds{1, 2}, Seconds{8}});

    void validate() const {
        if (target_pct <= 0 || target_pct > 100) throw ValidationError("hpa.target_pct", "must lie in (0, 100]");
        if (min_replicas < 1) throw ValidationError("hpa.min_replicas", "must be >= 1");
        if (max_replicas < min_replicas) throw ValidationError("hpa.max_replicas", "must be >= min_replicas");
        if (sync_period_s <= 0) throw ValidationError("hpa.sync_period_s", "must be positive");
        if (tolerance < 0 || tolerance >= 1) throw ValidationError("hpa.tolerance", "must lie in [0, 1)");
        if (downscale_stabilization_s < 0) throw ValidationError("hpa.downscale_stabilization_s", "must be >= 0");
        if (cpu_per_conn_pct <= 0) throw ValidationError("hpa.cpu_per_conn_pct", "must be positive");
    }

    friend bool operator==(const HpaConfig&, const HpaConfig&) = default;
};

// Ceiling-ratio rule with a tolerance band, clamped to [min, max].
inline std::int64_t hpa_desired(std::int64_t current_replicas, const Rational& current_util_pct, const HpaConfig& cfg) {
    if (current_replicas < 1) throw std::invalid_argument("hpa_desired: current_replicas must be >= 1");
    const Rational ratio = current_util_pct / cfg.target_pct;
    if ((ratio - Rational{1}).abs() <= cfg.tolerance) return current_replicas;
    const std::int64_t raw = (Rational{current_replicas} * ratio).ceil();
    return std::clamp(raw, cfg.min_replicas, cfg.max_replicas);
}

struct PodStartup {
    Seconds requested_at;
    Seconds pull_s;
    Seconds run_s;  // includes pull_s
    [[nodiscard]] Seconds ready_at() const { return requested_at + run_s; }
};

struct HpaSyncResult {
    std::int64_t new_replicas = 0;
    std::optional<SimEvent> replica_change;
    std::vector<PodStartup> started;
};

// Stateful HPA loop for one application. Holds the scale-down recommendation
// history and the readiness times of running pods.
class HorizontalPodAutoscaler {
public:
    explicit HorizontalPodAutoscaler(HpaConfig cfg) : cfg_(std::move(cfg)) { cfg_.validate(); }

    [[nodiscard]] const HpaConfig& config() const noexcept { return cfg_; }

    // Pods that exist before the run starts are ready immediately.
    void adopt_existing(std::int64_t replicas, const Seconds& t) {
        pods_.assign(static_cast<std::size_t>(replicas), t);
    }

    HpaSyncResult sync(Application& app, std::int64_t connections, const Seconds& t, Rng& rng) {
        if (static_cast<std::int64_t>(pods_.size()) != app.replicas) adopt_existing(app.replicas, t);
        HpaSyncResult result;
        const Rational util = cpu_request_utilization(connections, app.replicas, cfg_.cpu_per_conn_pct);
        const std::int64_t proposal = hpa_desired(app.replicas, util, cfg_);

        // Scale-down stabilization: act on the highest recommendation seen
        // within the window.
        history_.emplace_back(t, proposal);
        while (!history_.empty() && history_.front().first < t - cfg_.downscale_stabilization_s) history_.pop_front();
        std::int64_t desired = proposal;
        if (proposal < app.replicas) {
            for (const auto& [when, rec] : history_) desired = std::max(desired, rec);
            desired = std::min(desired, app.replicas);
        }

        result.new_replicas = desired;
        if (desired == app.replicas) return result;

        const std::int64_t previous = app.replicas;
        if (desired > previous) {
            for (std::int64_t i = previous; i < desired; ++i) {
                const Seconds pull = cfg_.pull_latency_model.sample(rng);
                const Seconds run = pull + cfg_.run_latency_model.sample(rng);
                result.started.push_back(PodStartup{t, pull, run});
                pods_.push_back(t + run);
            }
        } else {
            // Remove the most recently started pods first.
            std::sort(pods_.begin(), pods_.end());
            pods_.resize(static_cast<std::size_t>(desired));
        }
        app.replicas = desired;

        std::string pulls;
        std::string runs;
        for (const auto& pod : result.started) {
            if (!pulls.empty()) {
                pulls += ',';
                runs += ',';
            }
            pulls += pod.pull_s.to_string();
            runs += pod.run_s.to_string();
        }
        SimEvent ev;
        ev.time_s = t;
        ev.kind = EventKind::ReplicaChange;
        ev.payload = {{"app", app.name},
                      {"from", std::to_string(previous)},
                      {"replicas", std::to_string(desired)},
                      {"utilization_pct", util.to_string()},
                      {"pull_s", pulls},
                      {"run_s", runs}};
        result.replica_change = std::move(ev);
        return result;
    }

    // Pods whose run delay has elapsed by time t.
    [[nodiscard]] std::int64_t ready_replicas(const Seconds& t) const {
        return static_cast<std::int64_t>(std::count_if(pods_.begin(), pods_.end(), [&](const Seconds& r) { return r <= t; }));
    }

private:
    HpaConfig cfg_;
    std::deque<std::pair<Seconds, std::int64_t>> history_;
    std::vector<Seconds> pods_;  // ready-at time per pod
};

}  // namespace wanscale
