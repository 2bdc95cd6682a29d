#include "wanscale/analysis.hpp"
#include "wanscale/report.hpp"
#include "wanscale/simulation.hpp"

#include <gtest/gtest.h>

#include <optional>

using namespace wanscale;

namespace {

std::vector<Rational> values(const std::vector<std::pair<Seconds, Rational>>& series) {
    std::vector<Rational> out;
    for (const auto& [t, v] : series) out.push_back(v);
    return out;
}

}  // namespace

TEST(Simulation, DefaultVerticalTrajectory) {
    const auto trace = run_scenario(ScenarioConfig::default_vertical());
    const auto steps = capacity_steps(trace);
    ASSERT_GE(steps.size(), 4u);
    EXPECT_EQ(std::vector<Mbps>(steps.begin(), steps.begin() + 4), (std::vector<Mbps>{Mbps{50}, Mbps{100}, Mbps{200}, Mbps{400}}));
}

TEST(Simulation, StepTo200FollowsReplicasAbove50) {
    const auto trace = run_scenario(ScenarioConfig::default_vertical());
    const auto allocated = trace.series("allocated_mbps");
    const auto replicas = trace.series("replicas");
    ASSERT_EQ(allocated.size(), replicas.size());
    for (std::size_t i = 0; i < allocated.size(); ++i) {
        if (allocated[i].second == Mbps{200}) {
            EXPECT_GT(replicas[i].second, Rational{50});
            break;
        }
    }
}

TEST(Simulation, SeriesPerTick) {
    const auto cfg = ScenarioConfig::default_vertical();
    const auto trace = run_scenario(cfg);
    const auto ticks = static_cast<std::size_t>((cfg.duration_s / cfg.tick_s).floor());
    for (const char* s : {"throughput_mbps", "allocated_mbps", "replicas", "offered_mbps"}) EXPECT_EQ(trace.series(s).size(), ticks) << s;
}

TEST(Simulation, ZeroLoadStaysAtMinimum) {
    auto cfg = ScenarioConfig::default_vertical();
    cfg.load_schedule = LoadSchedule({{Seconds{0}, 0}});
    cfg.duration_s = Seconds{300};
    const auto trace = run_scenario(cfg);
    for (const auto& v : values(trace.series("replicas"))) EXPECT_EQ(v, Rational{cfg.hpa.min_replicas});
    const auto steps = capacity_steps(trace);
    EXPECT_EQ(steps, (std::vector<Mbps>{Mbps{50}, select_capacity(estimate_demand(cfg.hpa.min_replicas, cfg.vertical_policy.per_replica_bw_mbps), cfg.vertical_policy.ladder)}));
    int upgrades = 0;
    for (const auto& ev : trace.events) upgrades += ev.kind == EventKind::CircuitUpgradeRequested ? 1 : 0;
    EXPECT_EQ(upgrades, 1);
}

TEST(Simulation, Deterministic) {
    const auto cfg = ScenarioConfig::default_vertical();
    const auto a = run_scenario(cfg);
    const auto b = run_scenario(cfg);
    EXPECT_EQ(a.events, b.events);
    EXPECT_EQ(a.metrics, b.metrics);
    EXPECT_EQ(metrics_csv(a), metrics_csv(b));
    EXPECT_EQ(a.final_state, b.final_state);
}

TEST(Simulation, SeedsDiffer) {
    auto cfg = ScenarioConfig::default_vertical();
    const auto a = run_scenario(cfg);
    cfg.seed = 43;
    const auto b = run_scenario(cfg);
    EXPECT_NE(a.events, b.events);
}

TEST(Simulation, EventsInTimeOrderWithIncreasingSeq) {
    const auto trace = run_scenario(ScenarioConfig::default_horizontal());
    for (std::size_t i = 1; i < trace.events.size(); ++i) {
        ASSERT_LE(trace.events[i - 1].time_s, trace.events[i].time_s);
        ASSERT_LT(trace.events[i - 1].seq, trace.events[i].seq);
    }
}

TEST(Simulation, ReplayReproducesFinalState) {
    for (auto cfg : {ScenarioConfig::default_vertical(), ScenarioConfig::default_horizontal()}) {
        for (std::uint64_t seed : {1ULL, 42ULL, 977ULL}) {
            cfg.seed = seed;
            const auto trace = run_scenario(cfg);
            EXPECT_EQ(replay_change_log(cfg, trace.change_log), trace.final_state) << to_string(cfg.mode) << " " << seed;
        }
    }
}

TEST(Simulation, FinalStateSettled) {
    const auto trace = run_scenario(ScenarioConfig::default_vertical());
    ASSERT_EQ(trace.final_state.circuits.size(), 1u);
    EXPECT_EQ(trace.final_state.circuits.begin()->second, Mbps{100});
    EXPECT_EQ(trace.final_state.routes.at("10.0.0.7:8080"), "wan");
}

TEST(Simulation, AdaptorSeesSubsequenceOfPublishedReplicas) {
    const auto trace = run_scenario(ScenarioConfig::default_vertical());
    std::vector<std::string> published;
    std::vector<std::string> delivered;
    for (const auto& ev : trace.events) {
        if (ev.kind == EventKind::RegistryPublish) published.push_back(ev.at("metadata.replicas"));
        if (ev.kind == EventKind::AdaptorDispatch && ev.at("reason") == "event-body") {
            const auto body = parse_event_body(std::string_view(ev.at("body")));
            for (const auto& e : body.events) delivered.push_back(e.metadata.at("replicas"));
        }
    }
    std::size_t j = 0;
    for (const auto& d : delivered) {
        while (j < published.size() && published[j] != d) ++j;
        ASSERT_LT(j, published.size()) << "delivered value " << d << " out of order";
        ++j;
    }
}

TEST(Simulation, EveryActionFollowsADispatch) {
    const auto trace = run_scenario(ScenarioConfig::default_horizontal());
    std::optional<Seconds> last_dispatch;
    for (const auto& ev : trace.events) {
        if (ev.kind == EventKind::AdaptorDispatch) last_dispatch = ev.time_s;
        if (ev.kind == EventKind::CircuitUpgradeRequested || ev.kind == EventKind::RouteChangeRequested) {
            ASSERT_TRUE(last_dispatch);
            EXPECT_EQ(*last_dispatch, ev.time_s);
        }
    }
}

TEST(Simulation, PipelineDelayBoundedByPollInterval) {
    const auto cfg = ScenarioConfig::default_horizontal();
    const auto trace = run_scenario(cfg);
    std::vector<Seconds> flips;
    std::vector<Seconds> requests;
    for (const auto& ev : trace.events) {
        if (ev.kind == EventKind::AnnotationChange) flips.push_back(ev.time_s);
        if (ev.kind == EventKind::RouteChangeRequested && ev.time_s > 0) requests.push_back(ev.time_s);
    }
    ASSERT_EQ(flips.size(), requests.size());
    for (std::size_t i = 0; i < flips.size(); ++i) {
        EXPECT_GE(requests[i], flips[i]);
        EXPECT_LE(requests[i] - flips[i], cfg.poll_interval_s);
    }
}

TEST(Simulation, InvalidConfigRejectedBeforeRun) {
    auto cfg = ScenarioConfig::default_vertical();
    cfg.tick_s = Seconds{0};
    EXPECT_THROW(run_scenario(cfg), ValidationError);
}

TEST(Sweep, MatchesIndividualRunsInSeedOrder) {
    auto cfg = ScenarioConfig::default_vertical();
    cfg.seed = 100;
    const auto traces = run_sweep(cfg, 4, 3);
    ASSERT_EQ(traces.size(), 4u);
    for (std::size_t i = 0; i < traces.size(); ++i) {
        EXPECT_EQ(traces[i].seed, 100 + i);
        auto single = cfg;
        single.seed = 100 + i;
        EXPECT_EQ(traces[i].metrics, run_scenario(single).metrics);
    }
}
