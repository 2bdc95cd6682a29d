#include "wanscale/analysis.hpp"

#include <gtest/gtest.h>

#include <algorithm>

using namespace wanscale;

namespace {

// Horizontal trace with two tunnels sampled every second; `carrier(t)`
// names the tunnel carrying 3 Mbps at tick t.
template <typename F>
RunTrace two_tunnel_trace(std::int64_t duration, F carrier) {
    RunTrace t;
    t.mode = Mode::Horizontal;
    t.duration_s = Seconds{duration};
    t.tick_s = Seconds{1};
    t.tunnel_ids = {"a", "b"};
    for (std::int64_t s = 0; s < duration; ++s) {
        const std::string c = carrier(s);
        for (const auto& id : t.tunnel_ids) t.metrics.push_back({Seconds{s}, tunnel_series(id), c == id ? Mbps{3} : Mbps{0}});
    }
    return t;
}

void add_flip(RunTrace& t, std::int64_t at, const std::string& tunnel) {
    SimEvent ev;
    ev.time_s = Seconds{at};
    ev.seq = t.events.size() + 1;
    ev.kind = EventKind::AnnotationChange;
    ev.payload = {{"tunnel", tunnel}};
    t.events.push_back(ev);
}

}  // namespace

TEST(Cdf, SingleSample) {
    const auto cdf = compute_cdf({Seconds{5}});
    ASSERT_EQ(cdf.size(), 1u);
    EXPECT_EQ(cdf[0], (CdfPoint{Seconds{5}, Rational{1}}));
}

TEST(Cdf, FourSamplesUnsorted) {
    const auto cdf = compute_cdf({Seconds{3}, Seconds{1}, Seconds{4}, Seconds{2}});
    ASSERT_EQ(cdf.size(), 4u);
    for (std::int64_t i = 0; i < 4; ++i) EXPECT_EQ(cdf[static_cast<std::size_t>(i)], (CdfPoint{Seconds{i + 1}, Rational{i + 1, 4}}));
}

TEST(Cdf, EmptyThrows) { EXPECT_THROW(compute_cdf({}), std::invalid_argument); }

TEST(Cdf, MonotoneAndEndsAtOne) {
    std::vector<Seconds> v;
    for (int i = 0; i < 37; ++i) v.push_back(Seconds{(i * 7919) % 53, 10});
    const auto cdf = compute_cdf(v);
    for (std::size_t i = 1; i < cdf.size(); ++i) {
        EXPECT_LE(cdf[i - 1].value, cdf[i].value);
        EXPECT_LT(cdf[i - 1].fraction, cdf[i].fraction);
    }
    EXPECT_EQ(cdf.back().fraction, Rational{1});
}

TEST(Percentile, NearestRank) {
    const std::vector<Seconds> v{Seconds{15}, Seconds{20}, Seconds{35}, Seconds{40}, Seconds{50}};
    EXPECT_EQ(percentile(v, Rational{1, 20}), Seconds{15});
    EXPECT_EQ(percentile(v, Rational{3, 10}), Seconds{20});
    EXPECT_EQ(percentile(v, Rational{2, 5}), Seconds{20});
    EXPECT_EQ(percentile(v, Rational{1, 2}), Seconds{35});
    EXPECT_EQ(percentile(v, Rational{4, 5}), Seconds{40});
    EXPECT_EQ(percentile(v, Rational{1}), Seconds{50});
    EXPECT_EQ(median({Seconds{1}, Seconds{2}, Seconds{3}, Seconds{4}}), Seconds{2});
}

TEST(Percentile, Rejects) {
    EXPECT_THROW(percentile({}, Rational{1, 2}), std::invalid_argument);
    EXPECT_THROW(percentile({Seconds{1}}, Rational{0}), std::invalid_argument);
    EXPECT_THROW(percentile({Seconds{1}}, Rational{3, 2}), std::invalid_argument);
}

TEST(Switchover, DelayIsFirstTickOnNewTunnel) {
    auto t = two_tunnel_trace(300, [](std::int64_t s) { return s < 117 ? "a" : "b"; });
    add_flip(t, 100, "b");
    const auto r = measure_switchover(t);
    ASSERT_EQ(r.flips.size(), 1u);
    ASSERT_EQ(r.delays.size(), 1u);
    EXPECT_EQ(r.delays[0], Seconds{17});
    EXPECT_TRUE(r.warnings.empty());
}

TEST(Switchover, SameTunnelExcluded) {
    auto t = two_tunnel_trace(300, [](std::int64_t) { return "a"; });
    add_flip(t, 100, "a");
    const auto r = measure_switchover(t);
    ASSERT_EQ(r.flips.size(), 1u);
    EXPECT_TRUE(r.flips[0].same_tunnel);
    EXPECT_EQ(r.flips[0].delay, Seconds{0});
    EXPECT_TRUE(r.delays.empty());
}

TEST(Switchover, CensoredWhenTrafficNeverArrives) {
    auto t = two_tunnel_trace(300, [](std::int64_t) { return "a"; });
    add_flip(t, 100, "b");
    const auto r = measure_switchover(t);
    ASSERT_EQ(r.flips.size(), 1u);
    EXPECT_TRUE(r.flips[0].censored);
    EXPECT_TRUE(r.delays.empty());
    ASSERT_EQ(r.warnings.size(), 1u);
    EXPECT_NE(r.warnings[0].find("never reached"), std::string::npos);
}

TEST(Switchover, SearchStopsAtNextFlip) {
    // Flip to b at 100 and back to a at 110 before b ever carries; the first
    // flip is censored, the second is measured against the b flip.
    auto t = two_tunnel_trace(300, [](std::int64_t s) { return s < 120 ? "a" : "b"; });
    add_flip(t, 100, "b");
    add_flip(t, 110, "a");
    const auto r = measure_switchover(t);
    ASSERT_EQ(r.flips.size(), 2u);
    EXPECT_TRUE(r.flips[0].censored);
    EXPECT_FALSE(r.flips[1].same_tunnel);
    EXPECT_EQ(r.flips[1].delay, Seconds{0});
}

TEST(Switchover, ThresholdIsStrict) {
    auto t = two_tunnel_trace(50, [](std::int64_t s) { return s < 20 ? "a" : "b"; });
    add_flip(t, 10, "b");
    EXPECT_EQ(measure_switchover(t, Mbps{3}).delays.size(), 0u);
    EXPECT_EQ(measure_switchover(t, Mbps{2}).delays, std::vector<Seconds>{Seconds{10}});
}

TEST(Checks, ExclusivityAndCap) {
    auto t = two_tunnel_trace(10, [](std::int64_t) { return "a"; });
    EXPECT_TRUE(exclusivity_violations(t).empty());
    EXPECT_TRUE(cap_violations(t, "a", Mbps{3}).empty());
    EXPECT_EQ(cap_violations(t, "a", Mbps{2}).size(), 10u);
    t.metrics.push_back({Seconds{4}, tunnel_series("b"), Mbps{1}});
    EXPECT_EQ(exclusivity_violations(t), std::vector<Seconds>{Seconds{4}});
}

TEST(Checks, ProactivityAndCapacity) {
    RunTrace t;
    t.tick_s = Seconds{1};
    for (std::int64_t s = 0; s < 4; ++s) {
        t.metrics.push_back({Seconds{s}, "offered_mbps", Mbps{s * 40}});
        t.metrics.push_back({Seconds{s}, "throughput_mbps", min(Mbps{s * 40}, Mbps{100})});
        t.metrics.push_back({Seconds{s}, "allocated_mbps", Mbps{100}});
    }
    EXPECT_EQ(proactivity_violations(t), std::vector<Seconds>{Seconds{3}});
    EXPECT_TRUE(capacity_violations(t).empty());
    t.metrics.push_back({Seconds{4}, "throughput_mbps", Mbps{101}});
    t.metrics.push_back({Seconds{4}, "allocated_mbps", Mbps{100}});
    EXPECT_EQ(capacity_violations(t), std::vector<Seconds>{Seconds{4}});
}

TEST(Checks, MeterOracleSumsAllocatedTimesTick) {
    RunTrace t;
    t.tick_s = Seconds{1, 2};
    t.metrics = {{Seconds{0}, "allocated_mbps", Mbps{50}}, {Seconds{1, 2}, "allocated_mbps", Mbps{100}}};
    EXPECT_EQ(meter_oracle(t), Rational{75});
}

TEST(Checks, Causality) {
    RunTrace t;
    SimEvent req;
    req.time_s = Seconds{5};
    req.kind = EventKind::CircuitUpgradeRequested;
    req.payload = {{"circuit", "vc-1"}, {"target_mbps", "100"}};
    SimEvent done = req;
    done.kind = EventKind::CircuitUpgradeCompleted;
    done.time_s = Seconds{20};
    t.events = {req, done};
    EXPECT_TRUE(causality_violations(t).empty());
    t.events = {done};
    EXPECT_EQ(causality_violations(t).size(), 1u);
    done.payload["target_mbps"] = "200";
    t.events = {req, done};
    EXPECT_EQ(causality_violations(t).size(), 1u);
    SimEvent early = req;
    early.time_s = Seconds{1};
    t.events = {req, early};
    EXPECT_EQ(causality_violations(t).size(), 1u);
}

TEST(Checks, DefaultRunsAreClean) {
    for (const auto& cfg : {ScenarioConfig::default_vertical(), ScenarioConfig::default_horizontal()}) {
        const auto trace = run_scenario(cfg);
        EXPECT_TRUE(property_violations(trace, cfg).empty());
        EXPECT_EQ(meter_oracle(trace), trace.meter_mbps_seconds);
    }
}

TEST(Summary, VerticalFields) {
    const auto trace = run_scenario(ScenarioConfig::default_vertical());
    const auto s = summarize(trace);
    EXPECT_EQ(s["mode"], "vertical");
    EXPECT_LT(s["meter"]["autoscaled_to_static_ratio"].get<double>(), 1.0);
    EXPECT_EQ(s["checks"]["capacity_violations"], 0);
    EXPECT_EQ(s["late_capacity_ticks"], 0);
    EXPECT_FALSE(s.contains("switchover"));
    EXPECT_EQ(s["latency"]["run"]["count"].get<std::size_t>(), trace.pod_startups.size());
}

TEST(Summary, HorizontalSwitchover) {
    const auto trace = run_scenario(ScenarioConfig::default_horizontal());
    const auto s = summarize(trace);
    EXPECT_EQ(s["switchover"]["flips"], 200);
    EXPECT_EQ(s["switchover"]["censored"], 0);
    EXPECT_LE(s["switchover"]["p80_s"].get<double>(), 23.0);
}
