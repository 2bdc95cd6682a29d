#include "wanscale/cloudsim.hpp"

#include <gtest/gtest.h>

using namespace wanscale;

namespace {

Application echo(std::int64_t replicas) {
    Application app;
    app.name = "echo-server";
    app.ip = *Ipv4::parse("10.0.0.7");
    app.ports = {8080};
    app.min_replicas = 1;
    app.max_replicas = 150;
    app.replicas = replicas;
    return app;
}

// Independent restatement of the ceiling-ratio rule.
std::int64_t ceiling_ratio_oracle(std::int64_t current, std::int64_t util_num, std::int64_t util_den, std::int64_t target,
                                  std::int64_t lo, std::int64_t hi) {
    // |util/target - 1| <= 1/10  <=>  10*|util - target| <= target
    const std::int64_t diff = util_num - target * util_den;
    if (10 * (diff < 0 ? -diff : diff) <= target * util_den) return current;
    const std::int64_t n = current * util_num;
    const std::int64_t d = target * util_den;
    const std::int64_t raw = (n + d - 1) / d;
    return raw < lo ? lo : (raw > hi ? hi : raw);
}

}  // namespace

TEST(Load, StepFunctionLeftClosed) {
    const auto schedule = LoadSchedule::published_ramp();
    EXPECT_EQ(load_at(schedule, Seconds{0}), 700);
    EXPECT_EQ(load_at(schedule, Seconds{100}), 2900);
    EXPECT_EQ(load_at(schedule, Seconds{29999, 1000}), 700);
    EXPECT_EQ(load_at(schedule, Seconds{30}), 1900);
    EXPECT_EQ(load_at(schedule, Seconds{10000}), 4500);
}

TEST(Load, ScheduleValidation) {
    EXPECT_THROW(LoadSchedule(std::vector<LoadStep>{}), ValidationError);
    EXPECT_THROW(LoadSchedule({{Seconds{1}, 10}}), ValidationError);
    EXPECT_THROW(LoadSchedule({{Seconds{0}, 10}, {Seconds{0}, 20}}), ValidationError);
    EXPECT_THROW(LoadSchedule({{Seconds{0}, -1}}), ValidationError);
}

TEST(Cpu, UtilizationExamples) {
    EXPECT_EQ(cpu_utilization(0, 10, Rational{4, 3}), Rational{0});
    EXPECT_EQ(cpu_utilization(4500, 150, Rational{4, 3}), Rational{40});
    EXPECT_EQ(cpu_utilization(700, 1, Rational{4, 3}), Rational{100});
    EXPECT_THROW(cpu_utilization(10, 0, Rational{1}), std::invalid_argument);
    EXPECT_EQ(cpu_request_utilization(700, 1, Rational{4, 3}), Rational(2800, 3));
}

TEST(Hpa, DesiredExamples) {
    const HpaConfig cfg;
    EXPECT_EQ(hpa_desired(10, Rational{40}, cfg), 10);
    EXPECT_EQ(hpa_desired(10, Rational{80}, cfg), 20);
    EXPECT_EQ(hpa_desired(100, Rational{80}, cfg), 150);
    EXPECT_EQ(hpa_desired(10, Rational{44}, cfg), 10);  // inside the band
    EXPECT_EQ(hpa_desired(10, Rational{45}, cfg), 12);
    EXPECT_EQ(hpa_desired(10, Rational{1}, cfg), 1);
}

TEST(Hpa, DesiredMatchesOracle) {
    const HpaConfig cfg;
    for (std::int64_t r = 1; r <= 150; r += 7)
        for (std::int64_t u = 0; u <= 300; ++u)
            ASSERT_EQ(hpa_desired(r, Rational{u}, cfg), ceiling_ratio_oracle(r, u, 1, 40, 1, 150)) << r << " " << u;
}

TEST(Hpa, ScaleUpSamplesOnePairPerNewPod) {
    HorizontalPodAutoscaler hpa{HpaConfig{}};
    Application app = echo(24);
    hpa.adopt_existing(24, Seconds{0});
    Rng rng(42);
    const auto result = hpa.sync(app, 1900, Seconds{30}, rng);
    EXPECT_EQ(result.new_replicas, 64);
    EXPECT_EQ(app.replicas, 64);
    ASSERT_TRUE(result.replica_change);
    EXPECT_EQ(result.replica_change->kind, EventKind::ReplicaChange);
    EXPECT_EQ(result.replica_change->at("replicas"), "64");
    ASSERT_EQ(result.started.size(), 40u);
    for (const auto& pod : result.started) {
        EXPECT_GE(pod.run_s, pod.pull_s);
        EXPECT_GE(pod.pull_s, (Seconds{1, 2}));
        EXPECT_LE(pod.pull_s, Seconds{10});
    }
}

TEST(Hpa, AtTargetEmitsNothing) {
    HorizontalPodAutoscaler hpa{HpaConfig{}};
    Application app = echo(150);
    Rng rng(1);
    const auto result = hpa.sync(app, 4500, Seconds{0}, rng);
    EXPECT_FALSE(result.replica_change);
    EXPECT_TRUE(result.started.empty());
}

TEST(Hpa, DownscaleHeldWithinStabilizationWindow) {
    HorizontalPodAutoscaler hpa{HpaConfig{}};
    Application app = echo(150);
    Rng rng(1);
    hpa.sync(app, 4500, Seconds{0}, rng);
    for (int i = 1; i <= 4; ++i) {
        const auto r = hpa.sync(app, 700, Seconds{15 * i}, rng);
        EXPECT_FALSE(r.replica_change) << "sync " << i;
        EXPECT_EQ(app.replicas, 150);
    }
    const auto r = hpa.sync(app, 700, Seconds{75}, rng);
    ASSERT_TRUE(r.replica_change);
    EXPECT_EQ(app.replicas, 24);
}

TEST(Hpa, ReadyReplicasFollowRunDelay) {
    HorizontalPodAutoscaler hpa{HpaConfig{}};
    Application app = echo(1);
    hpa.adopt_existing(1, Seconds{0});
    Rng rng(5);
    const auto result = hpa.sync(app, 700, Seconds{0}, rng);
    EXPECT_EQ(hpa.ready_replicas(Seconds{0}), 1);
    Seconds last{0};
    for (const auto& p : result.started) last = max(last, p.ready_at());
    EXPECT_EQ(hpa.ready_replicas(last), 24);
}

TEST(Hpa, FixedPointsFromMinReplicas) {
    const std::vector<std::pair<std::int64_t, std::int64_t>> cases{{700, 24}, {1900, 64}, {2900, 97}, {3500, 117}, {4500, 150}};
    for (const auto& [load, expected] : cases) {
        HorizontalPodAutoscaler hpa{HpaConfig{}};
        Application app = echo(1);
        Rng rng(11);
        int settled = -1;
        for (int i = 0; i < 40; ++i) {
            hpa.sync(app, load, Seconds{15 * i}, rng);
            if (app.replicas == expected && settled < 0) settled = i;
            if (settled >= 0) {
                ASSERT_EQ(app.replicas, expected) << load << " sync " << i;
            }
        }
        EXPECT_GE(settled, 0) << load;
        EXPECT_LE(settled, 29) << load;
    }
}

TEST(Hpa, ReplicasStayWithinBounds) {
    HorizontalPodAutoscaler hpa{HpaConfig{}};
    Application app = echo(1);
    Rng rng(2);
    std::uint64_t state = 12345;
    for (int i = 0; i < 300; ++i) {
        state = state * 6364136223846793005ULL + 1442695040888963407ULL;
        const auto load = static_cast<std::int64_t>((state >> 33) % 10000);
        hpa.sync(app, load, Seconds{15 * i}, rng);
        ASSERT_GE(app.replicas, 1);
        ASSERT_LE(app.replicas, 150);
    }
}

TEST(Hpa, ConfigValidation) {
    HpaConfig cfg;
    cfg.tolerance = Rational{1};
    EXPECT_THROW(cfg.validate(), ValidationError);
    cfg = HpaConfig{};
    cfg.min_replicas = 0;
    EXPECT_THROW(cfg.validate(), ValidationError);
}
