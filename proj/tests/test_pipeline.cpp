#include "wanscale/pipeline.hpp"

#include <gtest/gtest.h>

using namespace wanscale;

namespace {

Application app_named(const std::string& name, std::int64_t replicas) {
    Application app;
    app.name = name;
    app.ip = *Ipv4::parse("10.0.0.7");
    app.ports = {8080};
    app.max_replicas = 150;
    app.replicas = replicas;
    return app;
}

constexpr const char* kGoldenBody =
    R"({"events":[{"event":"update","name":"echo-server","ip":"10.0.0.7","port":8080,"metadata":{"replicas":"75"}}]})";

std::string field_of(const std::string& body) {
    try {
        parse_event_body(std::string_view(body));
    } catch (const ValidationError& e) {
        return e.field();
    }
    return "<accepted>";
}

}  // namespace

TEST(Operator, FirstPublishCarriesReplicas) {
    ServiceRegistry reg;
    const auto rec = operator_publish(reg, app_named("echo-server", 5), Seconds{0});
    ASSERT_TRUE(rec);
    EXPECT_EQ(rec->revision, 1u);
    EXPECT_EQ(rec->metadata, (Annotations{{"replicas", "5"}}));
}

TEST(Operator, IdenticalRepublishIsNoOp) {
    ServiceRegistry reg;
    const auto app = app_named("echo-server", 5);
    operator_publish(reg, app, Seconds{0});
    EXPECT_FALSE(operator_publish(reg, app, Seconds{1}));
    EXPECT_EQ(reg.last_revision(), 1u);
}

TEST(Operator, AnnotationBumpsRevision) {
    ServiceRegistry reg;
    auto app = app_named("video-stream", 1);
    operator_publish(reg, app, Seconds{0});
    app.annotations["traffic-profile"] = "video";
    const auto rec = operator_publish(reg, app, Seconds{1});
    ASSERT_TRUE(rec);
    EXPECT_EQ(rec->revision, 2u);
    EXPECT_EQ(rec->metadata.at("traffic-profile"), "video");
    EXPECT_EQ(rec->metadata.at("replicas"), "1");
}

TEST(Registry, ChangeLogKeepsIntermediateStates) {
    ServiceRegistry reg;
    auto app = app_named("echo-server", 1);
    for (int r = 1; r <= 5; ++r) {
        app.replicas = r;
        operator_publish(reg, app, Seconds{r});
    }
    const auto log = reg.change_log();
    ASSERT_EQ(log.size(), 5u);
    for (std::size_t i = 0; i < log.size(); ++i) EXPECT_EQ(log[i].revision, i + 1);
    EXPECT_EQ(reg.get("echo-server")->revision, 5u);
}

TEST(Reader, NothingNewGivesEmpty) {
    ServiceRegistry reg;
    ReaderState st;
    operator_publish(reg, app_named("echo-server", 5), Seconds{0});
    EXPECT_EQ(reader_poll(reg, st, Seconds{0}).size(), 1u);
    EXPECT_TRUE(reader_poll(reg, st, Seconds{5}).empty());
}

TEST(Reader, OnlyLatestPerNameDelivered) {
    ServiceRegistry reg;
    ReaderState st;
    auto app = app_named("echo-server", 5);
    operator_publish(reg, app, Seconds{0});
    reader_poll(reg, st, Seconds{0});
    app.replicas = 6;
    operator_publish(reg, app, Seconds{1});
    app.replicas = 7;
    operator_publish(reg, app, Seconds{2});
    const auto deltas = reader_poll(reg, st, Seconds{5});
    ASSERT_EQ(deltas.size(), 1u);
    EXPECT_EQ(deltas[0].event, "update");
    EXPECT_EQ(deltas[0].record.metadata.at("replicas"), "7");
    // Oracle: the latest change-log entry for the name.
    EXPECT_EQ(deltas[0].record, reg.change_log().back().record);
}

TEST(Reader, TwoAppsOrderedByRevision) {
    ServiceRegistry reg;
    ReaderState st;
    operator_publish(reg, app_named("b-app", 1), Seconds{0});
    operator_publish(reg, app_named("a-app", 1), Seconds{0});
    const auto deltas = reader_poll(reg, st, Seconds{0});
    ASSERT_EQ(deltas.size(), 2u);
    EXPECT_EQ(deltas[0].record.name, "b-app");
    EXPECT_EQ(deltas[1].record.name, "a-app");
    EXPECT_EQ(deltas[0].event, "add");
}

TEST(Reader, DeleteTombstone) {
    ServiceRegistry reg;
    ReaderState st;
    operator_publish(reg, app_named("echo-server", 1), Seconds{0});
    reader_poll(reg, st, Seconds{0});
    ASSERT_TRUE(operator_remove(reg, "echo-server", Seconds{1}));
    const auto deltas = reader_poll(reg, st, Seconds{5});
    ASSERT_EQ(deltas.size(), 1u);
    EXPECT_EQ(deltas[0].event, "delete");
    EXPECT_FALSE(operator_remove(reg, "echo-server", Seconds{6}));
}

TEST(Wire, GoldenRoundTrip) {
    const auto body = parse_event_body(std::string_view(kGoldenBody));
    ASSERT_EQ(body.events.size(), 1u);
    EXPECT_EQ(body.events[0].event, "update");
    EXPECT_EQ(body.events[0].port, 8080);
    EXPECT_EQ(body.events[0].metadata.at("replicas"), "75");
    EXPECT_EQ(serialize_event_body(body), kGoldenBody);
}

TEST(Wire, RejectsMalformedBodies) {
    EXPECT_EQ(field_of(R"({"events":[{"event":"update","ip":"10.0.0.7","port":8080,"metadata":{}}]})"), "events[0].name");
    EXPECT_EQ(field_of(R"({"events":[{"event":"update","name":"a","ip":"10.0.0.7","port":8080,"metadata":{"replicas":75}}]})"),
              "events[0].metadata.replicas");
    EXPECT_EQ(field_of(R"({"events":[{"event":"patch","name":"a","ip":"10.0.0.7","port":8080,"metadata":{}}]})"), "events[0].event");
    EXPECT_EQ(field_of(R"({"events":[{"event":"add","name":"a","ip":"10.0.0.7","port":"8080","metadata":{}}]})"), "events[0].port");
    EXPECT_EQ(field_of(R"({"events":[{"event":"add","name":"a","ip":"10.0.0.7","port":8080,"metadata":{},"x":1}]})"), "events[0].x");
    EXPECT_EQ(field_of(R"({"events":{}})"), "events");
    EXPECT_EQ(field_of(R"({"evts":[]})"), "evts");
    EXPECT_EQ(field_of("not json"), "");
}

TEST(Wire, ReaderBodiesRoundTrip) {
    ServiceRegistry reg;
    ReaderState st;
    auto app = app_named("video-stream", 3);
    app.annotations["traffic-profile"] = "video";
    operator_publish(reg, app, Seconds{0});
    const auto body = make_event_body(reader_poll(reg, st, Seconds{0}));
    const std::string wire = serialize_event_body(body);
    EXPECT_EQ(parse_event_body(std::string_view(wire)), body);
    EXPECT_EQ(serialize_event_body(parse_event_body(std::string_view(wire))), wire);
}

TEST(Adaptor, ReplicasDriveUpgradeAndReplayIsIdempotent) {
    Underlay u;
    const auto id = u.create_circuit("WDC", "SEA", Mbps{100}, Seconds{0});
    Adaptor adaptor;
    AdaptorBinding binding;
    binding.circuit_id = id;
    adaptor.bind("echo-server", binding);
    const auto body = parse_event_body(std::string_view(kGoldenBody));
    const auto first = adaptor.dispatch(body, u, Seconds{0});
    ASSERT_EQ(first.actions.size(), 1u);
    EXPECT_EQ(std::get<UpgradeCircuit>(first.actions[0]), (UpgradeCircuit{id, Mbps{200}}));
    Rng rng(1);
    execute_action(u, first.actions[0], Seconds{0}, rng);
    EXPECT_TRUE(adaptor.dispatch(body, u, Seconds{1}).actions.empty());
}

TEST(Adaptor, AlreadyRoutedProfileIsNoOp) {
    Underlay u;
    u.add_tunnel(Tunnel{"tunnel-A", Mbps{3}, "", std::nullopt});
    u.add_tunnel(Tunnel{"tunnel-B", Mbps{1000}, "", std::nullopt});
    const FlowSelector flow{*Ipv4::parse("10.0.0.9"), 5004};
    u.install_route(flow, "tunnel-B");
    Adaptor adaptor;
    AdaptorBinding binding;
    binding.profiles = ProfileMap{{{"video", "tunnel-B"}}, "tunnel-A"};
    adaptor.bind("*", binding);
    const auto body = parse_event_body(std::string_view(
        R"({"events":[{"event":"add","name":"video-stream","ip":"10.0.0.9","port":5004,"metadata":{"traffic-profile":"video"}}]})"));
    EXPECT_TRUE(adaptor.dispatch(body, u, Seconds{0}).actions.empty());
}

TEST(Adaptor, ProfileChangeSteers) {
    Underlay u;
    u.add_tunnel(Tunnel{"tunnel-A", Mbps{3}, "", std::nullopt});
    u.add_tunnel(Tunnel{"tunnel-B", Mbps{1000}, "", std::nullopt});
    const FlowSelector flow{*Ipv4::parse("10.0.0.9"), 5004};
    u.install_route(flow, "tunnel-A");
    Adaptor adaptor;
    AdaptorBinding binding;
    binding.profiles = ProfileMap{{{"video", "tunnel-B"}, {"standard", "tunnel-A"}}, "tunnel-A"};
    adaptor.bind("*", binding);
    const auto body = parse_event_body(std::string_view(
        R"({"events":[{"event":"add","name":"v","ip":"10.0.0.9","port":5004,"metadata":{"traffic-profile":"video","replicas":"3"}}]})"));
    const auto r = adaptor.dispatch(body, u, Seconds{0});
    ASSERT_EQ(r.actions.size(), 1u);
    EXPECT_EQ(std::get<SetRoute>(r.actions[0]), (SetRoute{flow, "tunnel-B"}));
}

TEST(Adaptor, DeleteScalesToBaseline) {
    Underlay u;
    const auto id = u.create_circuit("WDC", "SEA", Mbps{400}, Seconds{0});
    Adaptor adaptor;
    AdaptorBinding binding;
    binding.circuit_id = id;
    adaptor.bind("*", binding);
    const auto body = parse_event_body(
        std::string_view(R"({"events":[{"event":"delete","name":"echo-server","ip":"10.0.0.7","port":8080,"metadata":{}}]})"));
    const auto r = adaptor.dispatch(body, u, Seconds{0});
    ASSERT_EQ(r.actions.size(), 1u);
    EXPECT_EQ(std::get<UpgradeCircuit>(r.actions[0]).target_mbps, Mbps{50});
}

TEST(Adaptor, UnboundApplicationDiagnosed) {
    Underlay u;
    Adaptor adaptor;
    const auto r = adaptor.dispatch(parse_event_body(std::string_view(kGoldenBody)), u, Seconds{0});
    EXPECT_TRUE(r.actions.empty());
    EXPECT_EQ(r.diagnostics.size(), 1u);
}

TEST(Adaptor, UnknownMetadataIgnored) {
    Underlay u;
    const auto id = u.create_circuit("WDC", "SEA", Mbps{100}, Seconds{0});
    Adaptor adaptor;
    AdaptorBinding binding;
    binding.circuit_id = id;
    adaptor.bind("*", binding);
    const auto body = parse_event_body(std::string_view(
        R"({"events":[{"event":"update","name":"e","ip":"10.0.0.7","port":8080,"metadata":{"replicas":"75","team":"x"}}]})"));
    const auto r = adaptor.dispatch(body, u, Seconds{0});
    EXPECT_EQ(r.actions.size(), 1u);
    EXPECT_TRUE(r.diagnostics.empty());
}
