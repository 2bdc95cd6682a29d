// Service mode: the underlay API and the adaptor's /cnwan/events endpoint
// over HTTP. Both servers share one underlay behind a mutex; time is read
// from a clock so tests can drive it deterministically.
#pragma once

#include "wanscale/scenario.hpp"
#include "wanscale/simulation.hpp"

#include <httplib.h>
#include <nlohmann/json.hpp>

#include <chrono>
#include <functional>
#include <mutex>
#include <string>
#include <thread>

namespace wanscale {

using Clock = std::function<Seconds()>;

// Seconds since construction, with millisecond resolution.
inline Clock steady_clock_since_now() {
    const auto start = std::chrono::steady_clock::now();
    return [start] {
        const auto ms = std::chrono::duration_cast<std::chrono::milliseconds>(std::chrono::steady_clock::now() - start).count();
        return Seconds{static_cast<std::int64_t>(ms), 1000};
    };
}

class ServiceHost {
public:
    ServiceHost(const ScenarioConfig& cfg, Clock clock)
        : clock_(std::move(clock)), underlay_(service_underlay_config(cfg)), rng_(cfg.seed) {
        if (cfg.circuit) circuit_id_ = underlay_.create_circuit(cfg.circuit->loc_a, cfg.circuit->loc_b, cfg.vertical_policy.ladder.baseline(), Seconds{0});
        for (const auto& t : cfg.tunnels)
            underlay_.add_tunnel(Tunnel{t.id, t.capacity_mbps, t.description, t.rides_circuit && !circuit_id_.empty() ? std::optional(circuit_id_) : std::nullopt});
        adaptor_.bind("*", binding_for(cfg, circuit_id_));
        install_underlay_routes();
        install_adaptor_routes();
    }

    ServiceHost(const ServiceHost&) = delete;
    ServiceHost& operator=(const ServiceHost&) = delete;
    ~ServiceHost() { stop(); }

    [[nodiscard]] const std::string& circuit_id() const noexcept { return circuit_id_; }

    // Binds both servers; port 0 picks an ephemeral port. Returns false if
    // either bind fails.
    bool start(const std::string& host, int underlay_port, int adaptor_port) {
        underlay_port_ = underlay_port == 0 ? underlay_http_.bind_to_any_port(host) : (underlay_http_.bind_to_port(host, underlay_port) ? underlay_port : -1);
        adaptor_port_ = adaptor_port == 0 ? adaptor_http_.bind_to_any_port(host) : (adaptor_http_.bind_to_port(host, adaptor_port) ? adaptor_port : -1);
        if (underlay_port_ < 0 || adaptor_port_ < 0) return false;
        underlay_thread_ = std::thread([this] { underlay_http_.listen_after_bind(); });
        adaptor_thread_ = std::thread([this] { adaptor_http_.listen_after_bind(); });
        underlay_http_.wait_until_ready();
        adaptor_http_.wait_until_ready();
        return true;
    }

    void wait() {
        if (underlay_thread_.joinable()) underlay_thread_.join();
        if (adaptor_thread_.joinable()) adaptor_thread_.join();
    }

    void stop() {
        underlay_http_.stop();
        adaptor_http_.stop();
        wait();
    }

    [[nodiscard]] int underlay_port() const noexcept { return underlay_port_; }
    [[nodiscard]] int adaptor_port() const noexcept { return adaptor_port_; }

private:
    static UnderlayConfig service_underlay_config(const ScenarioConfig& cfg) {
        UnderlayConfig u = underlay_config_for(cfg);
        u.time_quantum = Seconds{1, 1000};
        return u;
    }

    static void reply(httplib::Response& res, int status, const nlohmann::json& body) {
        res.status = status;
        res.set_content(body.dump(), "application/json");
    }

    static void fail(httplib::Response& res, int status, const std::string& message) {
        reply(res, status, nlohmann::json{{"error", message}});
    }

    static int status_for(UnderlayErrc code) {
        switch (code) {
            case UnderlayErrc::UnknownCircuit: return 404;
            case UnderlayErrc::NoOp: return 409;
            default: return 400;
        }
    }

    static nlohmann::json parse_object(const std::string& body) {
        nlohmann::json doc;
        try {
            doc = nlohmann::json::parse(body);
        } catch (const nlohmann::json::parse_error& e) {
            throw ValidationError("", std::string("malformed JSON: ") + e.what());
        }
        if (!doc.is_object()) throw ValidationError("", "body must be a JSON object");
        return doc;
    }

    // Runs `fn` under the lock after landing every completion due now.
    template <typename Fn>
    void guarded(httplib::Response& res, Fn&& fn) {
        try {
            std::lock_guard lock(mutex_);
            const Seconds now = clock_();
            underlay_.apply_due(now);
            fn(now);
        } catch (const UnderlayRejected& e) {
            fail(res, status_for(e.code()), e.what());
        } catch (const ValidationError& e) {
            fail(res, 400, e.what());
        } catch (const std::exception& e) {
            fail(res, 500, e.what());
        }
    }

    void install_underlay_routes() {
        using detail::ObjectReader;
        using detail::to_rational;
        using detail::to_str;
        using detail::to_int;

        underlay_http_.Post("/circuits", [this](const httplib::Request& req, httplib::Response& res) {
            guarded(res, [&](const Seconds& now) {
                const auto doc = parse_object(req.body);
                ObjectReader r(doc, "");
                const auto a = to_str(r.require("loc_a"), "loc_a");
                const auto b = to_str(r.require("loc_b"), "loc_b");
                const auto mbps = to_rational(r.require("mbps"), "mbps");
                r.finish();
                reply(res, 201, {{"id", underlay_.create_circuit(a, b, mbps, now)}});
            });
        });
        underlay_http_.Patch(R"(/circuits/([^/]+))", [this](const httplib::Request& req, httplib::Response& res) {
            guarded(res, [&](const Seconds& now) {
                const auto doc = parse_object(req.body);
                ObjectReader r(doc, "");
                const auto mbps = to_rational(r.require("mbps"), "mbps");
                r.finish();
                const Seconds at = underlay_.upgrade_circuit(req.matches[1], mbps, now, rng_);
                reply(res, 202, {{"effective_at_s", detail::from_rational(at)}});
            });
        });
        underlay_http_.Delete(R"(/circuits/([^/]+))", [this](const httplib::Request& req, httplib::Response& res) {
            guarded(res, [&](const Seconds& now) {
                underlay_.delete_circuit(req.matches[1], now);
                res.status = 204;
            });
        });
        underlay_http_.Get(R"(/circuits/([^/]+))", [this](const httplib::Request& req, httplib::Response& res) {
            guarded(res, [&](const Seconds&) {
                const std::string id = req.matches[1];
                if (!underlay_.has_circuit(id)) throw UnderlayRejected(UnderlayErrc::UnknownCircuit, "unknown circuit '" + id + "'");
                const auto& vc = underlay_.circuit(id);
                reply(res, 200,
                      {{"allocated_mbps", detail::from_rational(vc.allocated_mbps)},
                       {"pending_mbps", vc.pending_mbps ? detail::from_rational(*vc.pending_mbps) : nlohmann::json(nullptr)},
                       {"state", std::string(to_string(vc.state))}});
            });
        });
        underlay_http_.Put("/routes", [this](const httplib::Request& req, httplib::Response& res) {
            guarded(res, [&](const Seconds& now) {
                const auto doc = parse_object(req.body);
                ObjectReader r(doc, "");
                const auto ip = Ipv4::parse(to_str(r.require("ip"), "ip"));
                if (!ip) throw ValidationError("ip", "not a dotted-quad IPv4 address");
                const auto port = to_int(r.require("port"), "port");
                if (port < 1 || port > 65535) throw ValidationError("port", "must lie in [1, 65535]");
                const auto tunnel = to_str(r.require("tunnel_id"), "tunnel_id");
                r.finish();
                const auto at = underlay_.set_route(FlowSelector{*ip, static_cast<std::uint16_t>(port)}, tunnel, now, rng_);
                reply(res, 202, {{"effective_at_s", detail::from_rational(at.value_or(now))}});
            });
        });
        underlay_http_.Get("/meter", [this](const httplib::Request&, httplib::Response& res) {
            guarded(res, [&](const Seconds& now) {
                underlay_.accrue_meter(now);
                reply(res, 200, {{"accrued_mbps_seconds", detail::from_rational(underlay_.meter().accrued_mbps_seconds)}});
            });
        });
    }

    void install_adaptor_routes() {
        adaptor_http_.Post("/cnwan/events", [this](const httplib::Request& req, httplib::Response& res) {
            guarded(res, [&](const Seconds& now) {
                const AdaptorEventBody body = parse_event_body(std::string_view(req.body));
                auto result = adaptor_.dispatch(body, underlay_, now);
                for (const auto& action : result.actions) {
                    try {
                        execute_action(underlay_, action, now, rng_);
                    } catch (const UnderlayRejected& e) {
                        if (e.code() != UnderlayErrc::NoOp) throw;
                    }
                }
                res.status = 204;
            });
        });
    }

    Clock clock_;
    std::mutex mutex_;
    Underlay underlay_;
    Adaptor adaptor_;
    Rng rng_;
    std::string circuit_id_;
    httplib::Server underlay_http_;
    httplib::Server adaptor_http_;
    std::thread underlay_thread_;
    std::thread adaptor_thread_;
    int underlay_port_ = -1;
    int adaptor_port_ = -1;
};

}  // namespace wanscale
