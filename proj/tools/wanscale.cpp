// wanscale: run, sweep, serve and report.
//
// Exit codes: 0 ok, 1 invalid config, 2 runtime failure, 3 property
// violation under --check.

#include "wanscale/report.hpp"
#include "wanscale/scenario.hpp"
#include "wanscale/service.hpp"
#include "wanscale/simulation.hpp"

#include <CLI11.hpp>

#include <csignal>
#include <iostream>
#include <optional>
#include <string>

namespace {

enum Exit { kOk = 0, kInvalidConfig = 1, kRuntimeFailure = 2, kViolation = 3 };

volatile std::sig_atomic_t g_stop = 0;

void on_signal(int) { g_stop = 1; }

wanscale::ScenarioConfig load_or_default(const std::string& path) {
    if (path.empty()) return wanscale::ScenarioConfig::default_vertical();
    return wanscale::load_scenario(path);
}

int report_violations(const std::vector<std::string>& violations, const std::string& label) {
    for (const auto& v : violations) std::cerr << label << ": " << v << '\n';
    return violations.empty() ? kOk : kViolation;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Cloud-driven WAN autoscaling simulator"};
    app.require_subcommand(1);

    std::string scenario_path;
    std::string out_dir;
    std::string trace_dir;
    std::optional<std::uint64_t> seed;
    std::size_t seeds = 1;
    std::size_t workers = 0;
    bool check = false;
    int underlay_port = 8081;
    int adaptor_port = 8082;
    std::string host = "127.0.0.1";

    auto* run = app.add_subcommand("run", "Run one scenario and write its report");
    run->add_option("--scenario", scenario_path, "Scenario JSON file")->required();
    run->add_option("--seed", seed, "Override the scenario seed");
    run->add_option("--out", out_dir, "Output directory")->required();
    run->add_flag("--check", check, "Exit 3 if a trace property is violated");

    auto* sweep = app.add_subcommand("sweep", "Run consecutive seeds starting at the scenario seed");
    sweep->add_option("--scenario", scenario_path, "Scenario JSON file")->required();
    sweep->add_option("--seeds", seeds, "Number of seeds")->required()->check(CLI::PositiveNumber);
    sweep->add_option("--out", out_dir, "Output directory")->required();
    sweep->add_option("--jobs", workers, "Worker threads (0: hardware concurrency)");
    sweep->add_flag("--check", check, "Exit 3 if any run violates a trace property");

    auto* serve = app.add_subcommand("serve", "Serve the underlay and adaptor HTTP APIs");
    serve->add_option("--underlay-port", underlay_port, "Underlay API port")->required();
    serve->add_option("--adaptor-port", adaptor_port, "Adaptor API port")->required();
    serve->add_option("--scenario", scenario_path, "Scenario providing circuit, tunnels and policy");
    serve->add_option("--host", host, "Bind address");

    auto* report = app.add_subcommand("report", "Recompute summary.json and CDF tables from a report directory");
    report->add_option("--trace", trace_dir, "Report directory written by run")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kOk : kInvalidConfig;
    }

    wanscale::ScenarioConfig cfg;
    if (!report->parsed()) {
        try {
            cfg = load_or_default(scenario_path);
            if (seed) cfg.seed = *seed;
        } catch (const std::exception& e) {
            std::cerr << "invalid config: " << e.what() << '\n';
            return kInvalidConfig;
        }
    }

    try {
        if (run->parsed()) {
            const auto trace = wanscale::run_scenario(cfg);
            wanscale::emit_report(trace, out_dir);
            std::cout << wanscale::summarize(trace).dump(2) << '\n';
            if (check) return report_violations(wanscale::property_violations(trace, cfg), "seed " + std::to_string(trace.seed));
            return kOk;
        }
        if (sweep->parsed()) {
            const auto traces = wanscale::run_sweep(cfg, seeds, workers);
            const auto summary = wanscale::emit_sweep(traces, out_dir);
            std::cout << summary["pooled"].dump(2) << '\n';
            int code = kOk;
            if (check)
                for (const auto& t : traces)
                    if (report_violations(wanscale::property_violations(t, cfg), "seed " + std::to_string(t.seed)) != kOk) code = kViolation;
            return code;
        }
        if (serve->parsed()) {
            wanscale::ServiceHost service(cfg, wanscale::steady_clock_since_now());
            if (!service.start(host, underlay_port, adaptor_port)) {
                std::cerr << "cannot bind " << host << ':' << underlay_port << " / " << adaptor_port << '\n';
                return kRuntimeFailure;
            }
            std::signal(SIGINT, on_signal);
            std::signal(SIGTERM, on_signal);
            std::cerr << "underlay on " << host << ':' << service.underlay_port() << ", adaptor on " << host << ':'
                      << service.adaptor_port() << '\n';
            while (!g_stop) std::this_thread::sleep_for(std::chrono::milliseconds(100));
            service.stop();
            return kOk;
        }
        if (report->parsed()) {
            const auto trace = wanscale::load_trace(trace_dir);
            wanscale::emit_summaries(trace, trace_dir);
            std::cout << wanscale::summarize(trace).dump(2) << '\n';
            return kOk;
        }
    } catch (const wanscale::ValidationError& e) {
        std::cerr << "invalid config: " << e.what() << '\n';
        return kInvalidConfig;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kRuntimeFailure;
    }
    return kOk;
}
