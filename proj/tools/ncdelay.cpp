#include <algorithm>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>

#include "CLI11.hpp"
#include "ncdelay/scenario.hpp"

namespace {

using namespace ncdelay;

std::string show(const Delay& d) {
    if (!d) return "unbounded";
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.9g s", *d);
    return buf;
}

void print_report(const RunReport& r) {
    std::printf("scenario: %s\n", r.scenario.c_str());
    std::printf("  Delta (classical)  : %s\n", show(r.delta).c_str());
    if (r.critical_time)
        std::printf("  critical time t'   : %.9g s\n", *r.critical_time);
    for (const auto& [l, dl] : r.length_bounds) {
        std::printf("  Delta_l (l = %.9g bits): %s", l, show(dl).c_str());
        if (r.delta && dl)
            std::printf("   improvement %.9g s (%.2f%%)", *r.delta - *dl,
                        (*r.delta - *dl) / *r.delta * 100);
        std::printf("\n");
    }
    for (const auto& [flow, dl] : r.flow_bounds)
        std::printf("  flow %-12s     : %s\n", flow.c_str(), show(dl).c_str());
    if (r.achieved_response)
        std::printf("  achieved response  : %.9g s\n", *r.achieved_response);
    if (r.has_verdicts) {
        std::printf("  arrival conformance: %s\n",
                    r.conformance_ok ? "pass" : "FAIL");
        std::printf("  service compliance : %s\n",
                    r.service_ok ? "pass" : "FAIL");
    }
    if (r.sim) {
        std::printf("  simulation runs    : %d (%d discarded by verifier)\n",
                    r.sim->runs, r.sim->gated_out);
        std::printf("  max response       : %.9g s\n", r.sim->max_response);
        std::printf("  max bound fraction : %.6f\n", r.sim->max_fraction);
    }
}

void write_file(const std::string& path, const std::string& content) {
    std::ofstream out(path);
    if (!out) throw ConfigError("cannot write file: " + path);
    out << content;
}

std::map<std::string, double> parse_params(
    const std::vector<std::string>& params) {
    std::map<std::string, double> out;
    for (const auto& kv : params) {
        auto eq = kv.find('=');
        if (eq == std::string::npos)
            throw ConfigError("--param expects key=value, got: " + kv);
        out[kv.substr(0, eq)] = std::stod(kv.substr(eq + 1));
    }
    return out;
}

double param_or(const std::map<std::string, double>& p, const std::string& key,
                double fallback) {
    auto it = p.find(key);
    return it == p.end() ? fallback : it->second;
}

int run_casestudy(const std::string& which,
                  const std::vector<std::string>& params,
                  const std::string& csv_path) {
    auto p = parse_params(params);
    std::string csv;
    if (which == "drr") {
        int n = static_cast<int>(param_or(p, "n", 4));
        double c = param_or(p, "c", 1e6);
        double L = param_or(p, "L", 1000);
        double Q = param_or(p, "Q", L);
        double l = param_or(p, "l", L);
        ServerSpec server = drr_service_curve(n, c, L, Q);
        ConcaveArrivalCurve alpha({{L, server.beta.rate}});
        ScenarioConfig config{"drr_n" + std::to_string(n), alpha, server,
                              {l},  {},    std::nullopt,
                              std::nullopt, {}};
        RunReport report = run_bound(config);
        print_report(report);
        csv = bound_csv(report);
    } else if (which == "cbs") {
        double c = param_or(p, "c", 1e9);
        struct Cls { const char* name; double idle, length; };
        for (const Cls& cls : {Cls{"cbs_classA", 0.60, 11992.0},
                               Cls{"cbs_classB", 0.15, 11504.0}}) {
            double l = param_or(p, "l", cls.length);
            ServerSpec server(RateLatencyCurve(cls.idle * c,
                                               param_or(p, "T", 0.0)), c);
            ConcaveArrivalCurve alpha({{l, 0}});
            ScenarioConfig config{cls.name, alpha, server, {l}, {},
                                  std::nullopt, std::nullopt, {}};
            RunReport report = run_bound(config);
            print_report(report);
            if (csv.empty()) csv = bound_csv(report);
            else {
                std::string extra = bound_csv(report);
                csv += extra.substr(extra.find('\n') + 1);
            }
        }
    } else {
        throw ConfigError("unknown case study: " + which + " (use drr|cbs)");
    }
    if (!csv_path.empty()) write_file(csv_path, csv);
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Per-packet delay bounds for FIFO rate-latency servers"};
    app.require_subcommand(1);

    std::string config_path, csv_path, trace_out, trace_in, casestudy_name;
    std::optional<int> seeds_override;
    std::vector<std::string> params;

    auto* bound = app.add_subcommand("bound", "Compute delay bounds");
    bound->add_option("config", config_path, "scenario JSON file")->required();
    bound->add_option("--csv", csv_path, "write CSV to this path");

    auto* tight = app.add_subcommand("tightness", "Build the worst-case trace");
    tight->add_option("config", config_path, "scenario JSON file")->required();
    tight->add_option("--trace-out", trace_out, "write the trace JSON here");

    auto* sim = app.add_subcommand("simulate", "Run a simulation campaign");
    sim->add_option("config", config_path, "scenario JSON file")->required();
    sim->add_option("--seeds", seeds_override, "override the seed count");
    sim->add_option("--csv", csv_path, "write CSV to this path");
    sim->add_option("--trace", trace_in, "simulate this trace file instead");

    auto* cs = app.add_subcommand("casestudy", "Reproduce a built-in scenario");
    cs->add_option("which", casestudy_name, "drr or cbs")->required();
    cs->add_option("--param", params, "override k=v (n, c, L, Q, l, T)");
    cs->add_option("--csv", csv_path, "write CSV to this path");

    CLI11_PARSE(app, argc, argv);

    try {
        if (app.got_subcommand(bound)) {
            RunReport report = run_bound(load_config(config_path));
            print_report(report);
            if (!csv_path.empty()) write_file(csv_path, bound_csv(report));
        } else if (app.got_subcommand(tight)) {
            ScenarioConfig config = load_config(config_path);
            auto [report, trace] = run_tightness(config);
            print_report(report);
            if (!trace_out.empty())
                write_file(trace_out,
                           worst_case_trace_to_json(trace, *config.max_length));
        } else if (app.got_subcommand(sim)) {
            ScenarioConfig config = load_config(config_path);
            if (seeds_override) {
                if (!config.sim) config.sim = SimBlock{{PolicyKind::Jittered},
                                                       0, 10.0};
                config.sim->seeds = *seeds_override;
            }
            std::optional<Trace> supplied;
            if (!trace_in.empty()) {
                std::ifstream in(trace_in);
                if (!in) throw ConfigError("cannot open trace file: " + trace_in);
                std::stringstream buffer;
                buffer << in.rdbuf();
                supplied = trace_from_json(buffer.str());
            }
            RunReport report = run_simulate(config, supplied);
            print_report(report);
            if (!csv_path.empty()) write_file(csv_path, bound_csv(report));
        } else if (app.got_subcommand(cs)) {
            return run_casestudy(casestudy_name, params, csv_path);
        }
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const InfeasibleError& e) {
        std::cerr << "infeasible scenario: " << e.what() << "\n";
        return 3;
    } catch (const BoundViolationError& e) {
        std::cerr << "BOUND VIOLATION (library bug): " << e.what() << "\n";
        return 4;
    } catch (const GateError& e) {
        std::cerr << "verification gate failed: " << e.what() << "\n";
        return 5;
    } catch (const DomainError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    }
    return 0;
}
