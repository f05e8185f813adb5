#pragma once

#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "ncdelay/bounds.hpp"
#include "ncdelay/simulator.hpp"
#include "ncdelay/tightness.hpp"

// Scenario front end: JSON configs with unit handling, bound/tightness/
// simulation campaigns, trace file interchange, and CSV emission.
//
// Unit conventions at this boundary: 1 KB = 1000 bytes = 8000 bits;
// Mbps/Gbps are decimal. Internally everything is bits and seconds.

namespace ncdelay {

struct ConfigError : std::runtime_error {          // exit code 2
    using std::runtime_error::runtime_error;
};
struct InfeasibleError : std::runtime_error {      // exit code 3
    using std::runtime_error::runtime_error;
};
struct BoundViolationError : std::runtime_error {  // exit code 4
    using std::runtime_error::runtime_error;
};
struct GateError : std::runtime_error {            // exit code 5
    using std::runtime_error::runtime_error;
};

struct UnitSystem {
    double data_scale = 1.0;  // bits per configured data unit
    double time_scale = 1.0;  // seconds per configured time unit
    double rate_scale = 1.0;  // bits/second per configured rate unit
    std::string data_name = "bits";
    std::string time_name = "s";
    std::string rate_name = "bps";
};

struct SimBlock {
    std::vector<PolicyKind> policies;
    int seeds = 0;
    double horizon = 0;  // seconds
};

// A parsed scenario, normalized to bits and seconds.
struct ScenarioConfig {
    std::string name;
    ConcaveArrivalCurve alpha;
    ServerSpec server;
    std::vector<double> lengths;       // packet lengths of interest, bits
    std::vector<FlowSpec> flows;
    std::optional<double> max_length;  // L_max for tightness runs, bits
    std::optional<SimBlock> sim;
    UnitSystem units;
};

ScenarioConfig parse_config(const std::string& json_text,
                            const std::string& name);
ScenarioConfig load_config(const std::string& path);

struct SimStats {
    int runs = 0;
    int gated_out = 0;        // discarded by the service-curve verifier
    double max_response = 0;  // seconds, over all gated-in runs
    double max_fraction = 0;  // max of response / Delta_{l_n}
};

struct RunReport {
    std::string scenario;
    Delay delta;
    std::optional<double> critical_time;
    std::vector<std::pair<double, Delay>> length_bounds;  // l -> Delta_l
    std::map<std::string, Delay> flow_bounds;
    std::optional<double> achieved_response;  // tightness runs
    bool has_verdicts = false;
    bool conformance_ok = true;
    bool service_ok = true;
    std::optional<SimStats> sim;
};

RunReport run_bound(const ScenarioConfig& config);

// Builds the worst-case trace, verifies it, and reports the achieved
// response. Throws InfeasibleError naming the violated hypothesis.
std::pair<RunReport, WorstCaseTrace> run_tightness(const ScenarioConfig& config);

// Runs seeds x policies on generated conforming traces, or on a supplied
// trace. A supplied trace that fails conformance throws GateError; a delay
// bound violation on a verifier-accepted run throws BoundViolationError.
RunReport run_simulate(const ScenarioConfig& config,
                       const std::optional<Trace>& supplied = std::nullopt);

// Trace files: {"L_max": bits, "packets": [{"A": s, "l": bits}, ...]},
// optional "schedule": [{"Q": s, "D": s}, ...].
std::string trace_to_json(const Trace& trace,
                          const std::vector<double>* starts = nullptr,
                          const std::vector<double>* departures = nullptr);
Trace trace_from_json(const std::string& json_text);
std::string worst_case_trace_to_json(const WorstCaseTrace& trace,
                                     double max_length);

// CSV with the fixed header scenario,length_bits,delta_s,delta_l_s,
// improvement_s,improvement_pct; "unbounded" for infinite bounds.
std::string bound_csv(const RunReport& report);

}  // namespace ncdelay
