#include "ncdelay/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "json.hpp"

namespace ncdelay {

namespace {

using nlohmann::json;

void check_keys(const json& obj, const std::vector<std::string>& allowed,
                const std::string& context) {
    for (auto it = obj.begin(); it != obj.end(); ++it) {
        if (std::find(allowed.begin(), allowed.end(), it.key()) ==
            allowed.end()) {
            throw ConfigError("unknown key \"" + it.key() + "\" in " + context);
        }
    }
}

double number(const json& obj, const std::string& key,
              const std::string& context) {
    if (!obj.contains(key))
        throw ConfigError("missing key \"" + key + "\" in " + context);
    if (!obj[key].is_number())
        throw ConfigError("key \"" + key + "\" in " + context +
                          " must be a number");
    return obj[key].get<double>();
}

UnitSystem parse_units(const json& obj) {
    UnitSystem u;
    if (!obj.contains("units")) return u;
    const json& units = obj["units"];
    check_keys(units, {"data", "time", "rate"}, "units");
    if (units.contains("data")) {
        u.data_name = units["data"].get<std::string>();
        if (u.data_name == "bits") u.data_scale = 1;
        else if (u.data_name == "bytes") u.data_scale = 8;
        else if (u.data_name == "KB") u.data_scale = 8000;
        else throw ConfigError("units.data must be bits|bytes|KB");
    }
    if (units.contains("time")) {
        u.time_name = units["time"].get<std::string>();
        if (u.time_name == "s") u.time_scale = 1;
        else if (u.time_name == "ms") u.time_scale = 1e-3;
        else if (u.time_name == "us") u.time_scale = 1e-6;
        else throw ConfigError("units.time must be s|ms|us");
    }
    if (units.contains("rate")) {
        u.rate_name = units["rate"].get<std::string>();
        if (u.rate_name == "bps") u.rate_scale = 1;
        else if (u.rate_name == "Mbps") u.rate_scale = 1e6;
        else if (u.rate_name == "Gbps") u.rate_scale = 1e9;
        else throw ConfigError("units.rate must be bps|Mbps|Gbps");
    }
    return u;
}

ConcaveArrivalCurve parse_alpha(const json& obj, const UnitSystem& u) {
    if (!obj.contains("alpha")) throw ConfigError("missing \"alpha\" block");
    const json& a = obj["alpha"];
    check_keys(a, {"pieces"}, "alpha");
    if (!a.contains("pieces") || !a["pieces"].is_array() ||
        a["pieces"].empty()) {
        throw ConfigError("alpha.pieces must be a nonempty array");
    }
    std::vector<AffinePiece> pieces;
    for (const auto& p : a["pieces"]) {
        check_keys(p, {"burst", "rate"}, "alpha.pieces[]");
        pieces.push_back({number(p, "burst", "alpha piece") * u.data_scale,
                          number(p, "rate", "alpha piece") * u.rate_scale});
    }
    try {
        return ConcaveArrivalCurve(std::move(pieces));
    } catch (const DomainError& e) {
        throw ConfigError(std::string("invalid alpha: ") + e.what());
    }
}

ServerSpec parse_server(const json& obj, const UnitSystem& u) {
    if (!obj.contains("server")) throw ConfigError("missing \"server\" block");
    const json& s = obj["server"];
    try {
        if (s.contains("drr")) {
            check_keys(s, {"drr"}, "server");
            const json& d = s["drr"];
            check_keys(d, {"n", "c", "L", "Q"}, "server.drr");
            double n = number(d, "n", "server.drr");
            if (n != std::floor(n) || n < 1)
                throw ConfigError("server.drr.n must be a positive integer");
            return drr_service_curve(static_cast<int>(n),
                                     number(d, "c", "server.drr") * u.rate_scale,
                                     number(d, "L", "server.drr") * u.data_scale,
                                     number(d, "Q", "server.drr") * u.data_scale);
        }
        if (s.contains("cbs")) {
            check_keys(s, {"cbs"}, "server");
            const json& cb = s["cbs"];
            check_keys(cb, {"c", "idle_slope", "T"}, "server.cbs");
            double c = number(cb, "c", "server.cbs") * u.rate_scale;
            double frac = number(cb, "idle_slope", "server.cbs");
            if (!(frac > 0 && frac <= 1))
                throw ConfigError("server.cbs.idle_slope must be in (0, 1]");
            double T = cb.contains("T")
                           ? number(cb, "T", "server.cbs") * u.time_scale
                           : 0.0;
            return ServerSpec(RateLatencyCurve(frac * c, T), c);
        }
        check_keys(s, {"R", "T", "c"}, "server");
        return ServerSpec(RateLatencyCurve(number(s, "R", "server") * u.rate_scale,
                                           number(s, "T", "server") * u.time_scale),
                          number(s, "c", "server") * u.rate_scale);
    } catch (const DomainError& e) {
        throw ConfigError(std::string("invalid server: ") + e.what());
    }
}

std::string fmt(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.12g", v);
    return buf;
}

}  // namespace

ScenarioConfig parse_config(const std::string& json_text,
                            const std::string& name) {
    json obj;
    try {
        obj = json::parse(json_text);
    } catch (const json::parse_error& e) {
        throw ConfigError(std::string("JSON parse error: ") + e.what());
    }
    check_keys(obj,
               {"alpha", "server", "lengths", "L_max", "flows", "sim", "units"},
               "config");
    UnitSystem units = parse_units(obj);
    ConcaveArrivalCurve alpha = parse_alpha(obj, units);
    ServerSpec server = parse_server(obj, units);

    ScenarioConfig config{name,
                          std::move(alpha),
                          std::move(server),
                          {},
                          {},
                          std::nullopt,
                          std::nullopt,
                          units};
    if (obj.contains("lengths")) {
        if (!obj["lengths"].is_array())
            throw ConfigError("lengths must be an array");
        for (const auto& v : obj["lengths"]) {
            if (!v.is_number()) throw ConfigError("lengths must be numbers");
            config.lengths.push_back(v.get<double>() * units.data_scale);
        }
    }
    if (obj.contains("L_max"))
        config.max_length = number(obj, "L_max", "config") * units.data_scale;
    if (obj.contains("flows")) {
        if (!obj["flows"].is_array())
            throw ConfigError("flows must be an array");
        for (const auto& f : obj["flows"]) {
            check_keys(f, {"name", "L_min", "L_max"}, "flows[]");
            if (!f.contains("name"))
                throw ConfigError("flow entry needs a name");
            config.flows.push_back(
                {f["name"].get<std::string>(),
                 number(f, "L_min", "flow") * units.data_scale,
                 number(f, "L_max", "flow") * units.data_scale});
        }
    }
    if (obj.contains("sim")) {
        const json& s = obj["sim"];
        check_keys(s, {"policy", "seeds", "horizon"}, "sim");
        SimBlock block;
        std::string policy = s.contains("policy")
                                 ? s["policy"].get<std::string>()
                                 : "jittered";
        if (policy == "greedy") block.policies = {PolicyKind::Greedy};
        else if (policy == "max_lazy") block.policies = {PolicyKind::MaxLazy};
        else if (policy == "jittered") block.policies = {PolicyKind::Jittered};
        else if (policy == "all")
            block.policies = {PolicyKind::Greedy, PolicyKind::MaxLazy,
                              PolicyKind::Jittered};
        else throw ConfigError("sim.policy must be greedy|max_lazy|jittered|all");
        block.seeds = s.contains("seeds")
                          ? static_cast<int>(number(s, "seeds", "sim"))
                          : 0;
        if (block.seeds < 0) throw ConfigError("sim.seeds must be >= 0");
        block.horizon = s.contains("horizon")
                            ? number(s, "horizon", "sim") * units.time_scale
                            : 10.0;
        config.sim = block;
    }
    return config;
}

ScenarioConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file: " + path);
    std::stringstream buffer;
    buffer << in.rdbuf();
    std::string name = path;
    auto slash = name.find_last_of('/');
    if (slash != std::string::npos) name = name.substr(slash + 1);
    auto dot = name.find_last_of('.');
    if (dot != std::string::npos) name = name.substr(0, dot);
    return parse_config(buffer.str(), name);
}

RunReport run_bound(const ScenarioConfig& config) {
    RunReport report;
    report.scenario = config.name;
    report.delta = classic_bound(config.alpha, config.server);
    if (report.delta) {
        report.critical_time =
            critical_time(config.alpha, config.server);
    }
    for (double l : config.lengths) {
        Delay dl;
        if (report.delta)
            dl = improved_bound(config.alpha, config.server, l);
        report.length_bounds.emplace_back(l, dl);
    }
    if (!config.flows.empty() && report.delta)
        report.flow_bounds =
            per_flow_bounds(config.alpha, config.server, config.flows);
    return report;
}

std::pair<RunReport, WorstCaseTrace> run_tightness(const ScenarioConfig& config) {
    if (!config.max_length)
        throw ConfigError("tightness runs need an L_max entry");
    if (config.lengths.empty())
        throw ConfigError("tightness runs need a packet length of interest");
    double burst = config.alpha.right_limit(0);
    if (*config.max_length > burst + tol_for(burst)) {
        throw InfeasibleError(
            "hypothesis violated: the construction requires alpha+(0) >= L_max "
            "(alpha+(0) = " + fmt(burst) + ", L_max = " + fmt(*config.max_length) + ")");
    }
    Delay delta = classic_bound(config.alpha, config.server);
    if (!delta)
        throw InfeasibleError(
            "hypothesis violated: the classical bound is unbounded "
            "(arrival rate exceeds the service rate)");

    TightnessScenario scenario{config.alpha, config.server, config.lengths[0],
                               *config.max_length};
    WorstCaseTrace trace = build_worst_case(scenario);

    RunReport report = run_bound(config);
    report.achieved_response = trace.achieved_response;
    report.has_verdicts = true;

    Trace packets{{}, *config.max_length};
    for (size_t i = 0; i < trace.arrivals.size(); ++i)
        packets.packets.push_back({static_cast<int>(i) + 1, trace.arrivals[i],
                                   trace.lengths[i]});
    report.conformance_ok =
        verify_arrival_conformance(packets, config.alpha).conforms;
    SimResult sim = simulate(packets, SchedulerPolicy::max_lazy(), config.server);
    report.service_ok = verify_service_curve(sim, config.server.beta).compliant;
    return {std::move(report), std::move(trace)};
}

RunReport run_simulate(const ScenarioConfig& config,
                       const std::optional<Trace>& supplied) {
    if (!config.sim && !supplied)
        throw ConfigError("simulate runs need a sim block");
    SimBlock block = config.sim.value_or(
        SimBlock{{PolicyKind::Greedy, PolicyKind::MaxLazy, PolicyKind::Jittered},
                 1, 10.0});

    if (supplied) {
        auto verdict = verify_arrival_conformance(*supplied, config.alpha);
        if (!verdict.conforms) {
            std::string msg = "supplied trace does not conform to alpha";
            if (verdict.violation) {
                msg += ": packets " + std::to_string(verdict.violation->m) +
                       ".." + std::to_string(verdict.violation->n) + " carry " +
                       fmt(verdict.violation->lhs) + " bits > alpha+ = " +
                       fmt(verdict.violation->rhs);
            }
            throw GateError(msg);
        }
    }

    RunReport report = run_bound(config);
    report.has_verdicts = true;
    SimStats stats;
    int n_runs = supplied ? std::max(block.seeds, 1) : block.seeds;
    for (int seed = 0; seed < n_runs; ++seed) {
        Trace trace = supplied ? *supplied
                               : random_conforming_trace(
                                     config.alpha,
                                     config.max_length.value_or(
                                         config.alpha.right_limit(0)),
                                     block.horizon, seed);
        for (PolicyKind kind : block.policies) {
            SchedulerPolicy policy{kind, static_cast<std::uint64_t>(seed)};
            SimResult result = simulate(trace, policy, config.server);
            if (!verify_service_curve(result, config.server.beta).compliant) {
                ++stats.gated_out;
                continue;
            }
            ++stats.runs;
            DelayBoundReport bounds =
                check_delay_bounds(result, config.alpha, config.server);
            if (!bounds.violations.empty()) {
                int p = bounds.violations.front();
                throw BoundViolationError(
                    "delay bound violated on a verifier-accepted run (seed " +
                    std::to_string(seed) + ", packet " + std::to_string(p) +
                    ", response " + fmt(result.responses[p - 1]) +
                    " s, slack " + fmt(bounds.slack[p - 1]) + " s)");
            }
            stats.max_response = std::max(stats.max_response, bounds.max_response);
            for (size_t i = 0; i < result.responses.size(); ++i) {
                Delay dl = improved_bound(config.alpha, config.server,
                                          trace.packets[i].length);
                if (dl && *dl > 0)
                    stats.max_fraction =
                        std::max(stats.max_fraction, result.responses[i] / *dl);
            }
        }
    }
    report.sim = stats;
    return report;
}

std::string trace_to_json(const Trace& trace, const std::vector<double>* starts,
                          const std::vector<double>* departures) {
    json obj;
    obj["L_max"] = trace.max_length;
    obj["packets"] = json::array();
    for (const auto& p : trace.packets)
        obj["packets"].push_back({{"A", p.arrival}, {"l", p.length}});
    if (starts && departures) {
        obj["schedule"] = json::array();
        for (size_t i = 0; i < starts->size(); ++i)
            obj["schedule"].push_back({{"Q", (*starts)[i]}, {"D", (*departures)[i]}});
    }
    return obj.dump(2) + "\n";
}

std::string worst_case_trace_to_json(const WorstCaseTrace& trace,
                                     double max_length) {
    Trace t{{}, max_length};
    for (size_t i = 0; i < trace.arrivals.size(); ++i)
        t.packets.push_back({static_cast<int>(i) + 1, trace.arrivals[i],
                             trace.lengths[i]});
    return trace_to_json(t, &trace.starts, &trace.departures);
}

Trace trace_from_json(const std::string& json_text) {
    json obj;
    try {
        obj = json::parse(json_text);
    } catch (const json::parse_error& e) {
        throw ConfigError(std::string("trace JSON parse error: ") + e.what());
    }
    check_keys(obj, {"L_max", "packets", "schedule"}, "trace");
    Trace trace{{}, number(obj, "L_max", "trace")};
    if (!obj.contains("packets") || !obj["packets"].is_array())
        throw ConfigError("trace needs a packets array");
    int index = 1;
    for (const auto& p : obj["packets"]) {
        check_keys(p, {"A", "l"}, "trace.packets[]");
        trace.packets.push_back(
            {index++, number(p, "A", "trace packet"), number(p, "l", "trace packet")});
    }
    try {
        trace.validate();
    } catch (const DomainError& e) {
        throw ConfigError(std::string("invalid trace: ") + e.what());
    }
    return trace;
}

std::string bound_csv(const RunReport& report) {
    std::string out =
        "scenario,length_bits,delta_s,delta_l_s,improvement_s,improvement_pct\n";
    for (const auto& [l, dl] : report.length_bounds) {
        out += report.scenario + "," + fmt(l) + ",";
        if (!report.delta || !dl) {
            out += "unbounded,unbounded,unbounded,unbounded\n";
            continue;
        }
        double improvement = *report.delta - *dl;
        double pct = (*report.delta > 0) ? improvement / *report.delta * 100 : 0;
        out += fmt(*report.delta) + "," + fmt(*dl) + "," + fmt(improvement) +
               "," + fmt(pct) + "\n";
    }
    return out;
}

}  // namespace ncdelay
