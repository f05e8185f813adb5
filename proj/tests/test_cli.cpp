#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <string>

#include "ncdelay/scenario.hpp"

using namespace ncdelay;
namespace fs = std::filesystem;

namespace {

const char* kReferenceConfig = R"({
  "alpha": {"pieces": [{"burst": 4000, "rate": 1000}]},
  "server": {"R": 2000, "T": 0.01, "c": 10000},
  "lengths": [1000],
  "L_max": 2000,
  "sim": {"policy": "all", "seeds": 5, "horizon": 5}
})";

fs::path tmp_dir() {
    fs::path dir = NCDELAY_TMP_DIR;
    fs::create_directories(dir);
    return dir;
}

fs::path write_tmp(const std::string& name, const std::string& content) {
    fs::path p = tmp_dir() / name;
    std::ofstream out(p);
    out << content;
    return p;
}

int run_cli(const std::string& args) {
    std::string cmd = std::string(NCDELAY_CLI_PATH) + " " + args +
                      " > /dev/null 2>&1";
    int status = std::system(cmd.c_str());
    return WEXITSTATUS(status);
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p);
    return std::string(std::istreambuf_iterator<char>(in),
                       std::istreambuf_iterator<char>());
}

}  // namespace

TEST_CASE("config parsing and validation") {
    SUBCASE("reference config") {
        auto config = parse_config(kReferenceConfig, "ref");
        CHECK(config.alpha.right_limit(0) == doctest::Approx(4000));
        CHECK(config.server.beta.rate == 2000);
        CHECK(config.server.line_rate == 10000);
        CHECK(config.lengths == std::vector<double>{1000});
        REQUIRE(config.max_length.has_value());
        CHECK(*config.max_length == 2000);
        REQUIRE(config.sim.has_value());
        CHECK(config.sim->seeds == 5);
    }
    SUBCASE("unknown keys are rejected") {
        CHECK_THROWS_AS(parse_config(R"({"alpha": {"pieces": [{"burst": 1,
            "rate": 1}]}, "server": {"R": 1, "T": 0, "c": 1}, "bogus": 1})",
                                     "x"),
                        ConfigError);
        CHECK_THROWS_AS(parse_config(R"({"alpha": {"pieces": [{"burst": 1,
            "rate": 1, "extra": 2}]}, "server": {"R": 1, "T": 0, "c": 1}})",
                                     "x"),
                        ConfigError);
    }
    SUBCASE("malformed JSON is a config error") {
        CHECK_THROWS_AS(parse_config("{nope", "x"), ConfigError);
    }
    SUBCASE("units normalize to bits and seconds") {
        auto config = parse_config(R"({
            "alpha": {"pieces": [{"burst": 1.5, "rate": 100}]},
            "server": {"R": 600, "T": 40, "c": 1000},
            "lengths": [1.499],
            "units": {"data": "KB", "time": "us", "rate": "Mbps"}
        })",
                                   "units");
        CHECK(config.alpha.right_limit(0) == doctest::Approx(1.5 * 8000));
        CHECK(config.server.beta.rate == doctest::Approx(600e6));
        CHECK(config.server.beta.latency == doctest::Approx(40e-6));
        CHECK(config.server.line_rate == doctest::Approx(1e9));
        CHECK(config.lengths[0] == doctest::Approx(11992));
    }
    SUBCASE("DRR server block") {
        auto config = parse_config(R"({
            "alpha": {"pieces": [{"burst": 1000, "rate": 100}]},
            "server": {"drr": {"n": 2, "c": 1e6, "L": 1000, "Q": 1000}}
        })",
                                   "drr");
        CHECK(config.server.beta.rate == doctest::Approx(5e5));
        CHECK(config.server.beta.latency == doctest::Approx(0.003));
    }
    SUBCASE("CBS server block") {
        auto config = parse_config(R"({
            "alpha": {"pieces": [{"burst": 12000, "rate": 0}]},
            "server": {"cbs": {"c": 1e9, "idle_slope": 0.6}}
        })",
                                   "cbs");
        CHECK(config.server.beta.rate == doctest::Approx(0.6e9));
        CHECK(config.server.beta.latency == 0.0);
    }
}

TEST_CASE("run_bound report") {
    auto config = parse_config(kReferenceConfig, "ref");
    auto report = run_bound(config);
    REQUIRE(report.delta.has_value());
    CHECK(*report.delta == doctest::Approx(2.01).epsilon(1e-12));
    REQUIRE(report.length_bounds.size() == 1);
    CHECK(*report.length_bounds[0].second == doctest::Approx(1.61).epsilon(1e-12));
    for (const auto& [l, dl] : report.length_bounds)
        CHECK(*dl <= *report.delta);
}

TEST_CASE("CSV output is fixed-format and deterministic") {
    auto config = parse_config(kReferenceConfig, "ref");
    auto csv1 = bound_csv(run_bound(config));
    auto csv2 = bound_csv(run_bound(config));
    CHECK(csv1 == csv2);
    CHECK(csv1.rfind("scenario,length_bits,delta_s,delta_l_s,improvement_s,"
                     "improvement_pct\n", 0) == 0);
    CHECK(csv1.find("ref,1000,2.01,1.61,0.4,") != std::string::npos);
}

TEST_CASE("unbounded scenarios report as unbounded") {
    auto config = parse_config(R"({
        "alpha": {"pieces": [{"burst": 1000, "rate": 3000}]},
        "server": {"R": 2000, "T": 0.01, "c": 10000},
        "lengths": [500]
    })",
                               "ub");
    auto report = run_bound(config);
    CHECK_FALSE(report.delta.has_value());
    CHECK(bound_csv(report).find("unbounded") != std::string::npos);
}

TEST_CASE("trace files round-trip to identical simulations") {
    auto config = parse_config(kReferenceConfig, "ref");
    Trace trace = random_conforming_trace(config.alpha, 2000, 5.0, 9);
    std::string json = trace_to_json(trace);
    Trace back = trace_from_json(json);
    REQUIRE(back.packets.size() == trace.packets.size());
    auto a = simulate(trace, SchedulerPolicy::jittered(3), config.server);
    auto b = simulate(back, SchedulerPolicy::jittered(3), config.server);
    for (size_t i = 0; i < a.starts.size(); ++i) {
        CHECK(a.starts[i] == b.starts[i]);
        CHECK(a.departures[i] == b.departures[i]);
    }
}

TEST_CASE("tightness run produces a verified report") {
    auto config = parse_config(kReferenceConfig, "ref");
    auto [report, trace] = run_tightness(config);
    REQUIRE(report.achieved_response.has_value());
    CHECK(*report.achieved_response == doctest::Approx(1.61).epsilon(1e-12));
    CHECK(report.conformance_ok);
    CHECK(report.service_ok);
    CHECK(trace.lengths.size() == 3);
}

TEST_CASE("infeasible tightness scenarios name the violated hypothesis") {
    auto config = parse_config(R"({
        "alpha": {"pieces": [{"burst": 1000, "rate": 100}]},
        "server": {"R": 2000, "T": 0.01, "c": 10000},
        "lengths": [500],
        "L_max": 4000
    })",
                               "bad");
    try {
        run_tightness(config);
        FAIL("expected InfeasibleError");
    } catch (const InfeasibleError& e) {
        CHECK(std::string(e.what()).find("alpha+(0) >= L_max") !=
              std::string::npos);
    }
}

TEST_CASE("simulation campaign reports and gates") {
    auto config = parse_config(kReferenceConfig, "ref");
    auto report = run_simulate(config);
    REQUIRE(report.sim.has_value());
    CHECK(report.sim->runs > 0);
    CHECK(report.sim->max_fraction <= 1.0 + 1e-9);
    SUBCASE("non-conforming supplied traces are rejected") {
        Trace bad{{{1, 0, 4000}, {2, 0, 4000}}, 4000};
        CHECK_THROWS_AS(run_simulate(config, bad), GateError);
    }
}

TEST_CASE("cli exit codes") {
    auto config_path = write_tmp("ref.json", kReferenceConfig);
    SUBCASE("bound: ok") {
        CHECK(run_cli("bound " + config_path.string()) == 0);
    }
    SUBCASE("bound: config error is exit 2") {
        auto bad = write_tmp("bad.json", "{broken");
        CHECK(run_cli("bound " + bad.string()) == 2);
        CHECK(run_cli("bound /nonexistent/file.json") == 2);
    }
    SUBCASE("tightness: ok, writes the trace file") {
        auto trace_path = tmp_dir() / "wc_trace.json";
        CHECK(run_cli("tightness " + config_path.string() + " --trace-out " +
                      trace_path.string()) == 0);
        Trace trace = trace_from_json(slurp(trace_path));
        CHECK(trace.packets.size() == 3);
    }
    SUBCASE("tightness: infeasible scenario is exit 3") {
        auto bad = write_tmp("infeasible.json", R"({
            "alpha": {"pieces": [{"burst": 1000, "rate": 100}]},
            "server": {"R": 2000, "T": 0.01, "c": 10000},
            "lengths": [500], "L_max": 4000})");
        CHECK(run_cli("tightness " + bad.string()) == 3);
        auto unbounded = write_tmp("unbounded.json", R"({
            "alpha": {"pieces": [{"burst": 4000, "rate": 9000}]},
            "server": {"R": 2000, "T": 0.01, "c": 10000},
            "lengths": [500], "L_max": 2000})");
        CHECK(run_cli("tightness " + unbounded.string()) == 3);
    }
    SUBCASE("simulate: corrupted trace is exit 5") {
        auto trace_path = write_tmp("corrupt_trace.json", R"({
            "L_max": 4000,
            "packets": [{"A": 0, "l": 4000}, {"A": 0, "l": 4000}]})");
        CHECK(run_cli("simulate " + config_path.string() + " --trace " +
                      trace_path.string()) == 5);
    }
    SUBCASE("simulate: zero seeds is ok") {
        CHECK(run_cli("simulate " + config_path.string() + " --seeds 0") == 0);
    }
    SUBCASE("casestudy runs") {
        auto csv_path = tmp_dir() / "drr.csv";
        CHECK(run_cli("casestudy drr --param n=4 --csv " + csv_path.string()) ==
              0);
        std::string csv = slurp(csv_path);
        CHECK(csv.find("drr_n4") != std::string::npos);
        CHECK(run_cli("casestudy cbs") == 0);
    }
}
