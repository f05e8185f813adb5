#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <random>

#include "ncdelay/simulator.hpp"
#include "ncdelay/tightness.hpp"

using namespace ncdelay;

namespace {

ServerSpec server(double R, double T, double c) {
    return ServerSpec(RateLatencyCurve(R, T), c);
}

Trace make_trace(std::vector<std::pair<double, double>> packets,
                 double max_length) {
    Trace trace{{}, max_length};
    int index = 1;
    for (auto [a, l] : packets) trace.packets.push_back({index++, a, l});
    return trace;
}

}  // namespace

TEST_CASE("greedy simulation basics") {
    auto spec = server(2000, 0.01, 10000);
    SUBCASE("single packet gets immediate service") {
        auto result = simulate(make_trace({{0, 1000}}, 1000),
                               SchedulerPolicy::greedy(), spec);
        CHECK(result.starts == std::vector<double>{0});
        CHECK(result.departures[0] == doctest::Approx(0.1));
    }
    SUBCASE("coincident arrivals serialize at the line rate") {
        auto result = simulate(make_trace({{0, 1000}, {0, 1000}}, 1000),
                               SchedulerPolicy::greedy(), spec);
        CHECK(result.starts[0] == 0.0);
        CHECK(result.starts[1] == doctest::Approx(0.1));
        CHECK(result.departures[1] == doctest::Approx(0.2));
    }
}

TEST_CASE("max-lazy reproduces the worst-case schedule on the constructed trace") {
    ConcaveArrivalCurve alpha({{4000, 1000}});
    auto spec = server(2000, 0.01, 10000);
    auto wc = build_worst_case({alpha, spec, 1000, 2000});
    Trace trace = make_trace({{0, 2000}, {0, 1000}, {0, 1000}}, 2000);
    auto result = simulate(trace, SchedulerPolicy::max_lazy(), spec);
    REQUIRE(result.starts.size() == wc.starts.size());
    for (size_t i = 0; i < wc.starts.size(); ++i) {
        CHECK(result.starts[i] == doctest::Approx(wc.starts[i]).epsilon(1e-12));
        CHECK(result.departures[i] ==
              doctest::Approx(wc.departures[i]).epsilon(1e-12));
    }
}

TEST_CASE("simulation invariants: FIFO order and cumulative consistency") {
    std::mt19937_64 rng(55);
    ConcaveArrivalCurve alpha({{5000, 2000}});
    auto spec = server(2500, 0.05, 10000);
    for (int seed = 0; seed < 30; ++seed) {
        Trace trace = random_conforming_trace(alpha, 4000, 5.0, seed);
        for (auto policy : {SchedulerPolicy::greedy(), SchedulerPolicy::max_lazy(),
                            SchedulerPolicy::jittered(seed)}) {
            auto result = simulate(trace, policy, spec);
            double total = 0;
            for (size_t n = 0; n < trace.packets.size(); ++n) {
                CHECK(result.starts[n] >= trace.packets[n].arrival - 1e-12);
                if (n > 0) {
                    CHECK(result.starts[n] >= result.starts[n - 1] - 1e-12);
                    CHECK(result.departures[n - 1] <= result.starts[n] + 1e-12);
                }
                CHECK(result.departures[n] ==
                      doctest::Approx(result.starts[n] +
                                      trace.packets[n].length / spec.line_rate));
                // O(Q_n) equals the bits of all packets served before n.
                CHECK(result.output.eval(result.starts[n]) ==
                      doctest::Approx(total).epsilon(1e-9));
                total += trace.packets[n].length;
            }
            if (!trace.packets.empty()) {
                CHECK(result.output.eval(result.departures.back()) ==
                      doctest::Approx(total).epsilon(1e-9));
                CHECK(*result.input.total() == doctest::Approx(total));
            }
            // Causality: output never exceeds the input.
            for (const auto& p : result.output.points()) {
                CHECK(result.output.eval(p.time) <=
                      result.input.right_limit(p.time) + tol_for(total));
            }
        }
    }
}

TEST_CASE("arrival conformance verifier") {
    ConcaveArrivalCurve alpha({{4000, 1000}});
    SUBCASE("empty trace conforms") {
        CHECK(verify_arrival_conformance(make_trace({}, 1000), alpha).conforms);
    }
    SUBCASE("double burst at one instant violates alpha") {
        auto verdict = verify_arrival_conformance(
            make_trace({{0, 4000}, {0, 4000}}, 4000), alpha);
        REQUIRE_FALSE(verdict.conforms);
        REQUIRE(verdict.violation.has_value());
        CHECK(verdict.violation->m == 1);
        CHECK(verdict.violation->n == 2);
        CHECK(verdict.violation->lhs == doctest::Approx(8000));
        CHECK(verdict.violation->rhs == doctest::Approx(4000));
    }
    SUBCASE("worst-case construction conforms to its own alpha") {
        auto wc = build_worst_case({alpha, server(2000, 0.01, 10000), 1000, 2000});
        Trace trace{{}, 2000};
        for (size_t i = 0; i < wc.arrivals.size(); ++i)
            trace.packets.push_back(
                {static_cast<int>(i) + 1, wc.arrivals[i], wc.lengths[i]});
        CHECK(verify_arrival_conformance(trace, alpha).conforms);
    }
}

TEST_CASE("service curve verifier") {
    SUBCASE("greedy at full line rate dominates a rate-c fluid server") {
        ConcaveArrivalCurve alpha({{5000, 1000}});
        auto spec = server(10000, 0, 10000);
        for (int seed = 0; seed < 10; ++seed) {
            Trace trace = random_conforming_trace(alpha, 2000, 3.0, seed);
            auto result = simulate(trace, SchedulerPolicy::greedy(), spec);
            CHECK(verify_service_curve(result, spec.beta).compliant);
        }
    }
    SUBCASE("a lone packet started too late is caught") {
        // beta = (R=1000, T=0.1): the fluid floor finishes 1000 bits at
        // t = 1.1, but this output only starts transmitting at t = 2.
        Trace trace = make_trace({{0, 1000}}, 1000);
        auto input = CumulativeFunction::staircase({{0.0, 1000.0}});
        auto output = CumulativeFunction::piecewise_linear(
            {{0.0, 0.0}, {2.0, 0.0}, {2.1, 1000.0}});
        SimResult result{{2.0}, {2.1}, {2.1}, input, output, trace};
        auto verdict = verify_service_curve(result, RateLatencyCurve(1000, 0.1));
        REQUIRE_FALSE(verdict.compliant);
        REQUIRE(verdict.violation.has_value());
        CHECK(verdict.violation->time > 0.1);
        CHECK(verdict.violation->output_value < verdict.violation->floor_value);
    }
    SUBCASE("max-lazy stays compliant") {
        ConcaveArrivalCurve alpha({{5000, 1000}});
        auto spec = server(2000, 0.2, 10000);
        for (int seed = 0; seed < 10; ++seed) {
            Trace trace = random_conforming_trace(alpha, 2000, 3.0, seed);
            auto result = simulate(trace, SchedulerPolicy::max_lazy(), spec);
            CHECK(verify_service_curve(result, spec.beta).compliant);
        }
    }
}

TEST_CASE("per-packet witness inequality") {
    ConcaveArrivalCurve alpha({{4000, 1000}});
    auto spec = server(2000, 0.01, 10000);
    SUBCASE("constructed worst case has a witness for every packet") {
        Trace trace = make_trace({{0, 2000}, {0, 1000}, {0, 1000}}, 2000);
        auto result = simulate(trace, SchedulerPolicy::max_lazy(), spec);
        auto verdict = verify_lemma1(result, spec.beta);
        CHECK(verdict.holds);
        CHECK(verdict.witnesses.size() == 3);
    }
    SUBCASE("single packet with a compliant schedule has witness m = 1") {
        auto result = simulate(make_trace({{0.5, 800}}, 800),
                               SchedulerPolicy::greedy(), spec);
        auto verdict = verify_lemma1(result, spec.beta);
        REQUIRE(verdict.holds);
        CHECK(verdict.witnesses[0] == 1);
    }
    SUBCASE("every verified random execution has witnesses") {
        for (int seed = 0; seed < 50; ++seed) {
            Trace trace = random_conforming_trace(alpha, 2000, 4.0, seed);
            for (auto policy :
                 {SchedulerPolicy::greedy(), SchedulerPolicy::max_lazy(),
                  SchedulerPolicy::jittered(seed)}) {
                auto result = simulate(trace, policy, spec);
                if (!verify_service_curve(result, spec.beta).compliant) continue;
                CHECK(verify_lemma1(result, spec.beta).holds);
            }
        }
    }
}

TEST_CASE("delay bound reporting") {
    ConcaveArrivalCurve alpha({{4000, 1000}});
    auto spec = server(2000, 0.01, 10000);
    Trace trace = make_trace({{0, 2000}, {0, 1000}, {0, 1000}}, 2000);
    SUBCASE("worst case attains zero slack on the packet of interest") {
        auto result = simulate(trace, SchedulerPolicy::max_lazy(), spec);
        auto report = check_delay_bounds(result, alpha, spec);
        CHECK(report.violations.empty());
        CHECK(report.slack.back() == doctest::Approx(0).epsilon(1e-9));
    }
    SUBCASE("greedy leaves strictly positive slack when T > 0") {
        auto result = simulate(trace, SchedulerPolicy::greedy(), spec);
        auto report = check_delay_bounds(result, alpha, spec);
        CHECK(report.violations.empty());
        for (double s : report.slack) CHECK(s > 0);
    }
    SUBCASE("empty trace gives an empty report") {
        auto result = simulate(make_trace({}, 1000),
                               SchedulerPolicy::greedy(), spec);
        auto report = check_delay_bounds(result, alpha, spec);
        CHECK(report.slack.empty());
        CHECK(report.max_response == 0.0);
    }
}

TEST_CASE("random conforming trace generator") {
    ConcaveArrivalCurve alpha({{5000, 2000}});
    SUBCASE("zero horizon gives an empty trace") {
        CHECK(random_conforming_trace(alpha, 2000, 0, 1).packets.size() <= 1);
    }
    SUBCASE("deterministic per seed") {
        auto a = random_conforming_trace(alpha, 2000, 5.0, 42);
        auto b = random_conforming_trace(alpha, 2000, 5.0, 42);
        REQUIRE(a.packets.size() == b.packets.size());
        for (size_t i = 0; i < a.packets.size(); ++i) {
            CHECK(a.packets[i].arrival == b.packets[i].arrival);
            CHECK(a.packets[i].length == b.packets[i].length);
        }
    }
    SUBCASE("generated traces conform by construction") {
        for (int seed = 0; seed < 50; ++seed) {
            auto trace = random_conforming_trace(alpha, 2000, 5.0, seed);
            CHECK(verify_arrival_conformance(trace, alpha).conforms);
        }
    }
}

TEST_CASE("soundness mini-sweep: no bound violations on verified executions") {
    ConcaveArrivalCurve alpha({{6000, 1500}});
    auto spec = server(2000, 0.1, 8000);
    Delay delta = classic_bound(alpha, spec);
    REQUIRE(delta.has_value());
    int verified = 0;
    for (int seed = 0; seed < 40; ++seed) {
        Trace trace = random_conforming_trace(alpha, 3000, 4.0, seed);
        for (auto policy : {SchedulerPolicy::greedy(), SchedulerPolicy::max_lazy(),
                            SchedulerPolicy::jittered(seed)}) {
            auto result = simulate(trace, policy, spec);
            if (!verify_service_curve(result, spec.beta).compliant) continue;
            ++verified;
            auto report = check_delay_bounds(result, alpha, spec);
            CHECK(report.violations.empty());
        }
    }
    CHECK(verified > 0);
}
