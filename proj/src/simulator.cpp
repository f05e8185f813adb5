#include "ncdelay/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

namespace ncdelay {

void Trace::validate() const {
    double prev = 0;
    for (size_t i = 0; i < packets.size(); ++i) {
        const auto& p = packets[i];
        if (p.index != static_cast<int>(i) + 1)
            throw DomainError("trace packets must be indexed 1..N in order");
        if (!(p.length > 0)) throw DomainError("packet length must be > 0");
        if (p.length > max_length + tol_for(max_length))
            throw DomainError("packet length exceeds L_max");
        if (p.arrival < prev - kTol)
            throw DomainError("packet arrivals must be nondecreasing");
        if (p.arrival < 0) throw DomainError("packet arrival must be >= 0");
        prev = p.arrival;
    }
}

SimResult simulate(const Trace& trace, const SchedulerPolicy& policy,
                   const ServerSpec& server) {
    trace.validate();
    const double c = server.line_rate;
    const double R = server.beta.rate;
    const double T = server.beta.latency;

    std::mt19937_64 rng(policy.seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);

    std::vector<double> starts, departures, responses;
    double prev_departure = 0;
    double served_before = 0;  // sum of lengths of packets before n
    for (const auto& p : trace.packets) {
        double earliest = std::max(p.arrival, prev_departure);
        double lazy = std::max(earliest, T + served_before / R);
        double q;
        switch (policy.kind) {
            case PolicyKind::Greedy:   q = earliest; break;
            case PolicyKind::MaxLazy:  q = lazy; break;
            case PolicyKind::Jittered: q = earliest + unit(rng) * (lazy - earliest); break;
            default:                   q = earliest; break;
        }
        starts.push_back(q);
        departures.push_back(q + p.length / c);
        responses.push_back(departures.back() - p.arrival);
        prev_departure = departures.back();
        served_before += p.length;
    }

    std::vector<std::pair<double, double>> jumps;
    for (const auto& p : trace.packets) jumps.emplace_back(p.arrival, p.length);
    CumulativeFunction input = CumulativeFunction::staircase(jumps);

    std::vector<std::pair<double, double>> knots;
    knots.emplace_back(0, 0);
    double served = 0;
    for (size_t i = 0; i < starts.size(); ++i) {
        if (starts[i] > knots.back().first + kTol)
            knots.emplace_back(starts[i], served);
        served += trace.packets[i].length;
        knots.emplace_back(departures[i], served);
    }
    CumulativeFunction output = trace.packets.empty()
                                    ? CumulativeFunction::zero()
                                    : CumulativeFunction::piecewise_linear(knots);

    return SimResult{std::move(starts),  std::move(departures),
                     std::move(responses), std::move(input),
                     std::move(output),  trace};
}

ConformanceVerdict verify_arrival_conformance(const Trace& trace,
                                              const ConcaveArrivalCurve& alpha) {
    const auto& pk = trace.packets;
    std::vector<double> prefix(pk.size() + 1, 0);
    for (size_t i = 0; i < pk.size(); ++i)
        prefix[i + 1] = prefix[i] + pk[i].length;
    for (size_t n = 0; n < pk.size(); ++n) {
        for (size_t m = 0; m <= n; ++m) {
            double lhs = prefix[n + 1] - prefix[m];
            double rhs = alpha.right_limit(pk[n].arrival - pk[m].arrival);
            if (lhs > rhs + tol_for(rhs)) {
                return {false,
                        ConformanceWitness{static_cast<int>(m) + 1,
                                           static_cast<int>(n) + 1, lhs, rhs}};
            }
        }
    }
    return {true, std::nullopt};
}

ServiceVerdict verify_service_curve(const SimResult& result,
                                    const RateLatencyCurve& beta) {
    CumulativeFunction floor = min_plus_convolve(result.input, beta);
    std::vector<double> sample;
    for (const auto& p : result.output.points()) sample.push_back(p.time);
    for (const auto& p : floor.points()) sample.push_back(p.time);
    for (const auto& p : result.trace.packets) sample.push_back(p.arrival);
    for (double t : result.starts) sample.push_back(t);
    for (double t : result.departures) sample.push_back(t);
    std::sort(sample.begin(), sample.end());
    for (double t : sample) {
        double o = result.output.eval(t);
        double f = floor.eval(t);
        if (o < f - tol_for(f)) return {false, ServiceWitness{t, o, f}};
        o = result.output.right_limit(t);
        f = floor.right_limit(t);
        if (o < f - tol_for(f)) return {false, ServiceWitness{t, o, f}};
    }
    return {true, std::nullopt};
}

Lemma1Verdict verify_lemma1(const SimResult& result,
                            const RateLatencyCurve& beta) {
    const auto& pk = result.trace.packets;
    Lemma1Verdict verdict;
    std::vector<double> prefix(pk.size() + 1, 0);
    for (size_t i = 0; i < pk.size(); ++i)
        prefix[i + 1] = prefix[i] + pk[i].length;
    for (size_t n = 0; n < pk.size(); ++n) {
        bool found = false;
        for (size_t m = 0; m <= n; ++m) {
            double gap = std::max(0.0, result.starts[n] - pk[m].arrival);
            double rhs = prefix[n] - prefix[m];  // lengths m..n-1
            if (beta.eval(gap) <= rhs + tol_for(rhs)) {
                verdict.witnesses.push_back(static_cast<int>(m) + 1);
                found = true;
                break;
            }
        }
        if (!found) {
            verdict.holds = false;
            verdict.failing_packet = static_cast<int>(n) + 1;
            return verdict;
        }
    }
    return verdict;
}

DelayBoundReport check_delay_bounds(const SimResult& result,
                                    const ConcaveArrivalCurve& alpha,
                                    const ServerSpec& server) {
    DelayBoundReport report;
    Delay delta = classic_bound(alpha, server);
    for (size_t n = 0; n < result.trace.packets.size(); ++n) {
        report.max_response = std::max(report.max_response, result.responses[n]);
        if (!delta) {
            report.slack.push_back(std::numeric_limits<double>::infinity());
            continue;
        }
        Delay bound =
            improved_bound(alpha, server, result.trace.packets[n].length);
        double slack = *bound - result.responses[n];
        report.slack.push_back(slack);
        if (slack < -kTol * (1 + std::abs(*delta)))
            report.violations.push_back(static_cast<int>(n) + 1);
    }
    return report;
}

Trace random_conforming_trace(const ConcaveArrivalCurve& alpha,
                              double max_length, double horizon,
                              std::uint64_t seed) {
    double burst = alpha.right_limit(0);
    if (max_length > burst + tol_for(burst))
        throw DomainError("random trace requires alpha+(0) >= L_max");
    if (horizon < 0) throw DomainError("horizon must be >= 0");

    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    constexpr size_t kMaxPackets = 400;

    Trace trace{{}, max_length};
    while (trace.packets.size() < kMaxPackets) {
        double u = unit(rng);
        double len = (u < 0.25) ? max_length : max_length * (0.05 + 0.95 * unit(rng));
        // Earliest admission time keeping every pairwise constraint valid.
        double t = trace.packets.empty() ? 0.0 : trace.packets.back().arrival;
        bool feasible = true;
        double window_sum = len;
        for (size_t m = trace.packets.size(); m-- > 0;) {
            window_sum += trace.packets[m].length;
            auto gap = alpha.time_to_reach(window_sum);
            if (!gap) {
                feasible = false;
                break;
            }
            t = std::max(t, trace.packets[m].arrival + *gap);
        }
        if (!feasible) break;
        if (unit(rng) < 0.3) t += unit(rng) * horizon * 0.1;  // idle gap
        if (t > horizon || horizon == 0) break;
        trace.packets.push_back(
            {static_cast<int>(trace.packets.size()) + 1, t, len});
    }
    return trace;
}

}  // namespace ncdelay
