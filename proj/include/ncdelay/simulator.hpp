#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "ncdelay/bounds.hpp"
#include "ncdelay/curves.hpp"

// Discrete-event execution of the FIFO element under pluggable start-time
// policies, plus verifiers for arrival-curve conformance, the service-curve
// guarantee, the per-packet witness inequality, and the delay bounds.

namespace ncdelay {

struct Packet {
    int index;       // 1-based, in arrival order
    double arrival;  // A_n, seconds, nondecreasing
    double length;   // l_n, bits, > 0
};

struct Trace {
    std::vector<Packet> packets;
    double max_length;  // L_max, bits; every packet length <= L_max

    void validate() const;
};

enum class PolicyKind { Greedy, MaxLazy, Jittered };

struct SchedulerPolicy {
    PolicyKind kind = PolicyKind::Greedy;
    std::uint64_t seed = 0;  // used by Jittered only

    static SchedulerPolicy greedy() { return {PolicyKind::Greedy, 0}; }
    static SchedulerPolicy max_lazy() { return {PolicyKind::MaxLazy, 0}; }
    static SchedulerPolicy jittered(std::uint64_t seed) {
        return {PolicyKind::Jittered, seed};
    }
};

struct SimResult {
    std::vector<double> starts;      // Q_n
    std::vector<double> departures;  // D_n = Q_n + l_n/c
    std::vector<double> responses;   // D_n - A_n
    CumulativeFunction input;        // I: jumps at A_n
    CumulativeFunction output;       // O: slope c during transmissions
    Trace trace;
};

// Greedy starts each packet as soon as possible (Q_n = max(A_n, D_{n-1}));
// max-lazy delays to the latest start the service curve still permits
// (Q_n = max(A_n, D_{n-1}, T + sum_{i<n} l_i / R)); jittered draws each
// start uniformly between the two, deterministically per seed.
SimResult simulate(const Trace& trace, const SchedulerPolicy& policy,
                   const ServerSpec& server);

struct ConformanceWitness {
    int m, n;          // offending packet pair, 1-based
    double lhs, rhs;   // sum of lengths vs alpha+(A_n - A_m)
};

struct ConformanceVerdict {
    bool conforms = true;
    std::optional<ConformanceWitness> violation;
};

// Checks sum_{k=m}^{n} l_k <= alpha+(A_n - A_m) for all pairs m <= n.
ConformanceVerdict verify_arrival_conformance(const Trace& trace,
                                              const ConcaveArrivalCurve& alpha);

struct ServiceWitness {
    double time;
    double output_value, floor_value;  // O(t) vs (I conv beta)(t)
};

struct ServiceVerdict {
    bool compliant = true;
    std::optional<ServiceWitness> violation;
};

// Checks O >= I conv beta at every breakpoint of either function and at
// all packet event times; exhaustive since everything is piecewise linear.
ServiceVerdict verify_service_curve(const SimResult& result,
                                    const RateLatencyCurve& beta);

struct Lemma1Verdict {
    bool holds = true;
    std::vector<int> witnesses;       // witness m per packet, 1-based
    int failing_packet = 0;           // set when !holds
};

// For each packet n, finds m <= n with beta(Q_n - A_m) <= sum_{k=m}^{n-1} l_k.
Lemma1Verdict verify_lemma1(const SimResult& result,
                            const RateLatencyCurve& beta);

struct DelayBoundReport {
    double max_response = 0;
    std::vector<double> slack;  // Delta_{l_n} - (D_n - A_n) per packet
    std::vector<int> violations;  // packets with slack below -1e-9 * Delta
};

DelayBoundReport check_delay_bounds(const SimResult& result,
                                    const ConcaveArrivalCurve& alpha,
                                    const ServerSpec& server);

// Randomized packet stream that conforms to alpha by construction: each
// packet is admitted at the earliest time keeping every pairwise constraint
// satisfied, with random lengths in (0, L_max] and random idle gaps.
// Deterministic per seed.
Trace random_conforming_trace(const ConcaveArrivalCurve& alpha,
                              double max_length, double horizon,
                              std::uint64_t seed);

}  // namespace ncdelay
