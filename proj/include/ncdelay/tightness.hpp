#pragma once

#include <stdexcept>
#include <vector>

#include "ncdelay/bounds.hpp"
#include "ncdelay/curves.hpp"

// Construction of the worst-case execution trace: a fluid greedy input
// truncated at the critical time, packetized into a train whose last packet
// is the packet of interest, scheduled as late as the service curve allows.
// The packet of interest's response time attains the improved bound exactly.

namespace ncdelay {

// Lengths of the constructed packet train; last entry is the packet of
// interest.
struct PacketLengthSequence {
    std::vector<double> lengths;  // bits, each in (0, L_max]
    double max_length;            // L_max, bits
};

struct TightnessScenario {
    ConcaveArrivalCurve alpha;
    ServerSpec server;
    double packet_length;  // l, bits, 0 < l <= max_length
    double max_length;     // L_max, bits, <= alpha+(0)
};

struct WorstCaseTrace {
    std::vector<double> arrivals;      // A_j, seconds, nondecreasing
    std::vector<double> lengths;       // l_j, bits
    std::vector<double> starts;        // Q_j, seconds
    std::vector<double> departures;    // D_j = Q_j + l_j/c
    double critical_time;              // t' = A_n
    double achieved_response;          // D_n - A_n
    CumulativeFunction fluid_input;    // truncated fluid arrivals
    CumulativeFunction fluid_output;   // convolution of packetized input with beta
};

// Raised when an internal consistency assertion of the construction fails;
// the construction is guaranteed to succeed on valid scenarios, so this
// signals a library bug.
struct ConstructionError : std::logic_error {
    using std::logic_error::logic_error;
};

// Smallest t' >= 0 with Delta = T + alpha+(t')/R - t'. Throws DomainError
// when the classical bound is unbounded.
double critical_time(const ConcaveArrivalCurve& alpha, const ServerSpec& server);

// Fluid input min(alpha(t), alpha+(t')): follows alpha's envelope (with the
// alpha+(0) jump at 0) until the total mass alpha+(t') is reached, then flat.
CumulativeFunction fluid_input(const ConcaveArrivalCurve& alpha,
                               double t_prime);

// Packet train: n-2 maximum-length packets, a remainder, then the packet of
// interest; sums to `total`. total == l degenerates to the single packet.
PacketLengthSequence packet_lengths(double total, double packet_of_interest,
                                    double max_length);

// Arrival instants A_j = inf{t >= 0 : fluid right-limit >= L(j)}.
std::vector<double> packetize(const CumulativeFunction& fluid,
                              const PacketLengthSequence& lengths);

// Start/finish times Q_i = T + sum_{j<i} l_j / R, D_i = Q_i + l_i/c.
std::pair<std::vector<double>, std::vector<double>> worst_case_schedule(
    const std::vector<double>& lengths, const ServerSpec& server);

// Full composition; checks every invariant of the construction and that the
// achieved response time equals the improved bound.
WorstCaseTrace build_worst_case(const TightnessScenario& scenario);

}  // namespace ncdelay
