#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "ncdelay/curves.hpp"

// Delay bounds for a FIFO element with a rate-latency service curve and a
// known line rate: the classical horizontal-deviation bound, the improved
// per-packet-length bound, per-flow variants, and DRR parameters.

namespace ncdelay {

// An unbounded delay is a first-class value, not an error.
using Delay = std::optional<double>;  // seconds; nullopt = unbounded

// Rate-latency guarantee plus the physical line rate.
struct ServerSpec {
    RateLatencyCurve beta;
    double line_rate;  // c, bits/second, >= beta.rate

    ServerSpec(RateLatencyCurve b, double c);
};

struct FlowSpec {
    std::string name;
    double min_packet_length;  // L_min, bits, > 0
    double max_packet_length;  // bits, >= min_packet_length
};

struct BoundReport {
    Delay delta;                          // classical bound
    std::map<double, double> delta_l;     // packet length -> improved bound
    std::optional<double> critical_time;  // t' when bounded
};

// Classical bound: T + sup_{t>=0}{alpha(t)/R - t}; nullopt when the
// supremum is infinite.
Delay classic_bound(const ConcaveArrivalCurve& alpha, const ServerSpec& server);

// Improved per-packet bound: Delta - l*(1/R - 1/c). Requires
// 0 <= l <= alpha+(0); a longer packet cannot conform to alpha.
Delay improved_bound(const ConcaveArrivalCurve& alpha, const ServerSpec& server,
                     double packet_length);

// One bound per flow, at that flow's minimum packet length (the worst case
// over the flow's packets, since the bound decreases with length).
std::map<std::string, Delay> per_flow_bounds(const ConcaveArrivalCurve& alpha,
                                             const ServerSpec& server,
                                             const std::vector<FlowSpec>& flows);

// DRR service curve for one of n flows sharing a line of rate c, quantum Q,
// maximum packet length L: R = Q*c/(n*Q), T = (n-1)(L+Q)/c + L(1/R - 1/c).
ServerSpec drr_service_curve(int n_flows, double line_rate, double max_packet,
                             double quantum);

}  // namespace ncdelay
