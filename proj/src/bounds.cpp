#include "ncdelay/bounds.hpp"

#include <cmath>

namespace ncdelay {

ServerSpec::ServerSpec(RateLatencyCurve b, double c) : beta(b), line_rate(c) {
    if (!(std::isfinite(c) && c > 0))
        throw DomainError("line rate must be finite and > 0");
    if (c < beta.rate - tol_for(beta.rate))
        throw DomainError("line rate must be >= service rate");
}

Delay classic_bound(const ConcaveArrivalCurve& alpha, const ServerSpec& server) {
    SupDeviation dev = sup_deviation(alpha, server.beta.rate);
    if (!dev.bounded) return std::nullopt;
    return server.beta.latency + dev.value / server.beta.rate;
}

Delay improved_bound(const ConcaveArrivalCurve& alpha, const ServerSpec& server,
                     double packet_length) {
    if (packet_length < 0)
        throw DomainError("packet length must be >= 0");
    double burst = alpha.right_limit(0);
    if (packet_length > burst + tol_for(burst))
        throw DomainError("packet length exceeds alpha+(0); cannot conform");
    Delay delta = classic_bound(alpha, server);
    if (!delta) return std::nullopt;
    return *delta -
           packet_length * (1.0 / server.beta.rate - 1.0 / server.line_rate);
}

std::map<std::string, Delay> per_flow_bounds(const ConcaveArrivalCurve& alpha,
                                             const ServerSpec& server,
                                             const std::vector<FlowSpec>& flows) {
    std::map<std::string, Delay> out;
    for (const auto& f : flows) {
        if (!(f.min_packet_length > 0))
            throw DomainError("flow minimum packet length must be > 0");
        if (f.min_packet_length > f.max_packet_length)
            throw DomainError("flow minimum packet length exceeds maximum");
        out[f.name] = improved_bound(alpha, server, f.min_packet_length);
    }
    return out;
}

ServerSpec drr_service_curve(int n_flows, double line_rate, double max_packet,
                             double quantum) {
    if (n_flows < 1) throw DomainError("DRR needs n >= 1 flows");
    if (!(line_rate > 0)) throw DomainError("DRR line rate must be > 0");
    if (!(max_packet > 0)) throw DomainError("DRR max packet must be > 0");
    if (!(quantum > 0)) throw DomainError("DRR quantum must be > 0");
    double R = quantum * line_rate / (n_flows * quantum);
    double T = (n_flows - 1) * (max_packet + quantum) / line_rate +
               max_packet * (1.0 / R - 1.0 / line_rate);
    return ServerSpec(RateLatencyCurve(R, T), line_rate);
}

}  // namespace ncdelay
