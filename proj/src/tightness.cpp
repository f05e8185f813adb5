#include "ncdelay/tightness.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace ncdelay {

namespace {

void check(bool cond, const char* what) {
    if (!cond)
        throw ConstructionError(std::string("worst-case construction: ") + what);
}

}  // namespace

double critical_time(const ConcaveArrivalCurve& alpha, const ServerSpec& server) {
    SupDeviation dev = sup_deviation(alpha, server.beta.rate);
    if (!dev.bounded)
        throw DomainError("critical time undefined: classical bound unbounded");
    return dev.t_star;
}

CumulativeFunction fluid_input(const ConcaveArrivalCurve& alpha,
                               double t_prime) {
    if (t_prime < 0) throw DomainError("critical time must be >= 0");
    const double mass = alpha.right_limit(t_prime);
    if (mass <= kTol) return CumulativeFunction::zero();

    std::vector<CumulativeFunction::Breakpoint> pts;
    const double burst = alpha.right_limit(0);
    pts.push_back({0, 0, burst, 0});
    if (mass <= burst + tol_for(burst)) return CumulativeFunction(std::move(pts));

    // Follow the envelope segment by segment until the mass is reached.
    const auto& pieces = alpha.pieces();
    const auto& kinks = alpha.breakpoints();
    double cur_t = 0;
    double cur_v = burst;
    for (size_t k = 0; k < pieces.size(); ++k) {
        double seg_end = (k < kinks.size())
                             ? kinks[k]
                             : std::numeric_limits<double>::infinity();
        double rate = pieces[k].rate;
        pts.back().slope = rate;
        double reach = (rate > 0)
                           ? (mass - pieces[k].burst) / rate
                           : std::numeric_limits<double>::infinity();
        if (reach <= seg_end + tol_for(seg_end)) {
            reach = std::max(reach, cur_t);
            pts.push_back({reach, mass, 0, 0});
            return CumulativeFunction(std::move(pts));
        }
        cur_v = pieces[k].burst + rate * seg_end;
        cur_t = seg_end;
        pts.push_back({cur_t, cur_v, 0, 0});
    }
    throw ConstructionError("fluid input never reaches alpha+(t')");
}

PacketLengthSequence packet_lengths(double total, double packet_of_interest,
                                    double max_length) {
    const double l = packet_of_interest;
    if (!(l > 0)) throw DomainError("packet of interest must have length > 0");
    if (l > max_length + tol_for(max_length))
        throw DomainError("packet of interest exceeds L_max");
    if (l > total + tol_for(total))
        throw DomainError("packet of interest exceeds the total mass");
    if (max_length > total + tol_for(total))
        throw DomainError("L_max exceeds the total mass");

    if (total - l <= tol_for(total)) return {{l}, max_length};

    int n = static_cast<int>(
                std::ceil((total - l) / max_length - 1e-12)) + 1;
    std::vector<double> lengths;
    for (int i = 0; i < n - 2; ++i) lengths.push_back(max_length);
    double remainder = total - (n - 2) * max_length - l;
    lengths.push_back(remainder);
    lengths.push_back(l);
    check(remainder > 0 && remainder <= max_length + tol_for(max_length),
          "remainder packet out of (0, L_max]");
    return {std::move(lengths), max_length};
}

std::vector<double> packetize(const CumulativeFunction& fluid,
                              const PacketLengthSequence& lengths) {
    auto mass = fluid.total();
    double sum = 0;
    for (double l : lengths.lengths) sum += l;
    if (!mass || std::abs(*mass - sum) > tol_for(sum))
        throw DomainError("packet lengths do not match the fluid mass");

    const auto& pts = fluid.points();
    std::vector<double> arrivals;
    double cum = 0;
    for (double l : lengths.lengths) {
        cum += l;
        const double y = cum - tol_for(cum);  // snap exact threshold hits
        double t = -1;
        for (size_t k = 0; k < pts.size(); ++k) {
            double rl = pts[k].value + pts[k].jump;
            if (rl >= y) {
                t = pts[k].time;
                break;
            }
            if (pts[k].slope > 0) {
                double seg_end = (k + 1 < pts.size())
                                     ? pts[k + 1].time
                                     : std::numeric_limits<double>::infinity();
                double reach = pts[k].time + (cum - rl) / pts[k].slope;
                if (reach <= seg_end) {
                    t = reach;
                    break;
                }
            }
        }
        check(t >= 0, "fluid input never reaches a packet boundary");
        if (!arrivals.empty()) t = std::max(t, arrivals.back());
        arrivals.push_back(t);
    }
    return arrivals;
}

std::pair<std::vector<double>, std::vector<double>> worst_case_schedule(
    const std::vector<double>& lengths, const ServerSpec& server) {
    std::vector<double> starts, departures;
    double served = 0;
    for (double l : lengths) {
        double q = server.beta.latency + served / server.beta.rate;
        starts.push_back(q);
        departures.push_back(q + l / server.line_rate);
        served += l;
    }
    return {std::move(starts), std::move(departures)};
}

WorstCaseTrace build_worst_case(const TightnessScenario& scenario) {
    const auto& alpha = scenario.alpha;
    const auto& server = scenario.server;
    const double burst = alpha.right_limit(0);
    if (scenario.max_length > burst + tol_for(burst))
        throw DomainError("scenario requires alpha+(0) >= L_max");
    if (!(scenario.packet_length > 0) ||
        scenario.packet_length > scenario.max_length + tol_for(scenario.max_length))
        throw DomainError("scenario requires 0 < l <= L_max");

    const double t_prime = critical_time(alpha, server);  // throws if unbounded
    const double mass = alpha.right_limit(t_prime);

    CumulativeFunction fluid = fluid_input(alpha, t_prime);
    PacketLengthSequence seq =
        packet_lengths(mass, scenario.packet_length, scenario.max_length);
    std::vector<double> arrivals = packetize(fluid, seq);

    check(std::abs(arrivals.back() - t_prime) <= tol_for(t_prime),
          "packet of interest does not arrive at t'");

    auto [starts, departures] = worst_case_schedule(seq.lengths, server);
    for (size_t i = 0; i + 1 < starts.size(); ++i) {
        check(starts[i] <= starts[i + 1] + kTol, "starts not FIFO-ordered");
        check(departures[i] <= starts[i + 1] + tol_for(starts[i + 1]),
              "transmissions overlap");
    }

    std::vector<std::pair<double, double>> jumps;
    for (size_t i = 0; i < arrivals.size(); ++i)
        jumps.emplace_back(arrivals[i], seq.lengths[i]);
    CumulativeFunction input = CumulativeFunction::staircase(jumps);
    CumulativeFunction flow = min_plus_convolve(input, server.beta);

    // Output from the schedule: slope c while a packet transmits.
    std::vector<std::pair<double, double>> knots;
    knots.emplace_back(0, 0);
    double served = 0;
    for (size_t i = 0; i < starts.size(); ++i) {
        if (starts[i] > knots.back().first + kTol)
            knots.emplace_back(starts[i], served);
        served += seq.lengths[i];
        knots.emplace_back(departures[i], served);
    }
    CumulativeFunction output = CumulativeFunction::piecewise_linear(knots);

    // O >= F at every breakpoint of either function and at all arrivals.
    std::vector<double> sample;
    for (const auto& p : output.points()) sample.push_back(p.time);
    for (const auto& p : flow.points()) sample.push_back(p.time);
    for (double a : arrivals) sample.push_back(a);
    for (double t : sample) {
        check(output.eval(t) >= flow.eval(t) - tol_for(flow.eval(t)),
              "schedule output falls below the service-curve floor");
        check(output.right_limit(t) >= flow.right_limit(t) -
                  tol_for(flow.right_limit(t)),
              "schedule output falls below the service-curve floor");
    }

    double response = departures.back() - arrivals.back();
    Delay expected = improved_bound(alpha, server, scenario.packet_length);
    check(expected.has_value(), "improved bound unbounded on a valid scenario");
    check(std::abs(response - *expected) <= kTol * (1 + std::abs(*expected)),
          "achieved response time differs from the improved bound");

    return WorstCaseTrace{std::move(arrivals), seq.lengths,
                          std::move(starts),  std::move(departures),
                          t_prime,            response,
                          std::move(fluid),   std::move(flow)};
}

}  // namespace ncdelay
