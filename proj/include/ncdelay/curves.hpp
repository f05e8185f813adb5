#pragma once

#include <optional>
#include <stdexcept>
#include <vector>

// Piecewise-linear curve algebra: concave arrival curves (min of affine
// pieces), rate-latency service curves, and left-continuous cumulative
// functions, plus the min-plus/max-plus primitives built on them.
//
// Units are bits and seconds everywhere; rates are bits/second.

namespace ncdelay {

// Global comparison tolerance: hybrid absolute/relative, 1e-9 * (1 + |x|).
inline constexpr double kTol = 1e-9;

inline double tol_for(double magnitude) {
    return kTol * (1.0 + (magnitude < 0 ? -magnitude : magnitude));
}

// a >= b up to tolerance
inline bool approx_ge(double a, double b) { return a >= b - tol_for(b); }
inline bool approx_eq(double a, double b) {
    double d = a - b;
    if (d < 0) d = -d;
    return d <= tol_for(a > b ? a : b);
}

struct DomainError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

// One affine piece b + r*t of a concave arrival curve.
struct AffinePiece {
    double burst = 0;  // bits, >= 0
    double rate = 0;   // bits/second, >= 0
};

// alpha(t) = min over pieces of (burst + rate*t) for t > 0, alpha(0) = 0.
// Construction normalizes: pieces are sorted by rate descending and pieces
// that are nowhere the minimum are dropped. Invalid pieces are rejected.
class ConcaveArrivalCurve {
public:
    explicit ConcaveArrivalCurve(std::vector<AffinePiece> pieces);

    const std::vector<AffinePiece>& pieces() const { return pieces_; }

    // alpha(t); alpha(0) = 0 by convention, continuous for t > 0.
    double eval(double t) const;
    // alpha+(t) = lim_{s->t+} alpha(s); equals min burst at t = 0.
    double right_limit(double t) const;

    // Min burst over surviving pieces = alpha+(0).
    double initial_burst() const { return pieces_.front().burst; }
    // Long-run rate = min rate over surviving pieces.
    double long_run_rate() const { return pieces_.back().rate; }

    // Envelope kinks: times where the active piece changes, strictly
    // increasing, one entry per adjacent pair of surviving pieces.
    const std::vector<double>& breakpoints() const { return breakpoints_; }

    // Smallest d >= 0 with alpha+(d) >= y, or nullopt if alpha never
    // reaches y.
    std::optional<double> time_to_reach(double y) const;

private:
    std::vector<AffinePiece> pieces_;   // rate descending, burst increasing
    std::vector<double> breakpoints_;   // crossings of consecutive pieces
};

// beta(t) = max(0, R*(t - T)).
struct RateLatencyCurve {
    double rate;     // R > 0, bits/second
    double latency;  // T >= 0, seconds

    RateLatencyCurve(double R, double T);

    double eval(double t) const;
};

// Upper pseudo-inverse of a rate-latency curve: sup{s >= 0 | beta(s) <= y},
// i.e. y/R + T.
double upper_pseudo_inverse(const RateLatencyCurve& beta, double y);

// Left-continuous wide-sense-increasing piecewise-linear cumulative
// function. The stored value at a breakpoint is the left limit; a jump at
// time t is excluded from the value at t itself.
class CumulativeFunction {
public:
    struct Breakpoint {
        double time;   // seconds, strictly increasing, first is 0
        double value;  // bits, value at the left limit
        double jump;   // bits, >= 0
        double slope;  // bits/second, >= 0, until the next breakpoint
    };

    explicit CumulativeFunction(std::vector<Breakpoint> points);

    // The zero function.
    static CumulativeFunction zero();
    // Staircase with a jump at each (time, bits); times nondecreasing.
    // Coincident times accumulate into one jump.
    static CumulativeFunction staircase(
        const std::vector<std::pair<double, double>>& jumps);
    // Continuous piecewise-linear function through (time, value) knots,
    // starting at (0, 0); values nondecreasing.
    static CumulativeFunction piecewise_linear(
        const std::vector<std::pair<double, double>>& knots);

    const std::vector<Breakpoint>& points() const { return points_; }

    double eval(double t) const;         // left-continuous value
    double right_limit(double t) const;  // includes the jump at t

    // Total mass if the function is eventually flat, else nullopt.
    std::optional<double> total() const;
    double last_time() const { return points_.back().time; }
    double final_slope() const { return points_.back().slope; }

private:
    std::vector<Breakpoint> points_;
};

// Result of sup_{t>=0} (alpha+(t) - R*t) with its smallest maximizer.
struct SupDeviation {
    bool bounded = false;
    double value = 0;   // bits; valid when bounded
    double t_star = 0;  // seconds; smallest maximizer, valid when bounded
};

// Exact supremum of alpha+(t) - R*t over t >= 0, with ties broken toward
// the smallest t. Candidates are t = 0 (right limit) and the envelope
// kinks. Unbounded iff the long-run rate of alpha exceeds R.
SupDeviation sup_deviation(const ConcaveArrivalCurve& alpha, double R);

// F(t) = inf_{0<=s<=t} { input(s) + beta(t-s) }, exact and returned as a
// continuous piecewise-linear cumulative function.
CumulativeFunction min_plus_convolve(const CumulativeFunction& input,
                                     const RateLatencyCurve& beta);

}  // namespace ncdelay
