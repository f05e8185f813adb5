#include "ncdelay/curves.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace ncdelay {

namespace {

void require(bool cond, const char* msg) {
    if (!cond) throw DomainError(msg);
}

}  // namespace

// ---------------------------------------------------------------------------
// ConcaveArrivalCurve

ConcaveArrivalCurve::ConcaveArrivalCurve(std::vector<AffinePiece> pieces) {
    require(!pieces.empty(), "arrival curve needs at least one piece");
    for (const auto& p : pieces) {
        require(std::isfinite(p.burst) && std::isfinite(p.rate),
                "arrival curve piece must be finite");
        require(p.burst >= 0, "arrival curve burst must be >= 0");
        require(p.rate >= 0, "arrival curve rate must be >= 0");
    }
    // Rate descending; equal rates keep the smallest burst.
    std::sort(pieces.begin(), pieces.end(), [](const auto& a, const auto& b) {
        if (a.rate != b.rate) return a.rate > b.rate;
        return a.burst < b.burst;
    });
    // Lower-envelope sweep: dominated pieces (burst not below a faster
    // piece's) and pieces that never attain the minimum are removed.
    auto cross = [](const AffinePiece& a, const AffinePiece& b) {
        return (b.burst - a.burst) / (a.rate - b.rate);
    };
    std::vector<AffinePiece> env;
    for (const auto& p : pieces) {
        while (!env.empty() && env.back().burst >= p.burst) env.pop_back();
        if (!env.empty() && env.back().rate == p.rate) continue;
        while (env.size() >= 2 &&
               cross(env[env.size() - 2], p) <= cross(env[env.size() - 2], env.back())) {
            env.pop_back();
        }
        env.push_back(p);
    }
    pieces_ = std::move(env);
    breakpoints_.clear();
    for (size_t k = 0; k + 1 < pieces_.size(); ++k) {
        breakpoints_.push_back(cross(pieces_[k], pieces_[k + 1]));
    }
}

double ConcaveArrivalCurve::eval(double t) const {
    require(t >= 0, "curve evaluation requires t >= 0");
    if (t == 0) return 0;
    // Active piece index = number of breakpoints before t.
    size_t k = std::upper_bound(breakpoints_.begin(), breakpoints_.end(), t) -
               breakpoints_.begin();
    if (k == pieces_.size()) k = pieces_.size() - 1;
    return pieces_[k].burst + pieces_[k].rate * t;
}

double ConcaveArrivalCurve::right_limit(double t) const {
    require(t >= 0, "curve evaluation requires t >= 0");
    if (t == 0) return pieces_.front().burst;
    return eval(t);
}

std::optional<double> ConcaveArrivalCurve::time_to_reach(double y) const {
    require(y >= 0, "time_to_reach requires y >= 0");
    if (initial_burst() >= y - tol_for(y)) return 0.0;
    for (size_t k = 0; k < pieces_.size(); ++k) {
        double seg_end = (k < breakpoints_.size())
                             ? breakpoints_[k]
                             : std::numeric_limits<double>::infinity();
        const auto& p = pieces_[k];
        if (p.rate <= 0) continue;
        double d = (y - p.burst) / p.rate;
        if (d <= seg_end + tol_for(seg_end)) return std::max(d, 0.0);
    }
    return std::nullopt;
}

// ---------------------------------------------------------------------------
// RateLatencyCurve

RateLatencyCurve::RateLatencyCurve(double R, double T) : rate(R), latency(T) {
    require(std::isfinite(R) && R > 0, "service rate must be > 0");
    require(std::isfinite(T) && T >= 0, "service latency must be >= 0");
}

double RateLatencyCurve::eval(double t) const {
    require(t >= 0, "curve evaluation requires t >= 0");
    return std::max(0.0, rate * (t - latency));
}

double upper_pseudo_inverse(const RateLatencyCurve& beta, double y) {
    require(y >= 0, "upper pseudo-inverse requires y >= 0");
    return y / beta.rate + beta.latency;
}

// ---------------------------------------------------------------------------
// CumulativeFunction

CumulativeFunction::CumulativeFunction(std::vector<Breakpoint> points)
    : points_(std::move(points)) {
    require(!points_.empty(), "cumulative function needs a breakpoint");
    require(points_.front().time == 0, "cumulative function starts at t = 0");
    require(std::abs(points_.front().value) <= kTol,
            "cumulative function value at 0 must be 0");
    double prev_end = points_.front().value;
    for (size_t k = 0; k < points_.size(); ++k) {
        auto& p = points_[k];
        require(std::isfinite(p.time) && std::isfinite(p.value) &&
                    std::isfinite(p.jump) && std::isfinite(p.slope),
                "cumulative breakpoint must be finite");
        require(p.jump >= -tol_for(p.value), "cumulative jump must be >= 0");
        require(p.slope >= -kTol, "cumulative slope must be >= 0");
        if (p.jump < 0) p.jump = 0;
        if (p.slope < 0) p.slope = 0;
        if (k > 0) {
            require(p.time > points_[k - 1].time,
                    "cumulative times must be strictly increasing");
            require(std::abs(p.value - prev_end) <= tol_for(prev_end),
                    "cumulative value inconsistent with previous segment");
        }
        prev_end = p.value + p.jump +
                   p.slope * ((k + 1 < points_.size() ? points_[k + 1].time : p.time) -
                              p.time);
    }
}

CumulativeFunction CumulativeFunction::zero() {
    return CumulativeFunction({{0, 0, 0, 0}});
}

CumulativeFunction CumulativeFunction::staircase(
    const std::vector<std::pair<double, double>>& jumps) {
    std::vector<Breakpoint> pts;
    pts.push_back({0, 0, 0, 0});
    double acc = 0;
    for (const auto& [t, bits] : jumps) {
        if (t < 0) throw DomainError("staircase jump time must be >= 0");
        if (bits < 0) throw DomainError("staircase jump must be >= 0");
        if (t == pts.back().time) {
            pts.back().jump += bits;
        } else {
            if (t < pts.back().time)
                throw DomainError("staircase times must be nondecreasing");
            acc = pts.back().value + pts.back().jump;
            pts.push_back({t, acc, bits, 0});
        }
    }
    return CumulativeFunction(std::move(pts));
}

CumulativeFunction CumulativeFunction::piecewise_linear(
    const std::vector<std::pair<double, double>>& knots) {
    std::vector<Breakpoint> pts;
    if (knots.empty() || knots.front().first != 0)
        throw DomainError("piecewise_linear starts at t = 0");
    for (size_t k = 0; k < knots.size(); ++k) {
        double slope = 0;
        if (k + 1 < knots.size()) {
            slope = (knots[k + 1].second - knots[k].second) /
                    (knots[k + 1].first - knots[k].first);
        }
        pts.push_back({knots[k].first, knots[k].second, 0, slope});
    }
    return CumulativeFunction(std::move(pts));
}

double CumulativeFunction::eval(double t) const {
    if (t < 0) throw DomainError("cumulative evaluation requires t >= 0");
    // Last breakpoint with time <= t.
    size_t k = std::upper_bound(points_.begin(), points_.end(), t,
                                [](double v, const Breakpoint& p) {
                                    return v < p.time;
                                }) -
               points_.begin();
    if (k == 0) return points_.front().value;
    const auto& p = points_[k - 1];
    if (p.time == t) return p.value;
    return p.value + p.jump + p.slope * (t - p.time);
}

double CumulativeFunction::right_limit(double t) const {
    if (t < 0) throw DomainError("cumulative evaluation requires t >= 0");
    size_t k = std::upper_bound(points_.begin(), points_.end(), t,
                                [](double v, const Breakpoint& p) {
                                    return v < p.time;
                                }) -
               points_.begin();
    if (k == 0) return points_.front().value;
    const auto& p = points_[k - 1];
    return p.value + p.jump + p.slope * (t - p.time);
}

std::optional<double> CumulativeFunction::total() const {
    const auto& last = points_.back();
    if (last.slope > 0) return std::nullopt;
    return last.value + last.jump;
}

// ---------------------------------------------------------------------------
// sup_deviation

SupDeviation sup_deviation(const ConcaveArrivalCurve& alpha, double R) {
    if (!(R > 0)) throw DomainError("sup_deviation requires R > 0");
    if (alpha.long_run_rate() > R) return {false, 0, 0};
    SupDeviation best{true, alpha.right_limit(0), 0};
    for (double t : alpha.breakpoints()) {
        double v = alpha.eval(t) - R * t;
        if (v > best.value + tol_for(best.value)) {
            best.value = v;
            best.t_star = t;
        }
    }
    return best;
}

// ---------------------------------------------------------------------------
// min_plus_convolve

namespace {

// A candidate linear piece a + b*t valid on [from, to].
struct Piece {
    double from, to, a, b;
};

}  // namespace

CumulativeFunction min_plus_convolve(const CumulativeFunction& input,
                                     const RateLatencyCurve& beta) {
    const auto& pts = input.points();
    const double R = beta.rate;
    const double T = beta.latency;
    const double inf = std::numeric_limits<double>::infinity();

    // Exact pointwise infimum: candidates are s at each breakpoint of the
    // input (left value) and s = t - T; segment interiors cannot beat
    // their endpoints since beta is affine past the plateau.
    auto conv_eval = [&](double t) {
        double best = inf;
        for (const auto& p : pts) {
            if (p.time > t) break;
            best = std::min(best, p.value + beta.eval(t - p.time));
        }
        if (t >= T) best = std::min(best, input.eval(t - T));
        return best;
    };

    // Linear pieces of all candidate generators, for knot collection.
    std::vector<Piece> pieces;
    for (const auto& p : pts) {
        pieces.push_back({p.time, p.time + T, p.value, 0});
        pieces.push_back({p.time + T, inf, p.value - R * (p.time + T), R});
    }
    for (size_t k = 0; k < pts.size(); ++k) {
        double from = pts[k].time + T;
        double to = (k + 1 < pts.size()) ? pts[k + 1].time + T : inf;
        double start_val = pts[k].value + pts[k].jump;
        pieces.push_back(
            {from, to, start_val - pts[k].slope * from, pts[k].slope});
    }

    std::vector<double> knots{0};
    for (const auto& p : pieces) {
        if (std::isfinite(p.from) && p.from > 0) knots.push_back(p.from);
        if (std::isfinite(p.to) && p.to > 0) knots.push_back(p.to);
    }
    for (size_t i = 0; i < pieces.size(); ++i) {
        for (size_t j = i + 1; j < pieces.size(); ++j) {
            const auto& x = pieces[i];
            const auto& y = pieces[j];
            if (x.b == y.b) continue;
            double t = (y.a - x.a) / (x.b - y.b);
            if (t <= 0) continue;
            if (t < x.from || t > x.to || t < y.from || t > y.to) continue;
            knots.push_back(t);
        }
    }
    std::sort(knots.begin(), knots.end());
    knots.erase(std::unique(knots.begin(), knots.end(),
                            [](double a, double b) {
                                return b - a <= 1e-12 * (1 + b);
                            }),
                knots.end());

    // F is continuous and linear between consecutive knots.
    std::vector<CumulativeFunction::Breakpoint> out;
    for (size_t k = 0; k < knots.size(); ++k) {
        double t = knots[k];
        double v = conv_eval(t);
        double next = (k + 1 < knots.size()) ? knots[k + 1] : t + 1.0;
        double slope = (conv_eval(next) - v) / (next - t);
        if (slope < 0) slope = 0;
        if (!out.empty() &&
            std::abs(out.back().slope - slope) <= 1e-9 * (1 + slope)) {
            continue;  // collinear with the previous segment
        }
        out.push_back({t, v, 0, slope});
    }
    return CumulativeFunction(std::move(out));
}

}  // namespace ncdelay
