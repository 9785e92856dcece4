#pragma once

// Piecewise-smooth parameterized curves in chart coordinates. Each segment
// stores its coordinate functions as expressions in a single parameter t
// (represented as x1 of a 1-dimensional chart), so velocities are exact
// symbolic derivatives rather than finite differences.

#include <cmath>
#include <span>
#include <string>
#include <vector>

#include "holo/errors.hpp"
#include "holo/expr.hpp"

namespace holo {

struct CurveSegment {
    std::vector<ExprPtr> coords;   // one expression per chart coordinate
    double t0 = 0.0;
    double t1 = 1.0;
    std::vector<ExprPtr> velocity; // d coords / dt, filled on construction
};

struct Curve {
    int dim = 0;
    std::vector<CurveSegment> segments;

    EvalPoint point_on(std::size_t seg, double t) const {
        EvalPoint p(dim);
        double tv[1] = {t};
        for (int d = 0; d < dim; ++d)
            p[d] = evaluate(segments[seg].coords[d], std::span<const double>(tv, 1));
        return p;
    }

    EvalPoint start() const { return point_on(0, segments.front().t0); }
    EvalPoint end() const { return point_on(segments.size() - 1, segments.back().t1); }

    double closure_gap() const {
        EvalPoint a = start(), b = end();
        double worst = 0.0;
        for (int d = 0; d < dim; ++d) worst = std::max(worst, std::abs(a[d] - b[d]));
        return worst;
    }

    bool is_closed(double tol = 1e-12) const { return closure_gap() <= tol; }
};

constexpr double kSegmentJoinTol = 1e-12;

inline Curve make_curve(int dim, std::vector<CurveSegment> segments) {
    if (dim < 1) throw config_error("curve: dimension must be positive");
    if (segments.empty()) throw config_error("curve: needs at least one segment");
    for (auto& s : segments) {
        if (s.coords.size() != static_cast<std::size_t>(dim))
            throw config_error("curve: segment coordinate count does not match dimension");
        if (!(s.t0 <= s.t1)) throw config_error("curve: segment has t0 > t1");
        s.velocity.clear();
        s.velocity.reserve(s.coords.size());
        for (auto& e : s.coords) {
            if (max_var_index(e) > 1)
                throw config_error("curve: segment expressions may only reference t (x1)");
            s.velocity.push_back(differentiate(e, 1));
        }
    }
    Curve c{dim, std::move(segments)};
    for (std::size_t s = 0; s + 1 < c.segments.size(); ++s) {
        EvalPoint a = c.point_on(s, c.segments[s].t1);
        EvalPoint b = c.point_on(s + 1, c.segments[s + 1].t0);
        for (int d = 0; d < dim; ++d)
            if (std::abs(a[d] - b[d]) > kSegmentJoinTol)
                throw config_error("curve: segments " + std::to_string(s) + " and " +
                                   std::to_string(s + 1) + " do not join (gap " +
                                   std::to_string(std::abs(a[d] - b[d])) + " in x" +
                                   std::to_string(d + 1) + ")");
    }
    return c;
}

// Straight segment from a to b over t in [0,1].
inline CurveSegment linear_segment(std::span<const double> a, std::span<const double> b) {
    CurveSegment s;
    s.t0 = 0.0;
    s.t1 = 1.0;
    for (std::size_t d = 0; d < a.size(); ++d)
        s.coords.push_back(add(constant(a[d]), mul(constant(b[d] - a[d]), variable(1))));
    return s;
}

inline Curve make_polyline(const std::vector<EvalPoint>& points) {
    if (points.size() < 2) throw config_error("polyline: needs at least two points");
    int dim = static_cast<int>(points.front().size());
    std::vector<CurveSegment> segs;
    for (std::size_t i = 0; i + 1 < points.size(); ++i) {
        if (points[i].size() != points[i + 1].size())
            throw config_error("polyline: inconsistent point dimensions");
        bool same = true;
        for (int d = 0; d < dim; ++d)
            if (points[i][d] != points[i + 1][d]) same = false;
        if (!same) segs.push_back(linear_segment(points[i], points[i + 1]));
    }
    if (segs.empty()) throw config_error("polyline: all points coincide");
    return make_curve(dim, std::move(segs));
}

// Latitude circle on a polar sphere chart: x1 = phi0, x2 winds `turns` times.
inline Curve make_latitude(double phi0, double turns = 1.0) {
    CurveSegment s;
    s.t0 = 0.0;
    s.t1 = 1.0;
    s.coords = {constant(phi0),
                mul(constant(2.0 * std::numbers::pi * turns), variable(1))};
    return make_curve(2, {std::move(s)});
}

inline Curve reverse_curve(const Curve& c) {
    std::vector<CurveSegment> segs;
    segs.reserve(c.segments.size());
    for (auto it = c.segments.rbegin(); it != c.segments.rend(); ++it) {
        CurveSegment s;
        s.t0 = it->t0;
        s.t1 = it->t1;
        ExprPtr flipped = sub(constant(it->t0 + it->t1), variable(1));
        for (auto& e : it->coords) s.coords.push_back(substitute(e, 1, flipped));
        segs.push_back(std::move(s));
    }
    return make_curve(c.dim, std::move(segs));
}

inline Curve concat_curves(const Curve& a, const Curve& b) {
    if (a.dim != b.dim) throw config_error("concat: dimension mismatch");
    std::vector<CurveSegment> segs = a.segments;
    segs.insert(segs.end(), b.segments.begin(), b.segments.end());
    return make_curve(a.dim, std::move(segs));
}

} // namespace holo
