#pragma once

// Parallel transport along piecewise-smooth curves by classical fixed-step
// fourth-order integration of the linear system M' = -B(t) M, where
// B(t)_ij = Gamma^i_{j d}(x(t)) v^d(t). The full fiber basis is transported
// at once. For the adapted connection the velocity sum runs over the
// horizontal coordinates only: a lower derivative index equal to n has a
// vanishing coefficient, so vertical motion never contributes.

#include <cmath>
#include <string>
#include <vector>

#include "holo/connection.hpp"
#include "holo/curve.hpp"
#include "holo/linalg.hpp"
#include "holo/manifold.hpp"

namespace holo {

struct TransportResult {
    Mat matrix;               // transported fiber basis, start components to end components
    double metric_drift = 0;  // max over checkpoints of |M^T G(t) M - G(t0)|_inf
    long steps_used = 0;
    double curve_length = 0;  // fiber-metric length of the (horizontal part of the) curve
};

constexpr int kMinStepsPerUnit = 16;
constexpr double kTransportDetFloor = 1e-8;

namespace detail {

// Field is LeviCivitaField (fiber = tangent space) or HorizontalField
// (fiber = contact distribution in frame components). Both expose a chart
// box, a workspace whose gamma tensor fixes the fiber dimension, and the
// fiber metric in ws.g after eval().
template <class Field>
TransportResult integrate_transport(const Field& field, const Curve& curve,
                                    int steps_per_unit) {
    if (steps_per_unit < kMinStepsPerUnit)
        throw config_error("transport: steps_per_unit must be >= " +
                           std::to_string(kMinStepsPerUnit));
    const DomainBox& box = field.box();
    const int dim = static_cast<int>(box.size());
    if (curve.dim != dim)
        throw config_error("transport: curve dimension " + std::to_string(curve.dim) +
                           " does not match chart dimension " + std::to_string(dim));

    auto ws = field.make_workspace();
    const int k = ws.gamma.d;

    TransportResult out;
    out.matrix = Mat::Identity(k, k);

    std::vector<double> stack;
    EvalPoint pos(dim), vel(dim);
    Mat b0(k, k), bm(k, k), b1(k, k);
    Mat g_prev(k, k), gm(k, k), g1(k, k);
    Mat g_start(k, k);
    Mat k1(k, k), k2(k, k), k3(k, k), k4(k, k);
    std::vector<Tape> ct, vt;
    bool have_start = false;

    // evaluate position, velocity, coefficient matrix and fiber metric at t
    auto eval_at = [&](double t, Mat& b, Mat& g) {
        double tv[1] = {t};
        std::span<const double> ts(tv, 1);
        for (int d = 0; d < dim; ++d) {
            pos[d] = ct[d].eval(ts, stack);
            vel[d] = vt[d].eval(ts, stack);
        }
        for (int d = 0; d < dim; ++d)
            if (!box[d].contains(pos[d]))
                throw numeric_error("transport: curve exits domain at t = " + std::to_string(t) +
                                    " (x" + std::to_string(d + 1) + " = " +
                                    std::to_string(pos[d]) + ")");
        field.eval(pos, ws);
        for (int i = 0; i < k; ++i)
            for (int j = 0; j < k; ++j) {
                double s = 0.0;
                for (int d = 0; d < k; ++d) s += ws.gamma.at(i, j, d) * vel[d];
                b(i, j) = s;
            }
        g = ws.g;
    };

    auto speed = [&](const Mat& g) {
        double s = 0.0;
        for (int i = 0; i < k; ++i)
            for (int j = 0; j < k; ++j) s += g(i, j) * vel[i] * vel[j];
        return s > 0.0 ? std::sqrt(s) : 0.0;
    };

    for (const CurveSegment& seg : curve.segments) {
        double span_t = seg.t1 - seg.t0;
        if (span_t <= 0.0) continue;
        long steps = std::lround(std::ceil(steps_per_unit * span_t - 1e-12));
        if (steps < 1) steps = 1;
        double h = span_t / static_cast<double>(steps);
        long checkpoint_every = std::max<long>(1, steps / 10);

        ct.clear();
        vt.clear();
        for (auto& e : seg.coords) ct.emplace_back(e);
        for (auto& e : seg.velocity) vt.emplace_back(e);

        eval_at(seg.t0, b0, g_prev);
        double speed0 = speed(g_prev);
        if (!have_start) {
            g_start = g_prev;
            have_start = true;
        }

        Mat& m = out.matrix;
        for (long s = 0; s < steps; ++s) {
            double t = seg.t0 + h * static_cast<double>(s);
            eval_at(t + 0.5 * h, bm, gm);
            double speedm = speed(gm);
            eval_at(t + h, b1, g1);
            double speed1 = speed(g1);

            k1.noalias() = -b0 * m;
            k2.noalias() = -bm * (m + (0.5 * h) * k1);
            k3.noalias() = -bm * (m + (0.5 * h) * k2);
            k4.noalias() = -b1 * (m + h * k3);
            m += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);

            out.curve_length += (h / 6.0) * (speed0 + 4.0 * speedm + speed1);

            if ((s + 1) % checkpoint_every == 0 || s + 1 == steps) {
                double d = norm_inf(m.transpose() * g1 * m - g_start);
                if (d > out.metric_drift) out.metric_drift = d;
            }
            b0 = b1;
            g_prev = g1;
            speed0 = speed1;
        }
        out.steps_used += steps;
    }

    if (std::abs(out.matrix.determinant()) <= kTransportDetFloor)
        throw numeric_error("transport: result matrix is numerically singular");
    return out;
}

} // namespace detail

inline TransportResult transport_riemannian(const RiemannianSpec& spec, const Curve& curve,
                                            int steps_per_unit) {
    LeviCivitaField field(spec);
    return detail::integrate_transport(field, curve, steps_per_unit);
}

inline TransportResult transport_adapted(const KContactSpec& spec, const Curve& curve,
                                         int steps_per_unit) {
    HorizontalField field(spec);
    return detail::integrate_transport(field, curve, steps_per_unit);
}

// Reusable-field variants; holonomy sampling transports many loops over one
// spec and should not recompile the coefficient tapes per loop.
inline TransportResult transport_with(const LeviCivitaField& field, const Curve& curve,
                                      int steps_per_unit) {
    return detail::integrate_transport(field, curve, steps_per_unit);
}

inline TransportResult transport_with(const HorizontalField& field, const Curve& curve,
                                      int steps_per_unit) {
    return detail::integrate_transport(field, curve, steps_per_unit);
}

// Append a constant trailing coordinate to every segment of a curve.
// Used for charts whose curves close on the manifold but not in coordinates
// (an angular coordinate winding by 2 pi).
inline Curve append_constant_coordinate(const Curve& c, double value) {
    std::vector<CurveSegment> segs;
    segs.reserve(c.segments.size());
    for (const CurveSegment& s : c.segments) {
        CurveSegment up;
        up.t0 = s.t0;
        up.t1 = s.t1;
        up.coords = s.coords;
        up.coords.push_back(constant(value));
        segs.push_back(std::move(up));
    }
    return make_curve(c.dim + 1, std::move(segs));
}

// Constant-vertical lift: append x^n(t) = vertical_value to a closed quotient
// curve. Valid on a single adapted chart, where the projection just drops x^n.
inline Curve lift_loop(const KContactSpec& spec, const Curve& mu, double vertical_value) {
    if (mu.dim != spec.rank())
        throw config_error("lift_loop: quotient curve dimension must be 2m");
    if (!mu.is_closed(1e-12))
        throw config_error("lift_loop: curve is not closed (gap " +
                           std::to_string(mu.closure_gap()) + ")");
    if (!spec.box.back().contains(vertical_value))
        throw config_error("lift_loop: vertical value outside the chart box");
    return append_constant_coordinate(mu, vertical_value);
}

// A posteriori error estimate: max-abs difference between the transports at
// `steps` and 2*`steps` per unit parameter.
inline double richardson_check(const RiemannianSpec& spec, const Curve& curve, int steps) {
    LeviCivitaField field(spec);
    Mat a = detail::integrate_transport(field, curve, steps).matrix;
    Mat b = detail::integrate_transport(field, curve, 2 * steps).matrix;
    return norm_inf(a - b);
}

inline double richardson_check(const KContactSpec& spec, const Curve& curve, int steps) {
    HorizontalField field(spec);
    Mat a = detail::integrate_transport(field, curve, steps).matrix;
    Mat b = detail::integrate_transport(field, curve, 2 * steps).matrix;
    return norm_inf(a - b);
}

// Post-hoc projection of a transport matrix onto the G-orthogonal group
// (polar factor in the orthonormalized frame). Never applied inside the
// integrator: drift is reported, not hidden. This exists for callers who
// explicitly request the projected matrix as a separate artifact.
inline Mat polar_project(const Mat& m, const Mat& g_base) {
    Mat l = cholesky_factor(g_base, "fiber metric");
    Mat lt = l.transpose();
    Mat lt_inv = lt.inverse();
    Mat u = polar_orthogonal(lt * m * lt_inv);
    return lt_inv * u * lt;
}

// Rotation angle of a 2x2 transport matrix, measured in the orthonormalized
// fiber frame. Well-conditioned near every angle, including pi.
inline double rotation_angle(const Mat& m, const Mat& g_base) {
    if (m.rows() != 2 || m.cols() != 2)
        throw config_error("rotation_angle: fiber dimension must be 2");
    Mat l = cholesky_factor(g_base, "fiber metric");
    Mat lt = l.transpose();
    Mat q = lt * m * lt.inverse();
    return std::atan2(q(1, 0) - q(0, 1), q(0, 0) + q(1, 1));
}

} // namespace holo
