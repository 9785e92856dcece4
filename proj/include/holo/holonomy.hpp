#pragma once

// Holonomy sampling and reducibility analysis. Loops are coordinate-plane
// rectangles conjugated by coordinate-line connectors to a common base point;
// sampled transports live in O(fiber, G) up to integrator drift. Reducibility
// is decided through the symmetric part of the commutant: an orthogonal
// invariant decomposition exists iff some non-scalar symmetric matrix
// commutes with every sample. Sampling probes a subgroup, so a trivial
// symmetric commutant means "no splitting found at these samples", never a
// proof of irreducibility.

#include <optional>
#include <random>
#include <string>
#include <vector>

#include "holo/linalg.hpp"
#include "holo/manifold.hpp"
#include "holo/transport.hpp"

namespace holo {

struct RectangleParams {
    int plane_a = 0; // 0-based coordinate indices, plane_a < plane_b
    int plane_b = 0;
    EvalPoint center;
    double side_a = 0.0;
    double side_b = 0.0;
};

struct LoopFamily {
    EvalPoint base;
    std::vector<Curve> loops;
    std::vector<RectangleParams> params; // aligned with loops
};

namespace detail {

inline Curve rectangle_loop_at(const EvalPoint& base, const RectangleParams& rp) {
    const int dim = static_cast<int>(base.size());
    EvalPoint corner = rp.center;
    corner[rp.plane_a] -= 0.5 * rp.side_a;
    corner[rp.plane_b] -= 0.5 * rp.side_b;

    std::vector<EvalPoint> pts;
    pts.push_back(base);
    // out: adjust one coordinate at a time
    EvalPoint cur = base;
    for (int d = 0; d < dim; ++d) {
        if (cur[d] != corner[d]) {
            cur[d] = corner[d];
            pts.push_back(cur);
        }
    }
    // rectangle in the (a, b) plane
    EvalPoint p = cur;
    p[rp.plane_a] += rp.side_a;
    pts.push_back(p);
    p[rp.plane_b] += rp.side_b;
    pts.push_back(p);
    p[rp.plane_a] -= rp.side_a;
    pts.push_back(p);
    p[rp.plane_b] -= rp.side_b;
    pts.push_back(p);
    // back: retrace the connector exactly
    for (int d = dim - 1; d >= 0; --d) {
        if (cur[d] != base[d]) {
            cur[d] = base[d];
            pts.push_back(cur);
        }
    }
    return make_polyline(pts);
}

inline LoopFamily generate_loops_impl(const DomainBox& box, int horizontal_dim,
                                      const EvalPoint& base, int count, double scale,
                                      unsigned long seed) {
    if (count < 0) throw config_error("generate_loops: count must be >= 0");
    if (!(scale > 0.0)) throw config_error("generate_loops: scale must be positive");
    require_in_box(base, box, "generate_loops base point");
    for (int d = 0; d < horizontal_dim; ++d)
        if (scale >= box[d].width())
            throw config_error("generate_loops: scale " + std::to_string(scale) +
                               " too large for coordinate x" + std::to_string(d + 1) +
                               " interval of width " + std::to_string(box[d].width()));

    std::vector<std::pair<int, int>> planes;
    for (int a = 0; a < horizontal_dim; ++a)
        for (int b = a + 1; b < horizontal_dim; ++b) planes.push_back({a, b});
    if (planes.empty()) throw config_error("generate_loops: chart needs at least two coordinates");

    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);

    LoopFamily fam;
    fam.base = base;
    for (int i = 0; i < count; ++i) {
        auto [a, b] = planes[static_cast<std::size_t>(i) % planes.size()];
        RectangleParams rp;
        rp.plane_a = a;
        rp.plane_b = b;
        rp.side_a = scale * (1.0 - unit(rng)); // in (0, scale]
        rp.side_b = scale * (1.0 - unit(rng));
        rp.center.resize(box.size());
        for (std::size_t d = 0; d < box.size(); ++d) {
            double margin = 1e-9 * box[d].width();
            if (static_cast<int>(d) == a) margin += 0.5 * rp.side_a;
            if (static_cast<int>(d) == b) margin += 0.5 * rp.side_b;
            std::uniform_real_distribution<double> dist(box[d].lo + margin, box[d].hi - margin);
            rp.center[d] = dist(rng);
        }
        fam.loops.push_back(rectangle_loop_at(base, rp));
        fam.params.push_back(std::move(rp));
    }
    return fam;
}

} // namespace detail

// Deterministic rectangle-loop families. For a Riemannian chart the
// rectangle planes range over all coordinate pairs; on an adapted chart only
// the horizontal pairs are used (vertical excursions transport trivially),
// while connectors and centers may wander in the full chart.
inline LoopFamily generate_loops(const RiemannianSpec& spec, const EvalPoint& base, int count,
                                 double scale, unsigned long seed) {
    return detail::generate_loops_impl(spec.box, spec.dim, base, count, scale, seed);
}

inline LoopFamily generate_loops(const KContactSpec& spec, const EvalPoint& base, int count,
                                 double scale, unsigned long seed) {
    return detail::generate_loops_impl(spec.box, spec.rank(), base, count, scale, seed);
}

// ---------------------------------------------------------------------------

constexpr double kDriftFlagTol = 1e-6;
constexpr double kTrivialSampleTol = 1e-8;

struct HolonomySample {
    EvalPoint base;
    Mat g;                    // fiber metric at the base point
    Mat chol;                 // lower-triangular L with L L^T = g
    std::vector<Mat> frame;   // transports in frame components
    std::vector<Mat> ortho;   // conjugated L^T M L^-T, orthogonal up to drift
    std::vector<double> drift;
    std::vector<bool> drift_flagged; // drift beyond kDriftFlagTol (kept, flagged)
    std::vector<RectangleParams> params;

    int fiber_dim() const { return static_cast<int>(g.rows()); }

    double max_orthogonality_defect() const {
        double worst = 0.0;
        for (const Mat& q : ortho)
            worst = std::max(worst, norm_inf(q.transpose() * q - Mat::Identity(q.rows(), q.cols())));
        return worst;
    }

    // all sampled transports indistinguishable from the identity
    bool trivial(double tol = kTrivialSampleTol) const {
        for (const Mat& q : ortho)
            if (norm_inf(q - Mat::Identity(q.rows(), q.cols())) >= tol) return false;
        return true;
    }
};

namespace detail {

template <class Field, class SpecT>
HolonomySample sample_holonomy_impl(const SpecT& spec, const Mat& g_base,
                                    const LoopFamily& family, int steps) {
    if (family.loops.empty()) throw config_error("sample_holonomy: empty loop family");
    HolonomySample s;
    s.base = family.base;
    s.g = g_base;
    s.chol = cholesky_factor(s.g, "fiber metric at base point");
    Mat lt = s.chol.transpose();
    Mat lt_inv = lt.inverse();

    Field field(spec);
    for (const Curve& loop : family.loops) {
        TransportResult tr = transport_with(field, loop, steps);
        s.frame.push_back(tr.matrix);
        s.ortho.push_back(lt * tr.matrix * lt_inv);
        s.drift.push_back(tr.metric_drift);
        s.drift_flagged.push_back(tr.metric_drift > kDriftFlagTol);
    }
    s.params = family.params;
    return s;
}

} // namespace detail

inline HolonomySample sample_holonomy(const RiemannianSpec& spec, const LoopFamily& family,
                                      int steps) {
    return detail::sample_holonomy_impl<LeviCivitaField>(
        spec, eval_riemannian_metric(spec, family.base), family, steps);
}

inline HolonomySample sample_holonomy(const KContactSpec& spec, const LoopFamily& family,
                                      int steps) {
    return detail::sample_holonomy_impl<HorizontalField>(
        spec, eval_horizontal_metric(spec, family.base), family, steps);
}

// ---------------------------------------------------------------------------
// holonomy Lie algebra estimate from principal logarithms

struct AlgebraOptions {
    double svd_tol = 1e-6;       // relative rank threshold
    double log_exclusion = 0.1;  // reject samples with an eigenvalue this close to -1
    double zero_floor = 1e-9;    // logs below this norm count as the zero matrix
    int max_rounds = 3;          // bracket-closure rounds
};

struct AlgebraEstimate {
    std::vector<Mat> basis; // orthonormal (Frobenius) skew matrices
    int excluded = 0;       // samples rejected by the principal-branch guard
    int rounds_used = 0;

    int dimension() const { return static_cast<int>(basis.size()); }
};

inline AlgebraEstimate holonomy_algebra(const HolonomySample& sample,
                                        const AlgebraOptions& opt = {}) {
    const int k = sample.fiber_dim();
    AlgebraEstimate est;

    std::vector<Mat> logs;
    for (const Mat& q : sample.ortho) {
        std::optional<Mat> lg = principal_log_orthogonal(q, opt.log_exclusion);
        if (!lg) {
            ++est.excluded;
            continue;
        }
        if (norm_inf(*lg) > opt.zero_floor) logs.push_back(std::move(*lg));
    }
    if (est.excluded == static_cast<int>(sample.ortho.size()))
        throw numeric_error("holonomy_algebra: every sample excluded by the principal-branch "
                            "guard; shrink the loop scale");
    if (logs.empty()) return est; // trivial algebra

    auto span_of = [&](const std::vector<Mat>& mats) {
        Mat cols(k * k, static_cast<long>(mats.size()));
        for (std::size_t i = 0; i < mats.size(); ++i) cols.col(static_cast<long>(i)) = vec_of(mats[i]);
        Mat basis_cols = orthonormal_span(cols, opt.svd_tol);
        std::vector<Mat> out;
        for (long i = 0; i < basis_cols.cols(); ++i) {
            Mat b = mat_of(basis_cols.col(i), k, k);
            out.push_back(0.5 * (b - b.transpose())); // skew cleanup
        }
        return out;
    };

    std::vector<Mat> basis = span_of(logs);
    for (int round = 0; round < opt.max_rounds; ++round) {
        std::vector<Mat> extended = basis;
        for (std::size_t i = 0; i < basis.size(); ++i)
            for (std::size_t j = i + 1; j < basis.size(); ++j)
                extended.push_back(basis[i] * basis[j] - basis[j] * basis[i]);
        std::vector<Mat> closed = span_of(extended);
        est.rounds_used = round + 1;
        if (closed.size() == basis.size()) {
            basis = std::move(closed);
            break;
        }
        basis = std::move(closed);
    }
    est.basis = std::move(basis);
    return est;
}

// ---------------------------------------------------------------------------
// commutant of the sampled matrices

// Solves {X Q_i = Q_i X for all i} over the orthogonalized samples by
// stacking the operators (Q^T kron I) - (I kron Q) and extracting the
// numerical null space. A sample set indistinguishable from the identity
// commutes with everything, which the stacked system cannot see through the
// integrator noise, so that case short-circuits to the full matrix space.
inline std::vector<Mat> commutant(const HolonomySample& sample, double svd_tol = 1e-6) {
    if (sample.ortho.empty()) throw config_error("commutant: empty sample");
    const int k = sample.fiber_dim();
    const int kk = k * k;

    std::vector<Mat> out;
    if (sample.trivial()) {
        for (int c = 0; c < k; ++c)
            for (int r = 0; r < k; ++r) {
                Mat e = Mat::Zero(k, k);
                e(r, c) = 1.0;
                out.push_back(std::move(e));
            }
        return out;
    }

    Mat stacked(static_cast<long>(sample.ortho.size()) * kk, kk);
    long row0 = 0;
    for (const Mat& q : sample.ortho) {
        // column (c + k d) corresponds to X_cd; row (a + k b) to (XQ - QX)_ab
        for (int a = 0; a < k; ++a)
            for (int b = 0; b < k; ++b)
                for (int c = 0; c < k; ++c)
                    for (int d = 0; d < k; ++d) {
                        double v = 0.0;
                        if (a == c) v += q(d, b);
                        if (d == b) v -= q(a, c);
                        stacked(row0 + a + k * b, c + k * d) = v;
                    }
        row0 += kk;
    }
    Mat ns = null_space(stacked, svd_tol);
    for (long i = 0; i < ns.cols(); ++i) out.push_back(mat_of(ns.col(i), k, k));
    return out;
}

// ---------------------------------------------------------------------------
// orthogonal invariant decomposition through the symmetric commutant

struct InvariantDecomposition {
    int r = 1;
    std::vector<Mat> projectors;       // orthonormalized-frame components
    std::vector<Mat> projectors_frame; // L^-T P L^T, commuting with the frame transports
    std::vector<int> dims;
    int commutant_dim = 0;
    int sym_commutant_dim = 0;
    bool trivial_group = false; // decomposition of a trivial sample is non-unique
};

inline InvariantDecomposition invariant_decomposition(const HolonomySample& sample,
                                                      double svd_tol, unsigned long seed) {
    const int k = sample.fiber_dim();
    InvariantDecomposition dec;
    dec.trivial_group = sample.trivial();

    std::vector<Mat> comm = commutant(sample, svd_tol);
    dec.commutant_dim = static_cast<int>(comm.size());

    // symmetric part of the commutant
    Mat sym_cols(k * k, static_cast<long>(comm.size()));
    for (std::size_t i = 0; i < comm.size(); ++i) {
        Mat s = 0.5 * (comm[i] + comm[i].transpose());
        sym_cols.col(static_cast<long>(i)) = vec_of(s);
    }
    Mat sym_basis = orthonormal_span(sym_cols, svd_tol);
    dec.sym_commutant_dim = static_cast<int>(sym_basis.cols());

    if (dec.sym_commutant_dim <= 1) {
        // scalars only: no orthogonal invariant splitting found at these samples
        dec.r = 1;
        dec.projectors = {Mat::Identity(k, k)};
        dec.projectors_frame = {Mat::Identity(k, k)};
        dec.dims = {k};
        return dec;
    }

    // random symmetric element of the commutant; its spectral projectors
    // give the invariant splitting
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> coeff(-1.0, 1.0);
    Mat s = Mat::Zero(k, k);
    for (long i = 0; i < sym_basis.cols(); ++i)
        s += coeff(rng) * mat_of(sym_basis.col(i), k, k);
    s = 0.5 * (s + s.transpose());

    SymEigen eig = sym_eigen(s);
    double spread = eig.values(k - 1) - eig.values(0);
    if (!(spread > 1e-12 * std::max(1.0, eig.values.cwiseAbs().maxCoeff())))
        throw numeric_error("invariant_decomposition: degenerate spectrum of the commutant "
                            "element; change seed");
    double gap_tol = svd_tol * spread;
    for (int i = 0; i + 1 < k; ++i) {
        double gap = eig.values(i + 1) - eig.values(i);
        if (gap > 0.1 * gap_tol && gap < 10.0 * gap_tol)
            throw numeric_error(
                "invariant_decomposition: eigenvalue gap " + std::to_string(gap) +
                " within a factor 10 of the clustering threshold " + std::to_string(gap_tol) +
                "; change seed or tolerance");
    }

    Mat lt = sample.chol.transpose();
    Mat lt_inv = lt.inverse();
    int cluster_start = 0;
    for (int i = 0; i < k; ++i) {
        bool last_in_cluster = (i + 1 == k) || (eig.values(i + 1) - eig.values(i) > gap_tol);
        if (!last_in_cluster) continue;
        Mat p = Mat::Zero(k, k);
        for (int j = cluster_start; j <= i; ++j)
            p += eig.vectors.col(j) * eig.vectors.col(j).transpose();
        dec.projectors.push_back(p);
        dec.projectors_frame.push_back(lt_inv * p * lt);
        dec.dims.push_back(i - cluster_start + 1);
        cluster_start = i + 1;
    }
    dec.r = static_cast<int>(dec.projectors.size());
    return dec;
}

} // namespace holo
