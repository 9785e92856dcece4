#pragma once

// Chart-level manifold descriptions: a Riemannian chart (N, h) and a
// K-contact sub-Riemannian chart (M, theta, g) in adapted coordinates,
// where the Reeb field is the last coordinate field and
// theta = dx^n + Gamma^n_i dx^i on the contact distribution D = ker theta.

#include <algorithm>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "holo/errors.hpp"
#include "holo/expr.hpp"
#include "holo/linalg.hpp"

namespace holo {

struct Interval {
    double lo = 0.0;
    double hi = 0.0;

    bool contains(double x) const { return lo < x && x < hi; }
    double width() const { return hi - lo; }
};

using DomainBox = std::vector<Interval>;

inline bool in_box(std::span<const double> p, const DomainBox& box) {
    if (p.size() != box.size()) return false;
    for (std::size_t i = 0; i < box.size(); ++i)
        if (!box[i].contains(p[i])) return false;
    return true;
}

inline void require_in_box(std::span<const double> p, const DomainBox& box, const std::string& what) {
    if (p.size() != box.size())
        throw config_error(what + ": point dimension " + std::to_string(p.size()) +
                           " does not match chart dimension " + std::to_string(box.size()));
    for (std::size_t i = 0; i < box.size(); ++i)
        if (!box[i].contains(p[i]))
            throw numeric_error(what + ": coordinate x" + std::to_string(i + 1) + " = " +
                                std::to_string(p[i]) + " outside (" + std::to_string(box[i].lo) +
                                ", " + std::to_string(box[i].hi) + ")");
}

namespace detail {

inline void check_box(const DomainBox& box, std::size_t dim, const std::string& what) {
    if (box.size() != dim)
        throw config_error(what + ": domain_box needs " + std::to_string(dim) + " intervals");
    for (auto& iv : box)
        if (!(iv.lo < iv.hi)) throw config_error(what + ": empty domain interval");
}

inline void check_closed(const std::vector<ExprPtr>& exprs, int dim, const std::string& what) {
    for (auto& e : exprs)
        if (max_var_index(e) > dim)
            throw config_error(what + ": expression references x" +
                               std::to_string(max_var_index(e)) + " beyond chart dimension " +
                               std::to_string(dim));
}

} // namespace detail

// ---------------------------------------------------------------------------

struct RiemannianSpec {
    int dim = 0;
    std::vector<ExprPtr> metric; // row-major dim x dim
    DomainBox box;

    RiemannianSpec(int n, std::vector<ExprPtr> g, DomainBox b)
        : dim(n), metric(std::move(g)), box(std::move(b)) {
        if (dim < 1) throw config_error("riemannian spec: dimension must be positive");
        if (metric.size() != static_cast<std::size_t>(dim) * dim)
            throw config_error("riemannian spec: metric needs dim*dim entries");
        detail::check_box(box, dim, "riemannian spec");
        detail::check_closed(metric, dim, "riemannian spec");
    }

    const ExprPtr& g(int i, int j) const { return metric[static_cast<std::size_t>(i) * dim + j]; }
};

struct KContactSpec {
    int m = 0; // half-rank of the contact distribution; chart dimension is 2m+1
    std::vector<ExprPtr> horizontal_metric; // row-major 2m x 2m, in the frame e_i
    std::vector<ExprPtr> contact_coeffs;    // Gamma^n_i, i = 1..2m
    DomainBox box;                          // 2m+1 intervals

    KContactSpec(int half_rank, std::vector<ExprPtr> g, std::vector<ExprPtr> gamma, DomainBox b)
        : m(half_rank), horizontal_metric(std::move(g)), contact_coeffs(std::move(gamma)),
          box(std::move(b)) {
        if (m < 1) throw config_error("kcontact spec: m must be positive");
        std::size_t k = static_cast<std::size_t>(2 * m);
        if (horizontal_metric.size() != k * k)
            throw config_error("kcontact spec: horizontal metric needs (2m)^2 entries");
        if (contact_coeffs.size() != k)
            throw config_error("kcontact spec: needs 2m contact coefficients");
        detail::check_box(box, k + 1, "kcontact spec");
        detail::check_closed(horizontal_metric, 2 * m + 1, "kcontact spec");
        detail::check_closed(contact_coeffs, 2 * m + 1, "kcontact spec");
    }

    int dim() const { return 2 * m + 1; }
    int rank() const { return 2 * m; }
    const ExprPtr& g(int i, int j) const {
        return horizontal_metric[static_cast<std::size_t>(i) * rank() + j];
    }
};

// Horizontal frame e_i = d_i - Gamma^n_i d_n spanning D = ker theta.
// Component matrix is rank x dim; the dx^n component of e_i is -Gamma^n_i,
// so theta(e_i) = Gamma^n_i - Gamma^n_i = 0 holds exactly by construction.
struct FrameBasis {
    const KContactSpec& spec;

    Mat components(std::span<const double> p) const {
        int k = spec.rank();
        Mat e = Mat::Zero(k, spec.dim());
        for (int i = 0; i < k; ++i) {
            e(i, i) = 1.0;
            e(i, spec.dim() - 1) = -evaluate(spec.contact_coeffs[i], p);
        }
        return e;
    }

    // theta applied to each frame field; zero in exact arithmetic.
    Vec theta_of_frame(std::span<const double> p) const {
        int k = spec.rank();
        Mat e = components(p);
        Vec out(k);
        for (int i = 0; i < k; ++i) {
            double th = e(i, spec.dim() - 1); // dx^n component of e_i
            for (int j = 0; j < k; ++j)
                th += evaluate(spec.contact_coeffs[j], p) * e(i, j);
            out(i) = th;
        }
        return out;
    }
};

// ---------------------------------------------------------------------------
// metric evaluation

inline Mat eval_metric_matrix(const std::vector<ExprPtr>& entries, int k,
                              std::span<const double> p) {
    Mat g(k, k);
    for (int i = 0; i < k; ++i)
        for (int j = 0; j < k; ++j)
            g(i, j) = evaluate(entries[static_cast<std::size_t>(i) * k + j], p);
    return g;
}

struct ValidateOptions {
    int samples = 200;
    unsigned long seed = 12345; // fixed default; reproducible without a config
    double pd_tol = 1e-10;        // smallest metric eigenvalue must exceed this
    double residual_tol = 1e-12;  // symmetry / Reeb / K-contact residual bound
    double contact_tol = 1e-10;   // |det d theta| must exceed this
};

inline Mat eval_riemannian_metric(const RiemannianSpec& spec, std::span<const double> p,
                                  double pd_tol = 1e-10) {
    require_in_box(p, spec.box, "riemannian metric");
    Mat g = eval_metric_matrix(spec.metric, spec.dim, p);
    if (min_eigenvalue_sym(0.5 * (g + g.transpose())) <= pd_tol)
        throw numeric_error("metric not positive definite at sampled point");
    return g;
}

inline Mat eval_horizontal_metric(const KContactSpec& spec, std::span<const double> p,
                                  double pd_tol = 1e-10) {
    require_in_box(p, spec.box, "horizontal metric");
    Mat g = eval_metric_matrix(spec.horizontal_metric, spec.rank(), p);
    if (min_eigenvalue_sym(0.5 * (g + g.transpose())) <= pd_tol)
        throw numeric_error("horizontal metric not positive definite at sampled point");
    return g;
}

inline Mat eval_riemannian_metric(const RiemannianSpec& spec, std::initializer_list<double> p,
                                  double pd_tol = 1e-10) {
    return eval_riemannian_metric(spec, std::span<const double>(p.begin(), p.size()), pd_tol);
}

inline Mat eval_horizontal_metric(const KContactSpec& spec, std::initializer_list<double> p,
                                  double pd_tol = 1e-10) {
    return eval_horizontal_metric(spec, std::span<const double>(p.begin(), p.size()), pd_tol);
}

// ---------------------------------------------------------------------------
// structure validation by symbolic differentiation plus seeded sampling

struct CheckResult {
    std::string condition;
    bool pass = false;
    double worst_residual = 0.0; // meaning depends on the condition; see detail
    EvalPoint witness;
    std::string detail;
};

struct ValidationReport {
    std::vector<CheckResult> checks;

    bool all_pass() const {
        return std::all_of(checks.begin(), checks.end(),
                           [](const CheckResult& c) { return c.pass; });
    }
    const CheckResult* find(const std::string& name) const {
        for (auto& c : checks)
            if (c.condition == name) return &c;
        return nullptr;
    }
};

namespace detail {

inline std::vector<EvalPoint> sample_box(const DomainBox& box, int count, unsigned long seed) {
    std::mt19937_64 rng(seed);
    std::vector<EvalPoint> pts;
    pts.reserve(count);
    for (int s = 0; s < count; ++s) {
        EvalPoint p(box.size());
        for (std::size_t i = 0; i < box.size(); ++i) {
            std::uniform_real_distribution<double> d(box[i].lo, box[i].hi);
            p[i] = d(rng);
        }
        pts.push_back(std::move(p));
    }
    return pts;
}

// max |g_ij - g_ji| over the sample set
inline CheckResult check_symmetry(const std::vector<ExprPtr>& entries, int k,
                                  const std::vector<EvalPoint>& pts, double tol) {
    CheckResult r{"symmetry", true, 0.0, {}, "max |g_ij - g_ji| over samples"};
    for (auto& p : pts) {
        Mat g = eval_metric_matrix(entries, k, p);
        double res = norm_inf(g - g.transpose());
        if (res > r.worst_residual) {
            r.worst_residual = res;
            r.witness = p;
        }
    }
    r.pass = r.worst_residual <= tol;
    return r;
}

inline CheckResult check_positive_definite(const std::vector<ExprPtr>& entries, int k,
                                           const std::vector<EvalPoint>& pts, double pd_tol) {
    CheckResult r{"positive_definite", true, std::numeric_limits<double>::infinity(), {},
                  "smallest metric eigenvalue over samples"};
    for (auto& p : pts) {
        Mat g = eval_metric_matrix(entries, k, p);
        double low = min_eigenvalue_sym(0.5 * (g + g.transpose()));
        if (low < r.worst_residual) {
            r.worst_residual = low;
            r.witness = p;
        }
    }
    r.pass = r.worst_residual > pd_tol;
    return r;
}

} // namespace detail

inline ValidationReport validate(const RiemannianSpec& spec, const ValidateOptions& opt = {}) {
    if (opt.samples < 1) throw config_error("validate: samples must be >= 1");
    auto pts = detail::sample_box(spec.box, opt.samples, opt.seed);
    ValidationReport rep;
    rep.checks.push_back(detail::check_symmetry(spec.metric, spec.dim, pts, opt.residual_tol));
    rep.checks.push_back(
        detail::check_positive_definite(spec.metric, spec.dim, pts, opt.pd_tol));
    return rep;
}

inline ValidationReport validate(const KContactSpec& spec, const ValidateOptions& opt = {}) {
    if (opt.samples < 1) throw config_error("validate: samples must be >= 1");
    auto pts = detail::sample_box(spec.box, opt.samples, opt.seed);
    int k = spec.rank();
    int n = spec.dim();
    ValidationReport rep;
    rep.checks.push_back(
        detail::check_symmetry(spec.horizontal_metric, k, pts, opt.residual_tol));
    rep.checks.push_back(
        detail::check_positive_definite(spec.horizontal_metric, k, pts, opt.pd_tol));

    // Reeb condition: d_n Gamma^n_i = 0, so that the Reeb field is d_n.
    {
        CheckResult r{"reeb", true, 0.0, {}, "max |d_n Gamma^n_i| over samples"};
        std::vector<ExprPtr> dn;
        dn.reserve(k);
        for (auto& gamma : spec.contact_coeffs) dn.push_back(differentiate(gamma, n));
        for (auto& p : pts)
            for (auto& d : dn) {
                double res = std::abs(evaluate(d, p));
                if (res > r.worst_residual) {
                    r.worst_residual = res;
                    r.witness = p;
                }
            }
        r.pass = r.worst_residual <= opt.residual_tol;
        rep.checks.push_back(std::move(r));
    }

    // Contact nondegeneracy: (d theta)_ij = d_i Gamma^n_j - d_j Gamma^n_i
    // must have |det| bounded away from zero.
    {
        CheckResult r{"contact_nondegenerate", true, std::numeric_limits<double>::infinity(), {},
                      "min |det d theta| over samples"};
        std::vector<ExprPtr> dtheta(static_cast<std::size_t>(k) * k, constant(0.0));
        for (int i = 0; i < k; ++i)
            for (int j = 0; j < k; ++j)
                dtheta[static_cast<std::size_t>(i) * k + j] =
                    sub(differentiate(spec.contact_coeffs[j], i + 1),
                        differentiate(spec.contact_coeffs[i], j + 1));
        for (auto& p : pts) {
            Mat d = eval_metric_matrix(dtheta, k, p);
            double det = std::abs(d.determinant());
            if (det < r.worst_residual) {
                r.worst_residual = det;
                r.witness = p;
            }
        }
        r.pass = r.worst_residual > opt.contact_tol;
        rep.checks.push_back(std::move(r));
    }

    // K-contact condition: d_n g_ij = 0 (the Reeb flow preserves g).
    {
        CheckResult r{"k_contact", true, 0.0, {}, "max |d_n g_ij| over samples"};
        std::vector<ExprPtr> dn;
        dn.reserve(spec.horizontal_metric.size());
        for (auto& gij : spec.horizontal_metric) dn.push_back(differentiate(gij, n));
        for (auto& p : pts)
            for (auto& d : dn) {
                double res = std::abs(evaluate(d, p));
                if (res > r.worst_residual) {
                    r.worst_residual = res;
                    r.witness = p;
                }
            }
        r.pass = r.worst_residual <= opt.residual_tol;
        rep.checks.push_back(std::move(r));
    }
    return rep;
}

// ---------------------------------------------------------------------------
// quotient by the Reeb flow: drop x^n, which the K-contact condition makes
// a spectator coordinate of the horizontal metric

inline RiemannianSpec quotient_metric(const KContactSpec& spec, const ValidateOptions& opt = {}) {
    ValidationReport rep = validate(spec, opt);
    const CheckResult* kc = rep.find("k_contact");
    const CheckResult* reeb = rep.find("reeb");
    if (!kc->pass || !reeb->pass)
        throw config_error("quotient_metric: spec fails K-contact validation (worst residual " +
                           std::to_string(std::max(kc->worst_residual, reeb->worst_residual)) +
                           ")");
    int k = spec.rank();
    std::vector<ExprPtr> entries;
    entries.reserve(spec.horizontal_metric.size());
    ExprPtr zero = constant(0.0);
    for (auto& e : spec.horizontal_metric) entries.push_back(substitute(e, spec.dim(), zero));
    DomainBox qbox(spec.box.begin(), spec.box.begin() + k);
    return RiemannianSpec(k, std::move(entries), std::move(qbox));
}

// Projection of a point to the quotient chart: drop the vertical coordinate.
inline EvalPoint project_point(const KContactSpec& spec, std::span<const double> p) {
    if (p.size() != static_cast<std::size_t>(spec.dim()))
        throw config_error("project_point: dimension mismatch");
    return EvalPoint(p.begin(), p.begin() + spec.rank());
}

} // namespace holo
