#pragma once

// Connection coefficient fields. Three kinds:
//   levi_civita  Gamma^k_ij = (1/2) g^kl (d_i g_lj + d_j g_li - d_l g_ij)
//   horizontal   same shape with the frame derivatives e_i = d_i - Gamma^n_i d_n
//                in place of the coordinate derivatives, on a K-contact chart
//   adapted      horizontal coefficients plus the exact rule that a lower
//                derivative index equal to n contributes zero
// All metric derivatives are symbolic; evaluation compiles the entry and
// derivative trees to tapes once per field, so integrators can sample the
// coefficients at arbitrary points cheaply.

#include <span>
#include <vector>

#include "holo/expr.hpp"
#include "holo/linalg.hpp"
#include "holo/manifold.hpp"

namespace holo {

constexpr double kMetricConditionLimit = 1e12;

struct Tensor3 {
    int d = 0;
    std::vector<double> v;

    explicit Tensor3(int dim = 0) : d(dim), v(static_cast<std::size_t>(dim) * dim * dim, 0.0) {}

    double at(int k, int i, int j) const {
        return v[(static_cast<std::size_t>(k) * d + i) * d + j];
    }
    double& at(int k, int i, int j) {
        return v[(static_cast<std::size_t>(k) * d + i) * d + j];
    }
};

enum class ConnectionKind { levi_civita, horizontal, adapted };

// ---------------------------------------------------------------------------

class LeviCivitaField {
public:
    explicit LeviCivitaField(const RiemannianSpec& spec) : n_(spec.dim), box_(spec.box) {
        tg_.reserve(spec.metric.size());
        for (auto& e : spec.metric) tg_.emplace_back(e);
        tdg_.reserve(spec.metric.size() * n_);
        for (auto& e : spec.metric)
            for (int l = 1; l <= n_; ++l) tdg_.emplace_back(differentiate(e, l));
    }

    int dim() const { return n_; }
    const DomainBox& box() const { return box_; }

    struct Workspace {
        std::vector<double> stack;
        std::vector<double> dg; // dg[(i*n+j)*n + l] = d_l g_ij
        Mat g, ginv;
        Tensor3 gamma;
    };

    Workspace make_workspace() const {
        Workspace ws;
        ws.dg.resize(static_cast<std::size_t>(n_) * n_ * n_);
        ws.g.resize(n_, n_);
        ws.gamma = Tensor3(n_);
        return ws;
    }

    // Fills ws.g, ws.ginv and ws.gamma at p. No domain check here; callers
    // integrating along curves do their own.
    void eval(std::span<const double> p, Workspace& ws) const {
        const int n = n_;
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j)
                ws.g(i, j) = tg_[static_cast<std::size_t>(i) * n + j].eval(p, ws.stack);
        ws.ginv = inverse_guarded(ws.g, kMetricConditionLimit, "metric");
        for (std::size_t e = 0; e < tdg_.size(); ++e) ws.dg[e] = tdg_[e].eval(p, ws.stack);

        auto dg = [&](int i, int j, int l) {
            return ws.dg[(static_cast<std::size_t>(i) * n + j) * n + l];
        };
        for (int k = 0; k < n; ++k)
            for (int i = 0; i < n; ++i)
                for (int j = i; j < n; ++j) {
                    double s = 0.0;
                    for (int l = 0; l < n; ++l)
                        s += ws.ginv(k, l) * (dg(l, j, i) + dg(l, i, j) - dg(i, j, l));
                    s *= 0.5;
                    ws.gamma.at(k, i, j) = s;
                    ws.gamma.at(k, j, i) = s;
                }
    }

    Tensor3 coeffs(std::span<const double> p) const {
        require_in_box(p, box_, "levi_civita coefficients");
        Workspace ws = make_workspace();
        eval(p, ws);
        return ws.gamma;
    }

private:
    int n_;
    DomainBox box_;
    std::vector<Tape> tg_;  // row-major metric entries
    std::vector<Tape> tdg_; // entry-major, then derivative index
};

// ---------------------------------------------------------------------------

class HorizontalField {
public:
    explicit HorizontalField(const KContactSpec& spec)
        : k_(spec.rank()), n_(spec.dim()), box_(spec.box) {
        tg_.reserve(spec.horizontal_metric.size());
        for (auto& e : spec.horizontal_metric) tg_.emplace_back(e);
        tdg_.reserve(spec.horizontal_metric.size() * n_);
        for (auto& e : spec.horizontal_metric)
            for (int l = 1; l <= n_; ++l) tdg_.emplace_back(differentiate(e, l));
        tgamma_.reserve(spec.contact_coeffs.size());
        for (auto& e : spec.contact_coeffs) tgamma_.emplace_back(e);
    }

    int rank() const { return k_; }
    int dim() const { return n_; }
    const DomainBox& box() const { return box_; }

    struct Workspace {
        std::vector<double> stack;
        std::vector<double> dg;      // dg[(i*k+j)*n + l] = d_l g_ij, l = 0..n-1
        std::vector<double> contact; // Gamma^n_i values
        std::vector<double> eg;      // eg[(i*k+j)*k + c] = e_c g_ij, c = 0..k-1
        Mat g, ginv;
        Tensor3 gamma;
    };

    Workspace make_workspace() const {
        Workspace ws;
        ws.dg.resize(static_cast<std::size_t>(k_) * k_ * n_);
        ws.contact.resize(k_);
        ws.eg.resize(static_cast<std::size_t>(k_) * k_ * k_);
        ws.g.resize(k_, k_);
        ws.gamma = Tensor3(k_);
        return ws;
    }

    void eval(std::span<const double> p, Workspace& ws) const {
        const int k = k_, n = n_;
        for (int i = 0; i < k; ++i)
            for (int j = 0; j < k; ++j)
                ws.g(i, j) = tg_[static_cast<std::size_t>(i) * k + j].eval(p, ws.stack);
        ws.ginv = inverse_guarded(ws.g, kMetricConditionLimit, "horizontal metric");
        for (std::size_t e = 0; e < tdg_.size(); ++e) ws.dg[e] = tdg_[e].eval(p, ws.stack);
        for (int i = 0; i < k; ++i) ws.contact[i] = tgamma_[i].eval(p, ws.stack);

        // frame derivative of each metric entry: e_c g = d_c g - Gamma^n_c d_n g
        for (int i = 0; i < k; ++i)
            for (int j = 0; j < k; ++j) {
                std::size_t base = (static_cast<std::size_t>(i) * k + j) * n;
                double dn = ws.dg[base + n - 1];
                for (int c = 0; c < k; ++c)
                    ws.eg[(static_cast<std::size_t>(i) * k + j) * k + c] =
                        ws.dg[base + c] - ws.contact[c] * dn;
            }

        auto eg = [&](int i, int j, int c) {
            return ws.eg[(static_cast<std::size_t>(i) * k + j) * k + c];
        };
        for (int kk = 0; kk < k; ++kk)
            for (int i = 0; i < k; ++i)
                for (int j = i; j < k; ++j) {
                    double s = 0.0;
                    for (int l = 0; l < k; ++l)
                        s += ws.ginv(kk, l) * (eg(l, j, i) + eg(l, i, j) - eg(i, j, l));
                    s *= 0.5;
                    ws.gamma.at(kk, i, j) = s;
                    ws.gamma.at(kk, j, i) = s;
                }
    }

    Tensor3 coeffs(std::span<const double> p) const {
        require_in_box(p, box_, "horizontal coefficients");
        Workspace ws = make_workspace();
        eval(p, ws);
        return ws.gamma;
    }

private:
    int k_, n_;
    DomainBox box_;
    std::vector<Tape> tg_;
    std::vector<Tape> tdg_;
    std::vector<Tape> tgamma_;
};

// Horizontal coefficients plus the exact vertical rule. Indices are 0-based;
// the first lower index may be the vertical one (n-1), which yields 0.
struct AdaptedCoeffs {
    Tensor3 horizontal;
    int n = 0;

    double at(int k, int i, int j) const {
        if (i == n - 1) return 0.0;
        return horizontal.at(k, i, j);
    }
};

// ---------------------------------------------------------------------------
// one-shot convenience entry points

inline Tensor3 levi_civita_coeffs(const RiemannianSpec& spec, std::span<const double> p) {
    return LeviCivitaField(spec).coeffs(p);
}

inline Tensor3 horizontal_coeffs(const KContactSpec& spec, std::span<const double> p) {
    return HorizontalField(spec).coeffs(p);
}

inline AdaptedCoeffs adapted_coeffs(const KContactSpec& spec, std::span<const double> p) {
    return AdaptedCoeffs{HorizontalField(spec).coeffs(p), spec.dim()};
}

// Derivative of an expression along the frame field e_i (1-based i <= 2m).
inline double frame_derivative(const KContactSpec& spec, const ExprPtr& e, int i,
                               std::span<const double> p) {
    if (i < 1 || i > spec.rank())
        throw config_error("frame index must be in 1..2m");
    double di = evaluate(differentiate(e, i), p);
    double dn = evaluate(differentiate(e, spec.dim()), p);
    double gamma = evaluate(spec.contact_coeffs[i - 1], p);
    return di - gamma * dn;
}

} // namespace holo
