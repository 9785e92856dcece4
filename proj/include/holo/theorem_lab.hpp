#pragma once

// End-to-end verification pipelines over the catalog:
//  - diagram check: adapted-connection transport along constant-vertical
//    lifts against Levi-Civita transport on the quotient chart, loop by loop
//    (the projection differential is the identity on frame components, so
//    the two matrices are directly comparable);
//  - de Rham comparison: invariant decompositions computed independently
//    upstairs (adapted) and downstairs (quotient) from matched loop families,
//    with projec­tors matched by minimal Frobenius distance;
//  - product block check: samples over a block-product metric must stay
//    block diagonal.

#include <algorithm>
#include <numeric>
#include <set>
#include <string>
#include <vector>

#include "holo/catalog.hpp"
#include "holo/holonomy.hpp"
#include "holo/transport.hpp"

namespace holo {

// ---------------------------------------------------------------------------
// Theorem-diagram verification

struct LoopDiagnostic {
    double residual = 0.0;           // |M_adapted - M_quotient|_inf
    double richardson_adapted = 0.0;
    double richardson_quotient = 0.0;
    bool within_budget = false;      // residual <= 10 * (sum of estimates)
};

struct DiagramReport {
    std::string entry;
    int loop_count = 0;
    int steps = 0;
    unsigned long seed = 0;
    double tol = 0.0;
    double vertical_value = 0.0;
    double loop_scale = 0.0;
    std::vector<LoopDiagnostic> loops;
    double max_residual = 0.0;
    bool pass = false;
};

inline DiagramReport verify_isomorphism(const CatalogEntry& entry, int loop_count, int steps,
                                        unsigned long seed, double tol = 1e-6,
                                        std::optional<double> vertical = std::nullopt) {
    if (!entry.is_kcontact())
        throw config_error("verify_isomorphism: entry '" + entry.name + "' is not K-contact");
    const KContactSpec& spec = entry.kcontact();
    RiemannianSpec quotient = quotient_metric(spec);
    EvalPoint qbase = project_point(spec, entry.base);
    double vert = vertical.value_or(entry.base.back());

    DiagramReport rep;
    rep.entry = entry.name;
    rep.loop_count = loop_count;
    rep.steps = steps;
    rep.seed = seed;
    rep.tol = tol;
    rep.vertical_value = vert;
    rep.loop_scale = entry.loop_scale;

    LoopFamily family = generate_loops(quotient, qbase, loop_count, entry.loop_scale, seed);
    HorizontalField up_field(spec);
    LeviCivitaField down_field(quotient);

    bool all_within = true;
    for (const Curve& mu : family.loops) {
        Curve gamma = lift_loop(spec, mu, vert);
        Mat up = transport_with(up_field, gamma, steps).matrix;
        Mat down = transport_with(down_field, mu, steps).matrix;
        Mat up2 = transport_with(up_field, gamma, 2 * steps).matrix;
        Mat down2 = transport_with(down_field, mu, 2 * steps).matrix;

        LoopDiagnostic d;
        d.residual = norm_inf(up - down);
        d.richardson_adapted = norm_inf(up - up2);
        d.richardson_quotient = norm_inf(down - down2);
        d.within_budget =
            d.residual <= 10.0 * (d.richardson_adapted + d.richardson_quotient) + 1e-12;
        all_within = all_within && d.within_budget;
        rep.max_residual = std::max(rep.max_residual, d.residual);
        rep.loops.push_back(d);
    }
    rep.pass = all_within && rep.max_residual < tol;
    return rep;
}

// ---------------------------------------------------------------------------
// de Rham splitting comparison

struct ProjectorMatch {
    int up_index = 0;
    int down_index = 0;
    double residual = 0.0;
    int dim_up = 0;
    int dim_down = 0;
};

struct DeRhamReport {
    std::string entry;
    int loop_count = 0;
    int steps = 0;
    unsigned long seed = 0;
    double tol = 0.0;
    double svd_tol = 0.0;
    double loop_scale = 0.0;
    InvariantDecomposition upstairs;
    InvariantDecomposition downstairs;
    std::vector<ProjectorMatch> matches;
    double max_match_residual = 0.0;
    bool trivial_group = false;
    bool pass = false;
    std::string verdict;
};

namespace detail {

// Optimal projector assignment by exhaustive permutation search (r <= 4 in
// practice). Two distinct optimal assignments within 1e-12 of each other are
// an error, never silently broken.
inline std::vector<int> match_projectors(const std::vector<Mat>& up,
                                         const std::vector<Mat>& down) {
    int r = static_cast<int>(up.size());
    std::vector<int> perm(r);
    std::iota(perm.begin(), perm.end(), 0);
    std::vector<int> best;
    std::vector<int> second;
    double best_cost = std::numeric_limits<double>::infinity();
    double second_cost = std::numeric_limits<double>::infinity();
    std::vector<int> p = perm;
    std::sort(p.begin(), p.end());
    do {
        double cost = 0.0;
        for (int i = 0; i < r; ++i) cost += (up[i] - down[p[i]]).norm();
        if (cost < best_cost) {
            second_cost = best_cost;
            second = best;
            best_cost = cost;
            best = p;
        } else if (cost < second_cost) {
            second_cost = cost;
            second = p;
        }
    } while (std::next_permutation(p.begin(), p.end()));
    if (r > 1 && second_cost - best_cost < 1e-12 && !second.empty() && second != best)
        throw numeric_error("projector matching tie between two assignments");
    return best;
}

} // namespace detail

inline DeRhamReport de_rham_report(const CatalogEntry& entry, int loop_count, int steps,
                                   unsigned long seed, double tol = 1e-5,
                                   double svd_tol = 1e-6) {
    if (!entry.is_kcontact())
        throw config_error("de_rham_report: entry '" + entry.name + "' is not K-contact");
    const KContactSpec& spec = entry.kcontact();
    RiemannianSpec quotient = quotient_metric(spec);
    EvalPoint qbase = project_point(spec, entry.base);
    double vert = entry.base.back();

    DeRhamReport rep;
    rep.entry = entry.name;
    rep.loop_count = loop_count;
    rep.steps = steps;
    rep.seed = seed;
    rep.tol = tol;
    rep.svd_tol = svd_tol;
    rep.loop_scale = entry.loop_scale;

    // matched loop families: downstairs loops are the projections of the lifts
    LoopFamily down_family = generate_loops(quotient, qbase, loop_count, entry.loop_scale, seed);
    LoopFamily up_family;
    up_family.base = entry.base;
    up_family.params = down_family.params;
    for (const Curve& mu : down_family.loops)
        up_family.loops.push_back(lift_loop(spec, mu, vert));

    HolonomySample up_sample = sample_holonomy(spec, up_family, steps);
    HolonomySample down_sample = sample_holonomy(quotient, down_family, steps);

    rep.upstairs = invariant_decomposition(up_sample, svd_tol, seed);
    rep.downstairs = invariant_decomposition(down_sample, svd_tol, seed);
    rep.trivial_group = rep.upstairs.trivial_group || rep.downstairs.trivial_group;

    bool r_match = rep.upstairs.r == rep.downstairs.r;
    bool dims_match = false;
    if (r_match) {
        std::vector<int> assign =
            detail::match_projectors(rep.upstairs.projectors, rep.downstairs.projectors);
        dims_match = true;
        for (int i = 0; i < rep.upstairs.r; ++i) {
            ProjectorMatch m;
            m.up_index = i;
            m.down_index = assign[i];
            m.dim_up = rep.upstairs.dims[i];
            m.dim_down = rep.downstairs.dims[assign[i]];
            m.residual =
                norm_inf(rep.upstairs.projectors[i] - rep.downstairs.projectors[assign[i]]);
            dims_match = dims_match && (m.dim_up == m.dim_down);
            rep.max_match_residual = std::max(rep.max_match_residual, m.residual);
            rep.matches.push_back(m);
        }
    }
    rep.pass = r_match && dims_match && rep.max_match_residual < tol;
    rep.verdict = rep.pass ? "PASS" : "FAIL";
    if (rep.trivial_group) rep.verdict += " (trivial group: decomposition non-unique)";
    return rep;
}

// ---------------------------------------------------------------------------
// product holonomy block structure

struct ProductCheckReport {
    std::string entry;
    std::vector<std::vector<int>> blocks; // 1-based coordinate indices
    int loop_count = 0;
    int steps = 0;
    unsigned long seed = 0;
    double tol = 0.0;
    double max_off_block = 0.0;
    bool pass = false;
};

// The declared partition must cover the coordinates disjointly, in-block
// entries may only reference their own block's coordinates, and cross-block
// entries must be the structural zero.
inline void validate_block_partition(const RiemannianSpec& spec,
                                     const std::vector<std::vector<int>>& blocks) {
    std::vector<int> owner(static_cast<std::size_t>(spec.dim), -1);
    for (std::size_t b = 0; b < blocks.size(); ++b) {
        if (blocks[b].empty()) throw config_error("block partition: empty block");
        for (int coord : blocks[b]) {
            if (coord < 1 || coord > spec.dim)
                throw config_error("block partition: coordinate x" + std::to_string(coord) +
                                   " out of range");
            if (owner[coord - 1] != -1)
                throw config_error("block partition: coordinate x" + std::to_string(coord) +
                                   " listed twice");
            owner[coord - 1] = static_cast<int>(b);
        }
    }
    for (int d = 0; d < spec.dim; ++d)
        if (owner[d] == -1)
            throw config_error("block partition: coordinate x" + std::to_string(d + 1) +
                               " not covered");
    for (int i = 0; i < spec.dim; ++i)
        for (int j = 0; j < spec.dim; ++j) {
            const ExprPtr& e = spec.g(i, j);
            if (owner[i] != owner[j]) {
                if (!is_const(e, 0.0))
                    throw config_error("block partition: cross-block metric entry g_" +
                                       std::to_string(i + 1) + std::to_string(j + 1) +
                                       " is not zero");
                continue;
            }
            std::set<int> vars;
            collect_vars(e, vars);
            for (int v : vars)
                if (owner[v - 1] != owner[i])
                    throw config_error("block partition: entry g_" + std::to_string(i + 1) +
                                       std::to_string(j + 1) + " references x" +
                                       std::to_string(v) + " outside its block");
        }
}

inline ProductCheckReport product_holonomy_check(const RiemannianSpec& spec,
                                                 const std::vector<std::vector<int>>& blocks,
                                                 const EvalPoint& base, int loop_count,
                                                 int steps, double scale, unsigned long seed,
                                                 double tol = 1e-6) {
    validate_block_partition(spec, blocks);

    ProductCheckReport rep;
    rep.blocks = blocks;
    rep.loop_count = loop_count;
    rep.steps = steps;
    rep.seed = seed;
    rep.tol = tol;

    std::vector<int> owner(static_cast<std::size_t>(spec.dim), 0);
    for (std::size_t b = 0; b < blocks.size(); ++b)
        for (int coord : blocks[b]) owner[coord - 1] = static_cast<int>(b);

    LoopFamily family = generate_loops(spec, base, loop_count, scale, seed);
    HolonomySample sample = sample_holonomy(spec, family, steps);
    for (const Mat& m : sample.frame)
        for (int i = 0; i < spec.dim; ++i)
            for (int j = 0; j < spec.dim; ++j)
                if (owner[i] != owner[j])
                    rep.max_off_block = std::max(rep.max_off_block, std::abs(m(i, j)));
    rep.pass = rep.max_off_block < tol;
    return rep;
}

inline ProductCheckReport product_holonomy_check(const CatalogEntry& entry, int loop_count,
                                                 int steps, unsigned long seed,
                                                 double tol = 1e-6) {
    if (entry.is_kcontact())
        throw config_error("product_holonomy_check: entry '" + entry.name +
                           "' must be Riemannian");
    if (entry.blocks.empty())
        throw config_error("product_holonomy_check: entry '" + entry.name +
                           "' declares no block partition");
    ProductCheckReport rep = product_holonomy_check(entry.riemannian(), entry.blocks, entry.base,
                                                    loop_count, steps, entry.loop_scale, seed, tol);
    rep.entry = entry.name;
    return rep;
}

} // namespace holo
