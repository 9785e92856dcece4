// Acceptance suite: end-to-end checks with pinned tolerances and runtime
// budgets, one PASS/FAIL line per criterion. Exits nonzero when any
// criterion fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <random>
#include <sstream>
#include <vector>

#include "holo/theorem_lab.hpp"

using namespace holo;
constexpr double kPi = std::numbers::pi;

namespace {

struct Outcome {
    bool pass = false;
    std::string detail;
};

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.3g", v);
    return buf;
}

// --------------------------------------------------------------------------
// 1. flat suite: every sampled holonomy matrix is the identity within 1e-10,
//    total runtime under 5 s

Outcome criterion_flat_suite() {
    auto t0 = std::chrono::steady_clock::now();
    double worst = 0.0;
    for (const char* name : {"euclidean_plane", "heisenberg", "torus_contactization"}) {
        const CatalogEntry& e = find_catalog(name);
        LoopFamily fam = e.is_kcontact()
                             ? generate_loops(e.kcontact(), e.base, 20, e.loop_scale, 101)
                             : generate_loops(e.riemannian(), e.base, 20, e.loop_scale, 101);
        HolonomySample s = e.is_kcontact() ? sample_holonomy(e.kcontact(), fam, 512)
                                           : sample_holonomy(e.riemannian(), fam, 512);
        for (const Mat& m : s.frame)
            worst = std::max(worst, norm_inf(m - Mat::Identity(m.rows(), m.cols())));
    }
    double elapsed = seconds_since(t0);
    return {worst < 1e-10 && elapsed < 5.0,
            "max deviation from identity " + fmt(worst) + ", " + fmt(elapsed) + "s"};
}

// --------------------------------------------------------------------------
// 2. sphere latitude holonomy at phi0 = pi/3, steps 512: rotation angle pi
//    within 1e-6 against an independent fine-step oracle, under 2 s

Mat latitude_oracle(double phi0, long steps) {
    double sc = std::sin(phi0) * std::cos(phi0);
    double cot = std::cos(phi0) / std::sin(phi0);
    Mat b(2, 2);
    b << 0.0, -sc, cot, 0.0;
    Mat m = Mat::Identity(2, 2);
    double h = 2.0 * kPi / static_cast<double>(steps);
    for (long s = 0; s < steps; ++s) {
        Mat q1 = -b * m;
        Mat q2 = -b * (m + 0.5 * h * q1);
        Mat q3 = -b * (m + 0.5 * h * q2);
        Mat q4 = -b * (m + h * q3);
        m += (h / 6.0) * (q1 + 2.0 * q2 + 2.0 * q3 + q4);
    }
    return m;
}

Outcome criterion_latitude() {
    auto t0 = std::chrono::steady_clock::now();
    const auto& sphere = find_catalog("round_sphere").riemannian();
    Mat g = eval_riemannian_metric(sphere, {kPi / 3, 0.0});

    TransportResult tr = transport_riemannian(sphere, make_latitude(kPi / 3), 512);
    double angle = std::abs(rotation_angle(tr.matrix, g));
    double angle_err = std::abs(angle - kPi); // classical value 2 pi cos(pi/3)

    Mat oracle = latitude_oracle(kPi / 3, 100000);
    double oracle_gap = norm_inf(tr.matrix - oracle);
    double oracle_angle_err = std::abs(std::abs(rotation_angle(oracle, g)) - kPi);

    double elapsed = seconds_since(t0);
    bool pass = angle_err < 1e-6 && oracle_gap < 1e-6 && oracle_angle_err < 1e-8 &&
                elapsed < 2.0;
    return {pass, "angle error " + fmt(angle_err) + ", matrix vs oracle " + fmt(oracle_gap) +
                      ", " + fmt(elapsed) + "s"};
}

// --------------------------------------------------------------------------
// 3. diagram check on sasakian_sphere and product_contactization: 20 seeded
//    loops each, residual < 1e-6 and within 10x the Richardson estimates,
//    under 30 s

Outcome criterion_diagram() {
    auto t0 = std::chrono::steady_clock::now();
    double worst = 0.0;
    bool budget_ok = true;
    for (const char* name : {"sasakian_sphere", "product_contactization"}) {
        DiagramReport rep = verify_isomorphism(find_catalog(name), 20, 512, 202, 1e-6);
        worst = std::max(worst, rep.max_residual);
        for (const LoopDiagnostic& d : rep.loops) budget_ok = budget_ok && d.within_budget;
    }
    double elapsed = seconds_since(t0);
    return {worst < 1e-6 && budget_ok && elapsed < 30.0,
            "max residual " + fmt(worst) + (budget_ok ? "" : ", budget exceeded") + ", " +
                fmt(elapsed) + "s"};
}

// --------------------------------------------------------------------------
// 4. proof kernel: horizontal coefficients equal quotient Levi-Civita
//    coefficients, residual < 1e-10 at 100 random points per K-contact entry

Outcome criterion_proof_kernel() {
    std::mt19937_64 rng(303);
    double worst = 0.0;
    for (const CatalogEntry& e : catalog()) {
        if (!e.is_kcontact()) continue;
        const KContactSpec& spec = e.kcontact();
        RiemannianSpec quotient = quotient_metric(spec);
        HorizontalField hf(spec);
        LeviCivitaField lc(quotient);
        for (int t = 0; t < 100; ++t) {
            EvalPoint p(spec.box.size());
            for (std::size_t d = 0; d < spec.box.size(); ++d) {
                double pad = 0.05 * spec.box[d].width();
                std::uniform_real_distribution<double> dist(spec.box[d].lo + pad,
                                                            spec.box[d].hi - pad);
                p[d] = dist(rng);
            }
            Tensor3 up = hf.coeffs(p);
            Tensor3 down = lc.coeffs(EvalPoint(p.begin(), p.begin() + spec.rank()));
            for (std::size_t i = 0; i < up.v.size(); ++i)
                worst = std::max(worst, std::abs(up.v[i] - down.v[i]));
        }
    }
    return {worst < 1e-10, "max coefficient residual " + fmt(worst)};
}

// --------------------------------------------------------------------------
// 5. de Rham splitting: product_contactization r=2 dims (2,2) on both levels
//    with matched projector residual < 1e-5 over seeds 1..5; sasakian_sphere
//    r=1 on both levels; under 60 s

Outcome criterion_derham() {
    auto t0 = std::chrono::steady_clock::now();
    std::ostringstream detail;
    bool pass = true;
    double worst = 0.0;
    for (unsigned long seed : {1ul, 2ul, 3ul, 4ul, 5ul}) {
        DeRhamReport rep = de_rham_report(find_catalog("product_contactization"), 20, 512, seed,
                                          1e-5);
        bool ok = rep.pass && rep.upstairs.r == 2 && rep.downstairs.r == 2 &&
                  rep.upstairs.dims == std::vector<int>{2, 2} &&
                  rep.downstairs.dims == std::vector<int>{2, 2};
        worst = std::max(worst, rep.max_match_residual);
        if (!ok) {
            pass = false;
            detail << " seed " << seed << " FAILED (r=" << rep.upstairs.r << "/"
                   << rep.downstairs.r << ");";
        }
    }
    DeRhamReport sas = de_rham_report(find_catalog("sasakian_sphere"), 20, 512, 1, 1e-5);
    bool sas_ok = sas.pass && sas.upstairs.r == 1 && sas.downstairs.r == 1;
    if (!sas_ok) {
        pass = false;
        detail << " sasakian r=" << sas.upstairs.r << "/" << sas.downstairs.r << ";";
    }
    double elapsed = seconds_since(t0);
    pass = pass && elapsed < 60.0;
    return {pass, "product r=2 (2,2) x5 seeds, sasakian r=1, max residual " + fmt(worst) +
                      "," + detail.str() + " " + fmt(elapsed) + "s"};
}

// --------------------------------------------------------------------------
// 6. product holonomy block structure: 40 loops over the product of two
//    round spheres, max off-block entry < 1e-6

Outcome criterion_product_blocks() {
    ProductCheckReport rep = product_holonomy_check(find_catalog("product_spheres"), 40, 512,
                                                    404, 1e-6);
    return {rep.pass, "max off-block entry " + fmt(rep.max_off_block)};
}

// --------------------------------------------------------------------------
// 7. transport properties: reversal inverts within 1e-8, concatenation
//    composes within 1e-8, drift < 1e-8 per unit length at steps 512, and
//    the Richardson estimate ratio sits in [12, 20]

Outcome criterion_transport_properties() {
    const auto& sphere = find_catalog("round_sphere").riemannian();
    const auto& sas = find_catalog("sasakian_sphere").kcontact();
    std::ostringstream detail;
    bool pass = true;

    RiemannianSpec qspec = quotient_metric(sas);
    LoopFamily fam = generate_loops(qspec, {kPi / 2, 0.0}, 6, 0.5, 505);

    double rev_worst = 0.0, drift_worst = 0.0;
    for (const Curve& mu : fam.loops) {
        TransportResult fwd = transport_riemannian(sphere, mu, 512);
        Mat rev = transport_riemannian(sphere, reverse_curve(mu), 512).matrix;
        rev_worst = std::max(rev_worst,
                             norm_inf(rev * fwd.matrix - Mat::Identity(2, 2)));
        drift_worst =
            std::max(drift_worst, fwd.metric_drift / std::max(1.0, fwd.curve_length));

        Curve up = lift_loop(sas, mu, 0.0);
        TransportResult afwd = transport_adapted(sas, up, 512);
        Mat arev = transport_adapted(sas, reverse_curve(up), 512).matrix;
        rev_worst = std::max(rev_worst,
                             norm_inf(arev * afwd.matrix - Mat::Identity(2, 2)));
        drift_worst =
            std::max(drift_worst, afwd.metric_drift / std::max(1.0, afwd.curve_length));
    }
    if (rev_worst >= 1e-8) {
        pass = false;
        detail << " reversal " << fmt(rev_worst) << ";";
    }
    if (drift_worst >= 1e-8) {
        pass = false;
        detail << " drift/length " << fmt(drift_worst) << ";";
    }

    // concatenation across two half-loops
    EvalPoint a = {kPi / 2, 0.0}, b = {kPi / 3, 0.7}, c = {kPi / 2 + 0.3, 1.2};
    Curve c1 = make_polyline({a, b});
    Curve c2 = make_polyline({b, c});
    Mat m1 = transport_riemannian(sphere, c1, 512).matrix;
    Mat m2 = transport_riemannian(sphere, c2, 512).matrix;
    Mat joined = transport_riemannian(sphere, concat_curves(c1, c2), 512).matrix;
    double concat_err = norm_inf(joined - m2 * m1);
    if (concat_err >= 1e-8) {
        pass = false;
        detail << " concatenation " << fmt(concat_err) << ";";
    }

    Curve lat = make_latitude(kPi / 3);
    double e128 = richardson_check(sphere, lat, 128);
    double e256 = richardson_check(sphere, lat, 256);
    double ratio = e128 / e256;
    if (!(ratio >= 12.0 && ratio <= 20.0)) {
        pass = false;
        detail << " order ratio " << fmt(ratio) << ";";
    }

    return {pass, "reversal " + fmt(rev_worst) + ", concat " + fmt(concat_err) +
                      ", drift/length " + fmt(drift_worst) + ", richardson ratio " +
                      fmt(ratio) + detail.str()};
}

// --------------------------------------------------------------------------
// 8. structure validators flag seeded defects with the right condition name
//    and a witness point

Outcome criterion_validators() {
    Interval f{-2.0, 2.0};
    std::ostringstream detail;
    bool pass = true;

    auto expect_fail = [&](const KContactSpec& spec, const std::string& condition) {
        ValidationReport rep = validate(spec);
        const CheckResult* c = rep.find(condition);
        if (!c || c->pass || c->witness.size() != spec.box.size()) {
            pass = false;
            detail << " " << condition << " not flagged;";
        }
    };

    expect_fail(KContactSpec(1, {parse("1+x3^2"), parse("0"), parse("0"), parse("1")},
                             {parse("-x2"), parse("0")}, {f, f, f}),
                "k_contact");
    expect_fail(KContactSpec(1, {parse("1"), parse("0"), parse("0"), parse("1")},
                             {parse("x3"), parse("-x1")}, {f, f, f}),
                "reeb");
    expect_fail(KContactSpec(1, {parse("1"), parse("0"), parse("0"), parse("1")},
                             {parse("0"), parse("0")}, {f, f, f}),
                "contact_nondegenerate");

    // healthy specs stay green
    for (const CatalogEntry& e : catalog()) {
        ValidationReport rep =
            e.is_kcontact() ? validate(e.kcontact()) : validate(e.riemannian());
        if (!rep.all_pass()) {
            pass = false;
            detail << " catalog entry " << e.name << " failed;";
        }
    }
    return {pass, pass ? "all three defects flagged with witnesses" : detail.str()};
}

// --------------------------------------------------------------------------
// 9. expression layer: symbolic gradients match central differences within
//    1e-6 at 50 random points per catalog expression, and a 200-case corpus
//    round-trips through print/parse

Outcome criterion_expressions() {
    std::ostringstream detail;
    bool pass = true;

    double worst = 0.0;
    std::mt19937_64 rng(909);
    for (const CatalogEntry& e : catalog()) {
        std::vector<ExprPtr> exprs;
        const DomainBox* box = nullptr;
        int dim = 0;
        if (e.is_kcontact()) {
            exprs = e.kcontact().horizontal_metric;
            exprs.insert(exprs.end(), e.kcontact().contact_coeffs.begin(),
                         e.kcontact().contact_coeffs.end());
            box = &e.kcontact().box;
            dim = e.kcontact().dim();
        } else {
            exprs = e.riemannian().metric;
            box = &e.riemannian().box;
            dim = e.riemannian().dim;
        }
        for (const ExprPtr& ex : exprs) {
            for (int t = 0; t < 50; ++t) {
                EvalPoint p(dim);
                for (int d = 0; d < dim; ++d) {
                    double pad = 0.05 * (*box)[d].width();
                    std::uniform_real_distribution<double> dist((*box)[d].lo + pad,
                                                                (*box)[d].hi - pad);
                    p[d] = dist(rng);
                }
                worst = std::max(worst, gradient_check(ex, p, 1e-5));
            }
        }
    }
    if (worst >= 1e-6) {
        pass = false;
        detail << " gradient residual " << fmt(worst) << ";";
    }

    // 200 seeded random trees print and re-parse to the identical structure
    int failures = 0;
    std::mt19937_64 gen_rng(910);
    for (int i = 0; i < 200; ++i) {
        ExprPtr e = [&] {
            std::uniform_int_distribution<int> pick(0, 8);
            std::uniform_real_distribution<double> cval(-4.0, 4.0);
            std::uniform_int_distribution<int> var(1, 3);
            // small random trees over the full operator set
            std::function<ExprPtr(int)> gen = [&](int depth) -> ExprPtr {
                int choice = depth <= 0 ? pick(gen_rng) % 2 : pick(gen_rng);
                switch (choice) {
                case 0: return constant(cval(gen_rng));
                case 1: return variable(var(gen_rng));
                case 2: return add(gen(depth - 1), gen(depth - 1));
                case 3: return sub(gen(depth - 1), gen(depth - 1));
                case 4: return mul(gen(depth - 1), gen(depth - 1));
                case 5: return div(gen(depth - 1), gen(depth - 1));
                case 6: return neg(gen(depth - 1));
                case 7: return sin(cos(gen(depth - 1)));
                default: return pow(gen(depth - 1), constant(double(var(gen_rng))));
                }
            };
            return gen(4);
        }();
        if (!struct_equal(e, parse(print(e)))) ++failures;
    }
    if (failures > 0) {
        pass = false;
        detail << " " << failures << " round-trip failures;";
    }

    return {pass, "gradient residual " + fmt(worst) + ", round-trip failures " +
                      std::to_string(failures) + detail.str()};
}

} // namespace

int main() {
    struct Entry {
        const char* name;
        Outcome (*fn)();
    };
    const Entry criteria[] = {
        {"flat suite identity holonomy", criterion_flat_suite},
        {"sphere latitude rotation angle", criterion_latitude},
        {"adapted vs quotient transport diagram", criterion_diagram},
        {"horizontal equals quotient Levi-Civita coefficients", criterion_proof_kernel},
        {"de Rham splitting comparison", criterion_derham},
        {"product holonomy block structure", criterion_product_blocks},
        {"transport property suite", criterion_transport_properties},
        {"structure validators flag seeded defects", criterion_validators},
        {"expression layer gradients and round trip", criterion_expressions},
    };

    int failed = 0;
    int index = 0;
    for (const Entry& c : criteria) {
        ++index;
        Outcome out;
        try {
            out = c.fn();
        } catch (const std::exception& e) {
            out = {false, std::string("exception: ") + e.what()};
        }
        std::printf("%s  criterion %d: %s (%s)\n", out.pass ? "PASS" : "FAIL", index, c.name,
                    out.detail.c_str());
        std::fflush(stdout);
        if (!out.pass) ++failed;
    }
    if (failed) std::printf("%d criterion(s) FAILED\n", failed);
    else std::printf("all %d criteria passed\n", index);
    return failed == 0 ? 0 : 1;
}
