#include <doctest.h>

#include <cmath>
#include <numbers>

#include "holo/catalog.hpp"
#include "holo/manifold.hpp"
#include "test_util.hpp"

using namespace holo;
constexpr double kPi = std::numbers::pi;

TEST_CASE("riemannian metric evaluation") {
    const auto& plane = find_catalog("euclidean_plane").riemannian();
    Mat g = eval_riemannian_metric(plane, {0.3, -0.7});
    CHECK(norm_inf(g - Mat::Identity(2, 2)) == 0.0);

    const auto& sphere = find_catalog("round_sphere").riemannian();
    Mat gs = eval_riemannian_metric(sphere, {kPi / 2, 0.0});
    CHECK(norm_inf(gs - Mat::Identity(2, 2)) < 1e-15);
    Mat gs6 = eval_riemannian_metric(sphere, {kPi / 6, 0.0});
    CHECK(gs6(0, 0) == 1.0);
    CHECK(gs6(1, 1) == doctest::Approx(0.25).epsilon(1e-14));
    CHECK(gs6(0, 1) == 0.0);
}

TEST_CASE("horizontal metric evaluation") {
    const auto& heis = find_catalog("heisenberg").kcontact();
    CHECK(norm_inf(eval_horizontal_metric(heis, {0.1, 0.2, 0.3}) - Mat::Identity(2, 2)) == 0.0);

    const auto& sas = find_catalog("sasakian_sphere").kcontact();
    Mat g = eval_horizontal_metric(sas, {kPi / 3, 0.0, 0.0});
    CHECK(g(1, 1) == doctest::Approx(0.75).epsilon(1e-14));

    const auto& prod = find_catalog("product_contactization").kcontact();
    Mat gp = eval_horizontal_metric(prod, {kPi / 2, 0.0, kPi / 2, 0.0, 0.0});
    CHECK(norm_inf(gp - Mat::Identity(4, 4)) < 1e-15);
}

TEST_CASE("metric evaluation guards") {
    const auto& sphere = find_catalog("round_sphere").riemannian();
    CHECK_THROWS_AS(eval_riemannian_metric(sphere, {0.05, 0.0}), numeric_error); // out of box
    RiemannianSpec degenerate(2, {parse("1"), parse("0"), parse("0"), parse("x1^2")},
                              {{-1.0, 1.0}, {-1.0, 1.0}});
    CHECK_THROWS_AS(eval_riemannian_metric(degenerate, {0.0, 0.0}), numeric_error);
}

TEST_CASE("catalog specs validate") {
    for (const CatalogEntry& e : catalog()) {
        ValidationReport rep = e.is_kcontact() ? validate(e.kcontact()) : validate(e.riemannian());
        CHECK_MESSAGE(rep.all_pass(), "catalog entry failed validation: ", e.name);
    }
}

TEST_CASE("validation flags broken structure conditions with witnesses") {
    Interval f{-2.0, 2.0};

    SUBCASE("non-K-contact metric") {
        KContactSpec bad(1, {parse("1+x3^2"), parse("0"), parse("0"), parse("1")},
                         {parse("-x2"), parse("0")}, {f, f, f});
        ValidationReport rep = validate(bad);
        const CheckResult* kc = rep.find("k_contact");
        REQUIRE(kc != nullptr);
        CHECK_FALSE(kc->pass);
        REQUIRE(kc->witness.size() == 3);
        // residual is |2 x3| at the witness
        CHECK(kc->worst_residual ==
              doctest::Approx(std::abs(2.0 * kc->witness[2])).epsilon(1e-12));
        // other checks unaffected
        CHECK(rep.find("reeb")->pass);
        CHECK(rep.find("contact_nondegenerate")->pass);
    }

    SUBCASE("non-Reeb contact coefficient") {
        KContactSpec bad(1, {parse("1"), parse("0"), parse("0"), parse("1")},
                         {parse("x3"), parse("-x1")}, {f, f, f});
        ValidationReport rep = validate(bad);
        const CheckResult* reeb = rep.find("reeb");
        REQUIRE(reeb != nullptr);
        CHECK_FALSE(reeb->pass);
        CHECK(reeb->worst_residual == doctest::Approx(1.0).epsilon(1e-12));
    }

    SUBCASE("degenerate d theta") {
        KContactSpec bad(1, {parse("1"), parse("0"), parse("0"), parse("1")},
                         {parse("0"), parse("0")}, {f, f, f});
        ValidationReport rep = validate(bad);
        const CheckResult* ct = rep.find("contact_nondegenerate");
        REQUIRE(ct != nullptr);
        CHECK_FALSE(ct->pass);
        CHECK(ct->worst_residual <= 1e-10);
    }

    SUBCASE("heisenberg passes everything with zero residuals") {
        ValidationReport rep = validate(find_catalog("heisenberg").kcontact(),
                                        ValidateOptions{.samples = 100});
        CHECK(rep.all_pass());
        CHECK(rep.find("k_contact")->worst_residual == 0.0);
        CHECK(rep.find("reeb")->worst_residual == 0.0);
    }
}

TEST_CASE("quotient metric drops the vertical coordinate") {
    const auto& sas = find_catalog("sasakian_sphere").kcontact();
    RiemannianSpec q = quotient_metric(sas);
    CHECK(q.dim == 2);
    // quotient of the circle bundle is the round sphere chart
    const auto& sphere = find_catalog("round_sphere").riemannian();
    std::mt19937_64 rng(5);
    for (int i = 0; i < 20; ++i) {
        auto p = testutil::random_point(rng, {{0.3, kPi - 0.3}, {-3.0, 3.0}});
        Mat a = eval_riemannian_metric(q, p);
        Mat b = eval_riemannian_metric(sphere, p);
        CHECK(norm_inf(a - b) == 0.0);
    }

    // heisenberg quotient is the flat plane
    RiemannianSpec qh = quotient_metric(find_catalog("heisenberg").kcontact());
    CHECK(norm_inf(eval_riemannian_metric(qh, {0.4, -0.8}) - Mat::Identity(2, 2)) == 0.0);

    // product case: direct substitution, checked at 20 random points
    const auto& prod = find_catalog("product_contactization").kcontact();
    RiemannianSpec qp = quotient_metric(prod);
    CHECK(qp.dim == 4);
    for (int i = 0; i < 20; ++i) {
        auto p5 = testutil::random_point(
            rng, {{0.3, kPi - 0.3}, {-3.0, 3.0}, {0.3, kPi - 0.3}, {-3.0, 3.0}, {-5.0, 5.0}});
        EvalPoint p4(p5.begin(), p5.begin() + 4);
        Mat up = eval_horizontal_metric(prod, p5);
        Mat down = eval_riemannian_metric(qp, p4);
        CHECK(norm_inf(up - down) < 1e-14);
    }
}

TEST_CASE("quotient rejects non-K-contact specs") {
    Interval f{-2.0, 2.0};
    KContactSpec bad(1, {parse("1+x3^2"), parse("0"), parse("0"), parse("1")},
                     {parse("-x2"), parse("0")}, {f, f, f});
    CHECK_THROWS_AS(quotient_metric(bad), config_error);
}

TEST_CASE("horizontal metric is independent of the vertical coordinate") {
    for (const CatalogEntry& e : catalog()) {
        if (!e.is_kcontact()) continue;
        const KContactSpec& spec = e.kcontact();
        EvalPoint p = e.base;
        Mat ref = eval_horizontal_metric(spec, p);
        const Interval& vert = spec.box.back();
        for (int t = 0; t < 10; ++t) {
            p.back() = vert.lo + (vert.hi - vert.lo) * (t + 0.5) / 10.0;
            CHECK(norm_inf(eval_horizontal_metric(spec, p) - ref) < 1e-12);
        }
    }
}

TEST_CASE("frame basis annihilates theta exactly") {
    for (const CatalogEntry& e : catalog()) {
        if (!e.is_kcontact()) continue;
        FrameBasis frame{e.kcontact()};
        Vec th = frame.theta_of_frame(e.base);
        CHECK(th.cwiseAbs().maxCoeff() == 0.0);
        // dx^n component of e_i equals -Gamma^n_i
        Mat comp = frame.components(e.base);
        for (int i = 0; i < e.kcontact().rank(); ++i) {
            double gamma = evaluate(e.kcontact().contact_coeffs[i], e.base);
            CHECK(comp(i, e.kcontact().dim() - 1) == -gamma);
        }
    }
}

TEST_CASE("validate rejects bad sample counts") {
    CHECK_THROWS_AS(validate(find_catalog("round_sphere").riemannian(),
                             ValidateOptions{.samples = 0}),
                    config_error);
}
