#include <doctest.h>

#include <cmath>
#include <numbers>

#include "holo/theorem_lab.hpp"

using namespace holo;
constexpr double kPi = std::numbers::pi;

TEST_CASE("diagram check: flat entries agree exactly") {
    DiagramReport rep = verify_isomorphism(find_catalog("heisenberg"), 6, 64, 17);
    CHECK(rep.pass);
    CHECK(rep.max_residual < 1e-10);
    for (auto& d : rep.loops) CHECK(d.within_budget);
}

TEST_CASE("diagram check: sasakian sphere") {
    DiagramReport rep = verify_isomorphism(find_catalog("sasakian_sphere"), 12, 256, 5);
    CHECK(rep.pass);
    CHECK(rep.max_residual < 1e-6);
    CHECK(rep.loops.size() == 12);
    for (auto& d : rep.loops)
        CHECK(d.residual <= 10.0 * (d.richardson_adapted + d.richardson_quotient) + 1e-12);
}

TEST_CASE("diagram check: product contactization") {
    DiagramReport rep = verify_isomorphism(find_catalog("product_contactization"), 8, 256, 5);
    CHECK(rep.pass);
    CHECK(rep.max_residual < 1e-6);
}

TEST_CASE("diagram check rejects riemannian entries") {
    CHECK_THROWS_AS(verify_isomorphism(find_catalog("round_sphere"), 4, 64, 1), config_error);
}

TEST_CASE("vertical robustness of the diagram") {
    const CatalogEntry& entry = find_catalog("sasakian_sphere");
    const KContactSpec& spec = entry.kcontact();
    RiemannianSpec quotient = quotient_metric(spec);
    LoopFamily fam = generate_loops(quotient, project_point(spec, entry.base), 4, 0.5, 23);
    for (const Curve& mu : fam.loops) {
        Mat at0 = transport_adapted(spec, lift_loop(spec, mu, 0.0), 128).matrix;
        Mat at3 = transport_adapted(spec, lift_loop(spec, mu, 3.0), 128).matrix;
        CHECK(norm_inf(at0 - at3) < 1e-8);
    }
}

TEST_CASE("de rham report: product splits 2+2 on both levels") {
    DeRhamReport rep = de_rham_report(find_catalog("product_contactization"), 16, 256, 5);
    CHECK(rep.pass);
    CHECK(rep.verdict == "PASS");
    CHECK(rep.upstairs.r == 2);
    CHECK(rep.downstairs.r == 2);
    CHECK(rep.upstairs.dims == std::vector<int>{2, 2});
    CHECK(rep.downstairs.dims == std::vector<int>{2, 2});
    CHECK(rep.max_match_residual < 1e-5);
    CHECK_FALSE(rep.trivial_group);

    // seed stability of the verdict structure
    DeRhamReport rep2 = de_rham_report(find_catalog("product_contactization"), 16, 256, 6);
    CHECK(rep2.upstairs.r == 2);
    CHECK(rep2.downstairs.dims == std::vector<int>{2, 2});
}

TEST_CASE("de rham report: sasakian sphere finds no splitting") {
    DeRhamReport rep = de_rham_report(find_catalog("sasakian_sphere"), 12, 256, 5);
    CHECK(rep.pass);
    CHECK(rep.upstairs.r == 1);
    CHECK(rep.downstairs.r == 1);
    CHECK(rep.upstairs.sym_commutant_dim == 1);
}

TEST_CASE("de rham report: trivial holonomy is flagged") {
    DeRhamReport rep = de_rham_report(find_catalog("heisenberg"), 6, 64, 9);
    CHECK(rep.trivial_group);
    CHECK(rep.verdict.find("trivial group") != std::string::npos);
    int total = 0;
    for (int d : rep.upstairs.dims) total += d;
    CHECK(total == 2);
    CHECK(rep.pass); // identical canonical decompositions on both sides
}

TEST_CASE("product holonomy block check") {
    ProductCheckReport rep = product_holonomy_check(find_catalog("product_spheres"), 16, 256, 3);
    CHECK(rep.pass);
    CHECK(rep.max_off_block < 1e-6);

    // euclidean 4-space split 2+2: everything identity, off-block exactly zero
    Interval f{-3.0, 3.0};
    std::vector<ExprPtr> id16;
    for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j) id16.push_back(constant(i == j ? 1.0 : 0.0));
    RiemannianSpec e4(4, id16, {f, f, f, f});
    ProductCheckReport flat =
        product_holonomy_check(e4, {{1, 2}, {3, 4}}, {0, 0, 0, 0}, 8, 64, 1.0, 4);
    CHECK(flat.pass);
    CHECK(flat.max_off_block == 0.0);

    // single-factor partition: vacuous pass
    ProductCheckReport single =
        product_holonomy_check(e4, {{1, 2, 3, 4}}, {0, 0, 0, 0}, 4, 64, 1.0, 4);
    CHECK(single.pass);
    CHECK(single.max_off_block == 0.0);
}

TEST_CASE("block partition validation") {
    const auto& prod = find_catalog("product_spheres").riemannian();
    CHECK_THROWS_AS(validate_block_partition(prod, {{1, 2}, {3}}), config_error);     // x4 missing
    CHECK_THROWS_AS(validate_block_partition(prod, {{1, 2, 3}, {3, 4}}), config_error); // overlap
    CHECK_THROWS_AS(validate_block_partition(prod, {{1, 2}, {3, 4, 5}}), config_error); // range
    // mixing factor coordinates puts sin(x1)^2 outside its block
    CHECK_THROWS_AS(validate_block_partition(prod, {{1, 3}, {2, 4}}), config_error);
    // the declared catalog partition is accepted
    validate_block_partition(prod, {{1, 2}, {3, 4}});

    // cross-block coupling is rejected
    Interval f{-3.0, 3.0};
    RiemannianSpec coupled(2, {parse("1"), parse("x1*0.1"), parse("x1*0.1"), parse("1")},
                           {f, f});
    CHECK_THROWS_AS(validate_block_partition(coupled, {{1}, {2}}), config_error);

    ProductCheckReport rep = product_holonomy_check(find_catalog("product_spheres"), 4, 64, 3);
    CHECK(rep.blocks == std::vector<std::vector<int>>{{1, 2}, {3, 4}});
}

TEST_CASE("diagram residual bounded by richardson budget on the catalog") {
    for (const char* name : {"heisenberg", "torus_contactization", "sasakian_sphere"}) {
        DiagramReport rep = verify_isomorphism(find_catalog(name), 4, 128, 31);
        for (auto& d : rep.loops)
            CHECK(d.residual <= 10.0 * (d.richardson_adapted + d.richardson_quotient) + 1e-12);
    }
}
