#pragma once

// Built-in chart examples. Boxes exclude coordinate singularities
// (sin x1 = 0 for the sphere charts) and are wide enough in the angular
// coordinate for doubly traversed latitude loops.

#include <numbers>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "holo/manifold.hpp"

namespace holo {

using SpecVariant = std::variant<RiemannianSpec, KContactSpec>;

struct CatalogEntry {
    std::string name;
    SpecVariant spec;
    EvalPoint base;               // recommended base point for holonomy sampling
    double loop_scale = 0.5;      // recommended rectangle side bound
    int expected_r = 1;           // documented expected factor count (0 = trivial group)
    std::vector<int> expected_dims;
    std::vector<std::vector<int>> blocks; // 1-based coordinate blocks for product checks
    std::string notes;

    bool is_kcontact() const { return std::holds_alternative<KContactSpec>(spec); }
    const KContactSpec& kcontact() const { return std::get<KContactSpec>(spec); }
    const RiemannianSpec& riemannian() const { return std::get<RiemannianSpec>(spec); }
};

namespace detail {

inline std::vector<ExprPtr> parse_all(std::initializer_list<const char*> srcs) {
    std::vector<ExprPtr> out;
    out.reserve(srcs.size());
    for (const char* s : srcs) out.push_back(parse(s));
    return out;
}

} // namespace detail

inline const std::vector<CatalogEntry>& catalog() {
    static const std::vector<CatalogEntry> entries = [] {
        constexpr double pi = std::numbers::pi;
        const Interval polar{0.2, pi - 0.2};  // keeps sin(x1) away from 0
        const Interval angle{-13.0, 13.0};    // room for two full turns
        const Interval flat{-5.0, 5.0};
        const Interval vertical{-7.0, 7.0};

        std::vector<CatalogEntry> v;

        v.push_back({
            "euclidean_plane",
            RiemannianSpec(2, detail::parse_all({"1", "0", "0", "1"}), {flat, flat}),
            {0.0, 0.0},
            1.0,
            0,
            {},
            {},
            "flat plane; trivial holonomy",
        });

        v.push_back({
            "round_sphere",
            RiemannianSpec(2, detail::parse_all({"1", "0", "0", "sin(x1)^2"}), {polar, angle}),
            {pi / 2, 0.0},
            0.5,
            1,
            {2},
            {},
            "unit 2-sphere in polar coordinates; SO(2) holonomy, no splitting",
        });

        v.push_back({
            "product_spheres",
            RiemannianSpec(4,
                           detail::parse_all({"1", "0", "0", "0",
                                              "0", "sin(x1)^2", "0", "0",
                                              "0", "0", "1", "0",
                                              "0", "0", "0", "sin(x3)^2"}),
                           {polar, angle, polar, angle}),
            {pi / 2, 0.0, pi / 2, 0.0},
            0.5,
            2,
            {2, 2},
            {{1, 2}, {3, 4}},
            "product of two round spheres; block-diagonal holonomy",
        });

        v.push_back({
            "heisenberg",
            KContactSpec(1, detail::parse_all({"1", "0", "0", "1"}),
                         detail::parse_all({"-x2", "0"}), {flat, flat, flat}),
            {0.0, 0.0, 0.0},
            1.0,
            0,
            {},
            {},
            "flat horizontal metric with theta = dx3 - x2 dx1; trivial holonomy",
        });

        v.push_back({
            "torus_contactization",
            KContactSpec(1, detail::parse_all({"1", "0", "0", "1"}),
                         detail::parse_all({"0", "-x1"}), {flat, flat, flat}),
            {0.0, 0.0, 0.0},
            1.0,
            0,
            {},
            {},
            "flat horizontal metric with theta = dx3 - x1 dx2; trivial holonomy",
        });

        v.push_back({
            "sasakian_sphere",
            KContactSpec(1, detail::parse_all({"1", "0", "0", "sin(x1)^2"}),
                         detail::parse_all({"0", "-cos(x1)"}), {polar, angle, vertical}),
            {pi / 2, 0.0, 0.0},
            0.5,
            1,
            {2},
            {},
            "circle bundle over the round sphere (dense adapted chart); quotient is the "
            "round sphere, no splitting",
        });

        v.push_back({
            "product_contactization",
            KContactSpec(2,
                         detail::parse_all({"1", "0", "0", "0",
                                            "0", "sin(x1)^2", "0", "0",
                                            "0", "0", "1", "0",
                                            "0", "0", "0", "sin(x3)^2"}),
                         detail::parse_all({"0", "-cos(x1)", "0", "-cos(x3)"}),
                         {polar, angle, polar, angle, vertical}),
            {pi / 2, 0.0, pi / 2, 0.0, 0.0},
            0.5,
            2,
            {2, 2},
            {{1, 2}, {3, 4}},
            "circle bundle over a product of two round spheres; quotient splits 2+2",
        });

        return v;
    }();
    return entries;
}

inline const CatalogEntry& find_catalog(const std::string& name) {
    for (const CatalogEntry& e : catalog())
        if (e.name == name) return e;
    std::string names;
    for (const CatalogEntry& e : catalog()) names += " " + e.name;
    throw config_error("unknown catalog entry '" + name + "'; available:" + names);
}

} // namespace holo
