#pragma once

// File formats: manifold and curve configs (strict JSON schemas that reject
// unknown keys), CSV emission with round-trip-exact floats, holonomy sample
// export/import, and JSON sidecars for every report. Output key order is
// fixed so identical runs produce byte-identical artifacts.

#include <filesystem>
#include <fstream>
#include <json.hpp>
#include <sstream>
#include <string>
#include <vector>

#include "holo/catalog.hpp"
#include "holo/curve.hpp"
#include "holo/holonomy.hpp"
#include "holo/manifold.hpp"
#include "holo/theorem_lab.hpp"

namespace holo {

using Json = nlohmann::ordered_json;

// 17 significant digits: parses back to the identical double.
inline std::string fmt17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

namespace detail {

inline Json parse_json_text(const std::string& text, const std::string& what) {
    Json j = Json::parse(text, nullptr, false);
    if (j.is_discarded()) throw config_error(what + ": malformed JSON");
    return j;
}

inline Json load_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw config_error("cannot open file: " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_json_text(ss.str(), path);
}

inline void reject_unknown_keys(const Json& j, const std::vector<std::string>& allowed,
                                const std::string& what) {
    for (auto& [key, value] : j.items()) {
        bool ok = false;
        for (auto& a : allowed)
            if (key == a) ok = true;
        if (!ok) throw config_error(what + ": unknown field '" + key + "'");
    }
}

inline std::vector<ExprPtr> parse_expr_array(const Json& j, const std::string& what) {
    if (!j.is_array()) throw config_error(what + ": expected an array of expression strings");
    std::vector<ExprPtr> out;
    for (auto& s : j) {
        if (!s.is_string()) throw config_error(what + ": entries must be strings");
        try {
            out.push_back(parse(s.get<std::string>()));
        } catch (const parse_error& e) {
            throw config_error(what + ": bad expression '" + s.get<std::string>() +
                               "': " + e.what());
        }
    }
    return out;
}

inline DomainBox parse_box(const Json& j, const std::string& what) {
    if (!j.is_array()) throw config_error(what + ": domain_box must be an array of [lo, hi]");
    DomainBox box;
    for (auto& iv : j) {
        if (!iv.is_array() || iv.size() != 2 || !iv[0].is_number() || !iv[1].is_number())
            throw config_error(what + ": each domain interval must be [lo, hi]");
        box.push_back({iv[0].get<double>(), iv[1].get<double>()});
    }
    return box;
}

inline EvalPoint parse_point(const Json& j, const std::string& what) {
    if (!j.is_array()) throw config_error(what + ": expected an array of numbers");
    EvalPoint p;
    for (auto& v : j) {
        if (!v.is_number()) throw config_error(what + ": expected an array of numbers");
        p.push_back(v.get<double>());
    }
    return p;
}

} // namespace detail

// ---------------------------------------------------------------------------
// manifold config
//
// {"catalog": "sasakian_sphere"}
// or
// {"kind": "riemannian", "dim": 2, "metric": ["1","0","0","sin(x1)^2"],
//  "domain_box": [[0.2, 2.94], [-13, 13]],
//  "base": [1.57, 0], "loop_scale": 0.5, "blocks": [[1],[2]]}   // optional
// or
// {"kind": "kcontact", "m": 1, "metric": [... 2m x 2m ...],
//  "contact_coeffs": ["0", "-cos(x1)"], "domain_box": [...],
//  "base": [...], "loop_scale": 0.5}                            // optional

namespace detail {

inline EvalPoint config_base(const Json& j, const DomainBox& box, const std::string& what) {
    if (j.contains("base")) {
        EvalPoint base = parse_point(j["base"], what + ": base");
        require_in_box(base, box, what + ": base");
        return base;
    }
    EvalPoint base;
    for (auto& iv : box) base.push_back(0.5 * (iv.lo + iv.hi));
    return base;
}

inline double config_loop_scale(const Json& j, const DomainBox& box, const std::string& what) {
    if (j.contains("loop_scale")) {
        if (!j["loop_scale"].is_number() || j["loop_scale"].get<double>() <= 0.0)
            throw config_error(what + ": loop_scale must be a positive number");
        return j["loop_scale"].get<double>();
    }
    double w = box.front().width();
    for (auto& iv : box) w = std::min(w, iv.width());
    return 0.25 * w;
}

} // namespace detail

inline CatalogEntry manifold_from_json(const Json& j, const std::string& what) {
    if (!j.is_object()) throw config_error(what + ": expected a JSON object");

    if (j.contains("catalog")) {
        detail::reject_unknown_keys(j, {"catalog"}, what);
        if (!j["catalog"].is_string()) throw config_error(what + ": catalog must be a string");
        return find_catalog(j["catalog"].get<std::string>());
    }

    if (!j.contains("kind") || !j["kind"].is_string())
        throw config_error(what + ": needs \"kind\" (\"riemannian\" or \"kcontact\") or \"catalog\"");
    std::string kind = j["kind"].get<std::string>();

    if (kind == "riemannian") {
        detail::reject_unknown_keys(
            j, {"kind", "dim", "metric", "domain_box", "base", "loop_scale", "blocks"}, what);
        if (!j.contains("dim") || !j["dim"].is_number_integer())
            throw config_error(what + ": riemannian spec needs integer \"dim\"");
        int dim = j["dim"].get<int>();
        if (!j.contains("metric") || !j.contains("domain_box"))
            throw config_error(what + ": riemannian spec needs \"metric\" and \"domain_box\"");
        RiemannianSpec spec(dim, detail::parse_expr_array(j["metric"], what + ": metric"),
                            detail::parse_box(j["domain_box"], what));
        std::vector<std::vector<int>> blocks;
        if (j.contains("blocks")) {
            if (!j["blocks"].is_array()) throw config_error(what + ": blocks must be an array");
            for (auto& blk : j["blocks"]) {
                std::vector<int> b;
                for (auto& c : blk) {
                    if (!c.is_number_integer())
                        throw config_error(what + ": block entries must be integers");
                    b.push_back(c.get<int>());
                }
                blocks.push_back(std::move(b));
            }
            validate_block_partition(spec, blocks);
        }
        EvalPoint base = detail::config_base(j, spec.box, what);
        double scale = detail::config_loop_scale(j, spec.box, what);
        return CatalogEntry{"config",   std::move(spec), std::move(base), scale, -1, {},
                            std::move(blocks), ""};
    }
    if (kind == "kcontact") {
        detail::reject_unknown_keys(
            j, {"kind", "m", "metric", "contact_coeffs", "domain_box", "base", "loop_scale"},
            what);
        if (!j.contains("m") || !j["m"].is_number_integer())
            throw config_error(what + ": kcontact spec needs integer \"m\"");
        if (!j.contains("metric") || !j.contains("contact_coeffs") || !j.contains("domain_box"))
            throw config_error(what +
                               ": kcontact spec needs \"metric\", \"contact_coeffs\", \"domain_box\"");
        KContactSpec spec(j["m"].get<int>(),
                          detail::parse_expr_array(j["metric"], what + ": metric"),
                          detail::parse_expr_array(j["contact_coeffs"], what + ": contact_coeffs"),
                          detail::parse_box(j["domain_box"], what));
        EvalPoint base = detail::config_base(j, spec.box, what);
        double scale = detail::config_loop_scale(j, spec.box, what);
        return CatalogEntry{"config", std::move(spec), std::move(base), scale, -1, {}, {}, ""};
    }
    throw config_error(what + ": kind must be \"riemannian\" or \"kcontact\"");
}

inline CatalogEntry load_manifold_config(const std::string& path) {
    return manifold_from_json(detail::load_json_file(path), path);
}

// ---------------------------------------------------------------------------
// curve config
//
// {"segments": [{"coords": ["pi/3", "2*pi*x1"], "t_range": [0, 1]}, ...]}
// {"polyline": [[0, 0], [1, 0], [1, 1], [0, 0]]}
// {"generator": "latitude(pi/3)"}
// {"generator": "rectangle(1, 2, (1.57, 0.0), 0.4, 0.6)"}

namespace detail {

inline std::vector<std::string> split_top_level(const std::string& s) {
    std::vector<std::string> parts;
    std::string cur;
    int depth = 0;
    for (char c : s) {
        if (c == '(') ++depth;
        if (c == ')') --depth;
        if (c == ',' && depth == 0) {
            parts.push_back(cur);
            cur.clear();
        } else {
            cur += c;
        }
    }
    if (!cur.empty()) parts.push_back(cur);
    return parts;
}

inline double const_value(const std::string& src, const std::string& what) {
    try {
        ExprPtr e = parse(src);
        if (max_var_index(e) > 0)
            throw config_error(what + ": '" + src + "' must be constant");
        return evaluate(e, std::span<const double>{});
    } catch (const parse_error& err) {
        throw config_error(what + ": bad value '" + src + "': " + err.what());
    }
}

inline std::string strip(const std::string& s) {
    std::size_t a = s.find_first_not_of(" \t");
    std::size_t b = s.find_last_not_of(" \t");
    if (a == std::string::npos) return "";
    return s.substr(a, b - a + 1);
}

} // namespace detail

inline Curve curve_from_generator(const std::string& text) {
    std::string s = detail::strip(text);
    std::size_t open = s.find('(');
    if (open == std::string::npos || s.back() != ')')
        throw config_error("curve generator: expected name(args), got '" + text + "'");
    std::string name = detail::strip(s.substr(0, open));
    std::string args_text = s.substr(open + 1, s.size() - open - 2);
    std::vector<std::string> args = detail::split_top_level(args_text);

    if (name == "latitude") {
        if (args.size() != 1 && args.size() != 2)
            throw config_error("latitude(phi0[, turns]) takes one or two arguments");
        double phi0 = detail::const_value(args[0], "latitude");
        double turns = args.size() == 2 ? detail::const_value(args[1], "latitude") : 1.0;
        return make_latitude(phi0, turns);
    }
    if (name == "rectangle") {
        // rectangle(i, j, (center...), w, h): closed rectangle in the
        // (x_i, x_j) plane starting at its lower corner
        if (args.size() != 5)
            throw config_error("rectangle(i, j, (center), w, h) takes five arguments");
        int a = static_cast<int>(detail::const_value(args[0], "rectangle"));
        int b = static_cast<int>(detail::const_value(args[1], "rectangle"));
        std::string c = detail::strip(args[2]);
        if (c.size() < 2 || c.front() != '(' || c.back() != ')')
            throw config_error("rectangle: center must be a parenthesized point");
        EvalPoint center;
        for (auto& part : detail::split_top_level(c.substr(1, c.size() - 2)))
            center.push_back(detail::const_value(part, "rectangle center"));
        double w = detail::const_value(args[3], "rectangle");
        double h = detail::const_value(args[4], "rectangle");
        int dim = static_cast<int>(center.size());
        if (a < 1 || b < 1 || a > dim || b > dim || a == b)
            throw config_error("rectangle: plane indices out of range");
        RectangleParams rp;
        rp.plane_a = a - 1;
        rp.plane_b = b - 1;
        rp.center = center;
        rp.side_a = w;
        rp.side_b = h;
        EvalPoint corner = center;
        corner[rp.plane_a] -= 0.5 * w;
        corner[rp.plane_b] -= 0.5 * h;
        return detail::rectangle_loop_at(corner, rp);
    }
    throw config_error("unknown curve generator '" + name + "'");
}

inline Curve curve_from_json(const Json& j, const std::string& what) {
    if (!j.is_object()) throw config_error(what + ": expected a JSON object");
    detail::reject_unknown_keys(j, {"segments", "polyline", "generator"}, what);
    int provided = static_cast<int>(j.contains("segments")) +
                   static_cast<int>(j.contains("polyline")) +
                   static_cast<int>(j.contains("generator"));
    if (provided != 1)
        throw config_error(what + ": provide exactly one of segments / polyline / generator");

    if (j.contains("generator")) {
        if (!j["generator"].is_string())
            throw config_error(what + ": generator must be a string");
        return curve_from_generator(j["generator"].get<std::string>());
    }
    if (j.contains("polyline")) {
        std::vector<EvalPoint> pts;
        for (auto& p : j["polyline"]) pts.push_back(detail::parse_point(p, what + ": polyline"));
        return make_polyline(pts);
    }
    std::vector<CurveSegment> segs;
    int dim = -1;
    for (auto& sj : j["segments"]) {
        detail::reject_unknown_keys(sj, {"coords", "t_range"}, what + ": segment");
        if (!sj.contains("coords"))
            throw config_error(what + ": segment needs \"coords\"");
        CurveSegment seg;
        seg.coords = detail::parse_expr_array(sj["coords"], what + ": coords");
        if (sj.contains("t_range")) {
            DomainBox r = detail::parse_box(Json::array({sj["t_range"]}), what + ": t_range");
            seg.t0 = r[0].lo;
            seg.t1 = r[0].hi;
        }
        if (dim == -1) dim = static_cast<int>(seg.coords.size());
        segs.push_back(std::move(seg));
    }
    if (segs.empty()) throw config_error(what + ": segments array is empty");
    return make_curve(dim, std::move(segs));
}

inline Curve load_curve_config(const std::string& spec_text) {
    // a generator call, a JSON literal, or a path to a JSON file
    std::string s = detail::strip(spec_text);
    if (s.find('(') != std::string::npos && s.find('{') == std::string::npos &&
        !std::filesystem::exists(s))
        return curve_from_generator(s);
    if (!s.empty() && s.front() == '{')
        return curve_from_json(detail::parse_json_text(s, "curve"), "curve");
    return curve_from_json(detail::load_json_file(s), s);
}

// ---------------------------------------------------------------------------
// CSV

inline void write_csv(const std::string& path, const std::vector<std::string>& header,
                      const std::vector<std::vector<std::string>>& rows) {
    std::ofstream out(path);
    if (!out) throw config_error("cannot write file: " + path);
    for (std::size_t i = 0; i < header.size(); ++i)
        out << header[i] << (i + 1 < header.size() ? "," : "");
    out << "\n";
    for (auto& row : rows) {
        for (std::size_t i = 0; i < row.size(); ++i)
            out << row[i] << (i + 1 < row.size() ? "," : "");
        out << "\n";
    }
}

// ---------------------------------------------------------------------------
// holonomy sample export / import

inline Json matrix_to_json(const Mat& m) {
    Json rows = Json::array();
    for (long i = 0; i < m.rows(); ++i) {
        Json row = Json::array();
        for (long j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
        rows.push_back(std::move(row));
    }
    return rows;
}

inline Mat matrix_from_json(const Json& j, const std::string& what) {
    if (!j.is_array() || j.empty()) throw config_error(what + ": expected a matrix");
    long rows = static_cast<long>(j.size());
    long cols = static_cast<long>(j[0].size());
    Mat m(rows, cols);
    for (long i = 0; i < rows; ++i) {
        if (static_cast<long>(j[i].size()) != cols)
            throw config_error(what + ": ragged matrix rows");
        for (long c = 0; c < cols; ++c) {
            if (!j[i][c].is_number()) throw config_error(what + ": matrix entries must be numbers");
            m(i, c) = j[i][c].get<double>();
        }
    }
    return m;
}

inline Json sample_to_json(const HolonomySample& s) {
    Json j;
    j["base"] = s.base;
    j["fiber_metric"] = matrix_to_json(s.g);
    Json mats = Json::array();
    for (const Mat& m : s.frame) mats.push_back(matrix_to_json(m));
    j["matrices"] = std::move(mats);
    j["drift"] = s.drift;
    Json flagged = Json::array();
    for (bool f : s.drift_flagged) flagged.push_back(f);
    j["drift_flagged"] = std::move(flagged);
    Json params = Json::array();
    for (const RectangleParams& rp : s.params) {
        Json p;
        p["plane_a"] = rp.plane_a + 1;
        p["plane_b"] = rp.plane_b + 1;
        p["center"] = rp.center;
        p["side_a"] = rp.side_a;
        p["side_b"] = rp.side_b;
        params.push_back(std::move(p));
    }
    j["loop_params"] = std::move(params);
    return j;
}

inline HolonomySample sample_from_json(const Json& j, const std::string& what) {
    detail::reject_unknown_keys(
        j, {"base", "fiber_metric", "matrices", "drift", "drift_flagged", "loop_params"}, what);
    if (!j.contains("base") || !j.contains("fiber_metric") || !j.contains("matrices"))
        throw config_error(what + ": sample needs base, fiber_metric and matrices");
    HolonomySample s;
    s.base = detail::parse_point(j["base"], what + ": base");
    s.g = matrix_from_json(j["fiber_metric"], what + ": fiber_metric");
    if (s.g.rows() != s.g.cols()) throw config_error(what + ": fiber metric must be square");
    s.chol = cholesky_factor(s.g, "imported fiber metric");
    Mat lt = s.chol.transpose();
    Mat lt_inv = lt.inverse();
    for (auto& mj : j["matrices"]) {
        Mat m = matrix_from_json(mj, what + ": matrices");
        if (m.rows() != s.g.rows() || m.cols() != s.g.cols())
            throw config_error(what + ": matrix dimensions do not match the fiber metric");
        s.ortho.push_back(lt * m * lt_inv);
        s.frame.push_back(std::move(m));
    }
    if (s.frame.empty()) throw config_error(what + ": no matrices");
    if (j.contains("drift")) s.drift = j["drift"].get<std::vector<double>>();
    s.drift.resize(s.frame.size(), 0.0);
    s.drift_flagged.assign(s.frame.size(), false);
    for (std::size_t i = 0; i < s.frame.size(); ++i)
        s.drift_flagged[i] = s.drift[i] > kDriftFlagTol;
    return s;
}

inline HolonomySample load_sample(const std::string& path) {
    return sample_from_json(detail::load_json_file(path), path);
}

// ---------------------------------------------------------------------------
// CSV table builders

inline void sample_to_csv(const HolonomySample& s, const std::string& path) {
    const int k = s.fiber_dim();
    const std::size_t dim = s.base.size();
    std::vector<std::string> header = {"loop", "plane_a", "plane_b", "side_a", "side_b"};
    for (std::size_t d = 0; d < dim; ++d) header.push_back("center_x" + std::to_string(d + 1));
    header.push_back("drift");
    header.push_back("drift_flagged");
    for (int i = 0; i < k; ++i)
        for (int j = 0; j < k; ++j)
            header.push_back("m_" + std::to_string(i + 1) + "_" + std::to_string(j + 1));

    std::vector<std::vector<std::string>> rows;
    for (std::size_t l = 0; l < s.frame.size(); ++l) {
        std::vector<std::string> row;
        row.push_back(std::to_string(l));
        if (l < s.params.size()) {
            row.push_back(std::to_string(s.params[l].plane_a + 1));
            row.push_back(std::to_string(s.params[l].plane_b + 1));
            row.push_back(fmt17(s.params[l].side_a));
            row.push_back(fmt17(s.params[l].side_b));
            for (std::size_t d = 0; d < dim; ++d) row.push_back(fmt17(s.params[l].center[d]));
        } else {
            row.insert(row.end(), 4 + dim, "");
        }
        row.push_back(fmt17(s.drift[l]));
        row.push_back(s.drift_flagged[l] ? "1" : "0");
        for (int i = 0; i < k; ++i)
            for (int j = 0; j < k; ++j) row.push_back(fmt17(s.frame[l](i, j)));
        rows.push_back(std::move(row));
    }
    write_csv(path, header, rows);
}

inline void decomposition_to_csv(const InvariantDecomposition& dec, const std::string& path) {
    if (dec.projectors.empty()) {
        write_csv(path, {"projector", "dim"}, {});
        return;
    }
    const int k = static_cast<int>(dec.projectors[0].rows());
    std::vector<std::string> header = {"projector", "dim"};
    for (int i = 0; i < k; ++i)
        for (int j = 0; j < k; ++j)
            header.push_back("p_" + std::to_string(i + 1) + "_" + std::to_string(j + 1));
    std::vector<std::vector<std::string>> rows;
    for (int s = 0; s < dec.r; ++s) {
        std::vector<std::string> row = {std::to_string(s), std::to_string(dec.dims[s])};
        for (int i = 0; i < k; ++i)
            for (int j = 0; j < k; ++j) row.push_back(fmt17(dec.projectors[s](i, j)));
        rows.push_back(std::move(row));
    }
    write_csv(path, header, rows);
}

// ---------------------------------------------------------------------------
// report JSON

inline Json validation_to_json(const ValidationReport& rep) {
    Json checks = Json::array();
    for (const CheckResult& c : rep.checks) {
        Json cj;
        cj["condition"] = c.condition;
        cj["pass"] = c.pass;
        cj["worst_residual"] = c.worst_residual;
        cj["witness"] = c.witness;
        cj["detail"] = c.detail;
        checks.push_back(std::move(cj));
    }
    Json j;
    j["all_pass"] = rep.all_pass();
    j["checks"] = std::move(checks);
    return j;
}

inline Json decomposition_to_json(const InvariantDecomposition& dec) {
    Json j;
    j["r"] = dec.r;
    j["dims"] = dec.dims;
    j["commutant_dim"] = dec.commutant_dim;
    j["sym_commutant_dim"] = dec.sym_commutant_dim;
    j["trivial_group"] = dec.trivial_group;
    Json projs = Json::array();
    for (const Mat& p : dec.projectors) projs.push_back(matrix_to_json(p));
    j["projectors"] = std::move(projs);
    Json frame = Json::array();
    for (const Mat& p : dec.projectors_frame) frame.push_back(matrix_to_json(p));
    j["projectors_frame"] = std::move(frame);
    return j;
}

inline Json diagram_to_json(const DiagramReport& rep) {
    Json j;
    j["entry"] = rep.entry;
    j["loop_count"] = rep.loop_count;
    j["steps"] = rep.steps;
    j["seed"] = rep.seed;
    j["tol"] = rep.tol;
    j["vertical_value"] = rep.vertical_value;
    j["loop_scale"] = rep.loop_scale;
    j["max_residual"] = rep.max_residual;
    j["pass"] = rep.pass;
    Json loops = Json::array();
    for (const LoopDiagnostic& d : rep.loops) {
        Json dj;
        dj["residual"] = d.residual;
        dj["richardson_adapted"] = d.richardson_adapted;
        dj["richardson_quotient"] = d.richardson_quotient;
        dj["within_budget"] = d.within_budget;
        loops.push_back(std::move(dj));
    }
    j["loops"] = std::move(loops);
    return j;
}

inline Json derham_to_json(const DeRhamReport& rep) {
    Json j;
    j["entry"] = rep.entry;
    j["loop_count"] = rep.loop_count;
    j["steps"] = rep.steps;
    j["seed"] = rep.seed;
    j["tol"] = rep.tol;
    j["svd_tol"] = rep.svd_tol;
    j["loop_scale"] = rep.loop_scale;
    j["verdict"] = rep.verdict;
    j["pass"] = rep.pass;
    j["trivial_group"] = rep.trivial_group;
    j["max_match_residual"] = rep.max_match_residual;
    j["upstairs"] = decomposition_to_json(rep.upstairs);
    j["downstairs"] = decomposition_to_json(rep.downstairs);
    Json matches = Json::array();
    for (const ProjectorMatch& m : rep.matches) {
        Json mj;
        mj["up_index"] = m.up_index;
        mj["down_index"] = m.down_index;
        mj["residual"] = m.residual;
        mj["dim_up"] = m.dim_up;
        mj["dim_down"] = m.dim_down;
        matches.push_back(std::move(mj));
    }
    j["matches"] = std::move(matches);
    return j;
}

inline Json product_check_to_json(const ProductCheckReport& rep) {
    Json j;
    j["entry"] = rep.entry;
    j["blocks"] = rep.blocks;
    j["loop_count"] = rep.loop_count;
    j["steps"] = rep.steps;
    j["seed"] = rep.seed;
    j["tol"] = rep.tol;
    j["max_off_block"] = rep.max_off_block;
    j["pass"] = rep.pass;
    return j;
}

inline void write_text_file(const std::string& path, const std::string& text) {
    std::ofstream out(path);
    if (!out) throw config_error("cannot write file: " + path);
    out << text;
}

inline void write_json_file(const std::string& path, const Json& j) {
    write_text_file(path, j.dump(2) + "\n");
}

} // namespace holo
