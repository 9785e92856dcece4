#pragma once

// Batch pipeline runner behind the command-line tool. Every command writes
// report.txt plus a machine-readable report.json (and command-specific CSVs)
// into the output directory, echoing the full effective configuration.
// Exit codes: 0 success/PASS, 1 verdict FAIL, 2 input error, 3 numerical
// error (singularity, domain exit, clustering ambiguity).

#include <filesystem>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include "holo/io.hpp"

namespace holo {

struct RunConfig {
    std::string command;              // validate | coeffs | transport | holonomy | decompose |
                                      // verify-isomorphism | derham | product-check
    std::string catalog;              // built-in entry name
    std::string config_path;          // manifold config file (alternative to catalog)
    std::string curve;                // transport: generator string, JSON literal or file path
    std::string input_path;           // decompose: previously exported sample JSON
    int steps = 512;
    int loops = 20;
    int samples = 200;                // validate: sample count
    double scale = 0.0;               // 0 = entry default
    double tol = 0.0;                 // 0 = command default
    double svd_tol = 1e-6;
    std::optional<unsigned long> seed;
    std::optional<double> vertical;   // verify-isomorphism lift height
    int grid = 3;                     // coeffs: grid points per axis
    std::string out_dir = ".";
};

namespace detail {

inline CatalogEntry resolve_entry(const RunConfig& cfg) {
    if (!cfg.catalog.empty() && !cfg.config_path.empty())
        throw config_error("give either --catalog or --config, not both");
    if (!cfg.catalog.empty()) return find_catalog(cfg.catalog);
    if (!cfg.config_path.empty()) return load_manifold_config(cfg.config_path);
    throw config_error("command '" + cfg.command + "' needs --catalog or --config");
}

inline unsigned long require_seed(const RunConfig& cfg) {
    if (!cfg.seed)
        throw config_error("command '" + cfg.command +
                           "' samples randomly and needs an explicit --seed");
    return *cfg.seed;
}

inline void check_positive(const RunConfig& cfg) {
    if (cfg.steps <= 0 || cfg.loops < 0 || cfg.samples <= 0 || cfg.grid <= 0 ||
        cfg.scale < 0.0 || cfg.tol < 0.0 || cfg.svd_tol <= 0.0)
        throw config_error("numeric options must be positive");
}

inline std::string out_path(const RunConfig& cfg, const std::string& file) {
    std::filesystem::create_directories(cfg.out_dir);
    return (std::filesystem::path(cfg.out_dir) / file).string();
}

inline Json config_echo(const RunConfig& cfg, double scale_used, double tol_used) {
    Json j;
    j["command"] = cfg.command;
    if (!cfg.catalog.empty()) j["catalog"] = cfg.catalog;
    if (!cfg.config_path.empty()) j["config"] = cfg.config_path;
    if (!cfg.curve.empty()) j["curve"] = cfg.curve;
    if (!cfg.input_path.empty()) j["input"] = cfg.input_path;
    j["steps"] = cfg.steps;
    j["loops"] = cfg.loops;
    j["samples"] = cfg.samples;
    j["scale"] = scale_used;
    j["tol"] = tol_used;
    j["svd_tol"] = cfg.svd_tol;
    if (cfg.seed) j["seed"] = *cfg.seed;
    if (cfg.vertical) j["vertical"] = *cfg.vertical;
    j["grid"] = cfg.grid;
    j["out_dir"] = cfg.out_dir;
    return j;
}

inline void emit_report(const RunConfig& cfg, const Json& body, const std::string& text) {
    write_json_file(out_path(cfg, "report.json"), body);
    write_text_file(out_path(cfg, "report.txt"), text);
}

inline std::string describe_config(const Json& echo) {
    std::ostringstream os;
    os << "configuration:";
    for (auto& [k, v] : echo.items()) os << " " << k << "=" << v.dump();
    os << "\n";
    return os.str();
}

// ------------------------------------------------------------------ commands

inline int cmd_validate(const RunConfig& cfg) {
    CatalogEntry entry = resolve_entry(cfg);
    ValidateOptions opt;
    opt.samples = cfg.samples;
    if (cfg.seed) opt.seed = *cfg.seed;
    ValidationReport rep = entry.is_kcontact() ? validate(entry.kcontact(), opt)
                                               : validate(entry.riemannian(), opt);
    Json echo = config_echo(cfg, 0.0, 0.0);
    Json body;
    body["configuration"] = echo;
    body["entry"] = entry.name;
    body["validation"] = validation_to_json(rep);

    std::ostringstream os;
    os << describe_config(echo);
    os << "validate " << entry.name << "\n";
    for (const CheckResult& c : rep.checks) {
        os << "  " << (c.pass ? "pass" : "FAIL") << "  " << c.condition
           << "  residual=" << fmt17(c.worst_residual) << "  witness=(";
        for (std::size_t i = 0; i < c.witness.size(); ++i)
            os << (i ? ", " : "") << fmt17(c.witness[i]);
        os << ")\n";
    }
    os << (rep.all_pass() ? "all checks passed" : "validation FAILED") << "\n";
    emit_report(cfg, body, os.str());
    std::cout << os.str();
    return rep.all_pass() ? 0 : 1;
}

inline int cmd_coeffs(const RunConfig& cfg) {
    CatalogEntry entry = resolve_entry(cfg);
    const DomainBox& box =
        entry.is_kcontact() ? entry.kcontact().box : entry.riemannian().box;
    const int dim = static_cast<int>(box.size());

    // grid^dim interior points, uniformly placed
    std::vector<EvalPoint> pts;
    std::vector<int> idx(dim, 0);
    for (;;) {
        EvalPoint p(dim);
        for (int d = 0; d < dim; ++d)
            p[d] = box[d].lo + box[d].width() * (idx[d] + 1.0) / (cfg.grid + 1.0);
        pts.push_back(std::move(p));
        int d = 0;
        while (d < dim && ++idx[d] == cfg.grid) idx[d++] = 0;
        if (d == dim) break;
    }

    std::vector<std::string> header = {"k", "i", "j", "value"};
    for (int d = 0; d < dim; ++d) header.push_back("x" + std::to_string(d + 1));
    std::vector<std::vector<std::string>> rows;
    auto emit_point = [&](const Tensor3& gamma, const EvalPoint& p, int lower_dim) {
        for (int k = 0; k < gamma.d; ++k)
            for (int i = 0; i < lower_dim; ++i)
                for (int j = 0; j < gamma.d; ++j) {
                    std::vector<std::string> row = {
                        std::to_string(k + 1), std::to_string(i + 1), std::to_string(j + 1),
                        fmt17(i < gamma.d ? gamma.at(k, i, j) : 0.0)};
                    for (int d = 0; d < dim; ++d) row.push_back(fmt17(p[d]));
                    rows.push_back(std::move(row));
                }
    };
    if (entry.is_kcontact()) {
        HorizontalField field(entry.kcontact());
        // adapted coefficients: vertical lower index row is exactly zero
        for (auto& p : pts) emit_point(field.coeffs(p), p, entry.kcontact().dim());
    } else {
        LeviCivitaField field(entry.riemannian());
        for (auto& p : pts) emit_point(field.coeffs(p), p, entry.riemannian().dim);
    }
    write_csv(out_path(cfg, "coeffs.csv"), header, rows);

    Json echo = config_echo(cfg, 0.0, 0.0);
    Json body;
    body["configuration"] = echo;
    body["entry"] = entry.name;
    body["kind"] = entry.is_kcontact() ? "adapted" : "levi_civita";
    body["points"] = pts.size();
    body["rows"] = rows.size();
    std::ostringstream os;
    os << describe_config(echo);
    os << "coeffs " << entry.name << ": " << rows.size() << " rows at " << pts.size()
       << " grid points -> coeffs.csv\n";
    emit_report(cfg, body, os.str());
    std::cout << os.str();
    return 0;
}

inline int cmd_transport(const RunConfig& cfg) {
    CatalogEntry entry = resolve_entry(cfg);
    if (cfg.curve.empty()) throw config_error("transport needs --curve");
    Curve curve = load_curve_config(cfg.curve);

    TransportResult tr;
    double estimate = 0.0;
    if (entry.is_kcontact()) {
        tr = transport_adapted(entry.kcontact(), curve, cfg.steps);
        estimate = richardson_check(entry.kcontact(), curve, cfg.steps);
    } else {
        tr = transport_riemannian(entry.riemannian(), curve, cfg.steps);
        estimate = richardson_check(entry.riemannian(), curve, cfg.steps);
    }

    const int k = static_cast<int>(tr.matrix.rows());
    std::vector<std::string> header;
    for (int j = 0; j < k; ++j) header.push_back("col_" + std::to_string(j + 1));
    std::vector<std::vector<std::string>> rows;
    for (int i = 0; i < k; ++i) {
        std::vector<std::string> row;
        for (int j = 0; j < k; ++j) row.push_back(fmt17(tr.matrix(i, j)));
        rows.push_back(std::move(row));
    }
    write_csv(out_path(cfg, "transport_matrix.csv"), header, rows);

    Json echo = config_echo(cfg, 0.0, 0.0);
    Json body;
    body["configuration"] = echo;
    body["entry"] = entry.name;
    body["matrix"] = matrix_to_json(tr.matrix);
    body["metric_drift"] = tr.metric_drift;
    body["steps_used"] = tr.steps_used;
    body["curve_length"] = tr.curve_length;
    body["richardson_estimate"] = estimate;
    std::ostringstream os;
    os << describe_config(echo);
    os << "transport " << entry.name << ": steps_used=" << tr.steps_used
       << " drift=" << fmt17(tr.metric_drift) << " length=" << fmt17(tr.curve_length)
       << " richardson=" << fmt17(estimate) << "\n";
    for (int i = 0; i < k; ++i) {
        os << "  [";
        for (int j = 0; j < k; ++j) os << (j ? ", " : "") << fmt17(tr.matrix(i, j));
        os << "]\n";
    }
    emit_report(cfg, body, os.str());
    std::cout << os.str();
    return 0;
}

inline HolonomySample sampled_holonomy(const RunConfig& cfg, const CatalogEntry& entry,
                                       double scale, unsigned long seed) {
    if (entry.is_kcontact()) {
        LoopFamily fam = generate_loops(entry.kcontact(), entry.base, cfg.loops, scale, seed);
        return sample_holonomy(entry.kcontact(), fam, cfg.steps);
    }
    LoopFamily fam = generate_loops(entry.riemannian(), entry.base, cfg.loops, scale, seed);
    return sample_holonomy(entry.riemannian(), fam, cfg.steps);
}

inline int cmd_holonomy(const RunConfig& cfg) {
    CatalogEntry entry = resolve_entry(cfg);
    unsigned long seed = require_seed(cfg);
    double scale = cfg.scale > 0.0 ? cfg.scale : entry.loop_scale;
    HolonomySample sample = sampled_holonomy(cfg, entry, scale, seed);

    sample_to_csv(sample, out_path(cfg, "samples.csv"));
    write_json_file(out_path(cfg, "samples.json"), sample_to_json(sample));

    Json echo = config_echo(cfg, scale, 0.0);
    Json body;
    body["configuration"] = echo;
    body["entry"] = entry.name;
    body["fiber_dim"] = sample.fiber_dim();
    body["loop_count"] = sample.frame.size();
    body["max_orthogonality_defect"] = sample.max_orthogonality_defect();
    body["trivial_group"] = sample.trivial();
    std::ostringstream os;
    os << describe_config(echo);
    os << "holonomy " << entry.name << ": " << sample.frame.size()
       << " loops, orthogonality defect " << fmt17(sample.max_orthogonality_defect())
       << (sample.trivial() ? ", trivial within tolerance" : "") << "\n";
    emit_report(cfg, body, os.str());
    std::cout << os.str();
    return 0;
}

inline int cmd_decompose(const RunConfig& cfg) {
    unsigned long seed = require_seed(cfg);
    if (!cfg.input_path.empty() && (!cfg.catalog.empty() || !cfg.config_path.empty()))
        throw config_error("decompose: give --input or a manifold source, not both");
    HolonomySample sample = [&] {
        if (!cfg.input_path.empty()) return load_sample(cfg.input_path);
        CatalogEntry entry = resolve_entry(cfg);
        double scale = cfg.scale > 0.0 ? cfg.scale : entry.loop_scale;
        return sampled_holonomy(cfg, entry, scale, seed);
    }();

    InvariantDecomposition dec = invariant_decomposition(sample, cfg.svd_tol, seed);
    decomposition_to_csv(dec, out_path(cfg, "projectors.csv"));

    Json echo = config_echo(cfg, cfg.scale, 0.0);
    Json body;
    body["configuration"] = echo;
    body["decomposition"] = decomposition_to_json(dec);
    std::ostringstream os;
    os << describe_config(echo);
    os << "decompose: r=" << dec.r << " dims=[";
    for (std::size_t i = 0; i < dec.dims.size(); ++i) os << (i ? ", " : "") << dec.dims[i];
    os << "] commutant_dim=" << dec.commutant_dim
       << " sym_commutant_dim=" << dec.sym_commutant_dim;
    if (dec.trivial_group) os << " (trivial group: decomposition non-unique)";
    os << "\n";
    emit_report(cfg, body, os.str());
    std::cout << os.str();
    return 0;
}

inline int cmd_verify_isomorphism(const RunConfig& cfg) {
    CatalogEntry entry = resolve_entry(cfg);
    unsigned long seed = require_seed(cfg);
    double tol = cfg.tol > 0.0 ? cfg.tol : 1e-6;
    if (cfg.scale > 0.0) entry.loop_scale = cfg.scale;
    DiagramReport rep =
        verify_isomorphism(entry, cfg.loops, cfg.steps, seed, tol, cfg.vertical);

    Json echo = config_echo(cfg, entry.loop_scale, tol);
    Json body;
    body["configuration"] = echo;
    body["diagram"] = diagram_to_json(rep);
    std::ostringstream os;
    os << describe_config(echo);
    os << "verify-isomorphism " << rep.entry << ": max residual " << fmt17(rep.max_residual)
       << " over " << rep.loops.size() << " loops -> " << (rep.pass ? "PASS" : "FAIL") << "\n";
    for (std::size_t i = 0; i < rep.loops.size(); ++i) {
        const LoopDiagnostic& d = rep.loops[i];
        os << "  loop " << i << ": residual=" << fmt17(d.residual)
           << " richardson=" << fmt17(d.richardson_adapted + d.richardson_quotient)
           << (d.within_budget ? "" : "  OUT OF BUDGET") << "\n";
    }
    emit_report(cfg, body, os.str());
    std::cout << os.str();
    return rep.pass ? 0 : 1;
}

inline int cmd_derham(const RunConfig& cfg) {
    CatalogEntry entry = resolve_entry(cfg);
    unsigned long seed = require_seed(cfg);
    double tol = cfg.tol > 0.0 ? cfg.tol : 1e-5;
    if (cfg.scale > 0.0) entry.loop_scale = cfg.scale;
    DeRhamReport rep = de_rham_report(entry, cfg.loops, cfg.steps, seed, tol, cfg.svd_tol);

    Json echo = config_echo(cfg, entry.loop_scale, tol);
    Json body;
    body["configuration"] = echo;
    body["derham"] = derham_to_json(rep);
    std::ostringstream os;
    os << describe_config(echo);
    os << "derham " << rep.entry << ": upstairs r=" << rep.upstairs.r << " downstairs r="
       << rep.downstairs.r << " matched residual " << fmt17(rep.max_match_residual) << " -> "
       << rep.verdict << "\n";
    emit_report(cfg, body, os.str());
    std::cout << os.str();
    return rep.pass ? 0 : 1;
}

inline int cmd_product_check(const RunConfig& cfg) {
    CatalogEntry entry = resolve_entry(cfg);
    unsigned long seed = require_seed(cfg);
    double tol = cfg.tol > 0.0 ? cfg.tol : 1e-6;
    double scale = cfg.scale > 0.0 ? cfg.scale : entry.loop_scale;
    if (entry.is_kcontact())
        throw config_error("product-check: entry must be Riemannian with a block partition");
    ProductCheckReport rep = product_holonomy_check(entry.riemannian(), entry.blocks, entry.base,
                                                    cfg.loops, cfg.steps, scale, seed, tol);
    rep.entry = entry.name;

    Json echo = config_echo(cfg, scale, tol);
    Json body;
    body["configuration"] = echo;
    body["product_check"] = product_check_to_json(rep);
    std::ostringstream os;
    os << describe_config(echo);
    os << "product-check " << rep.entry << ": max off-block " << fmt17(rep.max_off_block)
       << " -> " << (rep.pass ? "PASS" : "FAIL") << "\n";
    emit_report(cfg, body, os.str());
    std::cout << os.str();
    return rep.pass ? 0 : 1;
}

} // namespace detail

inline int run(const RunConfig& cfg) {
    try {
        detail::check_positive(cfg);
        if (cfg.command == "validate") return detail::cmd_validate(cfg);
        if (cfg.command == "coeffs") return detail::cmd_coeffs(cfg);
        if (cfg.command == "transport") return detail::cmd_transport(cfg);
        if (cfg.command == "holonomy") return detail::cmd_holonomy(cfg);
        if (cfg.command == "decompose") return detail::cmd_decompose(cfg);
        if (cfg.command == "verify-isomorphism") return detail::cmd_verify_isomorphism(cfg);
        if (cfg.command == "derham") return detail::cmd_derham(cfg);
        if (cfg.command == "product-check") return detail::cmd_product_check(cfg);
        throw config_error("unknown command '" + cfg.command + "'");
    } catch (const parse_error& e) {
        std::cerr << "input error: " << e.what() << "\n";
        return 2;
    } catch (const config_error& e) {
        std::cerr << "input error: " << e.what() << "\n";
        return 2;
    } catch (const eval_error& e) {
        std::cerr << "numerical error: " << e.what() << "\n";
        return 3;
    } catch (const numeric_error& e) {
        std::cerr << "numerical error: " << e.what() << "\n";
        return 3;
    }
}

} // namespace holo
