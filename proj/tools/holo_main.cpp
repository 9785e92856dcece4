// Command-line front end for the holonomy laboratory. All commands are
// batch-style and reproducible: sampling commands require an explicit seed.

#include <CLI11.hpp>

#include "holo/cli.hpp"

int main(int argc, char** argv) {
    CLI::App app{"holonomy laboratory: connection coefficients, parallel transport, "
                 "holonomy sampling and decomposition on chart-level manifolds"};
    app.require_subcommand(1);

    holo::RunConfig cfg;
    unsigned long seed_value = 0;
    double vertical_value = 0.0;

    auto add_manifold_opts = [&](CLI::App* cmd) {
        cmd->add_option("--catalog", cfg.catalog, "built-in catalog entry name");
        cmd->add_option("--config", cfg.config_path, "manifold config file (JSON)");
        cmd->add_option("--out", cfg.out_dir, "output directory (default .)");
    };
    auto add_seed = [&](CLI::App* cmd, bool required) {
        auto* opt = cmd->add_option("--seed", seed_value, "RNG seed (no wall-clock seeding)");
        if (required) opt->required();
        cmd->callback([&, opt] {
            if (opt->count()) cfg.seed = seed_value;
        });
    };

    CLI::App* validate = app.add_subcommand("validate", "check the structure conditions");
    add_manifold_opts(validate);
    validate->add_option("--samples", cfg.samples, "Monte Carlo sample count (default 200)");
    add_seed(validate, false);

    CLI::App* coeffs = app.add_subcommand("coeffs", "dump connection coefficients on a grid");
    add_manifold_opts(coeffs);
    coeffs->add_option("--grid", cfg.grid, "grid points per axis (default 3)");

    CLI::App* transport = app.add_subcommand("transport", "parallel transport along a curve");
    add_manifold_opts(transport);
    transport->add_option("--curve", cfg.curve,
                          "curve: generator like \"latitude(pi/3)\", JSON literal, or file")
        ->required();
    transport->add_option("--steps", cfg.steps, "integration steps per unit parameter");

    CLI::App* holonomy = app.add_subcommand("holonomy", "sample holonomy over seeded loops");
    add_manifold_opts(holonomy);
    holonomy->add_option("--loops", cfg.loops, "number of loops (default 20)");
    holonomy->add_option("--steps", cfg.steps, "integration steps per unit parameter");
    holonomy->add_option("--scale", cfg.scale, "rectangle side bound (default: entry value)");
    add_seed(holonomy, true);

    CLI::App* decompose =
        app.add_subcommand("decompose", "invariant decomposition from sampled holonomy");
    add_manifold_opts(decompose);
    decompose->add_option("--input", cfg.input_path, "previously exported samples.json");
    decompose->add_option("--loops", cfg.loops, "number of loops when sampling");
    decompose->add_option("--steps", cfg.steps, "integration steps per unit parameter");
    decompose->add_option("--scale", cfg.scale, "rectangle side bound");
    decompose->add_option("--svd-tol", cfg.svd_tol, "relative rank threshold (default 1e-6)");
    add_seed(decompose, true);

    CLI::App* verify = app.add_subcommand(
        "verify-isomorphism", "adapted vs quotient transport along lifted loops");
    add_manifold_opts(verify);
    verify->add_option("--loops", cfg.loops, "number of loops (default 20)");
    verify->add_option("--steps", cfg.steps, "integration steps per unit parameter");
    verify->add_option("--scale", cfg.scale, "rectangle side bound");
    verify->add_option("--tol", cfg.tol, "residual tolerance (default 1e-6)");
    auto* vert = verify->add_option("--vertical", vertical_value, "lift height (default: base)");
    verify->callback([&, vert] {
        if (vert->count()) cfg.vertical = vertical_value;
    });
    add_seed(verify, true);

    CLI::App* derham = app.add_subcommand(
        "derham", "compare invariant decompositions upstairs and on the quotient");
    add_manifold_opts(derham);
    derham->add_option("--loops", cfg.loops, "number of loops (default 20)");
    derham->add_option("--steps", cfg.steps, "integration steps per unit parameter");
    derham->add_option("--scale", cfg.scale, "rectangle side bound");
    derham->add_option("--tol", cfg.tol, "projector match tolerance (default 1e-5)");
    derham->add_option("--svd-tol", cfg.svd_tol, "relative rank threshold (default 1e-6)");
    add_seed(derham, true);

    CLI::App* product = app.add_subcommand(
        "product-check", "block structure of holonomy over a product metric");
    add_manifold_opts(product);
    product->add_option("--loops", cfg.loops, "number of loops (default 20)");
    product->add_option("--steps", cfg.steps, "integration steps per unit parameter");
    product->add_option("--scale", cfg.scale, "rectangle side bound");
    product->add_option("--tol", cfg.tol, "off-block tolerance (default 1e-6)");
    add_seed(product, true);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : 2; // usage problems are input errors
    }

    cfg.command = app.get_subcommands().front()->get_name();
    return holo::run(cfg);
}
