#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "heiskak/cli.hpp"

namespace {

void add_common(CLI::App* cmd, heiskak::RunConfig& c, std::optional<double>& delta,
                std::optional<double>& cell, std::optional<double>& spacing) {
    cmd->add_option("--seed", c.seed, "Random seed")->capture_default_str();
    cmd->add_option("--rho", c.rho, "Cap width / cell scale")->capture_default_str();
    cmd->add_option("--q", c.q, "Energy exponent")->capture_default_str();
    cmd->add_option("--t", c.t, "Frostman exponent")->capture_default_str();
    cmd->add_option("--delta", delta, "Scale override (generate) or Frostman floor (energy)");
    cmd->add_option("--n-theta", c.n_theta, "Theta nodes")->capture_default_str();
    cmd->add_option("--cell", cell, "Projection grid cell (default delta^2/2)");
    cmd->add_option("--n-mc", c.n_mc, "Monte Carlo samples per ball")->capture_default_str();
    cmd->add_option("--spacing", spacing, "Broad/narrow evaluation grid (default delta^2/2)");
    cmd->add_option("--out", c.out_dir, "Output directory")->capture_default_str();
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Heisenberg projection and Kakeya-type experiments"};
    app.require_subcommand(1);
    heiskak::RunConfig c;
    std::optional<double> delta, cell, spacing;

    auto* verify = app.add_subcommand("verify-lemmas", "Run the lemma suites and write lemmas.csv");
    add_common(verify, c, delta, cell, spacing);
    verify->add_option("--tol-scale", c.tol_scale, "Multiply every tolerance")->capture_default_str();

    for (const char* name : {"energy", "broad-narrow", "rescale-demo"}) {
        auto* cmd = app.add_subcommand(name);
        add_common(cmd, c, delta, cell, spacing);
        cmd->add_option("measure", c.measure_path, "Measure file")->required();
    }
    app.get_subcommand("energy")->description("Projection energy against mass and Frostman constant");
    app.get_subcommand("broad-narrow")->description("Broad/narrow decomposition with CSV and SVG output");
    app.get_subcommand("rescale-demo")->description("One cap, plank, cell and rescale level");

    auto* gen = app.add_subcommand("generate", "Write a test measure to OUT/measure.txt");
    add_common(gen, c, delta, cell, spacing);
    gen->add_option("--kind", c.kind, "cantor | solid | plane | clusters | random | single")
        ->capture_default_str();
    gen->add_option("--depth", c.depth, "Cantor depth")->capture_default_str();
    gen->add_option("--n", c.n, "Cantor translates or random ball count")->capture_default_str();
    gen->add_option("--ratio", c.ratio, "Cantor contraction ratio")->capture_default_str();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : heiskak::kExitInput;
    }
    c.subcommand = app.get_subcommands().front()->get_name();
    c.delta = delta;
    c.cell = cell;
    c.spacing = spacing;
    return heiskak::run_command(c, std::cerr);
}
