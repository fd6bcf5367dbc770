#include <CLI11.hpp>
#include <iostream>
#include <optional>

#include "conservo/cli.hpp"
#include "conservo/errors.hpp"

namespace {

struct Flags {
    std::string experiment;
    std::string method;
    std::vector<std::string> table_methods;
    double tau = 0.0;
    double t_final = 0.0;
    double delta = 0.0;
    double epsilon = 0.0;
    int max_iters = 0;
    std::string base_scheme;
    std::string output_dir;
    std::size_t decimate = 0;
    std::uint64_t seed = 0;
    int halvings = 0;
    std::string config_path;
};

void add_common(CLI::App* cmd, Flags& f) {
    cmd->add_option("--experiment", f.experiment, "registered experiment name");
    cmd->add_option("--tau", f.tau, "time step override");
    cmd->add_option("--t-final", f.t_final, "final time override");
    cmd->add_option("--delta", f.delta, "conserved-quantity tolerance override");
    cmd->add_option("--epsilon", f.epsilon, "residual tolerance override");
    cmd->add_option("--max-iters", f.max_iters, "fixed-point iteration cap override");
    cmd->add_option("--base-scheme", f.base_scheme, "improved_euler | trapezoidal");
    cmd->add_option("--output-dir", f.output_dir, "directory for emitted CSV files");
    cmd->add_option("--decimate", f.decimate, "keep every k-th state");
    cmd->add_option("--seed", f.seed, "vortex sampling seed");
    cmd->add_option("--config", f.config_path, "flat key=value config file");
}

// Command-line flags override config-file values, which override registry
// defaults.
conservo::cli::RunConfig build(const Flags& f, const CLI::App* cmd) {
    conservo::cli::RunConfig run;
    run.experiment = f.experiment;
    run.method = f.method;
    run.methods = f.table_methods;
    if (cmd->count("--tau")) run.tau = f.tau;
    if (cmd->count("--t-final")) run.t_final = f.t_final;
    if (cmd->count("--delta")) run.delta = f.delta;
    if (cmd->count("--epsilon")) run.epsilon = f.epsilon;
    if (cmd->count("--max-iters")) run.max_iters = f.max_iters;
    if (!f.base_scheme.empty()) run.base_scheme = f.base_scheme;
    if (!f.output_dir.empty()) run.output_dir = f.output_dir;
    if (cmd->count("--decimate")) run.decimate = f.decimate;
    if (cmd->count("--seed")) run.seed = f.seed;
    const CLI::Option* halvings = cmd->get_option_no_throw("--halvings");
    if (halvings && halvings->count()) run.halvings = f.halvings;
    if (!f.config_path.empty())
        conservo::cli::apply_config(run, conservo::cli::parse_config_file(f.config_path));
    return run;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"conservative ODE integration toolkit"};
    app.require_subcommand(1);

    Flags f_run, f_table, f_conv;

    CLI::App* run = app.add_subcommand("run", "integrate one experiment with one method");
    add_common(run, f_run);
    run->add_option("--method", f_run.method, "integration method");

    CLI::App* table =
        app.add_subcommand("table", "run several methods and print a summary table");
    add_common(table, f_table);
    table->add_option("--method", f_table.table_methods,
                      "method subset (repeatable; default all)");

    CLI::App* list = app.add_subcommand("list", "list experiments and methods");

    CLI::App* conv = app.add_subcommand("convergence", "time-step halving study");
    add_common(conv, f_conv);
    conv->add_option("--method", f_conv.method, "integration method");
    conv->add_option("--halvings", f_conv.halvings, "number of halvings (default 3)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        // usage errors exit 1; --help exits 0
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }

    try {
        if (run->parsed()) return conservo::cli::cmd_run(build(f_run, run));
        if (table->parsed()) return conservo::cli::cmd_table(build(f_table, table));
        if (list->parsed()) return conservo::cli::cmd_list();
        if (conv->parsed()) return conservo::cli::cmd_convergence(build(f_conv, conv));
    } catch (const conservo::InvalidParams& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 1;
}
