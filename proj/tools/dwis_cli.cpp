// Command-line driver: run or validate an experiment spec, or re-plot an output directory.
//
//   dwis_cli run specs/default.yaml --out out/default --jobs 4 [--db-axis]
//   dwis_cli validate specs/default.yaml
//   dwis_cli plot out/default [--db-axis]
//
// DWIS_OUT_DIR and DWIS_JOBS override the spec's output directory and the job count; explicit
// flags override both.

#include "dwis/error.hpp"
#include "dwis/experiment.hpp"
#include "dwis/io.hpp"
#include "dwis/plot.hpp"

#include "CLI11.hpp"

#include <cstdlib>
#include <iostream>
#include <string>

namespace {

std::string env_or(const char* name, const std::string& fallback) {
    const char* v = std::getenv(name);
    return v && *v ? std::string(v) : fallback;
}

int cmd_validate(const std::string& spec_path) {
    const auto spec = dwis::load_spec(spec_path);
    const auto cells = spec.cells();
    std::cout << "spec ok: " << cells.size() << " cells (" << spec.schemes.size() << " schemes x "
              << spec.mu.size() << " mu x " << spec.delta0.size() << " delta0 x " << spec.seeds.size()
              << " seeds)\n";
    for (const auto& c : cells) std::cout << "  " << c.index << ' ' << c.name() << '\n';
    return 0;
}

int cmd_run(const std::string& spec_path, const std::string& out_flag, std::size_t jobs_flag,
            bool db_axis) {
    const auto spec = dwis::load_spec(spec_path);
    dwis::RunOptions options;
    options.out_dir = !out_flag.empty() ? out_flag : env_or("DWIS_OUT_DIR", spec.output_dir.string());
    options.jobs = jobs_flag > 0 ? jobs_flag : std::stoul(env_or("DWIS_JOBS", "1"));
    options.db_axis = db_axis;

    const auto report = dwis::run_experiment(spec, options);
    std::size_t failed = 0;
    for (const auto& c : report.cells) {
        if (c.ok) continue;
        ++failed;
        std::cerr << "cell " << c.cell.name() << " failed: " << c.message << '\n';
    }
    std::cout << report.cells.size() - failed << "/" << report.cells.size() << " cells ok, output in "
              << options.out_dir.string() << '\n';
    return failed == 0 ? 0 : 1;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Dynamic weight importance sampling simulator"};
    app.require_subcommand(1);

    std::string spec_path, out_dir, plot_dir;
    std::size_t jobs = 0;
    bool db_axis = false;

    auto* run = app.add_subcommand("run", "Run every sweep cell of a spec");
    run->add_option("spec", spec_path, "Experiment spec (YAML)")->required();
    run->add_option("--out", out_dir, "Output directory");
    run->add_option("--jobs", jobs, "Worker threads");
    run->add_flag("--db-axis", db_axis, "Plot costs as 10 log10(replies)");

    auto* validate = app.add_subcommand("validate", "Check a spec and list its sweep cells");
    validate->add_option("spec", spec_path, "Experiment spec (YAML)")->required();

    auto* plot = app.add_subcommand("plot", "Regenerate figures from an output directory");
    plot->add_option("dir", plot_dir, "Output directory of a previous run")->required();
    plot->add_flag("--db-axis", db_axis, "Plot costs as 10 log10(replies)");

    CLI11_PARSE(app, argc, argv);

    try {
        if (*run) return cmd_run(spec_path, out_dir, jobs, db_axis);
        if (*validate) return cmd_validate(spec_path);
        if (*plot) {
            dwis::write_figures(plot_dir, db_axis);
            return 0;
        }
    } catch (const dwis::ParameterError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
