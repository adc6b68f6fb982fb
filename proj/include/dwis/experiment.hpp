#pragma once

#include "dwis/engine.hpp"
#include "dwis/field.hpp"

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace dwis {

/// One point of the sweep cross product.
struct SweepCell {
    std::size_t index = 0;
    LevelScheme scheme = LevelScheme::UniformSG;
    double mu = 0.0;
    double delta0 = 0.0;
    std::uint64_t seed = 0;

    /// File stem, e.g. `U_SG_mu0.3_d0.2_s1`.
    std::string name() const;
};

/// A parsed experiment file. Field and sensors are regenerated per cell from the cell seed, so
/// cells sharing a seed share the same field and deployment.
struct ExperimentSpec {
    FieldParams field;
    EvolutionParams evolution;
    std::size_t sensors = 5000;
    GridSpec grid;
    DwisConfig dwis;            // scheme, mu, delta0, seed and delta_min come from the sweep
    double delta_min_ratio = 0.01;
    std::vector<LevelScheme> schemes;
    std::vector<double> mu;
    std::vector<double> delta0;
    std::vector<std::uint64_t> seeds;
    std::filesystem::path output_dir = "out";

    /// Order: scheme, then mu, then delta0, then seed (seed varies fastest).
    std::vector<SweepCell> cells() const;
    DwisConfig config_for(const SweepCell& cell) const;
    void validate() const;
};

/// Parse errors carry the dotted path of the offending field.
ExperimentSpec parse_spec(std::string_view yaml_text);
ExperimentSpec load_spec(const std::filesystem::path& path);

struct RunOptions {
    std::filesystem::path out_dir;
    std::size_t jobs = 1;
    bool db_axis = false;
};

struct CellOutcome {
    SweepCell cell;
    bool ok = false;
    std::string file;    // relative to the output directory
    std::string message; // failure diagnostic
};

struct SweepReport {
    std::vector<CellOutcome> cells;
    bool all_ok() const;
};

/// Runs one cell to completion: builds field and sensors, runs both phases.
RunResult run_cell(const ExperimentSpec& spec, const SweepCell& cell);

/// Writes `cells/<name>.csv` per cell, `manifest.csv`, and the figure SVGs.
SweepReport run_experiment(const ExperimentSpec& spec, const RunOptions& options);

/// Manifest columns: `index,scheme,mu,delta0,seed,status,file,message`.
void write_manifest(const std::filesystem::path& path, const std::vector<CellOutcome>& cells);
std::vector<CellOutcome> read_manifest(const std::filesystem::path& path);

} // namespace dwis
