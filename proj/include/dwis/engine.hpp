#pragma once

#include "dwis/field.hpp"
#include "dwis/levels.hpp"
#include "dwis/reconstruct.hpp"
#include "dwis/sensors.hpp"

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string_view>
#include <vector>

namespace dwis {

struct DwisConfig {
    LevelScheme scheme = LevelScheme::UniformSG;
    std::size_t m0 = 3;             // levels in the first iteration
    std::size_t p = 3;              // level increment per iteration
    double delta0 = 0.2;            // initial contour margin
    double mu = 0.3;                // margin step size, 0 <= mu <= 1
    std::size_t spatial_iters = 12;
    double pilot_fraction = 0.005;  // share of sensors sampled to bootstrap the range
    std::size_t temporal_steps = 20;
    std::optional<double> delta_min; // defaults to delta0 / 100
    std::size_t pdf_bins = kDefaultPdfBins;
    double ridge_scale = 1e-8;      // spline ridge relative to max |G_ij|
    EvolutionParams evolution;
    std::uint64_t seed = 1;

    void validate() const;
    double margin_floor() const { return delta_min.value_or(delta0 / 100.0); }
    /// Margin adapts by the stochastic-gradient rule for every scheme except LM_FIX.
    bool adaptive_margin() const { return scheme != LevelScheme::LloydMaxFixed; }
};

enum class Phase { Pilot, Spatial, Temporal };

std::string_view to_string(Phase phase);

struct IterationRecord {
    Phase phase = Phase::Spatial;
    std::size_t k = 0;
    std::size_t m = 0;
    double delta = 0.0;
    std::size_t cost = 0;
    std::size_t cumulative_cost = 0;
    double tracking_rmse = 0.0;
    double modeling_rmse = 0.0;
    Interval range_est;

    friend bool operator==(const IterationRecord&, const IterationRecord&) = default;
};

struct RunResult {
    IterationRecord pilot;                // range bootstrap; its cost is part of cumulative cost
    std::vector<IterationRecord> spatial;
    std::vector<IterationRecord> temporal;
    std::size_t final_m = 0;
    double final_delta = 0.0;
};

/// Everything the spatial phase leaves behind for the temporal phase and for inspection.
struct SpatialOutcome {
    RunResult result;                            // pilot + spatial records, final M and margin
    SplineModel model;
    Grid reconstruction;
    std::vector<std::vector<QueryReply>> batches; // batch 0 is the pilot sample
    Interval truth_range;
};

/// Root-mean-square difference between two grids of identical shape.
double tracking_rmse(const Grid& current, const Grid& previous);
double modeling_rmse(const Grid& estimate, const Grid& truth);

/// Stochastic-gradient margin update:
///   delta_prev * (1 + mu * (e1 - e2) / (2 * mean(e1, e2))), floored at delta_min.
/// A vanishing mean error leaves the margin unchanged.
double delta_update(double delta_prev, double err_km1, double err_km2, double mu, double delta_min);

/// |est ∩ truth| / |truth|.
double range_coverage(const Interval& est, const Interval& truth);

/// Iterative query / reconstruct / re-level / adapt loop on a static field. `sensors` must have
/// no reported ids on entry; on exit it carries the report-once set of the phase.
SpatialOutcome spatial_phase(const Field& field, SensorField& sensors, const GridSpec& grid,
                             const DwisConfig& config);

/// Periodic updates with the final M and margin of the spatial phase. The field evolves before
/// each update; every update re-enables all sensors and reconstructs from its own replies.
std::vector<IterationRecord> temporal_phase(const Field& field, SensorField& sensors,
                                            const GridSpec& grid, const SpatialOutcome& spatial,
                                            const DwisConfig& config);

RunResult run_dwis(const Field& field, SensorField sensors, const GridSpec& grid,
                   const DwisConfig& config);

/// One row per record: `phase,k,m,delta,cost,cum_cost,tracking_rmse,modeling_rmse,range_lo,range_hi`.
void write_run_csv(std::ostream& out, const RunResult& run);
RunResult read_run_csv(std::istream& in);

} // namespace dwis
