#include "dwis/engine.hpp"

#include "dwis/error.hpp"
#include "dwis/io.hpp"
#include "dwis/random.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <ostream>
#include <string>

namespace dwis {

using detail::require;

namespace {

constexpr double kMinMeanError = 1e-15;

// A range must have positive width before levels can be placed in it.
Interval widen_degenerate(Interval r, double pad) {
    if (!(r.lo < r.hi)) {
        r.lo -= pad;
        r.hi += pad;
    }
    return r;
}

std::vector<double> collect_values(const std::vector<QueryReply>& replies) {
    std::vector<double> out;
    out.reserve(replies.size());
    for (const auto& r : replies) out.push_back(r.value);
    return out;
}

Grid reconstruct(const std::vector<Point>& points, const std::vector<double>& values,
                 const GridSpec& grid, double ridge_scale, SplineModel& model) {
    model = fit_biharmonic(points, values, Ridge::relative(ridge_scale));
    return eval_spline(model, grid);
}

std::optional<Pdf1D> pdf_for(LevelScheme scheme, const Grid& belief, const Interval& range,
                             const std::optional<Pdf1D>& known, std::size_t bins) {
    switch (scheme) {
    case LevelScheme::UniformSG: return std::nullopt;
    case LevelScheme::LloydMaxSG: return estimate_pdf(belief.values, range, bins);
    case LevelScheme::LloydMaxFixed: return known;
    }
    return std::nullopt;
}

} // namespace

void DwisConfig::validate() const {
    require(m0 >= 1, "m0 must be >= 1");
    require(p >= 1, "p must be >= 1");
    require(std::isfinite(mu) && mu >= 0.0 && mu <= 1.0, "mu must satisfy 0 <= mu <= 1");
    require(std::isfinite(delta0) && delta0 > 0.0, "delta0 must be > 0");
    const double floor = margin_floor();
    require(std::isfinite(floor) && floor > 0.0 && floor < delta0,
            "delta_min must satisfy 0 < delta_min < delta0");
    require(spatial_iters >= 1, "spatial_iters must be >= 1");
    require(pilot_fraction > 0.0 && pilot_fraction <= 1.0, "pilot_fraction must be in (0, 1]");
    require(pdf_bins >= 1, "pdf_bins must be >= 1");
    require(std::isfinite(ridge_scale) && ridge_scale >= 0.0, "ridge must be >= 0");
    evolution.validate();
}

std::string_view to_string(Phase phase) {
    switch (phase) {
    case Phase::Pilot: return "pilot";
    case Phase::Spatial: return "spatial";
    case Phase::Temporal: return "temporal";
    }
    return "?";
}

namespace {

double grid_rmse(const Grid& a, const Grid& b) {
    require(a.spec.nx == b.spec.nx && a.spec.ny == b.spec.ny && a.values.size() == b.values.size(),
            "rmse: grid shapes differ");
    require(!a.values.empty(), "rmse: empty grids");
    double sum = 0.0;
    for (std::size_t i = 0; i < a.values.size(); ++i) {
        const double d = a.values[i] - b.values[i];
        sum += d * d;
    }
    return std::sqrt(sum / static_cast<double>(a.values.size()));
}

} // namespace

double tracking_rmse(const Grid& current, const Grid& previous) { return grid_rmse(current, previous); }

double modeling_rmse(const Grid& estimate, const Grid& truth) { return grid_rmse(estimate, truth); }

double delta_update(double delta_prev, double err_km1, double err_km2, double mu, double delta_min) {
    const double gradient = err_km1 - err_km2;
    const double mean_error = 0.5 * (err_km1 + err_km2);
    if (!(std::abs(mean_error) >= kMinMeanError)) return delta_prev;
    return std::max(delta_min, delta_prev * (1.0 + mu * gradient / (2.0 * mean_error)));
}

double range_coverage(const Interval& est, const Interval& truth) {
    require(truth.lo < truth.hi, "range_coverage: degenerate truth range");
    const double overlap = std::min(est.hi, truth.hi) - std::max(est.lo, truth.lo);
    return std::max(0.0, overlap) / truth.width();
}

SpatialOutcome spatial_phase(const Field& field, SensorField& sensors, const GridSpec& grid,
                             const DwisConfig& config) {
    config.validate();
    grid.validate();
    require(sensors.reported_count() == 0, "spatial_phase needs a fresh sensor field");

    SpatialOutcome out;
    const Grid truth = eval_field_grid(field, grid);
    out.truth_range = truth.range();
    std::optional<Pdf1D> known_pdf;
    if (config.scheme == LevelScheme::LloydMaxFixed)
        known_pdf = estimate_pdf(truth.values, config.pdf_bins);

    // Every reply of the phase stays in the reconstruction archive.
    const Bounds& area = grid.bounds;
    const double diameter = std::hypot(area.x_max - area.x_min, area.y_max - area.y_min);
    IncrementalBiharmonic archive(config.ridge_scale * kernel_scale(diameter));
    auto refit = [&](const std::vector<QueryReply>& replies) {
        std::vector<Point> points;
        points.reserve(replies.size());
        for (const auto& r : replies) points.push_back(r.position());
        archive.append(points, collect_values(replies));
        out.model = archive.model();
        return eval_spline(out.model, grid);
    };

    // Range bootstrap from a small random pilot sample.
    const auto pilot_count = static_cast<std::size_t>(
        std::ceil(config.pilot_fraction * static_cast<double>(sensors.size())));
    auto pilot = pilot_query(sensors, field, std::max<std::size_t>(pilot_count, 1),
                             derive_seed(config.seed, SeedStream::Pilot));
    const auto pilot_values = collect_values(pilot);
    auto [pmin, pmax] = std::minmax_element(pilot_values.begin(), pilot_values.end());
    Interval range = widen_degenerate({*pmin, *pmax}, config.delta0);

    Grid previous = refit(pilot);

    RunResult& result = out.result;
    std::size_t cumulative = pilot.size();
    result.pilot = {Phase::Pilot, 0, 0, config.delta0, pilot.size(), cumulative, 0.0,
                    modeling_rmse(previous, truth), range};
    out.batches.push_back(std::move(pilot));

    double delta = config.delta0;
    std::size_t m = config.m0;
    std::vector<double> errors;
    for (std::size_t k = 1; k <= config.spatial_iters; ++k) {
        const auto pdf = pdf_for(config.scheme, previous, range, known_pdf, config.pdf_bins);
        const auto levels = make_levels(config.scheme, range, m, delta, pdf ? &*pdf : nullptr);
        auto replies = contour_query(sensors, field, levels, true);

        Grid current = previous;
        if (!replies.empty()) current = refit(replies);
        cumulative += replies.size();
        const double tracking = tracking_rmse(current, previous);
        range = hull(range, current.range());
        result.spatial.push_back({Phase::Spatial, k, m, delta, replies.size(), cumulative, tracking,
                                  modeling_rmse(current, truth), range});
        out.batches.push_back(std::move(replies));

        errors.push_back(tracking);
        if (config.adaptive_margin() && errors.size() >= 2)
            delta = delta_update(delta, errors[errors.size() - 1], errors[errors.size() - 2],
                                 config.mu, config.margin_floor());
        m += config.p;
        previous = std::move(current);
    }

    result.final_m = result.spatial.back().m;
    result.final_delta = result.spatial.back().delta;
    out.reconstruction = std::move(previous);
    return out;
}

std::vector<IterationRecord> temporal_phase(const Field& field, SensorField& sensors,
                                            const GridSpec& grid, const SpatialOutcome& spatial,
                                            const DwisConfig& config) {
    config.validate();
    std::vector<IterationRecord> records;
    Field current_field = field;
    Grid previous = spatial.reconstruction;
    const std::uint64_t evolution_seed = derive_seed(config.seed, SeedStream::Evolution);
    const std::size_t m = spatial.result.final_m;
    const double delta = spatial.result.final_delta;
    std::size_t cumulative = 0;

    for (std::size_t step = 1; step <= config.temporal_steps; ++step) {
        current_field = evolve_field(current_field, config.evolution, derive_seed(evolution_seed, step));
        sensors.reset_reported();
        const Grid truth = eval_field_grid(current_field, grid);
        const Interval range = widen_degenerate(previous.range(), delta);

        std::optional<Pdf1D> known_pdf;
        if (config.scheme == LevelScheme::LloydMaxFixed)
            known_pdf = estimate_pdf(truth.values, config.pdf_bins);
        const auto pdf = pdf_for(config.scheme, previous, range, known_pdf, config.pdf_bins);
        const auto levels = make_levels(config.scheme, range, m, delta, pdf ? &*pdf : nullptr);
        const auto replies = contour_query(sensors, current_field, levels, true);

        Grid current = previous;
        if (!replies.empty()) {
            std::vector<Point> points;
            points.reserve(replies.size());
            for (const auto& r : replies) points.push_back(r.position());
            SplineModel model;
            current = reconstruct(points, collect_values(replies), grid, config.ridge_scale, model);
        }
        cumulative += replies.size();
        records.push_back({Phase::Temporal, step, m, delta, replies.size(), cumulative,
                           tracking_rmse(current, previous), modeling_rmse(current, truth), range});
        previous = std::move(current);
    }
    return records;
}

RunResult run_dwis(const Field& field, SensorField sensors, const GridSpec& grid,
                   const DwisConfig& config) {
    sensors.reset_reported();
    auto spatial = spatial_phase(field, sensors, grid, config);
    RunResult result = spatial.result;
    result.temporal = temporal_phase(field, sensors, grid, spatial, config);
    return result;
}

namespace {

void write_record(std::ostream& out, const IterationRecord& r) {
    out << to_string(r.phase) << ',' << r.k << ',' << r.m << ',' << format_double(r.delta) << ','
        << r.cost << ',' << r.cumulative_cost << ',' << format_double(r.tracking_rmse) << ','
        << format_double(r.modeling_rmse) << ',' << format_double(r.range_est.lo) << ','
        << format_double(r.range_est.hi) << '\n';
}

constexpr std::string_view kRunHeader =
    "phase,k,m,delta,cost,cum_cost,tracking_rmse,modeling_rmse,range_lo,range_hi";

std::size_t parse_count(const std::string& text) {
    std::size_t pos = 0;
    const auto v = std::stoull(text, &pos);
    if (pos != text.size()) throw ParameterError("not a count: '" + text + "'");
    return static_cast<std::size_t>(v);
}

} // namespace

void write_run_csv(std::ostream& out, const RunResult& run) {
    out << kRunHeader << '\n';
    write_record(out, run.pilot);
    for (const auto& r : run.spatial) write_record(out, r);
    for (const auto& r : run.temporal) write_record(out, r);
}

RunResult read_run_csv(std::istream& in) {
    std::string line;
    if (!std::getline(in, line) || split_csv_line(line) != split_csv_line(kRunHeader))
        throw ParameterError("run csv: unexpected header");
    RunResult run;
    bool have_pilot = false;
    std::size_t row = 1;
    while (std::getline(in, line)) {
        ++row;
        if (line.empty()) continue;
        const auto f = split_csv_line(line);
        if (f.size() != 10) throw ParameterError("run csv: row " + std::to_string(row) + " has wrong width");
        IterationRecord r;
        try {
            if (f[0] == "pilot") r.phase = Phase::Pilot;
            else if (f[0] == "spatial") r.phase = Phase::Spatial;
            else if (f[0] == "temporal") r.phase = Phase::Temporal;
            else throw ParameterError("unknown phase '" + f[0] + "'");
            r.k = parse_count(f[1]);
            r.m = parse_count(f[2]);
            r.delta = parse_double(f[3]);
            r.cost = parse_count(f[4]);
            r.cumulative_cost = parse_count(f[5]);
            r.tracking_rmse = parse_double(f[6]);
            r.modeling_rmse = parse_double(f[7]);
            r.range_est = {parse_double(f[8]), parse_double(f[9])};
        } catch (const std::logic_error& e) {
            throw ParameterError("run csv: row " + std::to_string(row) + ": " + e.what());
        }
        switch (r.phase) {
        case Phase::Pilot: run.pilot = r; have_pilot = true; break;
        case Phase::Spatial: run.spatial.push_back(r); break;
        case Phase::Temporal: run.temporal.push_back(r); break;
        }
    }
    if (!have_pilot || run.spatial.empty()) throw ParameterError("run csv: missing pilot or spatial rows");
    run.final_m = run.spatial.back().m;
    run.final_delta = run.spatial.back().delta;
    return run;
}

} // namespace dwis
