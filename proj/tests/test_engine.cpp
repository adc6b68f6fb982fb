#include "doctest.h"

#include "dwis/engine.hpp"
#include "dwis/error.hpp"
#include "dwis/random.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>
#include <sstream>

using namespace dwis;

namespace {

Grid grid_of(std::size_t nx, std::size_t ny, std::vector<double> values) {
    return Grid{GridSpec{{0, 1, 0, 1}, nx, ny}, std::move(values)};
}

struct Scenario {
    Field field;
    SensorField sensors;
    GridSpec grid;
};

// Default field on a reduced sensor count and grid so each run takes well under a second.
Scenario small_scenario(std::uint64_t seed, std::size_t sensors = 1200) {
    FieldParams p;
    return {build_field(p, derive_seed(seed, SeedStream::Field)),
            deploy(sensors, p.area, derive_seed(seed, SeedStream::Sensors)),
            GridSpec{p.area, 40, 40}};
}

DwisConfig small_config(LevelScheme scheme, double mu, std::uint64_t seed) {
    DwisConfig c;
    c.scheme = scheme;
    c.mu = mu;
    c.seed = seed;
    c.spatial_iters = 8;
    c.temporal_steps = 5;
    c.pilot_fraction = 0.02;
    return c;
}

double mean(const std::vector<double>& v) { return std::accumulate(v.begin(), v.end(), 0.0) / double(v.size()); }

double stdev(const std::vector<double>& v) {
    const double m = mean(v);
    double s = 0.0;
    for (double x : v) s += (x - m) * (x - m);
    return std::sqrt(s / double(v.size()));
}

} // namespace

TEST_CASE("grid RMSE metrics") {
    const auto a = grid_of(2, 2, {1, 2, 3, 4});
    CHECK(tracking_rmse(a, a) == 0.0);
    CHECK(modeling_rmse(a, a) == 0.0);
    const auto b = grid_of(2, 2, {1.5, 2.5, 3.5, 4.5});
    CHECK(tracking_rmse(a, b) == doctest::Approx(0.5));
    CHECK(modeling_rmse(b, a) == doctest::Approx(0.5));

    // 2x1 grids {0,0} vs {3,4}: sqrt((9 + 16) / 2).
    const Grid z{GridSpec{{0, 1, 0, 1}, 2, 1}, {0, 0}};
    const Grid t{GridSpec{{0, 1, 0, 1}, 2, 1}, {3, 4}};
    CHECK(tracking_rmse(t, z) == doctest::Approx(std::sqrt(12.5)).epsilon(1e-15));
    CHECK(modeling_rmse(t, z) == doctest::Approx(3.5355339059327378).epsilon(1e-15));

    CHECK_THROWS_AS(tracking_rmse(a, grid_of(4, 1, {1, 2, 3, 4})), ParameterError);
}

TEST_CASE("delta_update") {
    CHECK(delta_update(0.2, 0.7, 0.7, 0.5, 0.001) == 0.2);
    CHECK(delta_update(0.2, 0.8, 1.2, 0.5, 0.001) == doctest::Approx(0.18).epsilon(1e-15));

    const double slow = delta_update(0.2, 0.8, 1.2, 0.3, 0.001);
    const double fast = delta_update(0.2, 0.8, 1.2, 0.7, 0.001);
    CHECK(slow < 0.2);
    CHECK(fast < slow);
    // Rising error widens the margin.
    CHECK(delta_update(0.2, 1.2, 0.8, 0.5, 0.001) == doctest::Approx(0.22));

    CHECK(delta_update(0.2, 0.0, 1.0, 1.0, 0.05) == 0.05); // floor
    CHECK(delta_update(0.2, 0.0, 0.0, 0.7, 0.001) == 0.2);  // vanishing mean error
    CHECK(delta_update(0.2, 0.0, 1e-16, 0.7, 0.001) == 0.2);
}

TEST_CASE("range_coverage") {
    CHECK(range_coverage({0, 2}, {0, 2}) == 1.0);
    CHECK(range_coverage({0, 1}, {0, 2}) == 0.5);
    CHECK(range_coverage({3, 4}, {0, 2}) == 0.0);
    CHECK(range_coverage({-5, 5}, {0, 2}) == 1.0);
    CHECK_THROWS_AS(range_coverage({0, 1}, {1, 1}), ParameterError);
}

TEST_CASE("config validation") {
    DwisConfig c;
    CHECK_NOTHROW(c.validate());
    c.mu = 1.5;
    CHECK_THROWS_AS(c.validate(), ParameterError);
    c = {};
    c.delta_min = 0.3;
    CHECK_THROWS_AS(c.validate(), ParameterError);
    c = {};
    c.p = 0;
    CHECK_THROWS_AS(c.validate(), ParameterError);
    c = {};
    CHECK(c.margin_floor() == doctest::Approx(0.002));
}

TEST_CASE("spatial phase invariants") {
    for (auto scheme : {LevelScheme::UniformSG, LevelScheme::LloydMaxSG, LevelScheme::LloydMaxFixed})
        for (std::uint64_t seed : {1u, 2u}) {
            auto sc = small_scenario(seed);
            const auto config = small_config(scheme, 0.5, seed);
            const auto out = spatial_phase(sc.field, sc.sensors, sc.grid, config);
            const auto& r = out.result;
            CAPTURE(to_string(scheme));
            REQUIRE(r.spatial.size() == config.spatial_iters);

            // Report-once: batches are disjoint and their sizes add up to the reported set.
            std::set<SensorId> ids;
            std::size_t total = 0;
            for (const auto& batch : out.batches) {
                total += batch.size();
                for (const auto& reply : batch) CHECK(ids.insert(reply.sensor_id).second);
            }
            CHECK(ids.size() == total);
            CHECK(total == sc.sensors.reported_count());
            CHECK(r.spatial.back().cumulative_cost == total);
            CHECK(r.pilot.cost == static_cast<std::size_t>(std::ceil(0.02 * 1200)));

            Interval previous_range = r.pilot.range_est;
            std::size_t previous_cum = r.pilot.cumulative_cost;
            for (std::size_t i = 0; i < r.spatial.size(); ++i) {
                const auto& rec = r.spatial[i];
                CHECK(rec.k == i + 1);
                CHECK(rec.m == config.m0 + i * config.p);
                CHECK(rec.delta >= config.margin_floor());
                CHECK(rec.range_est.lo <= previous_range.lo);
                CHECK(rec.range_est.hi >= previous_range.hi);
                CHECK(rec.cumulative_cost == previous_cum + rec.cost);
                CHECK(rec.tracking_rmse >= 0.0);
                CHECK(rec.modeling_rmse >= 0.0);
                previous_range = rec.range_est;
                previous_cum = rec.cumulative_cost;
            }

            // Margin schedule: two warm-up iterations, then the stochastic-gradient rule.
            CHECK(r.spatial[0].delta == config.delta0);
            CHECK(r.spatial[1].delta == config.delta0);
            for (std::size_t i = 2; i < r.spatial.size(); ++i) {
                const double expected = config.adaptive_margin()
                                            ? delta_update(r.spatial[i - 1].delta, r.spatial[i - 1].tracking_rmse,
                                                           r.spatial[i - 2].tracking_rmse, config.mu,
                                                           config.margin_floor())
                                            : config.delta0;
                CHECK(r.spatial[i].delta == expected);
            }
            CHECK(r.final_m == r.spatial.back().m);
            CHECK(r.final_delta == r.spatial.back().delta);
            CHECK(r.spatial.back().modeling_rmse < r.spatial.front().modeling_rmse);
        }
}

TEST_CASE("constant error sequence keeps the margin fixed") {
    double delta = 0.2;
    for (int k = 0; k < 10; ++k) delta = delta_update(delta, 0.37, 0.37, 0.9, 0.001);
    CHECK(delta == 0.2);
}

TEST_CASE("spatial phase requires a fresh sensor field") {
    auto sc = small_scenario(3, 100);
    sc.sensors.mark_reported(0);
    CHECK_THROWS_AS(spatial_phase(sc.field, sc.sensors, sc.grid, small_config(LevelScheme::UniformSG, 0.3, 1)),
                    ParameterError);
}

TEST_CASE("single-sensor field") {
    const Field f({{4.0, 50.0, 50.0, 10.0}});
    SensorField sf({{0, 50.0, 50.0}}, Bounds{});
    DwisConfig c;
    c.m0 = 1;
    c.spatial_iters = 3;
    const GridSpec grid{Bounds{}, 11, 11};
    const auto out = spatial_phase(f, sf, grid, c);
    CHECK(out.result.spatial.back().cumulative_cost == 1);
    // The degenerate range is widened around the one observation, so M = 1 sits on it.
    const auto levels = uniform_levels(out.result.pilot.range_est, 1, c.delta0);
    CHECK(levels.levels[0] == doctest::Approx(4.0));
    for (double v : out.reconstruction.values) CHECK(v == 4.0);
}

TEST_CASE("iterations without replies reuse the previous reconstruction") {
    auto sc = small_scenario(4, 300);
    auto c = small_config(LevelScheme::UniformSG, 0.5, 4);
    c.pilot_fraction = 1.0; // the pilot exhausts every sensor
    const auto out = spatial_phase(sc.field, sc.sensors, sc.grid, c);
    CHECK(out.result.pilot.cost == 300);
    for (const auto& rec : out.result.spatial) {
        CHECK(rec.cost == 0);
        CHECK(rec.tracking_rmse == 0.0);
        CHECK(rec.modeling_rmse == out.result.pilot.modeling_rmse);
        CHECK(rec.delta == c.delta0);
    }
}

TEST_CASE("temporal phase") {
    SUBCASE("frozen evolution gives a stationary error") {
        auto sc = small_scenario(5);
        auto c = small_config(LevelScheme::UniformSG, 0.3, 5);
        c.evolution = {1.0, 0.0, 0.0};
        c.temporal_steps = 8;
        const auto spatial = spatial_phase(sc.field, sc.sensors, sc.grid, c);
        const auto temporal = temporal_phase(sc.field, sc.sensors, sc.grid, spatial, c);
        REQUIRE(temporal.size() == 8);
        std::vector<double> rmse;
        for (std::size_t i = 0; i < temporal.size(); ++i) {
            CHECK(temporal[i].k == i + 1);
            CHECK(temporal[i].m == spatial.result.final_m);
            CHECK(temporal[i].delta == spatial.result.final_delta);
            CHECK(temporal[i].cost <= 1200);
            rmse.push_back(temporal[i].modeling_rmse);
        }
        CHECK(stdev(rmse) < 0.5 * mean(rmse));
    }
    SUBCASE("each update re-enables every sensor") {
        auto sc = small_scenario(6);
        auto c = small_config(LevelScheme::LloydMaxSG, 0.3, 6);
        const auto spatial = spatial_phase(sc.field, sc.sensors, sc.grid, c);
        const auto temporal = temporal_phase(sc.field, sc.sensors, sc.grid, spatial, c);
        CHECK(sc.sensors.reported_count() == temporal.back().cost);
        std::size_t cum = 0;
        for (const auto& rec : temporal) {
            cum += rec.cost;
            CHECK(rec.cumulative_cost == cum);
            CHECK(rec.phase == Phase::Temporal);
        }
    }
}

TEST_CASE("run_dwis is deterministic and its CSV round-trips") {
    const auto sc = small_scenario(7, 800);
    const auto c = small_config(LevelScheme::LloydMaxFixed, 0.7, 7);
    std::ostringstream a, b;
    const auto run = run_dwis(sc.field, sc.sensors, sc.grid, c);
    write_run_csv(a, run);
    write_run_csv(b, run_dwis(sc.field, sc.sensors, sc.grid, c));
    CHECK(a.str() == b.str());
    CHECK(a.str().rfind("phase,k,m,delta,cost,cum_cost,tracking_rmse,modeling_rmse,range_lo,range_hi\npilot,0,", 0) == 0);

    std::istringstream in(a.str());
    const auto back = read_run_csv(in);
    CHECK(back.pilot == run.pilot);
    CHECK(back.spatial == run.spatial);
    CHECK(back.temporal == run.temporal);
    CHECK(back.final_delta == run.final_delta);

    std::istringstream bad("phase,k\n");
    CHECK_THROWS_AS(read_run_csv(bad), ParameterError);
}
