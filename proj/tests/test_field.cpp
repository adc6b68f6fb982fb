#include "doctest.h"

#include "dwis/error.hpp"
#include "dwis/field.hpp"

#include <cmath>
#include <random>
#include <sstream>

using namespace dwis;

namespace {

Field unit_bump() { return Field({{1.0, 0.0, 0.0, 1.0}}); }

FieldParams default_params() { return FieldParams{}; }

} // namespace

TEST_CASE("build_field follows the requested composition") {
    const auto f = build_field(default_params(), 42);
    CHECK(f.components().size() == 300);
    std::size_t narrow = 0, wide = 0;
    for (const auto& c : f.components()) {
        if (c.sigma == 3.0) ++narrow;
        if (c.sigma == 10.0) ++wide;
        CHECK(c.amplitude >= 0.5);
        CHECK(c.amplitude <= 1.5);
        CHECK(c.center_x >= 0.0);
        CHECK(c.center_x <= 100.0);
        CHECK(c.center_y >= 0.0);
        CHECK(c.center_y <= 100.0);
    }
    CHECK(narrow == 150);
    CHECK(wide == 150);

    FieldParams small;
    small.n1 = 2;
    small.n2 = 3;
    CHECK(build_field(small, 1).components().size() == 5);
}

TEST_CASE("build_field is deterministic per seed") {
    FieldParams p;
    p.n1 = 1;
    p.n2 = 1;
    CHECK(build_field(p, 7) == build_field(p, 7));
    CHECK_FALSE(build_field(p, 7) == build_field(p, 8));
}

TEST_CASE("build_field rejects invalid parameters") {
    FieldParams p;
    p.n1 = 0;
    CHECK_THROWS_AS(build_field(p, 1), ParameterError);
    p = {};
    p.sigma_b = 0.0;
    CHECK_THROWS_AS(build_field(p, 1), ParameterError);
    p = {};
    p.amp_a = {-1.0, 1.0};
    CHECK_THROWS_AS(build_field(p, 1), ParameterError);
    CHECK_THROWS_AS(Field({}), ParameterError);
}

TEST_CASE("eval_field evaluates unnormalized bumps") {
    const auto f = unit_bump();
    const std::vector<Point> pts{{0.0, 0.0}, {1.0, 0.0}};
    const auto v = eval_field(f, pts);
    CHECK(v[0] == doctest::Approx(1.0).epsilon(1e-15));
    // exp(-1/2)
    CHECK(v[1] == doctest::Approx(0.6065306597126334).epsilon(1e-15));

    const Field twice({{1.0, 0.0, 0.0, 1.0}, {1.0, 0.0, 0.0, 1.0}});
    std::mt19937_64 rng(5);
    std::normal_distribution<double> n(0.0, 2.0);
    for (int i = 0; i < 20; ++i) {
        const Point p{n(rng), n(rng)};
        CHECK(twice(p) == doctest::Approx(2.0 * f(p)).epsilon(1e-14));
    }
    const std::vector<Point> bad{{NAN, 0.0}};
    CHECK_THROWS_AS(eval_field(f, bad), ParameterError);
}

TEST_CASE("eval_field is linear in amplitudes and non-negative") {
    const auto f = build_field(default_params(), 3);
    auto scaled = f.components();
    for (auto& c : scaled) c.amplitude *= 3.5;
    const Field g(scaled);
    std::mt19937_64 rng(9);
    std::uniform_real_distribution<double> u(-20.0, 120.0);
    for (int i = 0; i < 200; ++i) {
        const Point p{u(rng), u(rng)};
        const double a = f(p);
        CHECK(a >= 0.0);
        CHECK(std::abs(g(p) - 3.5 * a) <= 1e-12 * std::abs(3.5 * a));
    }
}

TEST_CASE("eval_field_grid matches pointwise evaluation in row-major order") {
    const auto f = build_field(default_params(), 11);
    const GridSpec grid{{0.0, 100.0, 0.0, 50.0}, 2, 2};
    const auto g = eval_field_grid(f, grid);
    REQUIRE(g.values.size() == 4);
    CHECK(g.values[0] == f({0.0, 0.0}));
    CHECK(g.values[1] == f({100.0, 0.0}));
    CHECK(g.values[2] == f({0.0, 50.0}));
    CHECK(g.values[3] == f({100.0, 50.0}));

    const Field tiny({{1e-12, 50.0, 50.0, 5.0}});
    for (double v : eval_field_grid(tiny, GridSpec{}).values) CHECK(v <= 1e-12);

    const auto full = eval_field_grid(f, GridSpec{});
    const auto r = full.range();
    CHECK(r.lo < r.hi);
}

TEST_CASE("grid validation") {
    CHECK_THROWS_AS(eval_field_grid(unit_bump(), GridSpec{{0, 1, 0, 1}, 1, 5}), ParameterError);
    CHECK_THROWS_AS(eval_field_grid(unit_bump(), GridSpec{{1, 0, 0, 1}, 5, 5}), ParameterError);
}

TEST_CASE("field_range") {
    const Field bump({{2.0, 5.0, 5.0, 1.0}});
    const GridSpec coarse{{0.0, 10.0, 0.0, 10.0}, 11, 11};
    const auto r = field_range(bump, coarse);
    CHECK(r.lo >= 0.0);
    CHECK(r.hi == doctest::Approx(2.0)); // center lies on the lattice

    // Refining 2x keeps every coarse node, so the range can only widen.
    const auto f = build_field(default_params(), 17);
    const GridSpec g1{{0, 100, 0, 100}, 51, 51};
    const GridSpec g2{{0, 100, 0, 100}, 101, 101};
    const auto r1 = field_range(f, g1);
    const auto r2 = field_range(f, g2);
    CHECK(r2.lo <= r1.lo);
    CHECK(r2.hi >= r1.hi);
    CHECK(std::isfinite(r2.width()));
    CHECK(r2.width() > 0.0);
}

TEST_CASE("evolve_field") {
    const auto f = build_field(default_params(), 21);

    SUBCASE("frozen evolution only advances time") {
        const auto g = evolve_field(f, {1.0, 0.0, 0.0}, 5);
        CHECK(g.components() == f.components());
        CHECK(g.time() == f.time() + 1.0);
    }
    SUBCASE("deterministic per seed") {
        CHECK(evolve_field(f, {}, 5) == evolve_field(f, {}, 5));
        CHECK_FALSE(evolve_field(f, {}, 5) == evolve_field(f, {}, 6));
    }
    SUBCASE("amplitudes stay positive within the jitter band") {
        const auto g = evolve_field(f, {1.0, 1.0, 0.5}, 8);
        for (std::size_t i = 0; i < f.components().size(); ++i) {
            const double ratio = g.components()[i].amplitude / f.components()[i].amplitude;
            CHECK(ratio >= 0.5);
            CHECK(ratio <= 1.5);
        }
    }
    SUBCASE("displacement std matches drift_sigma * sqrt(dt)") {
        FieldParams p;
        p.n1 = 10000;
        p.n2 = 10000;
        const auto big = build_field(p, 1);
        for (double dt : {1.0, 4.0}) {
            const auto moved = evolve_field(big, {dt, 1.0, 0.0}, 2);
            double sum2 = 0.0;
            const auto n = big.components().size();
            for (std::size_t i = 0; i < n; ++i) {
                const double dx = moved.components()[i].center_x - big.components()[i].center_x;
                const double dy = moved.components()[i].center_y - big.components()[i].center_y;
                sum2 += dx * dx + dy * dy;
            }
            // 4e4 draws: relative standard error of the std estimate is ~0.35%.
            CHECK(std::sqrt(sum2 / (2.0 * n)) == doctest::Approx(std::sqrt(dt)).epsilon(0.02));
        }
    }
    SUBCASE("invalid parameters") {
        CHECK_THROWS_AS(evolve_field(f, {0.0, 1.0, 0.0}, 1), ParameterError);
        CHECK_THROWS_AS(evolve_field(f, {1.0, -1.0, 0.0}, 1), ParameterError);
        CHECK_THROWS_AS(evolve_field(f, {1.0, 1.0, 1.0}, 1), ParameterError);
    }
}

TEST_CASE("field and grid serialization") {
    const auto f = build_field(FieldParams{2, 2, 3.0, 10.0, {0.5, 1.5}, {0.5, 1.5}, {}}, 4);
    std::stringstream json;
    write_field_json(json, f);
    CHECK(json.str().find("\"cx\"") != std::string::npos);
    CHECK(read_field_json(json) == f);

    const auto g = eval_field_grid(unit_bump(), GridSpec{{0, 1, 0, 2}, 2, 3});
    std::stringstream csv;
    write_grid_csv(csv, g);
    std::string line;
    std::getline(csv, line);
    CHECK(line == "x,y,value");
    std::getline(csv, line);
    CHECK(line == "0,0,1");
    std::getline(csv, line);
    CHECK(line.rfind("1,0,", 0) == 0); // x varies fastest
}
