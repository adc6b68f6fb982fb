#include "doctest.h"

#include "dwis/error.hpp"
#include "dwis/sensors.hpp"

#include <algorithm>
#include <random>
#include <set>
#include <sstream>

using namespace dwis;

namespace {

// Peak of height `value` right at the single test sensor.
Field peak_at(double value) { return Field({{value, 0.5, 0.5, 1.0}}); }

SensorField one_sensor_at_center() { return SensorField({{0, 0.5, 0.5}}, Bounds{0, 1, 0, 1}); }

ContourLevels single_level(double level, double delta) {
    ContourLevels l;
    l.levels = {level};
    l.delta = delta;
    l.range = {level - 1.0, level + 1.0};
    return l;
}

} // namespace

TEST_CASE("deploy") {
    const Bounds area{0, 100, 0, 100};
    const auto sf = deploy(5000, area, 3);
    CHECK(sf.size() == 5000);
    CHECK(sf.reported_count() == 0);
    for (const auto& s : sf.sensors()) CHECK(area.contains(s.position()));

    const auto single = deploy(1, area, 1);
    CHECK(single.size() == 1);
    CHECK(single.reported_count() == 0);

    const auto again = deploy(5000, area, 3);
    for (std::size_t i = 0; i < sf.size(); ++i) {
        CHECK(sf.sensors()[i].x == again.sensors()[i].x);
        CHECK(sf.sensors()[i].y == again.sensors()[i].y);
    }
    CHECK_THROWS_AS(deploy(0, area, 1), ParameterError);
}

TEST_CASE("contour_query margin and report-once") {
    auto sf = one_sensor_at_center();
    const auto f = peak_at(5.0);

    auto first = contour_query(sf, f, single_level(5.0, 0.2), true);
    REQUIRE(first.size() == 1);
    CHECK(first[0].sensor_id == 0);
    CHECK(first[0].value == 5.0);
    CHECK(sf.is_reported(0));

    CHECK(contour_query(sf, f, single_level(5.0, 0.2), true).empty());
    CHECK(contour_query(sf, f, single_level(5.0, 0.2), false).size() == 1);
}

TEST_CASE("contour_query inequality is closed on both ends") {
    const auto f = peak_at(5.3);
    auto sf = one_sensor_at_center();
    CHECK(contour_query(sf, f, single_level(5.0, 0.2), true).empty());
    CHECK(contour_query(sf, f, single_level(5.0, 0.4), true).size() == 1);

    // |S - l| == delta exactly (all values exact in binary) is a reply.
    const auto edge = peak_at(5.25);
    auto sf2 = one_sensor_at_center();
    CHECK(contour_query(sf2, edge, single_level(5.0, 0.25), true).size() == 1);
}

TEST_CASE("a sensor near several levels replies once") {
    auto sf = one_sensor_at_center();
    ContourLevels l;
    l.levels = {4.9, 5.0, 5.1};
    l.delta = 0.2;
    l.range = {4.0, 6.0};
    CHECK(contour_query(sf, peak_at(5.0), l, false).size() == 1);
}

TEST_CASE("reset_reported") {
    const auto f = build_field(FieldParams{}, 2);
    auto sf = deploy(2000, Bounds{}, 4);
    const auto levels = uniform_levels({2.0, 12.0}, 5, 0.2);

    // Fresh reset is a no-op.
    sf.reset_reported();
    CHECK(sf.reported_count() == 0);

    const auto first = contour_query(sf, f, levels, true);
    CHECK(sf.reported_count() == first.size());
    sf.reset_reported();
    CHECK(sf.reported_count() == 0);
    const auto again = contour_query(sf, f, levels, true);
    REQUIRE(again.size() == first.size());
    for (std::size_t i = 0; i < first.size(); ++i) CHECK(again[i].sensor_id == first[i].sensor_id);
}

TEST_CASE("contour_query soundness, completeness and report-once on random instances") {
    std::mt19937_64 rng(77);
    for (int trial = 0; trial < 20; ++trial) {
        FieldParams p;
        p.n1 = 20;
        p.n2 = 20;
        const auto f = build_field(p, rng());
        auto sf = deploy(400, p.area, rng());
        std::set<SensorId> seen;
        std::size_t total = 0;
        std::uniform_real_distribution<double> delta_dist(0.05, 0.5);
        for (std::size_t m = 2; m <= 8; m += 3) {
            const auto levels = uniform_levels({0.0, 6.0}, m, delta_dist(rng));
            std::vector<bool> before(sf.size());
            for (std::size_t i = 0; i < sf.size(); ++i) before[i] = sf.is_reported(static_cast<SensorId>(i));
            const auto replies = contour_query(sf, f, levels, true);

            // Brute force: unreported and within the margin of some level.
            std::set<SensorId> expected;
            for (const auto& s : sf.sensors()) {
                if (before[s.id]) continue;
                const double v = f(s.position());
                for (double l : levels.levels)
                    if (std::abs(v - l) <= levels.delta) expected.insert(s.id);
            }
            std::set<SensorId> got;
            for (const auto& r : replies) {
                double best = 1e300;
                for (double l : levels.levels) best = std::min(best, std::abs(r.value - l));
                CHECK(best <= levels.delta);
                CHECK(seen.insert(r.sensor_id).second);
                got.insert(r.sensor_id);
            }
            CHECK(got == expected);
            total += replies.size();
        }
        CHECK(total == sf.reported_count());
    }
}

TEST_CASE("pilot_query samples distinct unreported sensors") {
    const auto f = build_field(FieldParams{}, 5);
    auto sf = deploy(100, Bounds{}, 6);
    const auto a = pilot_query(sf, f, 10, 1);
    CHECK(a.size() == 10);
    CHECK(sf.reported_count() == 10);
    const auto b = pilot_query(sf, f, 200, 2);
    CHECK(b.size() == 90);
    std::set<SensorId> ids;
    for (const auto& r : a) ids.insert(r.sensor_id);
    for (const auto& r : b) ids.insert(r.sensor_id);
    CHECK(ids.size() == 100);
    for (const auto& r : a) CHECK(r.value == f(r.position()));
}

TEST_CASE("reply CSV export") {
    const std::vector<QueryReply> replies{{3, 1.5, 2.0, 0.25}};
    std::ostringstream out;
    write_replies_csv(out, replies, 4);
    CHECK(out.str() == "iteration,sensor_id,x,y,value\n4,3,1.5,2,0.25\n");
}
