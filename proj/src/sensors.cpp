#include "dwis/sensors.hpp"

#include "dwis/error.hpp"
#include "dwis/io.hpp"

#include <algorithm>
#include <numeric>
#include <ostream>
#include <random>

namespace dwis {

using detail::require;

SensorField::SensorField(std::vector<Sensor> sensors, Bounds area)
    : sensors_(std::move(sensors)), area_(area), reported_(sensors_.size(), 0) {
    area_.validate();
    require(!sensors_.empty(), "a sensor field needs at least one sensor");
    for (std::size_t i = 0; i < sensors_.size(); ++i) {
        require(sensors_[i].id == i, "sensor ids must equal their index");
        require(area_.contains(sensors_[i].position()), "sensor outside the area");
    }
}

void SensorField::mark_reported(SensorId id) {
    auto& flag = reported_.at(id);
    if (!flag) {
        flag = 1;
        ++reported_count_;
    }
}

void SensorField::reset_reported() {
    std::fill(reported_.begin(), reported_.end(), 0);
    reported_count_ = 0;
}

SensorField deploy(std::size_t n, const Bounds& area, std::uint64_t seed) {
    require(n >= 1, "deploy requires at least one sensor");
    area.validate();
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> ux(area.x_min, area.x_max);
    std::uniform_real_distribution<double> uy(area.y_min, area.y_max);
    std::vector<Sensor> sensors;
    sensors.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double x = ux(rng);
        const double y = uy(rng);
        sensors.push_back({static_cast<SensorId>(i), x, y});
    }
    return SensorField(std::move(sensors), area);
}

std::vector<QueryReply> contour_query(SensorField& sensors, const Field& field,
                                      const ContourLevels& levels, bool respect_report_once) {
    levels.validate();
    std::vector<QueryReply> replies;
    for (const auto& s : sensors.sensors()) {
        if (respect_report_once && sensors.is_reported(s.id)) continue;
        const double observation = field(s.position());
        if (levels.within_margin(observation)) replies.push_back({s.id, s.x, s.y, observation});
    }
    for (const auto& r : replies) sensors.mark_reported(r.sensor_id);
    return replies;
}

std::vector<QueryReply> pilot_query(SensorField& sensors, const Field& field, std::size_t count,
                                    std::uint64_t seed) {
    std::vector<SensorId> candidates;
    for (const auto& s : sensors.sensors())
        if (!sensors.is_reported(s.id)) candidates.push_back(s.id);
    count = std::min(count, candidates.size());

    // Partial Fisher-Yates: the first `count` entries become a uniform sample.
    std::mt19937_64 rng(seed);
    for (std::size_t i = 0; i < count; ++i) {
        std::uniform_int_distribution<std::size_t> pick(i, candidates.size() - 1);
        std::swap(candidates[i], candidates[pick(rng)]);
    }
    candidates.resize(count);
    std::sort(candidates.begin(), candidates.end());

    std::vector<QueryReply> replies;
    replies.reserve(count);
    for (auto id : candidates) {
        const auto& s = sensors.sensors()[id];
        replies.push_back({id, s.x, s.y, field(s.position())});
        sensors.mark_reported(id);
    }
    return replies;
}

void write_replies_csv(std::ostream& out, std::span<const QueryReply> replies, std::size_t iteration,
                       bool header) {
    if (header) out << "iteration,sensor_id,x,y,value\n";
    for (const auto& r : replies)
        out << iteration << ',' << r.sensor_id << ',' << format_double(r.x) << ','
            << format_double(r.y) << ',' << format_double(r.value) << '\n';
}

} // namespace dwis
