#pragma once

#include "dwis/field.hpp"
#include "dwis/levels.hpp"

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <vector>

namespace dwis {

using SensorId = std::uint32_t;

struct Sensor {
    SensorId id = 0;
    double x = 0.0;
    double y = 0.0;

    Point position() const { return {x, y}; }
};

/// One sensor's answer to the fusion center. Positions travel with the reply.
struct QueryReply {
    SensorId sensor_id = 0;
    double x = 0.0;
    double y = 0.0;
    double value = 0.0;

    Point position() const { return {x, y}; }
};

/// Deployed sensors plus the set of ids that already reported in the current phase.
/// Sensor ids equal their index in `sensors()`.
class SensorField {
public:
    SensorField(std::vector<Sensor> sensors, Bounds area);

    const std::vector<Sensor>& sensors() const { return sensors_; }
    const Bounds& area() const { return area_; }
    std::size_t size() const { return sensors_.size(); }

    bool is_reported(SensorId id) const { return reported_.at(id) != 0; }
    std::size_t reported_count() const { return reported_count_; }
    void mark_reported(SensorId id);
    /// Re-enables every sensor (start of a new temporal update).
    void reset_reported();

private:
    std::vector<Sensor> sensors_;
    Bounds area_;
    std::vector<char> reported_;
    std::size_t reported_count_ = 0;
};

/// n sensors placed i.i.d. uniformly over the area.
SensorField deploy(std::size_t n, const Bounds& area, std::uint64_t seed);

/// Replies from every sensor whose observation lies within the margin of some level. With
/// `respect_report_once`, sensors that already reported stay silent. Every replying sensor is
/// marked as reported. Replies come back in id order.
std::vector<QueryReply> contour_query(SensorField& sensors, const Field& field,
                                      const ContourLevels& levels, bool respect_report_once = true);

/// Replies from `count` distinct unreported sensors chosen uniformly at random (range bootstrap).
std::vector<QueryReply> pilot_query(SensorField& sensors, const Field& field, std::size_t count,
                                    std::uint64_t seed);

/// CSV with header `iteration,sensor_id,x,y,value`; one table per call, header optional.
void write_replies_csv(std::ostream& out, std::span<const QueryReply> replies, std::size_t iteration,
                       bool header = true);

} // namespace dwis
