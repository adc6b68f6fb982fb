#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <vector>

namespace dwis {

struct Point {
    double x = 0.0;
    double y = 0.0;
};

/// Closed real interval [lo, hi].
struct Interval {
    double lo = 0.0;
    double hi = 0.0;

    double width() const { return hi - lo; }
    bool contains(double v) const { return lo <= v && v <= hi; }
    friend bool operator==(const Interval&, const Interval&) = default;
};

/// Union hull of two intervals.
Interval hull(const Interval& a, const Interval& b);

/// Rectangular deployment area.
struct Bounds {
    double x_min = 0.0;
    double x_max = 100.0;
    double y_min = 0.0;
    double y_max = 100.0;

    void validate() const;
    bool contains(const Point& p) const {
        return x_min <= p.x && p.x <= x_max && y_min <= p.y && p.y <= y_max;
    }
    friend bool operator==(const Bounds&, const Bounds&) = default;
};

/// Uniform nx-by-ny lattice over a rectangle, endpoints included.
struct GridSpec {
    Bounds bounds;
    std::size_t nx = 100;
    std::size_t ny = 100;

    void validate() const;
    std::size_t size() const { return nx * ny; }
    double x(std::size_t i) const;
    double y(std::size_t j) const;
    /// Row-major, y outer and x inner.
    std::size_t index(std::size_t i, std::size_t j) const { return j * nx + i; }
    Point point(std::size_t flat) const { return {x(flat % nx), y(flat / nx)}; }
    std::vector<Point> points() const;
};

/// Scalar values sampled on a GridSpec lattice in row-major order.
struct Grid {
    GridSpec spec;
    std::vector<double> values;

    double at(std::size_t i, std::size_t j) const { return values[spec.index(i, j)]; }
    Interval range() const;
};

/// Grid as CSV with header `x,y,value`, rows in lattice order.
void write_grid_csv(std::ostream& out, const Grid& grid);

/// One isotropic, unnormalized Gaussian bump: amplitude * exp(-r^2 / (2 sigma^2)).
struct GaussianComponent {
    double amplitude = 1.0;
    double center_x = 0.0;
    double center_y = 0.0;
    double sigma = 1.0;

    void validate() const;
    double operator()(const Point& p) const;
    friend bool operator==(const GaussianComponent&, const GaussianComponent&) = default;
};

/// Ground-truth signal: a positive sum of Gaussian bumps at a given time.
class Field {
public:
    explicit Field(std::vector<GaussianComponent> components, double time = 0.0);

    const std::vector<GaussianComponent>& components() const { return components_; }
    double time() const { return time_; }

    double operator()(const Point& p) const;

    friend bool operator==(const Field&, const Field&) = default;

private:
    std::vector<GaussianComponent> components_;
    double time_ = 0.0;
};

struct FieldParams {
    std::size_t n1 = 150;
    std::size_t n2 = 150;
    double sigma_a = 3.0;
    double sigma_b = 10.0;
    Interval amp_a{0.5, 1.5};
    Interval amp_b{0.5, 1.5};
    Bounds area;

    void validate() const;
};

/// Draws n1 narrow and n2 wide components with centers uniform over the area.
Field build_field(const FieldParams& params, std::uint64_t seed);

std::vector<double> eval_field(const Field& field, std::span<const Point> points);

Grid eval_field_grid(const Field& field, const GridSpec& grid);

Interval field_range(const Field& field, const GridSpec& grid);

struct EvolutionParams {
    double dt = 1.0;
    double drift_sigma = 1.0;
    double amp_jitter = 0.05;

    void validate() const;
};

/// Random-walk drift of every center plus multiplicative amplitude jitter; time advances by dt.
Field evolve_field(const Field& field, const EvolutionParams& params, std::uint64_t seed);

/// JSON array of {amplitude, cx, cy, sigma}.
void write_field_json(std::ostream& out, const Field& field);
Field read_field_json(std::istream& in);

} // namespace dwis
