#include "dwis/field.hpp"

#include "dwis/error.hpp"
#include "dwis/io.hpp"

#include "json.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>
#include <random>

namespace dwis {

using detail::require;

Interval hull(const Interval& a, const Interval& b) {
    return {std::min(a.lo, b.lo), std::max(a.hi, b.hi)};
}

void Bounds::validate() const {
    require(std::isfinite(x_min) && std::isfinite(x_max) && std::isfinite(y_min) &&
                std::isfinite(y_max),
            "area bounds must be finite");
    require(x_min < x_max, "area requires x_min < x_max");
    require(y_min < y_max, "area requires y_min < y_max");
}

void GridSpec::validate() const {
    bounds.validate();
    require(nx >= 2 && ny >= 2, "grid requires nx >= 2 and ny >= 2");
}

double GridSpec::x(std::size_t i) const {
    return bounds.x_min + (bounds.x_max - bounds.x_min) * static_cast<double>(i) /
                              static_cast<double>(nx - 1);
}

double GridSpec::y(std::size_t j) const {
    return bounds.y_min + (bounds.y_max - bounds.y_min) * static_cast<double>(j) /
                              static_cast<double>(ny - 1);
}

std::vector<Point> GridSpec::points() const {
    std::vector<Point> out;
    out.reserve(size());
    for (std::size_t j = 0; j < ny; ++j)
        for (std::size_t i = 0; i < nx; ++i) out.push_back({x(i), y(j)});
    return out;
}

Interval Grid::range() const {
    require(!values.empty(), "range of an empty grid");
    auto [lo, hi] = std::minmax_element(values.begin(), values.end());
    return {*lo, *hi};
}

void write_grid_csv(std::ostream& out, const Grid& grid) {
    out << "x,y,value\n";
    for (std::size_t j = 0; j < grid.spec.ny; ++j)
        for (std::size_t i = 0; i < grid.spec.nx; ++i)
            out << format_double(grid.spec.x(i)) << ',' << format_double(grid.spec.y(j)) << ','
                << format_double(grid.at(i, j)) << '\n';
}

void GaussianComponent::validate() const {
    require(std::isfinite(amplitude) && amplitude > 0.0, "component amplitude must be > 0");
    require(std::isfinite(sigma) && sigma > 0.0, "component sigma must be > 0");
    require(std::isfinite(center_x) && std::isfinite(center_y), "component center must be finite");
}

double GaussianComponent::operator()(const Point& p) const {
    const double dx = p.x - center_x;
    const double dy = p.y - center_y;
    return amplitude * std::exp(-(dx * dx + dy * dy) / (2.0 * sigma * sigma));
}

Field::Field(std::vector<GaussianComponent> components, double time)
    : components_(std::move(components)), time_(time) {
    require(!components_.empty(), "a field needs at least one component");
    for (const auto& c : components_) c.validate();
}

double Field::operator()(const Point& p) const {
    double sum = 0.0;
    for (const auto& c : components_) sum += c(p);
    return sum;
}

void FieldParams::validate() const {
    require(n1 >= 1 && n2 >= 1, "field requires n1 >= 1 and n2 >= 1");
    require(sigma_a > 0.0 && sigma_b > 0.0, "field sigmas must be > 0");
    require(amp_a.lo > 0.0 && amp_a.lo <= amp_a.hi, "amplitude interval a must be positive");
    require(amp_b.lo > 0.0 && amp_b.lo <= amp_b.hi, "amplitude interval b must be positive");
    area.validate();
}

Field build_field(const FieldParams& params, std::uint64_t seed) {
    params.validate();
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> ux(params.area.x_min, params.area.x_max);
    std::uniform_real_distribution<double> uy(params.area.y_min, params.area.y_max);

    std::vector<GaussianComponent> components;
    components.reserve(params.n1 + params.n2);
    auto draw = [&](std::size_t count, double sigma, const Interval& amp) {
        std::uniform_real_distribution<double> ua(amp.lo, amp.hi);
        for (std::size_t i = 0; i < count; ++i) {
            GaussianComponent c;
            c.amplitude = ua(rng);
            c.center_x = ux(rng);
            c.center_y = uy(rng);
            c.sigma = sigma;
            components.push_back(c);
        }
    };
    draw(params.n1, params.sigma_a, params.amp_a);
    draw(params.n2, params.sigma_b, params.amp_b);
    return Field(std::move(components));
}

std::vector<double> eval_field(const Field& field, std::span<const Point> points) {
    std::vector<double> out;
    out.reserve(points.size());
    for (const auto& p : points) {
        require(std::isfinite(p.x) && std::isfinite(p.y), "eval_field: non-finite point");
        out.push_back(field(p));
    }
    return out;
}

Grid eval_field_grid(const Field& field, const GridSpec& grid) {
    grid.validate();
    const auto pts = grid.points();
    return Grid{grid, eval_field(field, pts)};
}

Interval field_range(const Field& field, const GridSpec& grid) {
    return eval_field_grid(field, grid).range();
}

void EvolutionParams::validate() const {
    require(std::isfinite(dt) && dt > 0.0, "evolution requires dt > 0");
    require(std::isfinite(drift_sigma) && drift_sigma >= 0.0, "evolution requires drift_sigma >= 0");
    require(amp_jitter >= 0.0 && amp_jitter < 1.0, "evolution requires 0 <= amp_jitter < 1");
}

Field evolve_field(const Field& field, const EvolutionParams& params, std::uint64_t seed) {
    params.validate();
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> step(0.0, 1.0);
    std::uniform_real_distribution<double> jitter(-1.0, 1.0);
    const double step_sd = params.drift_sigma * std::sqrt(params.dt);

    auto components = field.components();
    for (auto& c : components) {
        // Draws are consumed even when the scales are zero so the stream layout is fixed.
        const double dx = step(rng);
        const double dy = step(rng);
        const double u = jitter(rng);
        c.center_x += step_sd * dx;
        c.center_y += step_sd * dy;
        c.amplitude = std::max(c.amplitude * (1.0 + params.amp_jitter * u),
                               std::numeric_limits<double>::min());
    }
    return Field(std::move(components), field.time() + params.dt);
}

void write_field_json(std::ostream& out, const Field& field) {
    auto doc = nlohmann::json::array();
    for (const auto& c : field.components())
        doc.push_back({{"amplitude", c.amplitude}, {"cx", c.center_x}, {"cy", c.center_y},
                       {"sigma", c.sigma}});
    out << doc.dump(2) << '\n';
}

Field read_field_json(std::istream& in) {
    nlohmann::json doc;
    try {
        in >> doc;
    } catch (const nlohmann::json::exception& e) {
        throw ParameterError(std::string("field json: ") + e.what());
    }
    require(doc.is_array(), "field json must be an array");
    std::vector<GaussianComponent> components;
    for (const auto& item : doc) {
        try {
            components.push_back({item.at("amplitude").get<double>(), item.at("cx").get<double>(),
                                  item.at("cy").get<double>(), item.at("sigma").get<double>()});
        } catch (const nlohmann::json::exception& e) {
            throw ParameterError(std::string("field json component: ") + e.what());
        }
    }
    return Field(std::move(components));
}

} // namespace dwis
