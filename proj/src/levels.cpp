#include "dwis/levels.hpp"

#include "dwis/error.hpp"
#include "dwis/io.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>

namespace dwis {

using detail::require;

namespace {
constexpr double kEmptyCellMass = 1e-12;
} // namespace

std::string_view to_string(LevelScheme scheme) {
    switch (scheme) {
    case LevelScheme::UniformSG: return "U_SG";
    case LevelScheme::LloydMaxSG: return "LM_SG";
    case LevelScheme::LloydMaxFixed: return "LM_FIX";
    }
    return "?";
}

std::optional<LevelScheme> parse_scheme(std::string_view text) {
    if (text == "U_SG") return LevelScheme::UniformSG;
    if (text == "LM_SG") return LevelScheme::LloydMaxSG;
    if (text == "LM_FIX") return LevelScheme::LloydMaxFixed;
    return std::nullopt;
}

void ContourLevels::validate() const {
    require(!levels.empty(), "contour levels must be non-empty");
    require(std::isfinite(delta) && delta > 0.0, "contour margin must be > 0");
    for (std::size_t i = 1; i < levels.size(); ++i)
        require(levels[i - 1] < levels[i], "contour levels must be strictly increasing");
    require(range.lo <= levels.front() && levels.back() <= range.hi,
            "contour levels must lie inside their range");
}

bool ContourLevels::within_margin(double value) const {
    // Nearest level is one of the two neighbours of the insertion point.
    auto it = std::lower_bound(levels.begin(), levels.end(), value);
    if (it != levels.end() && std::abs(*it - value) <= delta) return true;
    if (it != levels.begin() && std::abs(*std::prev(it) - value) <= delta) return true;
    return false;
}

Pdf1D::Pdf1D(std::vector<double> bin_edges, std::vector<double> densities)
    : edges_(std::move(bin_edges)), densities_(std::move(densities)) {
    require(edges_.size() >= 2, "pdf needs at least one bin");
    require(densities_.size() + 1 == edges_.size(), "pdf needs one density per bin");
    double total = 0.0;
    for (std::size_t i = 0; i < densities_.size(); ++i) {
        require(edges_[i] < edges_[i + 1], "pdf bin edges must be strictly increasing");
        require(std::isfinite(densities_[i]) && densities_[i] >= 0.0,
                "pdf densities must be finite and non-negative");
        total += densities_[i] * (edges_[i + 1] - edges_[i]);
    }
    require(total > 0.0, "pdf has zero total mass");
    for (auto& d : densities_) d /= total;
}

template <typename BinIntegral>
double Pdf1D::integrate(double a, double b, BinIntegral&& per_bin) const {
    a = std::max(a, edges_.front());
    b = std::min(b, edges_.back());
    if (!(a < b)) return 0.0;
    auto first = std::upper_bound(edges_.begin(), edges_.end(), a) - edges_.begin() - 1;
    double sum = 0.0;
    for (auto k = static_cast<std::size_t>(std::max<std::ptrdiff_t>(first, 0));
         k < densities_.size() && edges_[k] < b; ++k) {
        const double lo = std::max(a, edges_[k]);
        const double hi = std::min(b, edges_[k + 1]);
        if (lo < hi) sum += densities_[k] * per_bin(lo, hi);
    }
    return sum;
}

double Pdf1D::mass(double a, double b) const {
    return integrate(a, b, [](double lo, double hi) { return hi - lo; });
}

double Pdf1D::first_moment(double a, double b) const {
    return integrate(a, b, [](double lo, double hi) { return 0.5 * (hi - lo) * (hi + lo); });
}

double Pdf1D::second_moment(double a, double b) const {
    return integrate(a, b,
                     [](double lo, double hi) { return (hi * hi * hi - lo * lo * lo) / 3.0; });
}

double Pdf1D::central_second_moment(double a, double b, double center) const {
    return integrate(a, b, [center](double lo, double hi) {
        const double u = hi - center;
        const double v = lo - center;
        return (u * u * u - v * v * v) / 3.0;
    });
}

void write_pdf_csv(std::ostream& out, const Pdf1D& pdf) {
    out << "bin_lo,bin_hi,density\n";
    const auto& e = pdf.bin_edges();
    for (std::size_t i = 0; i < pdf.bins(); ++i)
        out << format_double(e[i]) << ',' << format_double(e[i + 1]) << ','
            << format_double(pdf.densities()[i]) << '\n';
}

void write_levels_csv(std::ostream& out, const ContourLevels& levels) {
    out << "index,level\n";
    for (std::size_t i = 0; i < levels.levels.size(); ++i)
        out << i << ',' << format_double(levels.levels[i]) << '\n';
}

ContourLevels uniform_levels(const Interval& range, std::size_t m, double delta) {
    require(std::isfinite(range.lo) && std::isfinite(range.hi) && range.lo < range.hi,
            "uniform_levels requires lo < hi");
    require(m >= 1, "uniform_levels requires m >= 1");
    ContourLevels out;
    out.levels.reserve(m);
    const double width = range.width() / static_cast<double>(m);
    for (std::size_t i = 0; i < m; ++i)
        out.levels.push_back(range.lo + (static_cast<double>(i) + 0.5) * width);
    out.delta = delta;
    out.scheme = LevelScheme::UniformSG;
    out.range = range;
    out.validate();
    return out;
}

namespace {

std::vector<double> midpoint_boundaries(const std::vector<double>& levels, const Interval& support) {
    std::vector<double> b;
    b.reserve(levels.size() + 1);
    b.push_back(support.lo);
    for (std::size_t i = 1; i < levels.size(); ++i) b.push_back(0.5 * (levels[i - 1] + levels[i]));
    b.push_back(support.hi);
    return b;
}

double distortion(const Pdf1D& pdf, const std::vector<double>& levels,
                  const std::vector<double>& boundaries) {
    double d = 0.0;
    for (std::size_t i = 0; i < levels.size(); ++i)
        d += pdf.central_second_moment(boundaries[i], boundaries[i + 1], levels[i]);
    return d;
}

} // namespace

LloydMaxResult lloydmax_levels(const Pdf1D& pdf, std::size_t m, double tol, std::size_t max_iter) {
    require(m >= 1, "lloydmax_levels requires m >= 1");
    require(std::isfinite(tol) && tol > 0.0, "lloydmax_levels requires tol > 0");
    const Interval support = pdf.support();

    LloydMaxResult result;
    result.levels = uniform_levels(support, m, 1.0).levels;
    result.boundaries = midpoint_boundaries(result.levels, support);
    result.distortion = distortion(pdf, result.levels, result.boundaries);
    result.distortion_history.push_back(result.distortion);

    std::vector<double> next(m);
    while (result.iterations < max_iter) {
        double movement = 0.0;
        for (std::size_t i = 0; i < m; ++i) {
            const double a = result.boundaries[i];
            const double b = result.boundaries[i + 1];
            const double cell_mass = pdf.mass(a, b);
            // Centroid measured from the cell midpoint keeps precision for offset supports.
            const double mid = 0.5 * (a + b);
            next[i] = cell_mass < kEmptyCellMass
                          ? mid
                          : mid + (pdf.first_moment(a, b) - mid * cell_mass) / cell_mass;
            movement = std::max(movement, std::abs(next[i] - result.levels[i]));
        }
        result.levels = next;
        result.boundaries = midpoint_boundaries(result.levels, support);
        result.distortion = distortion(pdf, result.levels, result.boundaries);
        result.distortion_history.push_back(result.distortion);
        ++result.iterations;
        if (movement < tol) break;
    }
    return result;
}

Pdf1D estimate_pdf(std::span<const double> values, std::size_t bins) {
    require(!values.empty(), "estimate_pdf requires values");
    auto [lo, hi] = std::minmax_element(values.begin(), values.end());
    require(*lo < *hi, "estimate_pdf requires at least two distinct values");
    return estimate_pdf(values, Interval{*lo, *hi}, bins);
}

Pdf1D estimate_pdf(std::span<const double> values, const Interval& support, std::size_t bins) {
    require(bins >= 1, "estimate_pdf requires bins >= 1");
    require(!values.empty(), "estimate_pdf requires values");
    require(std::isfinite(support.lo) && std::isfinite(support.hi) && support.lo < support.hi,
            "estimate_pdf requires a non-degenerate support");
    const double width = support.width() / static_cast<double>(bins);
    std::vector<double> edges(bins + 1);
    for (std::size_t i = 0; i <= bins; ++i)
        edges[i] = support.lo + width * static_cast<double>(i);
    edges.back() = support.hi;

    std::vector<double> counts(bins, 0.0);
    for (double v : values) {
        require(std::isfinite(v), "estimate_pdf: non-finite value");
        auto k = static_cast<std::ptrdiff_t>(std::floor((v - support.lo) / width));
        k = std::clamp<std::ptrdiff_t>(k, 0, static_cast<std::ptrdiff_t>(bins) - 1);
        counts[static_cast<std::size_t>(k)] += 1.0;
    }
    const double n = static_cast<double>(values.size());
    std::vector<double> densities(bins);
    for (std::size_t i = 0; i < bins; ++i)
        densities[i] = std::max(counts[i] / (n * (edges[i + 1] - edges[i])), kPdfDensityFloor);
    return Pdf1D(std::move(edges), std::move(densities));
}

Pdf1D true_pdf(const Field& field, const GridSpec& grid, std::size_t bins) {
    const auto truth = eval_field_grid(field, grid);
    return estimate_pdf(truth.values, bins);
}

ContourLevels make_levels(LevelScheme scheme, const Interval& range, std::size_t m, double delta,
                          const Pdf1D* pdf) {
    if (scheme == LevelScheme::UniformSG) return uniform_levels(range, m, delta);
    require(pdf != nullptr, std::string("scheme ") + std::string(to_string(scheme)) +
                                " needs a pdf");
    auto lm = lloydmax_levels(*pdf, m);
    ContourLevels out;
    out.levels = std::move(lm.levels);
    out.delta = delta;
    out.scheme = scheme;
    out.range = pdf->support();
    out.validate();
    return out;
}

} // namespace dwis
