#pragma once

#include "dwis/field.hpp"

#include <cstddef>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace dwis {

/// How contour levels are placed.
///   UniformSG     - equally spaced levels, adaptive margin
///   LloydMaxSG    - Lloyd-Max levels on a pdf estimated from the reconstruction, adaptive margin
///   LloydMaxFixed - Lloyd-Max levels on the known field pdf, fixed margin
enum class LevelScheme { UniformSG, LloydMaxSG, LloydMaxFixed };

std::string_view to_string(LevelScheme scheme);
/// Accepts "U_SG", "LM_SG", "LM_FIX".
std::optional<LevelScheme> parse_scheme(std::string_view text);

struct ContourLevels {
    std::vector<double> levels;
    double delta = 0.0;
    LevelScheme scheme = LevelScheme::UniformSG;
    Interval range;

    void validate() const;
    /// True when min_j |value - level_j| <= delta.
    bool within_margin(double value) const;
};

/// Piecewise-constant probability density (a normalized histogram).
class Pdf1D {
public:
    /// Densities are renormalized so that the pdf integrates to one over the edges.
    Pdf1D(std::vector<double> bin_edges, std::vector<double> densities);

    const std::vector<double>& bin_edges() const { return edges_; }
    const std::vector<double>& densities() const { return densities_; }
    std::size_t bins() const { return densities_.size(); }
    Interval support() const { return {edges_.front(), edges_.back()}; }

    /// Integrals of x^0, x^1, x^2 times the density over [a, b] (clamped to the support).
    double mass(double a, double b) const;
    double first_moment(double a, double b) const;
    double second_moment(double a, double b) const;
    double mean() const { return first_moment(edges_.front(), edges_.back()); }

    /// Integral of (x - center)^2 times the density over [a, b].
    double central_second_moment(double a, double b, double center) const;

private:
    template <typename BinIntegral>
    double integrate(double a, double b, BinIntegral&& per_bin) const;

    std::vector<double> edges_;
    std::vector<double> densities_;
};

void write_pdf_csv(std::ostream& out, const Pdf1D& pdf);
void write_levels_csv(std::ostream& out, const ContourLevels& levels);

struct LloydMaxResult {
    std::vector<double> levels;
    std::vector<double> boundaries; // size m + 1, first/last equal the pdf support
    std::size_t iterations = 0;
    double distortion = 0.0;
    std::vector<double> distortion_history; // one entry per completed iteration, plus the initial
};

inline constexpr double kLloydMaxTol = 1e-8;
inline constexpr std::size_t kLloydMaxIter = 500;
inline constexpr std::size_t kDefaultPdfBins = 64;
inline constexpr double kPdfDensityFloor = 1e-9;

/// m levels at the centers of m equal cells of `range`.
ContourLevels uniform_levels(const Interval& range, std::size_t m, double delta);

/// Lloyd-Max quantizer for `pdf`, started from uniform levels over the pdf support.
LloydMaxResult lloydmax_levels(const Pdf1D& pdf, std::size_t m, double tol = kLloydMaxTol,
                               std::size_t max_iter = kLloydMaxIter);

/// Normalized histogram over [min, max] of `values`, every bin floored at kPdfDensityFloor.
Pdf1D estimate_pdf(std::span<const double> values, std::size_t bins = kDefaultPdfBins);
/// Same, over an explicit support; values outside it land in the edge bins.
Pdf1D estimate_pdf(std::span<const double> values, const Interval& support,
                   std::size_t bins = kDefaultPdfBins);

/// Histogram of ground-truth values on `grid`.
Pdf1D true_pdf(const Field& field, const GridSpec& grid, std::size_t bins = kDefaultPdfBins);

/// Dispatch by scheme. Lloyd-Max schemes need a pdf; its support becomes the level range.
ContourLevels make_levels(LevelScheme scheme, const Interval& range, std::size_t m, double delta,
                          const Pdf1D* pdf = nullptr);

} // namespace dwis
