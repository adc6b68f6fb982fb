#pragma once

#include "dwis/field.hpp"

#include <Eigen/Dense>

#include <span>
#include <vector>

namespace dwis {

/// Diagonal regularization for the spline system, either absolute or scaled by max |G_ij|.
class Ridge {
public:
    static Ridge absolute(double value) { return Ridge(value, false); }
    static Ridge relative(double scale) { return Ridge(scale, true); }
    static Ridge none() { return Ridge(0.0, false); }

    double resolve(double kernel_scale) const { return relative_ ? value_ * kernel_scale : value_; }

private:
    Ridge(double value, bool relative);
    double value_;
    bool relative_;
};

/// Minimum separation below which two input points are merged.
inline constexpr double kDuplicateDistance = 1e-9;

/// Biharmonic spline s(p) = offset + sum_j w_j phi(|p - c_j|). The offset is zero except for
/// single-node fits, where the surface is the constant node value.
struct SplineModel {
    std::vector<Point> centers;
    std::vector<double> weights;
    double ridge = 0.0; // absolute value actually applied
    double offset = 0.0;

    double operator()(const Point& p) const;
};

/// Green's function of the 2-D biharmonic operator, r^2 (ln r - 1), with phi(0) = 0.
double greens_function(double r);

/// Solves (G + ridge I) w = d over deduplicated points. Throws NumericalError if the system
/// is singular or the weights are not finite.
SplineModel fit_biharmonic(std::span<const Point> points, std::span<const double> values,
                           Ridge ridge = Ridge::none());

Grid eval_spline(const SplineModel& model, const GridSpec& grid);

/// Largest |phi(r)| for 0 <= r <= diameter.
double kernel_scale(double diameter);

/// Biharmonic fit over a point set that only grows. Each appended batch is eliminated against
/// the earlier ones through its Schur complement, so a batch of b points on top of n costs
/// O(n^2 b + b^3) rather than a full O((n+b)^3) refactorization. Produces the same spline as
/// fit_biharmonic with the same absolute ridge, up to solver rounding.
class IncrementalBiharmonic {
public:
    explicit IncrementalBiharmonic(double ridge = 0.0);

    /// Adds a batch. Points within kDuplicateDistance of an earlier point are merged into it.
    void append(std::span<const Point> points, std::span<const double> values);

    /// Solves for the current weights. Throws NumericalError if the system is singular.
    SplineModel model();

    std::size_t size() const { return centers_.size(); }
    double ridge() const { return ridge_; }

private:
    struct Block {
        Eigen::Index offset = 0;      // number of points before this block
        Eigen::MatrixXd coupling;     // kernel between earlier points (rows) and this block
        Eigen::MatrixXd elimination;  // earlier-system inverse applied to `coupling`
        Eigen::MatrixXd diagonal;     // kernel within the block, ridge included
        Eigen::PartialPivLU<Eigen::MatrixXd> schur;
    };

    Eigen::MatrixXd solve(const Eigen::MatrixXd& rhs, std::size_t block_count) const;
    Eigen::VectorXd multiply(const Eigen::VectorXd& w) const;
    void add_block(Eigen::Index first, Eigen::Index count);
    void refactor();

    double ridge_;
    std::vector<Point> centers_;
    std::vector<double> value_sums_;
    std::vector<double> counts_;
    std::vector<Block> blocks_;
};

} // namespace dwis
