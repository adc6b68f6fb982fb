#include "dwis/reconstruct.hpp"

#include "dwis/error.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace dwis {

using detail::require;

Ridge::Ridge(double value, bool relative) : value_(value), relative_(relative) {
    require(std::isfinite(value) && value >= 0.0, "ridge must be finite and >= 0");
}

namespace {

// phi as a function of the squared distance: r^2 (ln r - 1) = r2 (ln(r2)/2 - 1).
inline double greens_from_squared(double r2) {
    return r2 > 0.0 ? r2 * (0.5 * std::log(r2) - 1.0) : 0.0;
}

struct Deduplicated {
    std::vector<Point> points;
    std::vector<double> values;
};

// Points closer than kDuplicateDistance collapse onto the first occurrence (input order) with
// the mean of their values.
Deduplicated deduplicate(std::span<const Point> points, std::span<const double> values) {
    const std::size_t n = points.size();
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return points[a].x < points[b].x || (points[a].x == points[b].x && a < b);
    });

    std::vector<std::size_t> owner(n);
    std::iota(owner.begin(), owner.end(), 0);
    const double d2 = kDuplicateDistance * kDuplicateDistance;
    for (std::size_t a = 0; a < n; ++a) {
        const auto ia = order[a];
        for (std::size_t b = a + 1; b < n; ++b) {
            const auto ib = order[b];
            if (points[ib].x - points[ia].x >= kDuplicateDistance) break;
            const double dx = points[ib].x - points[ia].x;
            const double dy = points[ib].y - points[ia].y;
            if (dx * dx + dy * dy < d2) {
                const auto root_a = owner[ia];
                auto& root_b = owner[ib];
                root_b = std::min(root_b, root_a);
            }
        }
    }
    // Resolve chains so every point maps to the earliest representative.
    for (std::size_t i = 0; i < n; ++i)
        while (owner[owner[i]] != owner[i]) owner[i] = owner[owner[i]];

    std::vector<double> sum(n, 0.0);
    std::vector<std::size_t> count(n, 0);
    for (std::size_t i = 0; i < n; ++i) {
        sum[owner[i]] += values[i];
        ++count[owner[i]];
    }
    Deduplicated out;
    for (std::size_t i = 0; i < n; ++i) {
        if (owner[i] != i) continue;
        out.points.push_back(points[i]);
        out.values.push_back(sum[i] / static_cast<double>(count[i]));
    }
    return out;
}

} // namespace

double greens_function(double r) {
    require(r >= 0.0, "greens_function requires r >= 0");
    return r > 0.0 ? r * r * (std::log(r) - 1.0) : 0.0;
}

double SplineModel::operator()(const Point& p) const {
    double s = offset;
    for (std::size_t j = 0; j < centers.size(); ++j) {
        const double dx = p.x - centers[j].x;
        const double dy = p.y - centers[j].y;
        s += weights[j] * greens_from_squared(dx * dx + dy * dy);
    }
    return s;
}

SplineModel fit_biharmonic(std::span<const Point> points, std::span<const double> values,
                           Ridge ridge) {
    require(points.size() == values.size(), "fit_biharmonic: points and values differ in length");
    require(!points.empty(), "fit_biharmonic requires at least one point");
    for (std::size_t i = 0; i < points.size(); ++i)
        require(std::isfinite(points[i].x) && std::isfinite(points[i].y) &&
                    std::isfinite(values[i]),
                "fit_biharmonic: non-finite input");

    auto data = deduplicate(points, values);
    const auto n = static_cast<Eigen::Index>(data.points.size());

    SplineModel model;
    model.centers = std::move(data.points);

    if (n == 1) {
        // phi(0) = 0 makes the 1x1 system empty; a lone node becomes a constant surface.
        model.weights = {0.0};
        model.offset = data.values.front();
        return model;
    }

    Eigen::MatrixXd g(n, n);
    double scale = 0.0;
    for (Eigen::Index j = 0; j < n; ++j) {
        g(j, j) = 0.0;
        for (Eigen::Index i = j + 1; i < n; ++i) {
            const double dx = model.centers[i].x - model.centers[j].x;
            const double dy = model.centers[i].y - model.centers[j].y;
            const double v = greens_from_squared(dx * dx + dy * dy);
            g(i, j) = v;
            g(j, i) = v;
            scale = std::max(scale, std::abs(v));
        }
    }
    model.ridge = ridge.resolve(scale);
    g.diagonal().array() += model.ridge;

    Eigen::Map<const Eigen::VectorXd> d(data.values.data(), n);
    Eigen::PartialPivLU<Eigen::MatrixXd> lu(g);
    Eigen::VectorXd w = lu.solve(d);
    // Partial-pivot LU does not flag singularity itself; check the answer instead.
    const double d_scale = std::max(d.cwiseAbs().maxCoeff(), 1e-300);
    if (!w.allFinite() || (g * w - d).cwiseAbs().maxCoeff() > 1e-6 * d_scale)
        throw NumericalError("fit_biharmonic: spline system is singular or ill-conditioned (n=" +
                             std::to_string(n) + ")");
    model.weights.assign(w.data(), w.data() + n);
    return model;
}

Grid eval_spline(const SplineModel& model, const GridSpec& grid) {
    grid.validate();
    Grid out{grid, std::vector<double>(grid.size())};
    for (std::size_t j = 0; j < grid.ny; ++j) {
        const double y = grid.y(j);
        for (std::size_t i = 0; i < grid.nx; ++i)
            out.values[grid.index(i, j)] = model(Point{grid.x(i), y});
    }
    return out;
}

} // namespace dwis

namespace dwis {

double kernel_scale(double diameter) {
    require(std::isfinite(diameter) && diameter >= 0.0, "kernel_scale requires a finite diameter");
    // phi has its only interior extremum, -e/2, at r = sqrt(e).
    const double interior = diameter >= std::sqrt(std::exp(1.0)) ? 0.5 * std::exp(1.0) : 0.0;
    return std::max(interior, std::abs(greens_function(diameter)));
}

IncrementalBiharmonic::IncrementalBiharmonic(double ridge) : ridge_(ridge) {
    require(std::isfinite(ridge) && ridge >= 0.0, "ridge must be finite and >= 0");
}

void IncrementalBiharmonic::append(std::span<const Point> points, std::span<const double> values) {
    require(points.size() == values.size(), "append: points and values differ in length");
    const auto first = static_cast<Eigen::Index>(centers_.size());
    const double d2 = kDuplicateDistance * kDuplicateDistance;
    for (std::size_t i = 0; i < points.size(); ++i) {
        require(std::isfinite(points[i].x) && std::isfinite(points[i].y) && std::isfinite(values[i]),
                "append: non-finite input");
        std::size_t match = centers_.size();
        for (std::size_t j = 0; j < centers_.size(); ++j) {
            const double dx = points[i].x - centers_[j].x;
            const double dy = points[i].y - centers_[j].y;
            if (dx * dx + dy * dy < d2) {
                match = j;
                break;
            }
        }
        if (match < centers_.size()) {
            value_sums_[match] += values[i];
            counts_[match] += 1.0;
            continue;
        }
        centers_.push_back(points[i]);
        value_sums_.push_back(values[i]);
        counts_.push_back(1.0);
    }
    const auto count = static_cast<Eigen::Index>(centers_.size()) - first;
    if (count > 0) add_block(first, count);
}

void IncrementalBiharmonic::add_block(Eigen::Index first, Eigen::Index count) {
    auto kernel = [this](Eigen::Index i, Eigen::Index j) {
        const double dx = centers_[i].x - centers_[j].x;
        const double dy = centers_[i].y - centers_[j].y;
        return greens_from_squared(dx * dx + dy * dy);
    };
    Block block;
    block.offset = first;
    block.diagonal.resize(count, count);
    for (Eigen::Index j = 0; j < count; ++j) {
        block.diagonal(j, j) = ridge_;
        for (Eigen::Index i = j + 1; i < count; ++i)
            block.diagonal(i, j) = block.diagonal(j, i) = kernel(first + i, first + j);
    }
    block.coupling.resize(first, count);
    for (Eigen::Index j = 0; j < count; ++j)
        for (Eigen::Index i = 0; i < first; ++i) block.coupling(i, j) = kernel(i, first + j);

    Eigen::MatrixXd schur = block.diagonal;
    if (first > 0) {
        block.elimination = solve(block.coupling, blocks_.size());
        schur.noalias() -= block.coupling.transpose() * block.elimination;
    }
    block.schur.compute(schur);
    blocks_.push_back(std::move(block));
}

Eigen::MatrixXd IncrementalBiharmonic::solve(const Eigen::MatrixXd& rhs, std::size_t block_count) const {
    // Back-to-front over the block elimination: for the last block B with earlier system A,
    //   y = A^-1 r_top,  w_B = S^-1 (r_B - C^T y),  w_top = y - E w_B.
    const Block& last = blocks_[block_count - 1];
    if (block_count == 1) return last.schur.solve(rhs);
    const Eigen::Index n_top = last.offset;
    Eigen::MatrixXd out(rhs.rows(), rhs.cols());
    Eigen::MatrixXd y = solve(rhs.topRows(n_top), block_count - 1);
    Eigen::MatrixXd w_b = last.schur.solve(rhs.bottomRows(rhs.rows() - n_top) -
                                           last.coupling.transpose() * y);
    out.topRows(n_top) = y - last.elimination * w_b;
    out.bottomRows(rhs.rows() - n_top) = w_b;
    return out;
}

Eigen::VectorXd IncrementalBiharmonic::multiply(const Eigen::VectorXd& w) const {
    Eigen::VectorXd out = Eigen::VectorXd::Zero(w.size());
    for (const auto& b : blocks_) {
        const auto size = b.diagonal.rows();
        out.segment(b.offset, size) += b.diagonal * w.segment(b.offset, size);
        if (b.offset > 0) {
            out.segment(b.offset, size) += b.coupling.transpose() * w.head(b.offset);
            out.head(b.offset) += b.coupling * w.segment(b.offset, size);
        }
    }
    return out;
}

void IncrementalBiharmonic::refactor() {
    blocks_.clear();
    add_block(0, static_cast<Eigen::Index>(centers_.size()));
}

SplineModel IncrementalBiharmonic::model() {
    require(!centers_.empty(), "IncrementalBiharmonic::model requires at least one point");
    const auto n = static_cast<Eigen::Index>(centers_.size());
    Eigen::VectorXd d(n);
    for (Eigen::Index i = 0; i < n; ++i) d(i) = value_sums_[i] / counts_[i];

    SplineModel model;
    model.centers = centers_;
    model.ridge = ridge_;
    if (n == 1) {
        model.weights = {0.0};
        model.offset = d(0);
        return model;
    }

    const double d_scale = std::max(d.cwiseAbs().maxCoeff(), 1e-300);
    auto acceptable = [&](const Eigen::VectorXd& w) {
        return w.allFinite() && (multiply(w) - d).cwiseAbs().maxCoeff() <= 1e-6 * d_scale;
    };
    Eigen::VectorXd w = solve(d, blocks_.size());
    if (!acceptable(w) && blocks_.size() > 1) {
        // Block elimination lost accuracy; fall back to one pivoted factorization.
        refactor();
        w = solve(d, blocks_.size());
    }
    if (!acceptable(w))
        throw NumericalError("IncrementalBiharmonic: spline system is singular or ill-conditioned (n=" +
                             std::to_string(n) + ")");
    model.weights.assign(w.data(), w.data() + n);
    return model;
}

} // namespace dwis
