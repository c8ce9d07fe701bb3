#ifndef GPSTOMO_FORWARD_HPP
#define GPSTOMO_FORWARD_HPP

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <iomanip>
#include <optional>
#include <ostream>
#include <span>
#include <utility>
#include <vector>

#include "error.hpp"
#include "field.hpp"
#include "geometry.hpp"
#include "linalg.hpp"

namespace gpstomo {

/// Closest node under the per-axis normalized max norm, i.e. per-axis rounding
/// (exact half-cell ties go to the lower index). Points farther than half a
/// cell outside the box map to nothing.
inline std::optional<std::size_t> nearest_node(Vec3 p, const Grid3& grid)
{
    const auto axis = [](double v, double lo, double d, std::size_t n) -> std::optional<std::size_t> {
        const double u = (v - lo) / d;
        const double r = std::ceil(u - 0.5);
        if (!(r >= 0.0) || r > static_cast<double>(n - 1))
            return std::nullopt;
        return static_cast<std::size_t>(r);
    };
    const auto i = axis(p.x, grid.bounds.x_min, grid.dx, grid.nx);
    const auto j = axis(p.y, grid.bounds.y_min, grid.dy, grid.ny);
    const auto k = axis(p.z, grid.bounds.z_min, grid.dz, grid.nz);
    if (!i || !j || !k)
        return std::nullopt;
    return grid.index(*i, *j, *k);
}

/// Row-compressed ray transform. Row j holds the path-length weights of ray j.
class SparseOperator {
public:
    SparseOperator() = default;

    SparseOperator(std::size_t n_cols, std::vector<std::size_t> row_ptr, std::vector<std::size_t> cols,
                   std::vector<double> weights)
        : n_cols_(n_cols), row_ptr_(std::move(row_ptr)), cols_(std::move(cols)), weights_(std::move(weights))
    {
        if (row_ptr_.empty() || row_ptr_.front() != 0 || row_ptr_.back() != cols_.size() ||
            cols_.size() != weights_.size())
            throw Error(ErrorKind::invalid_argument, "malformed CSR arrays");
    }

    std::size_t rows() const { return row_ptr_.empty() ? 0 : row_ptr_.size() - 1; }
    std::size_t cols() const { return n_cols_; }
    std::size_t nonzeros() const { return cols_.size(); }

    std::span<const std::size_t> row_cols(std::size_t j) const
    {
        return {cols_.data() + row_ptr_[j], row_ptr_[j + 1] - row_ptr_[j]};
    }
    std::span<const double> row_weights(std::size_t j) const
    {
        return {weights_.data() + row_ptr_[j], row_ptr_[j + 1] - row_ptr_[j]};
    }

    void apply(std::span<const double> x, std::span<double> y) const
    {
        la::require_same_size(x.size(), n_cols_, "SparseOperator::apply input");
        la::require_same_size(y.size(), rows(), "SparseOperator::apply output");
        for (std::size_t j = 0; j < rows(); ++j) {
            double s = 0.0;
            for (std::size_t e = row_ptr_[j]; e < row_ptr_[j + 1]; ++e)
                s += weights_[e] * x[cols_[e]];
            y[j] = s;
        }
    }

    Vector apply(std::span<const double> x) const
    {
        Vector y(rows());
        apply(x, y);
        return y;
    }

    // x = T^T r
    void apply_adjoint(std::span<const double> r, std::span<double> x) const
    {
        la::require_same_size(r.size(), rows(), "SparseOperator::apply_adjoint input");
        la::require_same_size(x.size(), n_cols_, "SparseOperator::apply_adjoint output");
        std::fill(x.begin(), x.end(), 0.0);
        for (std::size_t j = 0; j < rows(); ++j)
            for (std::size_t e = row_ptr_[j]; e < row_ptr_[j + 1]; ++e)
                x[cols_[e]] += weights_[e] * r[j];
    }

    Vector apply_adjoint(std::span<const double> r) const
    {
        Vector x(n_cols_);
        apply_adjoint(r, x);
        return x;
    }

    double frobenius_norm() const
    {
        double s = 0.0;
        for (double w : weights_)
            s += w * w;
        return std::sqrt(s);
    }

    void write_triples(std::ostream& os) const
    {
        os << "# row col weight\n" << std::setprecision(17);
        for (std::size_t j = 0; j < rows(); ++j)
            for (std::size_t e = row_ptr_[j]; e < row_ptr_[j + 1]; ++e)
                os << j << ' ' << cols_[e] << ' ' << weights_[e] << '\n';
    }

private:
    std::size_t n_cols_ = 0;
    std::vector<std::size_t> row_ptr_{0};
    std::vector<std::size_t> cols_;
    std::vector<double> weights_;
};

inline Vector apply(const SparseOperator& op, const Field& f) { return op.apply(f.values); }
inline Vector apply_adjoint(const SparseOperator& op, std::span<const double> r) { return op.apply_adjoint(r); }

/// Trapezoid weight of sample l out of n along a ray with arc increment h.
inline double sample_weight(std::size_t l, std::size_t n, double h)
{
    return (l == 0 || l + 1 == n) ? 0.5 * h : h;
}

/// Nearest-neighbour line integration: each sample of each ray deposits its
/// arc-length weight on its closest node; duplicates within a row are merged.
inline SparseOperator assemble_operator(const Network& net, std::size_t n_samples)
{
    if (net.rays.empty())
        throw Error(ErrorKind::invalid_count, "network has no rays");
    const Grid3& grid = net.grid;
    std::vector<std::size_t> row_ptr{0};
    std::vector<std::size_t> cols;
    std::vector<double> weights;
    std::vector<std::pair<std::size_t, double>> row;
    for (std::size_t j = 0; j < net.rays.size(); ++j) {
        const RaySamples rs = sample_ray(net.rays[j], grid, n_samples);
        row.clear();
        for (std::size_t l = 0; l < rs.points.size(); ++l) {
            if (auto node = nearest_node(rs.points[l], grid))
                row.emplace_back(*node, sample_weight(l, rs.points.size(), rs.increment));
        }
        if (row.empty())
            throw Error(ErrorKind::empty_row, "ray " + std::to_string(j) + " has no samples inside the domain");
        std::sort(row.begin(), row.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
        for (std::size_t e = 0; e < row.size(); ++e) {
            if (!cols.empty() && cols.size() > row_ptr.back() && cols.back() == row[e].first)
                weights.back() += row[e].second;
            else {
                cols.push_back(row[e].first);
                weights.push_back(row[e].second);
            }
        }
        row_ptr.push_back(cols.size());
    }
    return SparseOperator(grid.node_count(), std::move(row_ptr), std::move(cols), std::move(weights));
}

} // namespace gpstomo

#endif // GPSTOMO_FORWARD_HPP
