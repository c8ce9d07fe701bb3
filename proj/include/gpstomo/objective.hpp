#ifndef GPSTOMO_OBJECTIVE_HPP
#define GPSTOMO_OBJECTIVE_HPP

#include <atomic>
#include <cstddef>
#include <span>
#include <utility>
#include <variant>

#include "error.hpp"
#include "field.hpp"
#include "forward.hpp"
#include "linalg.hpp"
#include "tv.hpp"

namespace gpstomo {

struct TvPenalty {
    SmoothingParam beta{1e-2};
};

/// 1/2 ||phi - anchor||^2; an empty anchor means phi0 = 0.
struct QuadraticPenalty {
    Vector anchor;
};

using Penalty = std::variant<TvPenalty, QuadraticPenalty>;

inline constexpr double default_tv_alpha = 1e-13;
inline constexpr double default_quadratic_alpha = 1e-15;

struct Evaluation {
    double value = 0.0;
    Vector gradient;
};

/// F(phi) = 1/2 ||T phi - f||^2 + alpha * J(phi).
class Objective {
public:
    Objective(SparseOperator op, Grid3 grid, Vector data, double alpha, Penalty penalty)
        : op_(std::move(op)), grid_(grid), data_(std::move(data)), alpha_(alpha), penalty_(std::move(penalty))
    {
        if (!(alpha_ > 0.0))
            throw Error(ErrorKind::invalid_argument, "alpha must be positive");
        la::require_same_size(data_.size(), op_.rows(), "Objective data");
        la::require_same_size(grid_.node_count(), op_.cols(), "Objective grid");
        if (auto* q = std::get_if<QuadraticPenalty>(&penalty_)) {
            if (q->anchor.empty())
                q->anchor.assign(op_.cols(), 0.0);
            la::require_same_size(q->anchor.size(), op_.cols(), "Objective anchor");
        }
    }

    Objective(const Objective& o)
        : op_(o.op_), grid_(o.grid_), data_(o.data_), alpha_(o.alpha_), penalty_(o.penalty_),
          evaluations_(o.evaluations_.load())
    {
    }

    const SparseOperator& op() const { return op_; }
    const Grid3& grid() const { return grid_; }
    std::span<const double> data() const { return data_; }
    double alpha() const { return alpha_; }
    const Penalty& penalty() const { return penalty_; }
    bool is_tv() const { return std::holds_alternative<TvPenalty>(penalty_); }
    std::size_t dimension() const { return op_.cols(); }
    std::size_t evaluations() const { return evaluations_.load(); }

    double penalty_value(std::span<const double> phi) const
    {
        if (const auto* tv = std::get_if<TvPenalty>(&penalty_))
            return tv_value(grid_, phi, tv->beta);
        const auto& q = std::get<QuadraticPenalty>(penalty_);
        const double d = la::distance(phi, q.anchor);
        return 0.5 * d * d;
    }

    /// Value and gradient in one pass; writes the gradient into `grad`.
    double operator()(std::span<const double> phi, std::span<double> grad) const
    {
        la::require_same_size(phi.size(), op_.cols(), "Objective::eval");
        la::require_same_size(grad.size(), op_.cols(), "Objective::eval gradient");
        ++evaluations_;
        Vector r = op_.apply(phi);
        for (std::size_t j = 0; j < r.size(); ++j)
            r[j] -= data_[j];
        op_.apply_adjoint(r, grad);
        double value = 0.5 * la::dot(r, r);
        if (const auto* tv = std::get_if<TvPenalty>(&penalty_)) {
            TvLinearization L(grid_, phi, tv->beta);
            const Vector lg = L.apply(phi);
            la::axpy(alpha_, lg, grad);
            value += alpha_ * L.value();
        } else {
            const auto& anchor = std::get<QuadraticPenalty>(penalty_).anchor;
            double sq = 0.0;
            for (std::size_t i = 0; i < phi.size(); ++i) {
                const double d = phi[i] - anchor[i];
                sq += d * d;
                grad[i] += alpha_ * d;
            }
            value += alpha_ * 0.5 * sq;
        }
        return value;
    }

    Evaluation eval(std::span<const double> phi) const
    {
        Evaluation e;
        e.gradient.resize(op_.cols());
        e.value = (*this)(phi, e.gradient);
        return e;
    }

    Evaluation eval(const Field& phi) const { return eval(std::span<const double>(phi.values)); }

    /// ||T phi - f||, monitored only.
    double discrepancy(std::span<const double> phi) const
    {
        Vector r = op_.apply(phi);
        for (std::size_t j = 0; j < r.size(); ++j)
            r[j] -= data_[j];
        return la::norm(r);
    }

    double discrepancy(const Field& phi) const { return discrepancy(std::span<const double>(phi.values)); }

private:
    SparseOperator op_;
    Grid3 grid_;
    Vector data_;
    double alpha_;
    Penalty penalty_;
    mutable std::atomic<std::size_t> evaluations_{0};
};

} // namespace gpstomo

#endif // GPSTOMO_OBJECTIVE_HPP
