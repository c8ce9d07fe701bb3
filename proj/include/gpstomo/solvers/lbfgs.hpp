#ifndef GPSTOMO_SOLVERS_LBFGS_HPP
#define GPSTOMO_SOLVERS_LBFGS_HPP

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <deque>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "../error.hpp"
#include "../linalg.hpp"
#include "termination.hpp"

namespace gpstomo {

struct LbfgsOptions {
    std::size_t memory = 10;
    std::size_t max_iterations = 1000;
    double grad_tol = 1e-8;
    double initial_radius = 1.0;
    double min_radius = 1e-14;
    double max_radius = 1e300;
    double eta1 = 0.25;
    double eta2 = 0.75;
    double shrink = 0.25;
    double grow = 2.0;
    double curvature_threshold = 1e-12;
    double stagnation_tol = 1e-14;
    std::size_t stagnation_count = 5;

    void validate() const
    {
        if (memory < 1)
            throw Error(ErrorKind::invalid_argument, "lbfgs memory must be >= 1");
        if (!(0.0 < eta1 && eta1 < eta2 && eta2 < 1.0))
            throw Error(ErrorKind::invalid_argument, "need 0 < eta1 < eta2 < 1");
        if (!(shrink > 0.0 && shrink < 1.0 && grow > 1.0))
            throw Error(ErrorKind::invalid_argument, "need 0 < shrink < 1 < grow");
        if (!(initial_radius > 0.0) || !(min_radius >= 0.0) || !(max_radius >= initial_radius))
            throw Error(ErrorKind::invalid_argument, "bad trust radius bounds");
        if (!(grad_tol >= 0.0))
            throw Error(ErrorKind::invalid_argument, "grad_tol must be >= 0");
    }
};

/// The m most recent secant pairs (s, y) with positive curvature.
/// Inner products S^T S and S^T Y are kept up to date on every push so the
/// direct product B v costs O(m n).
class LbfgsHistory {
public:
    explicit LbfgsHistory(std::size_t memory = 10, double curvature_threshold = 1e-12)
        : memory_(memory), threshold_(curvature_threshold)
    {
    }

    std::size_t size() const { return s_.size(); }
    bool empty() const { return s_.empty(); }
    std::size_t capacity() const { return memory_; }

    /// Stores the pair when y^T s > threshold * ||s|| ||y||; returns whether it was kept.
    bool push(Vector s, Vector y)
    {
        const double sy = la::dot(s, y);
        if (!(sy > threshold_ * la::norm(s) * la::norm(y)) || !(sy > 0.0))
            return false;
        if (s_.size() == memory_) {
            s_.pop_front();
            y_.pop_front();
            for (auto* m : {&ss_, &sy_}) {
                m->pop_front();
                for (auto& row : *m)
                    row.pop_front();
            }
        }
        s_.push_back(std::move(s));
        y_.push_back(std::move(y));
        const std::size_t k = s_.size();
        ss_.emplace_back(k);
        sy_.emplace_back(k);
        for (std::size_t i = 0; i + 1 < k; ++i) {
            ss_[i].push_back(la::dot(s_[i], s_.back()));
            sy_[i].push_back(la::dot(s_[i], y_.back()));
        }
        for (std::size_t j = 0; j < k; ++j) {
            ss_.back()[j] = la::dot(s_.back(), s_[j]);
            sy_.back()[j] = la::dot(s_.back(), y_[j]);
        }
        return true;
    }

    double s_dot_y(std::size_t i) const { return sy_[i][i]; }

    /// Initial inverse-Hessian scale gamma = s^T y / y^T y of the newest pair.
    double gamma() const
    {
        if (s_.empty())
            return 1.0;
        return sy_.back().back() / la::dot(y_.back(), y_.back());
    }

    /// H g by the two-loop recursion.
    Vector apply_inverse(std::span<const double> g) const
    {
        Vector q(g.begin(), g.end());
        const std::size_t k = s_.size();
        std::vector<double> a(k);
        for (std::size_t idx = k; idx-- > 0;) {
            a[idx] = la::dot(s_[idx], q) / s_dot_y(idx);
            la::axpy(-a[idx], y_[idx], q);
        }
        la::scale(gamma(), q);
        for (std::size_t idx = 0; idx < k; ++idx) {
            const double b = la::dot(y_[idx], q) / s_dot_y(idx);
            la::axpy(a[idx] - b, s_[idx], q);
        }
        return q;
    }

    /// B v for the direct BFGS matrix B = H^{-1} built from B0 = I / gamma:
    /// B = d I - [d S, Y] M^{-1} [d S^T; Y^T] with M = [[d S^T S, L], [L^T, -D]].
    Vector apply_direct(std::span<const double> v) const
    {
        const std::size_t k = s_.size();
        const double d = 1.0 / gamma();
        Vector out(v.begin(), v.end());
        la::scale(d, out);
        if (k == 0)
            return out;
        const std::size_t n2 = 2 * k;
        std::vector<double> M(n2 * n2, 0.0), w(n2);
        for (std::size_t i = 0; i < k; ++i) {
            w[i] = d * la::dot(s_[i], v);
            w[k + i] = la::dot(y_[i], v);
            for (std::size_t j = 0; j < k; ++j) {
                M[i * n2 + j] = d * ss_[i][j];
                const double lij = i > j ? sy_[i][j] : 0.0; // s_i^T y_j, strictly lower
                M[i * n2 + k + j] = lij;
                M[(k + j) * n2 + i] = lij;
            }
            M[(k + i) * n2 + k + i] = -sy_[i][i];
        }
        solve_dense(M, w, n2);
        for (std::size_t i = 0; i < k; ++i) {
            la::axpy(-d * w[i], s_[i], out);
            la::axpy(-w[k + i], y_[i], out);
        }
        return out;
    }

private:
    // Gaussian elimination with partial pivoting, in place; b becomes the solution.
    static void solve_dense(std::vector<double>& A, std::vector<double>& b, std::size_t n)
    {
        for (std::size_t c = 0; c < n; ++c) {
            std::size_t piv = c;
            for (std::size_t r = c + 1; r < n; ++r)
                if (std::abs(A[r * n + c]) > std::abs(A[piv * n + c]))
                    piv = r;
            if (A[piv * n + c] == 0.0)
                throw Error(ErrorKind::breakdown, "singular compact L-BFGS middle matrix");
            if (piv != c) {
                for (std::size_t j = 0; j < n; ++j)
                    std::swap(A[c * n + j], A[piv * n + j]);
                std::swap(b[c], b[piv]);
            }
            for (std::size_t r = c + 1; r < n; ++r) {
                const double f = A[r * n + c] / A[c * n + c];
                if (f == 0.0)
                    continue;
                for (std::size_t j = c; j < n; ++j)
                    A[r * n + j] -= f * A[c * n + j];
                b[r] -= f * b[c];
            }
        }
        for (std::size_t c = n; c-- > 0;) {
            double acc = b[c];
            for (std::size_t j = c + 1; j < n; ++j)
                acc -= A[c * n + j] * b[j];
            b[c] = acc / A[c * n + c];
        }
    }

    std::size_t memory_;
    double threshold_;
    std::deque<Vector> s_;
    std::deque<Vector> y_;
    std::deque<std::deque<double>> ss_; // ss_[i][j] = s_i^T s_j
    std::deque<std::deque<double>> sy_; // sy_[i][j] = s_i^T y_j
};

/// Quasi-Newton direction d = -H g; steepest descent for an empty history.
inline Vector two_loop_direction(const LbfgsHistory& history, std::span<const double> gradient)
{
    Vector d = history.apply_inverse(gradient);
    la::scale(-1.0, d);
    return d;
}

struct TrustRegionStep {
    Vector step;
    double predicted = 0.0; // model decrease -g^T p - 1/2 p^T B p
    bool on_boundary = false;
};

/// Dogleg step inside the ball of the given radius, between the Cauchy point
/// and the L-BFGS step. An uphill quasi-Newton step falls back to the Cauchy point.
inline TrustRegionStep dogleg_step(const LbfgsHistory& history, std::span<const double> g, double radius)
{
    TrustRegionStep out;
    const double gnorm = la::norm(g);
    const auto steepest_to_boundary = [&] {
        out.step.assign(g.begin(), g.end());
        la::scale(-radius / gnorm, out.step);
        out.on_boundary = true;
    };

    if (history.empty()) {
        if (gnorm <= radius) {
            out.step.assign(g.begin(), g.end());
            la::scale(-1.0, out.step);
            out.on_boundary = gnorm == radius;
        } else {
            steepest_to_boundary();
        }
        out.predicted = -la::dot(g, out.step);
        return out;
    }

    Vector qn = two_loop_direction(history, g);
    const bool uphill = !(la::dot(g, qn) < 0.0);
    const double qn_norm = la::norm(qn);
    // B p is tracked through B qn = -g and one product B g.
    Vector Bp;
    if (!uphill && qn_norm <= radius) {
        out.step = std::move(qn);
        Bp.assign(g.begin(), g.end());
        la::scale(-1.0, Bp);
    } else {
        const Vector Bg = history.apply_direct(g);
        const double gBg = la::dot(g, Bg);
        const double tau = gBg > 0.0 ? gnorm * gnorm / gBg : 0.0;
        if (!(gBg > 0.0) || tau * gnorm >= radius) {
            steepest_to_boundary();
            Bp = Bg;
            la::scale(-radius / gnorm, Bp);
        } else if (uphill) {
            out.step.assign(g.begin(), g.end());
            la::scale(-tau, out.step);
            Bp = Bg;
            la::scale(-tau, Bp);
        } else {
            // ||c + t (qn - c)|| = radius with c = -tau g, t in [0, 1]
            Vector cauchy(g.begin(), g.end());
            la::scale(-tau, cauchy);
            const double cauchy_norm = tau * gnorm;
            const Vector d = la::difference(qn, cauchy);
            const double a = la::dot(d, d);
            const double b = 2.0 * la::dot(cauchy, d);
            const double c = cauchy_norm * cauchy_norm - radius * radius;
            const double t = std::clamp((-b + std::sqrt(std::max(0.0, b * b - 4.0 * a * c))) / (2.0 * a), 0.0, 1.0);
            out.step = cauchy;
            la::axpy(t, d, out.step);
            out.on_boundary = true;
            Bp = Bg;
            la::scale(-(1.0 - t) * tau, Bp);
            la::axpy(-t, g, Bp);
        }
    }
    out.predicted = -la::dot(g, out.step) - 0.5 * la::dot(out.step, Bp);
    return out;
}

/// What the observer sees after the initial evaluation and after each trial.
struct IterationState {
    std::size_t iteration = 0;
    double value = 0.0;
    double step_norm = 0.0;
    double grad_norm = 0.0;
    double radius = 0.0;
    bool accepted = true;
    std::span<const double> x;
};

struct MinimizeResult {
    Vector x;
    double value = 0.0;
    double grad_norm = 0.0;
    std::size_t iterations = 0;
    std::size_t accepted_steps = 0;
    TerminationReason reason = TerminationReason::max_iterations;
};

/// Trust-region L-BFGS. fn(x, grad) returns F(x) and writes its gradient.
/// Each trial step counts as one iteration; rejected trials leave x unchanged.
template <class Fn, class Observer>
MinimizeResult minimize_lbfgs_tr(Fn&& fn, Vector x0, const LbfgsOptions& opts, Observer&& observe)
{
    opts.validate();
    const std::size_t n = x0.size();
    MinimizeResult res;
    res.x = std::move(x0);
    Vector g(n), g_trial(n), x_trial(n);
    double f = fn(std::span<const double>(res.x), std::span<double>(g));
    if (!std::isfinite(f) || !la::all_finite(g))
        throw Error(ErrorKind::non_finite, "objective is non-finite at the initial point");
    double gnorm = la::norm(g);
    double radius = opts.initial_radius;
    observe(IterationState{0, f, 0.0, gnorm, radius, true, res.x});

    LbfgsHistory history(opts.memory, opts.curvature_threshold);
    std::size_t stagnant = 0;
    for (;;) {
        if (gnorm <= opts.grad_tol) {
            res.reason = TerminationReason::gradient_tol;
            break;
        }
        if (res.iterations >= opts.max_iterations) {
            res.reason = TerminationReason::max_iterations;
            break;
        }
        if (radius < opts.min_radius) {
            res.reason = TerminationReason::radius_collapse;
            break;
        }

        TrustRegionStep trial = dogleg_step(history, g, radius);
        for (std::size_t i = 0; i < n; ++i)
            x_trial[i] = res.x[i] + trial.step[i];
        const double f_trial = fn(std::span<const double>(x_trial), std::span<double>(g_trial));
        if (!std::isfinite(f_trial))
            throw Error(ErrorKind::non_finite, "objective is non-finite at iteration " +
                                                   std::to_string(res.iterations + 1));
        ++res.iterations;

        const double step_norm = la::norm(trial.step);
        const double actual = f - f_trial;
        double ratio = trial.predicted > 0.0 ? actual / trial.predicted : -1.0;
        // a step lost entirely to rounding is a rejection
        if (std::equal(x_trial.begin(), x_trial.end(), res.x.begin()))
            ratio = -1.0;
        const bool accepted = ratio >= opts.eta1;

        if (accepted) {
            Vector y = la::difference(g_trial, g);
            const double rel_change = step_norm / std::max(1.0, la::norm(res.x));
            history.push(std::move(trial.step), std::move(y));
            std::swap(res.x, x_trial);
            std::swap(g, g_trial);
            f = f_trial;
            gnorm = la::norm(g);
            ++res.accepted_steps;
            stagnant = rel_change < opts.stagnation_tol ? stagnant + 1 : 0;
        }

        if (ratio < opts.eta1)
            radius = opts.shrink * std::min(radius, step_norm);
        else if (ratio >= opts.eta2 && step_norm >= 0.99 * radius)
            radius = std::min(opts.grow * radius, opts.max_radius);

        observe(IterationState{res.iterations, f, accepted ? step_norm : 0.0, gnorm, radius, accepted, res.x});

        if (stagnant >= opts.stagnation_count) {
            res.reason = TerminationReason::stagnation;
            break;
        }
    }
    res.value = f;
    res.grad_norm = gnorm;
    return res;
}

template <class Fn>
MinimizeResult minimize_lbfgs_tr(Fn&& fn, Vector x0, const LbfgsOptions& opts = {})
{
    return minimize_lbfgs_tr(std::forward<Fn>(fn), std::move(x0), opts, [](const IterationState&) {});
}

} // namespace gpstomo

#endif // GPSTOMO_SOLVERS_LBFGS_HPP
