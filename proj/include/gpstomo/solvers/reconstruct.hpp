#ifndef GPSTOMO_SOLVERS_RECONSTRUCT_HPP
#define GPSTOMO_SOLVERS_RECONSTRUCT_HPP

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "../diagnostics.hpp"
#include "../error.hpp"
#include "../field.hpp"
#include "../objective.hpp"
#include "../tv.hpp"
#include "cgne.hpp"
#include "lbfgs.hpp"
#include "termination.hpp"

namespace gpstomo {

struct InnerSolveStats {
    std::size_t iterations = 0;
    bool converged = false;
    double relative_residual = 0.0; // true ||H s + g|| / ||g||
};

struct SolveResult {
    Field field;
    std::size_t iterations = 0;
    TerminationReason reason = TerminationReason::max_iterations;
    std::vector<ConvergenceRecord> records; // iterations + 1 entries
    std::vector<bool> accepted;             // per record; record 0 is the start
    std::vector<InnerSolveStats> inner;     // LDFP only, one per outer step
    double seconds = 0.0;
};

namespace detail {

// Builds ConvergenceRecords; time spent computing the monitored metrics is
// excluded from the solver clock.
class RecordSink {
public:
    RecordSink(const Objective& obj, const Field* truth) : obj_(obj), truth_(truth)
    {
        if (truth_ && truth_->size() != obj.dimension())
            throw Error(ErrorKind::grid_mismatch, "truth field does not match the objective");
    }

    void record(std::size_t it, double value, double step_norm, double grad_norm, std::span<const double> x,
                bool accepted)
    {
        const double now = clock_.seconds();
        ConvergenceRecord r;
        r.iteration = it;
        r.value = value;
        r.step_norm = step_norm;
        r.grad_norm = grad_norm;
        if (truth_)
            r.rel_error = relative_error(x, std::span<const double>(truth_->values));
        r.discrepancy = obj_.discrepancy(x);
        r.seconds = now - excluded_;
        records_.push_back(r);
        accepted_.push_back(accepted);
        excluded_ += clock_.seconds() - now;
    }

    double solver_seconds() const { return clock_.seconds() - excluded_; }
    std::vector<ConvergenceRecord> take_records() { return std::move(records_); }
    std::vector<bool> take_accepted() { return std::move(accepted_); }

private:
    const Objective& obj_;
    const Field* truth_;
    Stopwatch clock_;
    double excluded_ = 0.0;
    std::vector<ConvergenceRecord> records_;
    std::vector<bool> accepted_;
};

} // namespace detail

/// Trust-region L-BFGS on the Tikhonov objective, recording every trial.
inline SolveResult lbfgs_trust_region(const Objective& obj, const Field& phi0, const LbfgsOptions& opts = {},
                                      const Field* truth = nullptr)
{
    la::require_same_size(phi0.size(), obj.dimension(), "lbfgs_trust_region start");
    detail::RecordSink sink(obj, truth);
    MinimizeResult m = minimize_lbfgs_tr(obj, phi0.values, opts, [&](const IterationState& s) {
        sink.record(s.iteration, s.value, s.step_norm, s.grad_norm, s.x, s.accepted);
    });
    SolveResult out;
    out.seconds = sink.solver_seconds();
    out.field = Field(phi0.grid, std::move(m.x));
    out.iterations = m.iterations;
    out.reason = m.reason;
    out.records = sink.take_records();
    out.accepted = sink.take_accepted();
    return out;
}

struct LdfpOptions {
    std::size_t max_outer = 30;
    double grad_tol = 0.0; // 0: always run max_outer steps
    CgneOptions inner{1e-8, 200};
};

/// Lagged diffusivity fixed point: freeze L at the iterate, solve
/// (T^T T + alpha L) s = -grad F by the inner Krylov solve, take the full step.
inline SolveResult ldfp(const Objective& obj, const Field& phi0, const LdfpOptions& opts = {},
                        const Field* truth = nullptr)
{
    const auto* tv = std::get_if<TvPenalty>(&obj.penalty());
    if (!tv)
        throw Error(ErrorKind::invalid_argument, "ldfp requires the smoothed-TV penalty");
    la::require_same_size(phi0.size(), obj.dimension(), "ldfp start");

    detail::RecordSink sink(obj, truth);
    const SparseOperator& T = obj.op();
    const double alpha = obj.alpha();
    Vector phi = phi0.values;
    Evaluation e = obj.eval(phi);
    double gnorm = la::norm(e.gradient);
    sink.record(0, e.value, 0.0, gnorm, phi, true);

    SolveResult out;
    Vector tmp(T.rows()), lv(phi.size());
    while (true) {
        if (gnorm <= opts.grad_tol) {
            out.reason = TerminationReason::gradient_tol;
            break;
        }
        if (out.iterations >= opts.max_outer) {
            out.reason = TerminationReason::max_iterations;
            break;
        }
        const TvLinearization L(obj.grid(), phi, tv->beta);
        const auto apply_H = [&](std::span<const double> v, std::span<double> hv) {
            T.apply(v, tmp);
            T.apply_adjoint(tmp, hv);
            L.apply(v, lv);
            la::axpy(alpha, lv, hv);
        };
        Vector rhs = e.gradient;
        la::scale(-1.0, rhs);
        CgneResult cg = cgne(apply_H, rhs, opts.inner);

        InnerSolveStats stats;
        stats.iterations = cg.iterations;
        stats.converged = cg.converged;
        {
            Vector hs(phi.size());
            apply_H(cg.solution, hs);
            la::axpy(-1.0, rhs, hs);
            stats.relative_residual = la::norm(hs) / la::norm(rhs);
        }
        out.inner.push_back(stats);

        la::axpy(1.0, cg.solution, phi);
        ++out.iterations;
        e = obj.eval(phi);
        if (!std::isfinite(e.value))
            throw Error(ErrorKind::non_finite, "ldfp: objective became non-finite");
        gnorm = la::norm(e.gradient);
        sink.record(out.iterations, e.value, la::norm(cg.solution), gnorm, phi, true);
    }
    out.seconds = sink.solver_seconds();
    out.field = Field(phi0.grid, std::move(phi));
    out.records = sink.take_records();
    out.accepted = sink.take_accepted();
    return out;
}

} // namespace gpstomo

#endif // GPSTOMO_SOLVERS_RECONSTRUCT_HPP
