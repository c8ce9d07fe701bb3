#ifndef GPSTOMO_SOLVERS_CGNE_HPP
#define GPSTOMO_SOLVERS_CGNE_HPP

#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "../error.hpp"
#include "../linalg.hpp"

namespace gpstomo {

struct CgneOptions {
    double tol = 1e-8;
    std::size_t max_iterations = 200;
};

struct CgneResult {
    Vector solution;
    std::size_t iterations = 0;
    bool converged = false;
    std::vector<double> residual_norms; // entry 0 is ||rhs||
};

/// Krylov solve of H s = rhs from s = 0 for a symmetric positive
/// (semi-)definite H given as apply_H(in, out). Uses the conjugate-residual
/// recurrences, so ||H s_k - rhs|| is nonincreasing. Stops when the residual
/// drops below tol * ||rhs|| or after max_iterations applications.
template <class ApplyH>
CgneResult cgne(ApplyH&& apply_H, std::span<const double> rhs, const CgneOptions& opts = {})
{
    if (!(opts.tol > 0.0))
        throw Error(ErrorKind::invalid_argument, "cgne tolerance must be positive");
    const std::size_t n = rhs.size();
    CgneResult out;
    out.solution.assign(n, 0.0);
    Vector r(rhs.begin(), rhs.end());
    const double rhs_norm = la::norm(r);
    out.residual_norms.push_back(rhs_norm);
    if (rhs_norm == 0.0) {
        out.converged = true;
        return out;
    }
    const double target = opts.tol * rhs_norm;

    Vector Ar(n), p(r), Ap(n);
    apply_H(std::span<const double>(r), std::span<double>(Ar));
    Ap = Ar;
    double rAr = la::dot(r, Ar);

    while (out.iterations < opts.max_iterations) {
        const double r_norm = la::norm(r);
        if (rAr < -1e-12 * r_norm * la::norm(Ar))
            throw Error(ErrorKind::breakdown, "cgne: r^T H r = " + std::to_string(rAr) +
                                                  " < 0, operator is not positive semi-definite");
        const double ApAp = la::dot(Ap, Ap);
        if (!(rAr > 0.0) || !(ApAp > 0.0))
            break; // residual lies in the null space of H: no further progress possible
        const double step = rAr / ApAp;
        la::axpy(step, p, out.solution);
        la::axpy(-step, Ap, r);
        ++out.iterations;
        const double res = la::norm(r);
        out.residual_norms.push_back(res);
        if (!std::isfinite(res))
            throw Error(ErrorKind::non_finite, "cgne: residual became non-finite");
        if (res <= target) {
            out.converged = true;
            break;
        }
        apply_H(std::span<const double>(r), std::span<double>(Ar));
        const double rAr_next = la::dot(r, Ar);
        const double beta = rAr_next / rAr;
        rAr = rAr_next;
        for (std::size_t i = 0; i < n; ++i) {
            p[i] = r[i] + beta * p[i];
            Ap[i] = Ar[i] + beta * Ap[i];
        }
    }
    return out;
}

} // namespace gpstomo

#endif // GPSTOMO_SOLVERS_CGNE_HPP
