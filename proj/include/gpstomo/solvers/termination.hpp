#ifndef GPSTOMO_SOLVERS_TERMINATION_HPP
#define GPSTOMO_SOLVERS_TERMINATION_HPP

namespace gpstomo {

enum class TerminationReason { gradient_tol, max_iterations, radius_collapse, stagnation };

inline const char* to_string(TerminationReason r) noexcept
{
    switch (r) {
    case TerminationReason::gradient_tol: return "gradient-tol";
    case TerminationReason::max_iterations: return "max-iter";
    case TerminationReason::radius_collapse: return "radius-collapse";
    case TerminationReason::stagnation: return "stagnation";
    }
    return "unknown";
}

} // namespace gpstomo

#endif // GPSTOMO_SOLVERS_TERMINATION_HPP
