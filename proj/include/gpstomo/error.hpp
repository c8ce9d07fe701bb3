#ifndef GPSTOMO_ERROR_HPP
#define GPSTOMO_ERROR_HPP

#include <stdexcept>
#include <string>

namespace gpstomo {

enum class ErrorKind {
    invalid_bounds,
    invalid_count,
    invalid_argument,
    degenerate_ray,
    horizontal_ray,
    empty_row,
    dimension_mismatch,
    grid_mismatch,
    zero_truth,
    breakdown,
    non_finite,
    io,
    config,
};

inline const char* to_string(ErrorKind kind) noexcept
{
    switch (kind) {
    case ErrorKind::invalid_bounds: return "invalid-bounds";
    case ErrorKind::invalid_count: return "invalid-count";
    case ErrorKind::invalid_argument: return "invalid-argument";
    case ErrorKind::degenerate_ray: return "degenerate-ray";
    case ErrorKind::horizontal_ray: return "horizontal-ray";
    case ErrorKind::empty_row: return "empty-row";
    case ErrorKind::dimension_mismatch: return "dimension-mismatch";
    case ErrorKind::grid_mismatch: return "grid-mismatch";
    case ErrorKind::zero_truth: return "zero-truth";
    case ErrorKind::breakdown: return "breakdown";
    case ErrorKind::non_finite: return "non-finite";
    case ErrorKind::io: return "io";
    case ErrorKind::config: return "config";
    }
    return "unknown";
}

/// Every failure raised by the library carries a machine-readable kind.
class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& what)
        : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind)
    {
    }

    ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

} // namespace gpstomo

#endif // GPSTOMO_ERROR_HPP
