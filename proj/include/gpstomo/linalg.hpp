#ifndef GPSTOMO_LINALG_HPP
#define GPSTOMO_LINALG_HPP

#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "error.hpp"

namespace gpstomo {

using Vector = std::vector<double>;

namespace la {

inline void require_same_size(std::size_t a, std::size_t b, const char* where)
{
    if (a != b)
        throw Error(ErrorKind::dimension_mismatch,
                    std::string(where) + ": " + std::to_string(a) + " vs " + std::to_string(b));
}

inline double dot(std::span<const double> a, std::span<const double> b)
{
    require_same_size(a.size(), b.size(), "dot");
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i)
        s += a[i] * b[i];
    return s;
}

inline double norm(std::span<const double> a) { return std::sqrt(dot(a, a)); }

// y += a*x
inline void axpy(double a, std::span<const double> x, std::span<double> y)
{
    require_same_size(x.size(), y.size(), "axpy");
    for (std::size_t i = 0; i < x.size(); ++i)
        y[i] += a * x[i];
}

inline void scale(double a, std::span<double> x)
{
    for (double& v : x)
        v *= a;
}

inline Vector difference(std::span<const double> a, std::span<const double> b)
{
    require_same_size(a.size(), b.size(), "difference");
    Vector d(a.size());
    for (std::size_t i = 0; i < a.size(); ++i)
        d[i] = a[i] - b[i];
    return d;
}

inline double distance(std::span<const double> a, std::span<const double> b)
{
    require_same_size(a.size(), b.size(), "distance");
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double d = a[i] - b[i];
        s += d * d;
    }
    return std::sqrt(s);
}

inline bool all_finite(std::span<const double> a)
{
    for (double v : a)
        if (!std::isfinite(v))
            return false;
    return true;
}

} // namespace la
} // namespace gpstomo

#endif // GPSTOMO_LINALG_HPP
