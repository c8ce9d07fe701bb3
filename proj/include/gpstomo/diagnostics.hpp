#ifndef GPSTOMO_DIAGNOSTICS_HPP
#define GPSTOMO_DIAGNOSTICS_HPP

#include <charconv>
#include <chrono>
#include <cstddef>
#include <filesystem>
#include <fstream>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

#include "error.hpp"
#include "field.hpp"
#include "linalg.hpp"

namespace gpstomo {

/// One row of a convergence trace.
struct ConvergenceRecord {
    std::size_t iteration = 0;
    double value = 0.0;     // F
    double step_norm = 0.0; // ||phi^k - phi^{k-1}||, 0 for the initial point
    std::optional<double> rel_error;
    double grad_norm = 0.0;
    double discrepancy = 0.0;
    double seconds = 0.0;

    friend bool operator==(const ConvergenceRecord&, const ConvergenceRecord&) = default;
};

inline double total_error(std::span<const double> phi, std::span<const double> truth)
{
    if (phi.size() != truth.size())
        throw Error(ErrorKind::grid_mismatch, "total_error: sizes differ");
    return la::distance(phi, truth);
}

inline double total_error(const Field& phi, const Field& truth)
{
    if (!(phi.grid == truth.grid))
        throw Error(ErrorKind::grid_mismatch, "total_error: grids differ");
    return total_error(std::span<const double>(phi.values), truth.values);
}

inline double relative_error(std::span<const double> phi, std::span<const double> truth)
{
    const double n = la::norm(truth);
    if (!(n > 0.0))
        throw Error(ErrorKind::zero_truth, "relative_error: truth has zero norm");
    return total_error(phi, truth) / n;
}

inline double relative_error(const Field& phi, const Field& truth)
{
    if (!(phi.grid == truth.grid))
        throw Error(ErrorKind::grid_mismatch, "relative_error: grids differ");
    return relative_error(std::span<const double>(phi.values), truth.values);
}

class Stopwatch {
public:
    Stopwatch() : start_(std::chrono::steady_clock::now()) {}
    double seconds() const
    {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
    }

private:
    std::chrono::steady_clock::time_point start_;
};

inline constexpr std::string_view csv_header = "iter,F,step_norm,rel_error,grad_norm,discrepancy,seconds";

namespace detail {

// Shortest round-trip representation (>= 17 significant digits when needed).
inline std::string format_double(double v)
{
    char buf[64];
    auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
    if (ec != std::errc())
        throw Error(ErrorKind::io, "cannot format number");
    return std::string(buf, end);
}

inline double parse_double(std::string_view s, const std::string& context)
{
    double v = 0.0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size())
        throw Error(ErrorKind::io, context + ": bad number '" + std::string(s) + "'");
    return v;
}

} // namespace detail

inline void write_csv(std::ostream& os, std::span<const ConvergenceRecord> records)
{
    using detail::format_double;
    os << csv_header << '\n';
    for (const auto& r : records) {
        os << r.iteration << ',' << format_double(r.value) << ',' << format_double(r.step_norm) << ','
           << (r.rel_error ? format_double(*r.rel_error) : std::string()) << ',' << format_double(r.grad_norm) << ','
           << format_double(r.discrepancy) << ',' << format_double(r.seconds) << '\n';
    }
}

inline void write_csv(const std::filesystem::path& path, std::span<const ConvergenceRecord> records)
{
    std::ofstream os(path);
    if (!os)
        throw Error(ErrorKind::io, "cannot open " + path.string() + " for writing");
    write_csv(os, records);
    if (!os)
        throw Error(ErrorKind::io, "write failed for " + path.string());
}

inline std::vector<ConvergenceRecord> read_csv(const std::filesystem::path& path)
{
    std::ifstream is(path);
    if (!is)
        throw Error(ErrorKind::io, "cannot open " + path.string());
    std::string line;
    if (!std::getline(is, line) || line != csv_header)
        throw Error(ErrorKind::io, path.string() + ": missing or unexpected header");
    std::vector<ConvergenceRecord> out;
    std::size_t lineno = 1;
    while (std::getline(is, line)) {
        ++lineno;
        if (line.empty())
            continue;
        std::vector<std::string_view> cells;
        std::string_view rest(line);
        for (;;) {
            const auto comma = rest.find(',');
            cells.push_back(rest.substr(0, comma));
            if (comma == std::string_view::npos)
                break;
            rest.remove_prefix(comma + 1);
        }
        const std::string ctx = path.string() + ":" + std::to_string(lineno);
        if (cells.size() != 7)
            throw Error(ErrorKind::io, ctx + ": expected 7 columns");
        ConvergenceRecord r;
        r.iteration = static_cast<std::size_t>(detail::parse_double(cells[0], ctx));
        r.value = detail::parse_double(cells[1], ctx);
        r.step_norm = detail::parse_double(cells[2], ctx);
        if (!cells[3].empty())
            r.rel_error = detail::parse_double(cells[3], ctx);
        r.grad_norm = detail::parse_double(cells[4], ctx);
        r.discrepancy = detail::parse_double(cells[5], ctx);
        r.seconds = detail::parse_double(cells[6], ctx);
        out.push_back(r);
    }
    return out;
}

} // namespace gpstomo

#endif // GPSTOMO_DIAGNOSTICS_HPP
