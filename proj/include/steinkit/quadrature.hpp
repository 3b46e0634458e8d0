#pragma once

#include <functional>
#include <span>
#include <vector>

namespace steinkit {

/// Tolerances shared by every quadrature in the library.
///
/// `tail_quantile` controls where unbounded supports are cut for grid work
/// (kernel grids, recovery grids, FFT lattices). Expectations never use it:
/// they integrate over the full real line with a variable transform.
struct QuadratureConfig {
    double abs_tol = 1e-9;
    double rel_tol = 1e-12;
    int max_subdivisions = 200000;
    double tail_quantile = 1e-9;

    void validate() const;
};

struct QuadratureResult {
    double value = 0.0;
    double abs_error = 0.0;
    int intervals = 0;
    bool converged = true;
};

using Integrand = std::function<double(double)>;

/// Globally adaptive 7/15-point Gauss-Kronrod integration of `f` over the
/// partition given by `breakpoints` (sorted, may start at -inf / end at +inf).
/// Infinite end intervals are mapped onto finite ones. Intervals are summed in
/// left-to-right order, so the result does not depend on refinement order.
QuadratureResult integrate(const Integrand& f, std::span<const double> breakpoints,
                           const QuadratureConfig& cfg = {});

QuadratureResult integrate(const Integrand& f, double a, double b,
                           const QuadratureConfig& cfg = {});

/// One 15-point Kronrod panel on a finite interval. Exact for polynomials of
/// degree <= 22, which covers every piecewise-linear density moment we need.
double kronrod_panel(const Integrand& f, double a, double b);

/// Sorts, removes duplicates and drops points outside [lo, hi]; lo and hi are
/// always kept as the first and last entries.
std::vector<double> make_partition(std::vector<double> points, double lo, double hi);

/// Integral of |g| over the partition, with extra split points at sign
/// changes of g. Each finite sub-interval is scanned at `scan_points` abscissae
/// and each bracketed sign change is refined by bisection (at most
/// `max_brackets` per sub-interval).
QuadratureResult integrate_abs(const Integrand& g, std::span<const double> breakpoints,
                               const QuadratureConfig& cfg = {}, int scan_points = 64,
                               int max_brackets = 64);

}  // namespace steinkit
