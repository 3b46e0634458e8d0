#pragma once

#include "steinkit/kernel.hpp"
#include "steinkit/quadrature.hpp"

#include <optional>
#include <vector>

namespace steinkit {

/// Density rebuilt from a Stein kernel tau and mean m as
/// p(x) = C / tau(x) * exp(integral from x0 to x of (m - t) / tau(t) dt).
struct RecoveredDensity {
    std::vector<double> grid;
    std::vector<double> values;
    double normalizer = 1.0;  // C
    double anchor = 0.0;      // x0

    /// Linear interpolation inside the grid, 0 outside.
    double operator()(double x) const;
};

/// Recovers the density on a clustered grid of grid_size points. The anchor
/// defaults to m, the zero of the drift m - x. Where the cumulative exponent
/// falls below log(1e-300) the density is set to 0. Values are scaled to unit
/// trapezoid mass, with the gaps to finite domain ends filled by the end values.
/// Atom zeros are stepped over; any other zero of the kernel met inside its
/// interval (a Cantor set, a hole in a tabulated kernel) raises NumericalError.
RecoveredDensity recover_density(const KernelFn& kernel, double m, int grid_size,
                                 const QuadratureConfig& cfg = {},
                                 std::optional<double> anchor = std::nullopt);

/// (L g)(x) = tau(x) g'(x) + (m - x) g(x).
double stein_operator(const KernelFn& kernel, double m, const TestFunction& g, double x);

}  // namespace steinkit
