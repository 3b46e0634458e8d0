#pragma once

#include "steinkit/distribution.hpp"
#include "steinkit/quadrature.hpp"

#include <optional>
#include <span>
#include <string>
#include <vector>

namespace steinkit {

/// Upper bound on d_TV(S_n*, Z) for i.i.d. sums: 2 sqrt(Var tau(X)) / (sigma^2 sqrt(n)).
double clt_bound(const DistributionSpec& spec, int n, const QuadratureConfig& cfg = {});

struct ConvolutionTv {
    double tv = 0.0;
    // |tv at grid_size - tv at grid_size / 2|; +inf when the coarser grid is
    // too small for n.
    double discretization_error = 0.0;
};

/// d_TV between the standardised n-fold convolution of a pure-AC law and
/// N(0, 1), computed on an FFT lattice of grid_size points.
ConvolutionTv convolution_tv(const DistributionSpec& spec, int n, int grid_size,
                             const QuadratureConfig& cfg = {});

struct CltCurve {
    std::vector<int> ns;
    std::vector<double> bounds;
    std::vector<std::optional<double>> empirical;
    std::vector<std::optional<double>> empirical_error;
    std::optional<double> slope_bound;
    std::optional<double> slope_empirical;
    // One entry per n whose lattice could not hold the n-fold sum.
    std::vector<std::string> warnings;
};

struct RateFit {
    double slope_bound = 0.0;
    std::optional<double> slope_empirical;
};

/// Least-squares slope of log(y) against log(x).
double loglog_slope(std::span<const double> xs, std::span<const double> ys);

/// Needs at least 3 values of n spanning a factor of 8 or more.
RateFit rate_fit(const CltCurve& curve);

/// Bounds for every n, exact-convolution values for pure-AC laws, and the
/// fitted slopes when the n values allow a fit. An n whose lattice is too
/// small keeps an empty empirical value and adds a warning.
CltCurve clt_curve(const DistributionSpec& spec, std::span<const int> ns, int grid_size,
                   const QuadratureConfig& cfg = {});

}  // namespace steinkit
