#pragma once

#include "steinkit/distribution.hpp"
#include "steinkit/kernel.hpp"

namespace steinkit {

struct DiscrepancyReport {
    double tv_exact = 0.0;
    double bound_l1 = 0.0;  // 2 E|tau(X) - sigma^2|
    double bound_sd = 0.0;  // 2 sqrt(Var tau(X))
    // The same bounds divided by sigma^2. Only these are upper bounds on
    // tv_exact for every variance; the unscaled ones are when sigma^2 = 1.
    double scaled_l1 = 0.0;
    double scaled_sd = 0.0;
};

/// Total-variation distance between the law and N(m, sigma^2):
/// half the L1 distance of the AC density to the normal density plus half
/// the singular mass.
double tv_to_normal(const DistributionSpec& spec, const QuadratureConfig& cfg = {});

DiscrepancyReport discrepancy_bounds(const DistributionSpec& spec, const KernelFn& kernel,
                                     const QuadratureConfig& cfg = {});

}  // namespace steinkit
