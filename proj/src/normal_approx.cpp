#include "steinkit/normal_approx.hpp"

#include "steinkit/errors.hpp"

#include <cmath>
#include <limits>
#include <numbers>

namespace steinkit {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double normal_pdf(double x, double mean, double sd) {
    const double z = (x - mean) / sd;
    return std::exp(-0.5 * z * z) / (sd * std::sqrt(2.0 * std::numbers::pi));
}

}  // namespace

double tv_to_normal(const DistributionSpec& spec, const QuadratureConfig& cfg) {
    const auto [m, var] = spec.moments();
    if (!(var > 0.0)) throw NumericalError("total variation to a normal needs a non-degenerate law");
    const double sd = std::sqrt(var);
    std::vector<double> points = spec.breakpoints();
    points.push_back(m);
    const auto cuts = make_partition(std::move(points), -kInf, kInf);
    const auto l1 = integrate_abs(
        [&](double x) { return ac_density(spec, x) - normal_pdf(x, m, sd); }, cuts, cfg);
    return std::min(1.0, 0.5 * (l1.value + spec.singular_mass()));
}

DiscrepancyReport discrepancy_bounds(const DistributionSpec& spec, const KernelFn& kernel,
                                     const QuadratureConfig& cfg) {
    const double var = spec.moments().variance;
    DiscrepancyReport r;
    r.tv_exact = tv_to_normal(spec, cfg);

    double l1 = 0.0;
    const auto& pos = spec.ac_positive_set();
    if (!pos.empty()) {
        double hi = pos.front().hi;
        for (const auto& iv : pos) hi = std::max(hi, iv.hi);
        const auto cuts = make_partition(spec.breakpoints(), pos.front().lo, hi);
        l1 += integrate_abs(
                  [&](double t) {
                      const double p = ac_density(spec, t);
                      return p == 0.0 ? 0.0 : (kernel(t) - var) * p;
                  },
                  cuts, cfg)
                  .value;
    }
    l1 += expect_singular(spec, [&](double t) { return std::abs(kernel(t) - var); });
    r.bound_l1 = 2.0 * l1;
    r.bound_sd = 2.0 * std::sqrt(kernel_stats(spec, kernel, cfg).var_tau);
    r.scaled_l1 = r.bound_l1 / var;
    r.scaled_sd = r.bound_sd / var;
    return r;
}

}  // namespace steinkit
