#include "steinkit/recover.hpp"

#include "steinkit/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace steinkit {

namespace {

const double kExponentFloor = std::log(1e-300);

std::string where(double x) {
    std::ostringstream s;
    s.precision(17);
    s << x;
    return s.str();
}

}  // namespace

double RecoveredDensity::operator()(double x) const {
    if (grid.empty() || x < grid.front() || x > grid.back()) return 0.0;
    auto it = std::upper_bound(grid.begin(), grid.end(), x);
    if (it == grid.end()) return values.back();
    const std::size_t i = static_cast<std::size_t>(it - grid.begin()) - 1;
    const double frac = (x - grid[i]) / (grid[i + 1] - grid[i]);
    return values[i] + frac * (values[i + 1] - values[i]);
}

RecoveredDensity recover_density(const KernelFn& kernel, double m, int grid_size,
                                 const QuadratureConfig& cfg, std::optional<double> anchor) {
    const SupportInterval domain = kernel.domain();
    if (!domain.in_open(m)) throw SpecError("mean " + where(m) + " lies outside the kernel's interval");
    const double x0 = anchor.value_or(m);
    if (!domain.in_open(x0)) throw SpecError("anchor " + where(x0) + " lies outside the kernel's interval");
    if (grid_size < 16) throw SpecError("recovery grid_size must be at least 16");
    if (const auto& c = kernel.cantor_zeros(); c && c->lo < domain.hi && c->hi > domain.lo) {
        throw NumericalError("kernel vanishes on a Cantor set inside [" + where(c->lo) + ", " + where(c->hi) +
                             "]; no density solves the Stein equation there");
    }

    const auto samples = kernel.grid();
    const double lo = std::isfinite(domain.lo) ? domain.lo : samples.front();
    const double hi = std::isfinite(domain.hi) ? domain.hi : samples.back();
    std::vector<double> grid = chebyshev_grid(lo, hi, grid_size);
    const auto atoms = kernel.atom_zeros();
    std::erase_if(grid, [&](double t) { return std::binary_search(atoms.begin(), atoms.end(), t); });

    std::vector<double> tau(grid.size());
    for (std::size_t i = 0; i < grid.size(); ++i) {
        tau[i] = kernel(grid[i]);
        if (!(tau[i] > 0.0)) throw NumericalError("kernel vanishes at interior point " + where(grid[i]));
    }

    auto drift = [&](double t) {
        const double k = kernel(t);
        if (!(k > 0.0)) throw NumericalError("kernel vanishes at interior point " + where(t));
        return (m - t) / k;
    };
    // Atom zeros are isolated points of the kernel; cutting there keeps them
    // at panel ends, which Gauss-Kronrod never evaluates.
    const std::vector<double> atom_cuts(atoms.begin(), atoms.end());
    // The exponent is a running sum over every grid step, so each step gets a
    // share of the absolute tolerance.
    QuadratureConfig step_cfg = cfg;
    step_cfg.abs_tol = cfg.abs_tol / static_cast<double>(grid.size());
    auto step = [&](double a, double b) {
        if (a == b) return 0.0;
        const bool flip = b < a;
        const auto cuts = make_partition(atom_cuts, std::min(a, b), std::max(a, b));
        const double v = integrate(drift, cuts, step_cfg).value;
        return flip ? -v : v;
    };

    const double neg_inf = -std::numeric_limits<double>::infinity();
    std::vector<double> exponent(grid.size(), neg_inf);
    const std::size_t first_right =
        static_cast<std::size_t>(std::lower_bound(grid.begin(), grid.end(), x0) - grid.begin());

    // Outward sweeps from the anchor; each stops once the density underflows.
    double acc = 0.0;
    double from = x0;
    for (std::size_t i = first_right; i < grid.size(); ++i) {
        acc += step(from, grid[i]);
        from = grid[i];
        if (acc < kExponentFloor) break;
        exponent[i] = acc;
    }
    acc = 0.0;
    from = x0;
    for (std::size_t i = first_right; i-- > 0;) {
        acc += step(from, grid[i]);
        from = grid[i];
        if (acc < kExponentFloor) break;
        exponent[i] = acc;
    }

    const double shift = *std::max_element(exponent.begin(), exponent.end());
    RecoveredDensity out;
    out.grid = std::move(grid);
    out.anchor = x0;
    out.values.resize(out.grid.size());
    for (std::size_t i = 0; i < out.grid.size(); ++i) {
        out.values[i] = std::isinf(exponent[i]) ? 0.0 : std::exp(exponent[i] - shift) / tau[i];
    }
    // Trapezoid inside the grid; the gaps to finite domain ends take the end values.
    double mass = 0.0;
    for (std::size_t i = 1; i < out.grid.size(); ++i) {
        mass += 0.5 * (out.values[i] + out.values[i - 1]) * (out.grid[i] - out.grid[i - 1]);
    }
    if (std::isfinite(domain.lo)) mass += out.values.front() * (out.grid.front() - domain.lo);
    if (std::isfinite(domain.hi)) mass += out.values.back() * (domain.hi - out.grid.back());
    if (!(mass > 0.0) || !std::isfinite(mass)) throw NumericalError("recovered density has no mass");
    for (double& v : out.values) v /= mass;
    out.normalizer = std::exp(-shift) / mass;
    return out;
}

double stein_operator(const KernelFn& kernel, double m, const TestFunction& g, double x) {
    return kernel(x) * g.f_prime(x) + (m - x) * g.f(x);
}

}  // namespace steinkit
