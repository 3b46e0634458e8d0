#include "steinkit/clt.hpp"

#include "steinkit/errors.hpp"
#include "steinkit/kernel.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <memory>
#include <mutex>
#include <numbers>
#include <string>

namespace steinkit {

namespace {

// FFTW's planner is not re-entrant.
std::mutex& planner_mutex() {
    static std::mutex m;
    return m;
}

struct FftwFree {
    void operator()(void* p) const { fftw_free(p); }
};

template <class T>
using FftwBuffer = std::unique_ptr<T[], FftwFree>;

struct PlanDeleter {
    void operator()(fftw_plan p) const {
        std::lock_guard lock(planner_mutex());
        fftw_destroy_plan(p);
    }
};
using Plan = std::unique_ptr<std::remove_pointer_t<fftw_plan>, PlanDeleter>;

std::complex<double> int_power(std::complex<double> z, int n) {
    std::complex<double> acc(1.0, 0.0);
    while (n > 0) {
        if (n & 1) acc *= z;
        z *= z;
        n >>= 1;
    }
    return acc;
}

double std_normal_pdf(double z) { return std::exp(-0.5 * z * z) / std::sqrt(2.0 * std::numbers::pi); }
double std_normal_cdf(double z) { return 0.5 * std::erfc(-z / std::numbers::sqrt2); }

bool is_power_of_two(int n) { return n > 0 && (n & (n - 1)) == 0; }

constexpr int kMinCells = 32;

// Cells per summand that fit n-fold into the array outside the guard band.
int cells_per_summand(int n, int grid_size) {
    const int usable = grid_size - grid_size / 8;
    return (usable - 1) / n + 1;
}

// TV on one lattice. Throws NumericalError on wrap-around or too few cells.
double lattice_tv(const DistributionSpec& spec, int n, int grid_size, const QuadratureConfig& cfg) {
    const SupportInterval span = truncated_support(spec, cfg);
    const int cells = cells_per_summand(n, grid_size);
    if (cells < kMinCells) {
        throw NumericalError("grid of " + std::to_string(grid_size) + " points is too small for n = " +
                             std::to_string(n));
    }
    const double h = (span.hi - span.lo) / cells;

    // Exact cell masses; the cell [lo + k h, lo + (k + 1) h] is represented
    // by its centre.
    std::vector<double> mass(static_cast<std::size_t>(cells));
    double prev = cdf(spec, span.lo);
    double total = 0.0;
    for (int k = 0; k < cells; ++k) {
        const double next = cdf(spec, span.lo + (k + 1) * h);
        mass[static_cast<std::size_t>(k)] = std::max(0.0, next - prev);
        total += mass[static_cast<std::size_t>(k)];
        prev = next;
    }
    double mean = 0.0;
    for (int k = 0; k < cells; ++k) {
        mass[static_cast<std::size_t>(k)] /= total;
        mean += mass[static_cast<std::size_t>(k)] * (span.lo + (k + 0.5) * h);
    }
    double var = 0.0;
    for (int k = 0; k < cells; ++k) {
        const double d = span.lo + (k + 0.5) * h - mean;
        var += mass[static_cast<std::size_t>(k)] * d * d;
    }

    const int bins = grid_size / 2 + 1;
    FftwBuffer<double> real(static_cast<double*>(fftw_malloc(sizeof(double) * grid_size)));
    FftwBuffer<fftw_complex> freq(
        static_cast<fftw_complex*>(fftw_malloc(sizeof(fftw_complex) * bins)));
    Plan forward;
    Plan backward;
    {
        std::lock_guard lock(planner_mutex());
        forward.reset(fftw_plan_dft_r2c_1d(grid_size, real.get(), freq.get(), FFTW_ESTIMATE));
        backward.reset(fftw_plan_dft_c2r_1d(grid_size, freq.get(), real.get(), FFTW_ESTIMATE));
    }
    std::fill(real.get(), real.get() + grid_size, 0.0);
    std::copy(mass.begin(), mass.end(), real.get());
    fftw_execute(forward.get());
    for (int i = 0; i < bins; ++i) {
        const auto z = int_power({freq[i][0], freq[i][1]}, n);
        freq[i][0] = z.real();
        freq[i][1] = z.imag();
    }
    fftw_execute(backward.get());

    const int last = n * (cells - 1);
    double spill = 0.0;
    for (int j = last + 1; j < grid_size; ++j) spill += std::abs(real[j] / grid_size);
    if (spill > cfg.abs_tol) {
        throw NumericalError("cyclic wrap-around detected (tail mass " + std::to_string(spill) +
                             "); increase grid_size");
    }

    // Standardise with the lattice's own moments so the rounding to cell
    // centres does not show up as a spurious shift or scale.
    const double scale = std::sqrt(n * var);
    const double dz = h / scale;
    const double z0 = (n * (span.lo + 0.5 * h) - n * mean) / scale;
    double integral = 0.0;
    double prev_gap = 0.0;
    for (int j = 0; j <= last; ++j) {
        const double z = z0 + j * dz;
        const double f = real[j] / grid_size / dz;
        const double gap = std::abs(f - std_normal_pdf(z));
        if (j > 0) integral += 0.5 * (gap + prev_gap) * dz;
        prev_gap = gap;
    }
    const double z_last = z0 + last * dz;
    integral += std_normal_cdf(z0) + std_normal_cdf(-z_last);
    return std::min(1.0, 0.5 * integral);
}

}  // namespace

double clt_bound(const DistributionSpec& spec, int n, const QuadratureConfig& cfg) {
    if (n < 1) throw SpecError("n must be at least 1");
    const KernelFn kernel = stein_kernel(spec, 64, cfg);
    const KernelStats stats = kernel_stats(spec, kernel, cfg);
    const double var = spec.moments().variance;
    const double denom = var * std::sqrt(static_cast<double>(n));
    return 2.0 * std::sqrt(stats.var_tau) / denom;
}

ConvolutionTv convolution_tv(const DistributionSpec& spec, int n, int grid_size,
                             const QuadratureConfig& cfg) {
    if (!spec.pure_ac()) throw SpecError("exact convolution needs a law without singular mass");
    if (n < 1) throw SpecError("n must be at least 1");
    if (grid_size < 1024 || !is_power_of_two(grid_size)) {
        throw SpecError("grid_size must be a power of two >= 1024");
    }
    ConvolutionTv out;
    out.tv = lattice_tv(spec, n, grid_size, cfg);
    if (cells_per_summand(n, grid_size / 2) >= kMinCells) {
        out.discretization_error = std::abs(out.tv - lattice_tv(spec, n, grid_size / 2, cfg));
    } else {
        out.discretization_error = std::numeric_limits<double>::infinity();
    }
    return out;
}

double loglog_slope(std::span<const double> xs, std::span<const double> ys) {
    if (xs.size() != ys.size() || xs.size() < 2) throw SpecError("slope fit needs matching series");
    double mx = 0.0;
    double my = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        if (!(xs[i] > 0.0) || !(ys[i] > 0.0)) {
            throw NumericalError("log-log fit needs positive values");
        }
        mx += std::log(xs[i]);
        my += std::log(ys[i]);
    }
    mx /= static_cast<double>(xs.size());
    my /= static_cast<double>(xs.size());
    double sxy = 0.0;
    double sxx = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        const double dx = std::log(xs[i]) - mx;
        sxy += dx * (std::log(ys[i]) - my);
        sxx += dx * dx;
    }
    return sxy / sxx;
}

RateFit rate_fit(const CltCurve& curve) {
    if (curve.ns.size() < 3) throw SpecError("rate fit needs at least 3 values of n");
    const auto [lo, hi] = std::minmax_element(curve.ns.begin(), curve.ns.end());
    if (*hi < 8 * *lo) throw SpecError("rate fit needs n values spanning a factor of 8");

    std::vector<double> xs(curve.ns.begin(), curve.ns.end());
    RateFit fit;
    fit.slope_bound = loglog_slope(xs, curve.bounds);
    const bool have_all = std::all_of(curve.empirical.begin(), curve.empirical.end(),
                                      [](const auto& v) { return v.has_value(); });
    if (have_all && curve.empirical.size() == xs.size()) {
        std::vector<double> ys;
        for (const auto& v : curve.empirical) ys.push_back(*v);
        fit.slope_empirical = loglog_slope(xs, ys);
    }
    return fit;
}

CltCurve clt_curve(const DistributionSpec& spec, std::span<const int> ns, int grid_size,
                   const QuadratureConfig& cfg) {
    const KernelFn kernel = stein_kernel(spec, 64, cfg);
    const double var_tau = kernel_stats(spec, kernel, cfg).var_tau;
    const double var = spec.moments().variance;

    CltCurve curve;
    for (int n : ns) {
        if (n < 1) throw SpecError("n must be at least 1");
        curve.ns.push_back(n);
        curve.bounds.push_back(2.0 * std::sqrt(var_tau) / (var * std::sqrt(static_cast<double>(n))));
        if (spec.pure_ac()) {
            try {
                const auto conv = convolution_tv(spec, n, grid_size, cfg);
                curve.empirical.emplace_back(conv.tv);
                curve.empirical_error.emplace_back(conv.discretization_error);
            } catch (const NumericalError& e) {
                curve.warnings.push_back("n = " + std::to_string(n) + ": " + e.what());
                curve.empirical.emplace_back(std::nullopt);
                curve.empirical_error.emplace_back(std::nullopt);
            }
        } else {
            curve.empirical.emplace_back(std::nullopt);
            curve.empirical_error.emplace_back(std::nullopt);
        }
    }
    try {
        const RateFit fit = rate_fit(curve);
        curve.slope_bound = fit.slope_bound;
        curve.slope_empirical = fit.slope_empirical;
    } catch (const SpecError&) {
        // Too few n values for a fit; slopes stay empty.
    } catch (const NumericalError&) {
        // Zero bound or zero distance (normal laws); no slope to report.
    }
    return curve;
}

}  // namespace steinkit
