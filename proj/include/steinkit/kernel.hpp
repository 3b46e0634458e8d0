#pragma once

#include "steinkit/distribution.hpp"
#include "steinkit/quadrature.hpp"

#include <array>
#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace steinkit {

enum class Verdict { exists, not_exists, degenerate };

enum class ExistenceReason {
    ac_part_zero,
    density_vanishes_on_subinterval,
    purely_atomic,
    singular_mass_blocks_nothing,
};

struct ExistenceReport {
    Verdict verdict = Verdict::exists;
    // Empty whenever verdict == exists.
    std::vector<ExistenceReason> reasons;
    // First open sub-interval of I on which the AC density vanishes.
    std::optional<SupportInterval> failing_region;
    // Informational only; may be non-empty for any verdict.
    std::vector<ExistenceReason> notes;
};

std::string_view to_string(Verdict v);
std::string_view to_string(ExistenceReason r);

/// A kernel exists iff the mixture AC density is positive Lebesgue-a.e. on
/// I = (essinf, esssup). Decided from the union of AC piece supports.
ExistenceReport existence_check(const DistributionSpec& spec);

/// Density of mu_ac with respect to mu: 0 at atoms and on the Cantor set,
/// 1 where the AC density is positive, 0 elsewhere.
double radon_nikodym_factor(const DistributionSpec& spec, double t);

/// Density of the non-zero-biased law: partial_expectation / variance,
/// zero off the closed support. Throws NumericalError for degenerate laws.
double nz_density(const DistributionSpec& spec, double t);

enum class KernelForm { constant, linear, polynomial, custom };

std::string_view to_string(KernelForm f);

/// A Stein kernel in the canonical version: zero off the open support, zero
/// at every atom and on the Cantor set. Closed forms carry polynomial
/// coefficients; every kernel also carries samples on a grid for export.
class KernelFn {
  public:
    using Evaluator = std::function<double(double)>;

    KernelFn(SupportInterval domain, KernelForm form, std::vector<double> coefficients,
             std::vector<double> grid, std::vector<double> values, std::vector<double> atom_zeros,
             Evaluator exact);

    /// Kernel known only through samples (e.g. read back from CSV); evaluated
    /// by linear interpolation between grid points.
    static KernelFn from_samples(SupportInterval domain, std::vector<double> grid,
                                 std::vector<double> values, std::vector<double> atom_zeros);

    double operator()(double t) const;

    const SupportInterval& domain() const { return domain_; }
    KernelForm form() const { return form_; }
    bool closed_form() const { return form_ != KernelForm::custom; }
    /// Ascending polynomial coefficients in t for closed forms.
    std::span<const double> coefficients() const { return coefficients_; }
    std::span<const double> grid() const { return grid_; }
    std::span<const double> values() const { return values_; }
    std::span<const double> atom_zeros() const { return atom_zeros_; }
    /// Hull of a Cantor set on which the kernel vanishes, if any.
    const std::optional<SupportInterval>& cantor_zeros() const { return cantor_zeros_; }
    void set_cantor_zeros(SupportInterval hull) { cantor_zeros_ = hull; }

  private:
    double interpolate(double t) const;

    SupportInterval domain_;
    KernelForm form_;
    std::vector<double> coefficients_;
    std::vector<double> grid_;
    std::vector<double> values_;
    std::vector<double> atom_zeros_;
    std::optional<SupportInterval> cantor_zeros_;
    Evaluator exact_;
};

/// n points clustered towards both ends of (lo, hi), strictly inside it.
std::vector<double> chebyshev_grid(double lo, double hi, int n);

/// Builds the kernel sigma^2 q h / p. Single uniform / normal / exponential
/// laws get their closed forms. Throws ExistenceError when no kernel exists.
KernelFn stein_kernel(const DistributionSpec& spec, int grid_size,
                      const QuadratureConfig& cfg = {});

struct TestFunction {
    std::string id;
    std::function<double(double)> f;
    std::function<double(double)> f_prime;
    double derivative_bound = 0.0;
};

/// x, x^2, x^3, sin, cos, tanh, arctan; derivative bounds taken over `range`.
std::vector<TestFunction> standard_test_functions(const SupportInterval& range);

/// E[tau(X) f'(X)] - E[(X - m) f(X)].
double stein_residual(const DistributionSpec& spec, const KernelFn& kernel, const TestFunction& tf,
                      const QuadratureConfig& cfg = {});

struct KernelStats {
    double mean_tau = 0.0;
    double var_tau = 0.0;
};

KernelStats kernel_stats(const DistributionSpec& spec, const KernelFn& kernel,
                         const QuadratureConfig& cfg = {});

/// Outcome of testing the Stein identity on a purely atomic law with the
/// monomials x, x^2, ..., x^(k+1).
struct DiscreteWitness {
    bool feasible = false;
    std::vector<double> locations;
    // Least-squares values for tau at the atoms.
    std::vector<double> assignment;
    double residual_norm = 0.0;
    std::array<std::string, 2> functions{"x", "x^3"};
    // For two atoms symmetric about 0 with equal masses: the values that
    // f = x and f = x^3 each force on tau(x1) + tau(x2).
    std::optional<std::array<double, 2>> implied_values;
};

DiscreteWitness discrete_witness(const DistributionSpec& spec);

/// mu^nz([u, v]) from the defining identity with f(x) = clamp(x - u, 0, v - u).
double nz_measure(const DistributionSpec& spec, double u, double v, const QuadratureConfig& cfg = {});

/// sigma^-2 times the integral of tau over [u, v] with respect to mu.
double tau_measure(const DistributionSpec& spec, const KernelFn& kernel, double u, double v,
                   const QuadratureConfig& cfg = {});

/// mu({tau = 0}).
double zero_set_mass(const DistributionSpec& spec, const KernelFn& kernel);

}  // namespace steinkit
