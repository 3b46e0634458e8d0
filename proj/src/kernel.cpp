#include "steinkit/kernel.hpp"

#include "steinkit/errors.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

namespace steinkit {

namespace {

bool is_atom(std::span<const double> sorted_atoms, double t) {
    return std::binary_search(sorted_atoms.begin(), sorted_atoms.end(), t);
}

bool on_cantor_set(const DistributionSpec& spec, double t) {
    const auto& c = spec.cantor();
    if (!c) return false;
    const auto& nodes = spec.cantor_nodes();
    if (std::binary_search(nodes.begin(), nodes.end(), t)) return true;
    return cantor::in_set((t - c->lo) / (c->hi - c->lo));
}

std::string describe(double x) {
    std::ostringstream s;
    s.precision(17);
    s << x;
    return s.str();
}

}  // namespace

std::string_view to_string(Verdict v) {
    switch (v) {
        case Verdict::exists: return "exists";
        case Verdict::not_exists: return "not_exists";
        case Verdict::degenerate: return "degenerate";
    }
    return "unknown";
}

std::string_view to_string(ExistenceReason r) {
    switch (r) {
        case ExistenceReason::ac_part_zero: return "ac_part_zero";
        case ExistenceReason::density_vanishes_on_subinterval: return "density_vanishes_on_subinterval";
        case ExistenceReason::purely_atomic: return "purely_atomic";
        case ExistenceReason::singular_mass_blocks_nothing: return "singular_mass_blocks_nothing";
    }
    return "unknown";
}

std::string_view to_string(KernelForm f) {
    switch (f) {
        case KernelForm::constant: return "constant";
        case KernelForm::linear: return "linear";
        case KernelForm::polynomial: return "polynomial";
        case KernelForm::custom: return "custom";
    }
    return "unknown";
}

ExistenceReport existence_check(const DistributionSpec& spec) {
    ExistenceReport report;
    const SupportInterval I = spec.support();
    if (spec.single_atom()) {
        report.verdict = Verdict::degenerate;
        report.reasons.push_back(ExistenceReason::purely_atomic);
        return report;
    }
    if (spec.ac_pieces().empty()) {
        report.verdict = Verdict::not_exists;
        report.reasons.push_back(ExistenceReason::ac_part_zero);
        if (spec.purely_atomic()) report.reasons.push_back(ExistenceReason::purely_atomic);
        report.failing_region = I;
        return report;
    }
    // Walk the merged positive set from essinf to esssup looking for gaps.
    double covered = I.lo;
    for (const auto& iv : spec.ac_positive_set()) {
        if (iv.lo > covered) {
            report.failing_region = SupportInterval{covered, iv.lo};
            break;
        }
        covered = std::max(covered, iv.hi);
    }
    if (!report.failing_region && covered < I.hi) report.failing_region = SupportInterval{covered, I.hi};
    if (report.failing_region) {
        report.verdict = Verdict::not_exists;
        report.reasons.push_back(ExistenceReason::density_vanishes_on_subinterval);
        return report;
    }
    report.verdict = Verdict::exists;
    if (spec.singular_mass() > 0.0) report.notes.push_back(ExistenceReason::singular_mass_blocks_nothing);
    return report;
}

double radon_nikodym_factor(const DistributionSpec& spec, double t) {
    for (const auto& atom : spec.atoms()) {
        if (atom.location == t) return 0.0;
    }
    if (on_cantor_set(spec, t)) return 0.0;
    return ac_density(spec, t) > 0.0 ? 1.0 : 0.0;
}

double nz_density(const DistributionSpec& spec, double t) {
    const double var = spec.moments().variance;
    if (!(var > 0.0)) throw NumericalError("non-zero-biased density undefined for a degenerate law");
    if (!spec.support().in_closed(t)) return 0.0;
    return std::max(0.0, partial_expectation(spec, t)) / var;
}

// ---- KernelFn -------------------------------------------------------------------

KernelFn::KernelFn(SupportInterval domain, KernelForm form, std::vector<double> coefficients,
                   std::vector<double> grid, std::vector<double> values,
                   std::vector<double> atom_zeros, Evaluator exact)
    : domain_(domain),
      form_(form),
      coefficients_(std::move(coefficients)),
      grid_(std::move(grid)),
      values_(std::move(values)),
      atom_zeros_(std::move(atom_zeros)),
      exact_(std::move(exact)) {
    if (grid_.size() != values_.size()) throw SpecError("kernel grid and values differ in length");
    for (std::size_t i = 1; i < grid_.size(); ++i) {
        if (!(grid_[i] > grid_[i - 1])) throw SpecError("kernel grid must be strictly increasing");
    }
    for (double v : values_) {
        if (!(v >= 0.0)) throw SpecError("kernel values must be non-negative");
    }
    std::sort(atom_zeros_.begin(), atom_zeros_.end());
}

KernelFn KernelFn::from_samples(SupportInterval domain, std::vector<double> grid,
                                std::vector<double> values, std::vector<double> atom_zeros) {
    return KernelFn(domain, KernelForm::custom, {}, std::move(grid), std::move(values),
                    std::move(atom_zeros), nullptr);
}

double KernelFn::operator()(double t) const {
    if (!domain_.in_open(t)) return 0.0;
    if (is_atom(atom_zeros_, t)) return 0.0;
    if (exact_) return std::max(0.0, exact_(t));
    return interpolate(t);
}

double KernelFn::interpolate(double t) const {
    if (grid_.empty()) return 0.0;
    if (t <= grid_.front()) return values_.front();
    if (t >= grid_.back()) return values_.back();
    auto it = std::upper_bound(grid_.begin(), grid_.end(), t);
    const std::size_t i = static_cast<std::size_t>(it - grid_.begin()) - 1;
    const double frac = (t - grid_[i]) / (grid_[i + 1] - grid_[i]);
    return values_[i] + frac * (values_[i + 1] - values_[i]);
}

std::vector<double> chebyshev_grid(double lo, double hi, int n) {
    std::vector<double> out(static_cast<std::size_t>(n));
    const double centre = 0.5 * (lo + hi);
    const double half = 0.5 * (hi - lo);
    for (int i = 0; i < n; ++i) {
        out[static_cast<std::size_t>(i)] =
            centre - half * std::cos(std::numbers::pi * (i + 0.5) / n);
    }
    return out;
}

KernelFn stein_kernel(const DistributionSpec& spec, int grid_size, const QuadratureConfig& cfg) {
    const ExistenceReport report = existence_check(spec);
    if (report.verdict != Verdict::exists) {
        std::string msg = "no Stein kernel exists (";
        for (std::size_t i = 0; i < report.reasons.size(); ++i) {
            if (i) msg += ", ";
            msg += to_string(report.reasons[i]);
        }
        msg += ")";
        throw ExistenceError(msg, report.verdict == Verdict::degenerate);
    }
    if (grid_size < 16) throw SpecError("kernel grid_size must be at least 16");

    const SupportInterval domain = spec.support();
    const SupportInterval span = truncated_support(spec, cfg);
    std::vector<double> atoms;
    for (const auto& a : spec.atoms()) atoms.push_back(a.location);

    std::vector<double> grid = chebyshev_grid(span.lo, span.hi, grid_size);
    std::erase_if(grid, [&](double t) { return std::binary_search(atoms.begin(), atoms.end(), t); });

    KernelForm form = KernelForm::custom;
    std::vector<double> coeffs;
    if (spec.pure_ac() && spec.ac_pieces().size() == 1) {
        const auto& fam = spec.ac_pieces().front().family;
        if (const auto* u = std::get_if<Uniform>(&fam)) {
            form = KernelForm::polynomial;
            coeffs = {-0.5 * u->lo * u->hi, 0.5 * (u->lo + u->hi), -0.5};
        } else if (const auto* n = std::get_if<Normal>(&fam)) {
            form = KernelForm::constant;
            coeffs = {n->sd * n->sd};
        } else if (const auto* e = std::get_if<Exponential>(&fam)) {
            form = KernelForm::linear;
            coeffs = {-e->loc / e->rate, 1.0 / e->rate};
        }
    }

    KernelFn::Evaluator exact;
    if (form != KernelForm::custom) {
        exact = [coeffs](double t) {
            double acc = 0.0;
            for (auto it = coeffs.rbegin(); it != coeffs.rend(); ++it) acc = acc * t + *it;
            return acc;
        };
    } else {
        auto shared = std::make_shared<const DistributionSpec>(spec);
        exact = [shared](double t) {
            if (on_cantor_set(*shared, t)) return 0.0;
            const double p = ac_density(*shared, t);
            if (!(p > 0.0)) return 0.0;
            return partial_expectation(*shared, t) / p;
        };
    }

    std::vector<double> values;
    values.reserve(grid.size());
    for (double t : grid) {
        if (form == KernelForm::custom && ac_density(spec, t) < 1e-300) {
            throw NumericalError("AC density underflows at t = " + describe(t));
        }
        values.push_back(domain.in_open(t) ? std::max(0.0, exact(t)) : 0.0);
    }
    KernelFn out(domain, form, std::move(coeffs), std::move(grid), std::move(values), std::move(atoms),
                 std::move(exact));
    if (const auto& c = spec.cantor()) out.set_cantor_zeros({c->lo, c->hi});
    return out;
}

// ---- test functions and certification -----------------------------------------

std::vector<TestFunction> standard_test_functions(const SupportInterval& range) {
    const double r = std::max(std::abs(range.lo), std::abs(range.hi));
    return {
        {"x", [](double x) { return x; }, [](double) { return 1.0; }, 1.0},
        {"x^2", [](double x) { return x * x; }, [](double x) { return 2.0 * x; }, 2.0 * r},
        {"x^3", [](double x) { return x * x * x; }, [](double x) { return 3.0 * x * x; }, 3.0 * r * r},
        {"sin", [](double x) { return std::sin(x); }, [](double x) { return std::cos(x); }, 1.0},
        {"cos", [](double x) { return std::cos(x); }, [](double x) { return -std::sin(x); }, 1.0},
        {"tanh", [](double x) { return std::tanh(x); },
         [](double x) {
             const double c = std::cosh(x);
             return std::isinf(c) ? 0.0 : 1.0 / (c * c);
         },
         1.0},
        {"arctan", [](double x) { return std::atan(x); }, [](double x) { return 1.0 / (1.0 + x * x); },
         1.0},
    };
}

double stein_residual(const DistributionSpec& spec, const KernelFn& kernel, const TestFunction& tf,
                      const QuadratureConfig& cfg) {
    const double m = spec.moments().mean;
    return expect(spec,
                  [&](double x) { return kernel(x) * tf.f_prime(x) - (x - m) * tf.f(x); }, cfg);
}

KernelStats kernel_stats(const DistributionSpec& spec, const KernelFn& kernel,
                         const QuadratureConfig& cfg) {
    const double mean = expect(spec, [&](double x) { return kernel(x); }, cfg);
    const double var = expect(spec,
                              [&](double x) {
                                  const double d = kernel(x) - mean;
                                  return d * d;
                              },
                              cfg);
    return {mean, var};
}

DiscreteWitness discrete_witness(const DistributionSpec& spec) {
    if (!spec.purely_atomic()) throw SpecError("discrete witness needs a purely atomic law");
    const auto& atoms = spec.atoms();
    const Eigen::Index k = static_cast<Eigen::Index>(atoms.size());
    const double m = spec.moments().mean;

    // Row j-1 tests f(x) = x^j: sum_i p_i tau_i j x_i^(j-1) = sum_i p_i (x_i - m) x_i^j.
    Eigen::MatrixXd A(k + 1, k);
    Eigen::VectorXd b = Eigen::VectorXd::Zero(k + 1);
    for (Eigen::Index j = 1; j <= k + 1; ++j) {
        for (Eigen::Index i = 0; i < k; ++i) {
            const double x = atoms[static_cast<std::size_t>(i)].location;
            const double p = atoms[static_cast<std::size_t>(i)].mass;
            A(j - 1, i) = p * static_cast<double>(j) * std::pow(x, static_cast<double>(j - 1));
            b(j - 1) += p * (x - m) * std::pow(x, static_cast<double>(j));
        }
    }
    const Eigen::VectorXd tau = A.completeOrthogonalDecomposition().solve(b);

    DiscreteWitness w;
    for (const auto& a : atoms) w.locations.push_back(a.location);
    w.assignment.assign(tau.data(), tau.data() + tau.size());
    w.residual_norm = (A * tau - b).norm();
    w.feasible = w.residual_norm <= 1e-10 * std::max(1.0, b.norm());

    if (k == 2 && atoms[0].location == -atoms[1].location && atoms[0].mass == atoms[1].mass) {
        // Both rows are multiples of tau(x1) + tau(x2).
        w.implied_values = std::array<double, 2>{b(0) / A(0, 0), b(2) / A(2, 0)};
    }
    return w;
}

double nz_measure(const DistributionSpec& spec, double u, double v, const QuadratureConfig& cfg) {
    const auto [m, var] = spec.moments();
    if (!(var > 0.0)) throw NumericalError("non-zero-biased law undefined for a degenerate law");
    const double width = v - u;
    auto g = [&](double x) { return (x - m) * std::clamp(x - u, 0.0, width); };
    const double kinks[] = {u, v};
    return (expect_ac(spec, g, cfg, kinks).value + expect_singular(spec, g)) / var;
}

double tau_measure(const DistributionSpec& spec, const KernelFn& kernel, double u, double v,
                   const QuadratureConfig& cfg) {
    const double var = spec.moments().variance;
    double acc = 0.0;
    const double lo = std::max(u, spec.support().lo);
    const double hi = std::min(v, spec.support().hi);
    if (lo < hi && !spec.ac_pieces().empty()) {
        const auto cuts = make_partition(spec.breakpoints(), lo, hi);
        acc += integrate([&](double t) {
            const double p = ac_density(spec, t);
            return p == 0.0 ? 0.0 : kernel(t) * p;
        },
                         cuts, cfg)
                   .value;
    }
    acc += expect_singular(spec, [&](double t) { return (t >= u && t <= v) ? kernel(t) : 0.0; });
    return acc / var;
}

double zero_set_mass(const DistributionSpec& spec, const KernelFn& kernel) {
    auto indicator = [&](double t) { return kernel(t) == 0.0 ? 1.0 : 0.0; };
    return expect_singular(spec, indicator) + expect_ac(spec, indicator, QuadratureConfig{}).value;
}

}  // namespace steinkit
