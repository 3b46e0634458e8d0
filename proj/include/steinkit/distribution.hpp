#pragma once

#include "steinkit/quadrature.hpp"

#include <filesystem>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace steinkit {

struct Uniform {
    double lo = 0.0;
    double hi = 1.0;
};

struct Normal {
    double mean = 0.0;
    double sd = 1.0;
};

/// rate * exp(-rate * (x - loc)) on [loc, inf).
struct Exponential {
    double rate = 1.0;
    double loc = 0.0;
};

/// Piecewise-linear density through (grid[i], values[i]), zero outside the
/// grid. Values are renormalised at construction so the density has unit mass.
class Tabulated {
  public:
    Tabulated(std::vector<double> grid, std::vector<double> values);

    const std::vector<double>& grid() const { return grid_; }
    const std::vector<double>& values() const { return values_; }

    double density(double t) const;
    double cdf(double t) const;
    double mean() const { return mean_; }
    double variance() const { return variance_; }

    /// Integral of (x - c) p(x) over [t, inf) and over (-inf, t].
    double upper_partial(double t, double c) const;
    double lower_partial(double t, double c) const;

  private:
    std::size_t segment(double t) const;
    double segment_integral(std::size_t i, double a, double b, double c) const;

    std::vector<double> grid_;
    std::vector<double> values_;
    // suffix_mass_[i] = mass on [grid_[i], end]; suffix_moment_[i] = int x p there.
    std::vector<double> suffix_mass_;
    std::vector<double> suffix_moment_;
    double mean_ = 0.0;
    double variance_ = 0.0;
};

using AcFamily = std::variant<Uniform, Normal, Exponential, Tabulated>;

struct AcPiece {
    AcFamily family;
    double weight = 1.0;
};

struct Atom {
    double location = 0.0;
    double mass = 1.0;
};

/// Standard Cantor law pushed forward to [lo, hi].
struct CantorPart {
    double lo = 0.0;
    double hi = 1.0;
    double weight = 1.0;
};

struct Moments {
    double mean = 0.0;
    double variance = 0.0;
};

/// Closed interval [lo, hi] with possibly infinite ends. For a law this is
/// [essinf, esssup]; the open interval (lo, hi) is where kernels live.
struct SupportInterval {
    double lo = 0.0;
    double hi = 0.0;

    bool degenerate() const { return lo == hi; }
    bool in_open(double t) const { return t > lo && t < hi; }
    bool in_closed(double t) const { return t >= lo && t <= hi; }
};

/// A univariate law given by its Lebesgue decomposition: a finite mixture of
/// absolutely continuous pieces, atoms and at most one Cantor-type part.
/// Immutable after construction; all invariants are checked there.
class DistributionSpec {
  public:
    DistributionSpec(std::vector<AcPiece> ac, std::vector<Atom> atoms,
                     std::optional<CantorPart> cantor = std::nullopt);

    const std::vector<AcPiece>& ac_pieces() const { return ac_; }
    const std::vector<Atom>& atoms() const { return atoms_; }
    const std::optional<CantorPart>& cantor() const { return cantor_; }

    double ac_weight() const { return ac_weight_; }
    double singular_mass() const { return 1.0 - ac_weight_; }
    bool pure_ac() const { return atoms_.empty() && !cantor_; }
    bool purely_atomic() const { return ac_.empty() && !cantor_; }
    bool single_atom() const { return purely_atomic() && atoms_.size() == 1; }

    const Moments& moments() const { return moments_; }
    const SupportInterval& support() const { return support_; }

    /// Merged closed intervals on which the mixture AC density is positive
    /// (up to isolated zeros).
    const std::vector<SupportInterval>& ac_positive_set() const { return ac_positive_; }

    /// Points where the AC density or its derivative may jump, atom locations,
    /// and Cantor construction endpoints; used to split quadratures.
    const std::vector<double>& breakpoints() const { return breakpoints_; }

    /// Sorted nodes of the rule used for expectations under the Cantor part
    /// (empty without one). Every node is treated as a point of the Cantor set.
    const std::vector<double>& cantor_nodes() const { return cantor_nodes_; }

  private:
    std::vector<AcPiece> ac_;
    std::vector<Atom> atoms_;
    std::optional<CantorPart> cantor_;
    double ac_weight_ = 0.0;
    Moments moments_;
    SupportInterval support_;
    std::vector<SupportInterval> ac_positive_;
    std::vector<double> breakpoints_;
    std::vector<double> cantor_nodes_;
};

DistributionSpec parse_spec(std::string_view json_text);
DistributionSpec load_spec(const std::filesystem::path& path);
std::string to_json(const DistributionSpec& spec);

Moments moments(const DistributionSpec& spec);
SupportInterval support(const DistributionSpec& spec);

/// Weighted sum of the AC piece densities at t.
double ac_density(const DistributionSpec& spec, double t);

/// P(X <= t) for the whole law.
double cdf(const DistributionSpec& spec, double t);

/// Smallest t with cdf(t) >= prob, located by bisection.
double quantile(const DistributionSpec& spec, double prob);

/// E[(X - m) 1{X >= t}].
double partial_expectation(const DistributionSpec& spec, double t);

/// The support with infinite ends replaced by the tail_quantile and
/// 1 - tail_quantile quantiles.
SupportInterval truncated_support(const DistributionSpec& spec, const QuadratureConfig& cfg);

/// Integral of g(t) p(t) dt over the AC part. `extra_cuts` adds panel
/// boundaries where g itself has kinks.
QuadratureResult expect_ac(const DistributionSpec& spec, const Integrand& g,
                           const QuadratureConfig& cfg, std::span<const double> extra_cuts = {});

/// Sum of mass * g over atoms plus the Cantor part's expectation of g.
double expect_singular(const DistributionSpec& spec, const Integrand& g);

/// E[g(X)] under the full law.
double expect(const DistributionSpec& spec, const Integrand& g, const QuadratureConfig& cfg);

/// Law of scale * X + shift. Reflecting an exponential piece is not
/// representable and throws SpecError.
DistributionSpec affine_transform(const DistributionSpec& spec, double scale, double shift);

namespace cantor {

/// Upper tail of the standard Cantor law C on [0, 1]:
/// prob = P(C >= s), moment = E[C 1{C >= s}].
struct Tail {
    double prob = 0.0;
    double moment = 0.0;
};

Tail upper_tail(double s);

/// Nodes of the expectation rule mapped to [lo, hi], sorted: both endpoints
/// of every level-12 construction interval, each with equal weight.
std::vector<double> rule_nodes(double lo, double hi);

/// E[g(C)] for the standard Cantor law C, with nodes on the Cantor set.
double expectation(const std::function<double(double)>& g);

/// True when s lies on the standard Cantor set (checked to 64 ternary digits).
bool in_set(double s);

/// Endpoints of the 2^depth construction intervals on [lo, hi].
std::vector<double> construction_points(double lo, double hi, int depth);

}  // namespace cantor

}  // namespace steinkit
