#include "steinkit/corpus.hpp"

#include "steinkit/errors.hpp"
#include "steinkit/io.hpp"
#include "steinkit/normal_approx.hpp"

#include <algorithm>
#include <cmath>

namespace steinkit::corpus {

namespace {

constexpr double kMomentTol = 1e-7;
constexpr double kResidualTol = 1e-6;
constexpr double kOrderTol = 1e-7;
constexpr int kGrid = 256;

DistributionSpec ac_only(std::vector<AcPiece> pieces) { return DistributionSpec(std::move(pieces), {}); }

DistributionSpec triangle() {
    return ac_only({{Tabulated({-1.0, 0.0, 1.0}, {0.0, 1.0, 0.0}), 1.0}});
}

}  // namespace

DistributionSpec mixed_example() {
    return DistributionSpec({{Uniform{-1.0, 1.0}, 0.5}}, {{-1.0, 0.25}, {1.0, 0.25}});
}

DistributionSpec two_bump() {
    return ac_only({{Uniform{-2.0, -1.0}, 0.5}, {Uniform{1.0, 2.0}, 0.5}});
}

DistributionSpec rademacher() { return DistributionSpec({}, {{-1.0, 0.5}, {1.0, 0.5}}); }

DistributionSpec cantor_only() { return DistributionSpec({}, {}, CantorPart{0.0, 1.0, 1.0}); }

DistributionSpec single_atom(double c) { return DistributionSpec({}, {{c, 1.0}}); }

DistributionSpec rational_cover() {
    const double centres[] = {0.0, 1.0, -1.0, 0.5, -0.5, 2.0, -2.0, 1.0 / 3.0};
    std::vector<AcPiece> pieces;
    double total = 0.0;
    for (int n = 1; n <= 8; ++n) total += std::ldexp(1.0, 1 - n);
    for (int n = 1; n <= 8; ++n) {
        const double r = std::ldexp(1.0, -n);
        pieces.push_back({Uniform{centres[n - 1] - r, centres[n - 1] + r}, 2.0 * r / total});
    }
    return ac_only(std::move(pieces));
}

DistributionSpec uniform(double lo, double hi) { return ac_only({{Uniform{lo, hi}, 1.0}}); }

DistributionSpec normal(double mean, double sd) { return ac_only({{Normal{mean, sd}, 1.0}}); }

DistributionSpec exponential(double rate) { return ac_only({{Exponential{rate, 0.0}, 1.0}}); }

std::vector<Case> kernel_cases() {
    std::vector<Case> out;
    auto add = [&](std::string name, DistributionSpec spec) {
        out.push_back({std::move(name), std::move(spec), Verdict::exists});
    };
    add("mixed_atoms_uniform", mixed_example());
    add("uniform_0_1", uniform());
    add("normal_0_1", normal());
    add("normal_2_0.5", normal(2.0, 0.5));
    add("exponential_1", exponential(1.0));
    add("exponential_2.5", exponential(2.5));
    add("uniform_normal_mix", ac_only({{Uniform{-1.0, 1.0}, 0.5}, {Normal{0.0, 1.0}, 0.5}}));
    add("tabulated_triangle", triangle());
    add("adjacent_uniforms", ac_only({{Uniform{0.0, 1.0}, 0.5}, {Uniform{1.0, 3.0}, 0.5}}));
    add("uniform_cantor_atom",
        DistributionSpec({{Uniform{0.0, 1.0}, 0.6}}, {{0.5, 0.15}}, CantorPart{0.0, 1.0, 0.25}));
    add("normal_with_atom", DistributionSpec({{Normal{0.0, 1.0}, 0.7}}, {{0.5, 0.3}}));
    add("exponential_uniform_mix", ac_only({{Exponential{1.0, 0.0}, 0.5}, {Uniform{0.0, 2.0}, 0.5}}));
    return out;
}

std::vector<Case> gate_cases() {
    std::vector<Case> out;
    out.push_back({"two_bump", two_bump(), Verdict::not_exists});
    out.push_back({"rademacher", rademacher(), Verdict::not_exists});
    out.push_back({"cantor_only", cantor_only(), Verdict::not_exists});
    out.push_back({"single_atom", single_atom(0.0), Verdict::degenerate});
    out.push_back({"rational_cover_8", rational_cover(), Verdict::not_exists});
    out.push_back({"uniform_plus_far_atom",
                   DistributionSpec({{Uniform{0.0, 1.0}, 0.9}}, {{3.0, 0.1}}), Verdict::not_exists});
    return out;
}

std::vector<Case> all_cases() {
    auto out = kernel_cases();
    auto gates = gate_cases();
    std::move(gates.begin(), gates.end(), std::back_inserter(out));
    return out;
}

std::vector<Row> run(const QuadratureConfig& cfg) {
    std::vector<Row> rows;
    for (const auto& c : all_cases()) {
        const ExistenceReport report = existence_check(c.spec);
        rows.push_back({c.name, "verdict", report.verdict == c.expected,
                        std::string(to_string(report.verdict))});
        if (report.verdict != Verdict::exists) continue;
        try {
            const KernelFn kernel = stein_kernel(c.spec, kGrid, cfg);
            const double var = c.spec.moments().variance;
            const KernelStats stats = kernel_stats(c.spec, kernel, cfg);
            const double moment_gap = std::abs(stats.mean_tau - var);
            rows.push_back({c.name, "mean_tau", moment_gap < kMomentTol,
                            "|E tau - var| = " + io::format_double(moment_gap)});

            double worst = 0.0;
            for (const auto& tf : standard_test_functions(truncated_support(c.spec, cfg))) {
                worst = std::max(worst, std::abs(stein_residual(c.spec, kernel, tf, cfg)));
            }
            rows.push_back({c.name, "stein_residual", worst < kResidualTol,
                            "max |residual| = " + io::format_double(worst)});

            const DiscrepancyReport d = discrepancy_bounds(c.spec, kernel, cfg);
            const bool ordered =
                d.tv_exact <= d.scaled_l1 + kOrderTol && d.scaled_l1 <= d.scaled_sd + kOrderTol;
            rows.push_back({c.name, "scaled_sandwich", ordered,
                            "tv " + io::format_double(d.tv_exact) + " <= l1/var " +
                                io::format_double(d.scaled_l1) + " <= sd/var " +
                                io::format_double(d.scaled_sd)});
        } catch (const std::exception& e) {
            rows.push_back({c.name, "numerics", false, e.what()});
        }
    }
    return rows;
}

std::string format_table(const std::vector<Row>& rows) {
    std::size_t name_w = 4;
    std::size_t check_w = 5;
    for (const auto& r : rows) {
        name_w = std::max(name_w, r.name.size());
        check_w = std::max(check_w, r.check.size());
    }
    auto pad = [](std::string s, std::size_t w) {
        s.resize(std::max(w, s.size()), ' ');
        return s;
    };
    std::string out = pad("case", name_w) + "  " + pad("check", check_w) + "  result  detail\n";
    for (const auto& r : rows) {
        out += pad(r.name, name_w) + "  " + pad(r.check, check_w) + "  " +
               (r.passed ? "PASS  " : "FAIL  ") + "  " + r.detail + "\n";
    }
    return out;
}

}  // namespace steinkit::corpus
