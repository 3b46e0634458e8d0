#include "steinkit/corpus.hpp"
#include "steinkit/errors.hpp"
#include "steinkit/normal_approx.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

using namespace steinkit;

namespace {

double phi_cdf(double z) { return 0.5 * std::erfc(-z / std::numbers::sqrt2); }

// TV between U(0, 1) and N(1/2, 1/12). The normal density exceeds 1 on
// (1/2 - d, 1/2 + d) with d = s sqrt(-2 log(s sqrt(2 pi))), s = 1/sqrt(12).
double uniform_tv_closed_form() {
    const double s = 1.0 / std::sqrt(12.0);
    const double d = s * std::sqrt(-2.0 * std::log(s * std::sqrt(2.0 * std::numbers::pi)));
    const double inside = phi_cdf(0.5 / s) - phi_cdf(-0.5 / s);
    const double peak = phi_cdf(d / s) - phi_cdf(-d / s);
    return 1.0 - inside - 2.0 * d + peak;
}

}  // namespace

TEST(TotalVariation, NormalIsZero) {
    EXPECT_NEAR(tv_to_normal(corpus::normal()), 0.0, 1e-12);
    EXPECT_NEAR(tv_to_normal(corpus::normal(2.0, 0.5)), 0.0, 1e-12);
}

TEST(TotalVariation, RademacherIsOne) { EXPECT_NEAR(tv_to_normal(corpus::rademacher()), 1.0, 1e-12); }

TEST(TotalVariation, UniformAgainstErfClosedForm) {
    EXPECT_NEAR(tv_to_normal(corpus::uniform()), uniform_tv_closed_form(), 1e-10);
}

TEST(TotalVariation, DegenerateLawThrows) {
    EXPECT_THROW(tv_to_normal(corpus::single_atom()), NumericalError);
}

TEST(TotalVariation, AffineInvariant) {
    for (const auto& c : corpus::kernel_cases()) {
        const double base = tv_to_normal(c.spec);
        for (const auto& [scale, shift] : std::vector<std::pair<double, double>>{{3.0, -2.0}, {0.1, 5.0}}) {
            EXPECT_NEAR(tv_to_normal(affine_transform(c.spec, scale, shift)), base, 1e-7) << c.name;
        }
    }
}

TEST(Discrepancy, NormalIsAllZero) {
    const auto n = corpus::normal(1.0, 2.0);
    const auto d = discrepancy_bounds(n, stein_kernel(n, 64));
    EXPECT_NEAR(d.tv_exact, 0.0, 1e-12);
    EXPECT_NEAR(d.bound_l1, 0.0, 1e-12);
    EXPECT_NEAR(d.bound_sd, 0.0, 1e-12);
}

TEST(Discrepancy, UniformStandardDeviationBound) {
    const auto u = corpus::uniform();
    const auto d = discrepancy_bounds(u, stein_kernel(u, 64));
    EXPECT_NEAR(d.bound_sd, 2.0 * std::sqrt(1.0 / 720.0), 1e-10);
    EXPECT_NEAR(d.bound_sd, 0.07454, 1e-5);
    EXPECT_NEAR(d.scaled_sd, 12.0 * d.bound_sd, 1e-12);
}

TEST(Discrepancy, MixedExampleAnalyticValues) {
    // E|tau - 2/3| = 1/3 from the atoms plus 1/4 int (5/6 - t^2/2) dt = 1/3.
    const auto mx = corpus::mixed_example();
    const auto d = discrepancy_bounds(mx, stein_kernel(mx, 64));
    EXPECT_NEAR(d.bound_l1, 4.0 / 3.0, 1e-10);
    EXPECT_NEAR(d.bound_sd, 2.0 * std::sqrt(0.9 - 4.0 / 9.0), 1e-10);
    EXPECT_LE(d.bound_l1, d.bound_sd);
}

TEST(Discrepancy, ScaledSandwichOnCorpus) {
    for (const auto& c : corpus::kernel_cases()) {
        const auto d = discrepancy_bounds(c.spec, stein_kernel(c.spec, 64));
        EXPECT_GE(d.tv_exact, 0.0) << c.name;
        EXPECT_LE(d.tv_exact, 1.0) << c.name;
        EXPECT_LE(d.bound_l1, d.bound_sd + 1e-7) << c.name;
        EXPECT_LE(d.tv_exact, d.scaled_l1 + 1e-7) << c.name;
        EXPECT_LE(d.scaled_l1, d.scaled_sd + 1e-7) << c.name;
    }
}
