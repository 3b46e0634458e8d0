#include "steinkit/clt.hpp"
#include "steinkit/corpus.hpp"
#include "steinkit/errors.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/special_functions/gamma.hpp>
#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

using namespace steinkit;

namespace {

constexpr int kGrid = 1 << 16;

double phi(double z) { return std::exp(-0.5 * z * z) / std::sqrt(2.0 * std::numbers::pi); }
double phi_cdf(double z) { return 0.5 * std::erfc(-z / std::numbers::sqrt2); }

double gk(const std::function<double(double)>& f, double a, double b) {
    return boost::math::quadrature::gauss_kronrod<double, 61>::integrate(f, a, b, 15, 1e-13);
}

// d_TV between the standardised Gamma(n, 1) law and N(0, 1).
double gamma_tv(int n) {
    const double s = std::sqrt(static_cast<double>(n));
    auto density = [&](double z) {
        const double x = n + s * z;
        if (x <= 0.0) return 0.0;
        return s * boost::math::gamma_p_derivative(static_cast<double>(n), x);
    };
    const double lo = -s;
    double total = phi_cdf(lo);
    const double step = 0.25;
    for (double a = lo; a < 40.0; a += step) {
        total += gk([&](double z) { return std::abs(density(z) - phi(z)); }, a, a + step);
    }
    return 0.5 * total;
}

// d_TV between the standardised sum of two U(0, 1) (triangle on [0, 2]) and N(0, 1).
double triangle_tv() {
    const double s = std::sqrt(2.0 / 12.0);
    auto density = [&](double z) {
        const double x = 1.0 + s * z;
        return s * std::max(0.0, 1.0 - std::abs(x - 1.0));
    };
    const double edge = 1.0 / s;
    double total = 2.0 * phi_cdf(-edge);
    const double step = edge / 64.0;
    for (int i = 0; i < 128; ++i) {
        const double a = -edge + i * step;
        total += gk([&](double z) { return std::abs(density(z) - phi(z)); }, a, a + step);
    }
    return 0.5 * total;
}

}  // namespace

TEST(CltBound, AnalyticValues) {
    EXPECT_NEAR(clt_bound(corpus::exponential(), 4), 1.0, 1e-12);
    EXPECT_NEAR(clt_bound(corpus::uniform(), 100), 2.0 * std::sqrt(1.0 / 720.0) / (10.0 / 12.0), 1e-12);
    EXPECT_NEAR(clt_bound(corpus::uniform(), 100), 0.08944, 1e-5);
    EXPECT_NEAR(clt_bound(corpus::normal(3.0, 2.0), 17), 0.0, 1e-12);
}

TEST(CltBound, QuadruplingNHalvesTheBound) {
    for (const auto& c : corpus::kernel_cases()) {
        for (int n : {1, 3, 25}) EXPECT_EQ(clt_bound(c.spec, 4 * n), clt_bound(c.spec, n) / 2.0) << c.name;
    }
}

TEST(CltBound, Errors) {
    EXPECT_THROW(clt_bound(corpus::uniform(), 0), SpecError);
    EXPECT_THROW(clt_bound(corpus::two_bump(), 4), ExistenceError);
}

TEST(Convolution, NormalStaysNormal) {
    for (int n : {1, 4, 64}) EXPECT_LT(convolution_tv(corpus::normal(), n, kGrid).tv, 1e-6) << n;
}

TEST(Convolution, ExponentialMatchesGammaOracle) {
    double prev = 1.0;
    for (int n : {4, 16, 64}) {
        const auto r = convolution_tv(corpus::exponential(), n, kGrid);
        const double want = gamma_tv(n);
        EXPECT_NEAR(r.tv, want, 1e-5) << n;
        EXPECT_LT(r.tv, prev);
        EXPECT_LE(r.tv, clt_bound(corpus::exponential(), n));
        EXPECT_LT(r.discretization_error, 1e-4);
        prev = r.tv;
    }
}

TEST(Convolution, UniformPairMatchesTriangle) {
    const double want = triangle_tv();
    EXPECT_NEAR(convolution_tv(corpus::uniform(), 2, kGrid).tv, want, 1e-5);
    // The tabulated triangle is the same law up to an affine map.
    EXPECT_NEAR(convolution_tv(corpus::uniform(), 2, kGrid).tv, convolution_tv(corpus::kernel_cases()[7].spec, 1, kGrid).tv, 1e-5);
}

TEST(Convolution, DominatedByBoundOnPureAcCorpus) {
    for (const auto& c : corpus::kernel_cases()) {
        if (!c.spec.pure_ac()) continue;
        for (int n : {1, 2, 8, 32}) {
            EXPECT_LE(convolution_tv(c.spec, n, kGrid).tv, clt_bound(c.spec, n) + 1e-4) << c.name << " n=" << n;
        }
    }
}

TEST(Convolution, Errors) {
    EXPECT_THROW(convolution_tv(corpus::mixed_example(), 4, kGrid), SpecError);
    EXPECT_THROW(convolution_tv(corpus::uniform(), 4, 3000), SpecError);
    EXPECT_THROW(convolution_tv(corpus::uniform(), 4, 512), SpecError);
    EXPECT_THROW(convolution_tv(corpus::uniform(), 0, kGrid), SpecError);
    EXPECT_THROW(convolution_tv(corpus::uniform(), 512, 4096), NumericalError);
}

TEST(Convolution, Deterministic) {
    EXPECT_EQ(convolution_tv(corpus::exponential(), 16, kGrid).tv, convolution_tv(corpus::exponential(), 16, kGrid).tv);
}

TEST(RateFit, ExactSeries) {
    CltCurve half;
    CltCurve one;
    for (int n : {2, 4, 8, 16, 32}) {
        half.ns.push_back(n);
        half.bounds.push_back(3.0 / std::sqrt(n));
        half.empirical.emplace_back(std::nullopt);
        one.ns.push_back(n);
        one.bounds.push_back(3.0 / n);
        one.empirical.emplace_back(0.5 / n);
    }
    const auto a = rate_fit(half);
    EXPECT_NEAR(a.slope_bound, -0.5, 1e-14);
    EXPECT_FALSE(a.slope_empirical.has_value());
    const auto b = rate_fit(one);
    EXPECT_NEAR(b.slope_bound, -1.0, 1e-14);
    ASSERT_TRUE(b.slope_empirical.has_value());
    EXPECT_NEAR(*b.slope_empirical, -1.0, 1e-14);
}

TEST(RateFit, NeedsEnoughSpread) {
    CltCurve c;
    c.ns = {4, 8};
    c.bounds = {1.0, 0.7};
    c.empirical = {std::nullopt, std::nullopt};
    EXPECT_THROW(rate_fit(c), SpecError);
    c.ns = {4, 8, 16};
    c.bounds = {1.0, 0.7, 0.5};
    c.empirical.emplace_back(std::nullopt);
    EXPECT_THROW(rate_fit(c), SpecError);
}

TEST(CltCurve, ExponentialSlopes) {
    const std::vector<int> ns = {4, 8, 16, 32, 64, 128, 256};
    const auto curve = clt_curve(corpus::exponential(), ns, kGrid);
    ASSERT_TRUE(curve.slope_bound.has_value());
    EXPECT_NEAR(*curve.slope_bound, -0.5, 1e-12);
    ASSERT_TRUE(curve.slope_empirical.has_value());
    EXPECT_GE(*curve.slope_empirical, -0.6);
    EXPECT_LE(*curve.slope_empirical, -0.4);
    for (std::size_t i = 1; i < ns.size(); ++i) EXPECT_LT(curve.bounds[i], curve.bounds[i - 1]);
    for (std::size_t i = 0; i < ns.size(); ++i) {
        ASSERT_TRUE(curve.empirical[i].has_value());
        EXPECT_LE(*curve.empirical[i], curve.bounds[i] + 1e-4);
    }
}

TEST(CltCurve, MixedLawHasBoundsOnly) {
    const std::vector<int> ns = {1, 4, 16};
    const auto curve = clt_curve(corpus::mixed_example(), ns, kGrid);
    for (const auto& e : curve.empirical) EXPECT_FALSE(e.has_value());
    ASSERT_TRUE(curve.slope_bound.has_value());
    EXPECT_NEAR(*curve.slope_bound, -0.5, 1e-12);
    EXPECT_FALSE(curve.slope_empirical.has_value());
}

TEST(CltCurve, SmallLatticeLeavesGaps) {
    const std::vector<int> ns = {4, 256};
    const auto curve = clt_curve(corpus::exponential(), ns, 4096);
    EXPECT_TRUE(curve.empirical[0].has_value());
    EXPECT_FALSE(curve.empirical[1].has_value());
    EXPECT_EQ(curve.warnings.size(), 1u);
}
