#include "steinkit/corpus.hpp"
#include "steinkit/distribution.hpp"
#include "steinkit/errors.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

using namespace steinkit;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double oracle(const std::function<double(double)>& f, double a, double b) {
    return boost::math::quadrature::gauss_kronrod<double, 61>::integrate(f, a, b, 12, 1e-13);
}

// Kinks of the AC density, read off the pieces themselves.
std::vector<double> ac_cuts(const DistributionSpec& spec) {
    std::vector<double> cuts{-kInf, kInf};
    for (const auto& piece : spec.ac_pieces()) {
        if (const auto* u = std::get_if<Uniform>(&piece.family)) {
            cuts.insert(cuts.end(), {u->lo, u->hi});
        } else if (const auto* e = std::get_if<Exponential>(&piece.family)) {
            cuts.push_back(e->loc);
        } else if (const auto* t = std::get_if<Tabulated>(&piece.family)) {
            cuts.insert(cuts.end(), t->grid().begin(), t->grid().end());
        }
    }
    std::sort(cuts.begin(), cuts.end());
    cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());
    return cuts;
}

// Boost integration between consecutive kinks (infinite ends allowed).
double oracle_ac(const DistributionSpec& spec, const std::function<double(double)>& g) {
    const auto cuts = ac_cuts(spec);
    double total = 0.0;
    for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
        if (!(cuts[i + 1] > cuts[i])) continue;
        total += oracle([&](double x) { return g(x) * ac_density(spec, x); }, cuts[i], cuts[i + 1]);
    }
    return total;
}

// Brute-force moments: AC part by Boost quadrature, atoms by summation,
// Cantor part from its closed-form mean and variance.
Moments oracle_moments(const DistributionSpec& spec) {
    double m0 = oracle_ac(spec, [](double) { return 1.0; });
    double m1 = oracle_ac(spec, [](double x) { return x; });
    double m2 = oracle_ac(spec, [](double x) { return x * x; });
    for (const auto& a : spec.atoms()) {
        m0 += a.mass;
        m1 += a.mass * a.location;
        m2 += a.mass * a.location * a.location;
    }
    if (const auto& c = spec.cantor()) {
        const double mean = 0.5 * (c->lo + c->hi);
        const double var = (c->hi - c->lo) * (c->hi - c->lo) / 8.0;
        m0 += c->weight;
        m1 += c->weight * mean;
        m2 += c->weight * (var + mean * mean);
    }
    const double mean = m1 / m0;
    return {mean, m2 / m0 - mean * mean};
}

}  // namespace

TEST(ParseSpec, SingleUniform) {
    const auto spec = parse_spec(R"({"components": [{"kind": "uniform", "lo": 0, "hi": 1, "weight": 1}]})");
    ASSERT_EQ(spec.ac_pieces().size(), 1u);
    EXPECT_TRUE(std::holds_alternative<Uniform>(spec.ac_pieces()[0].family));
    EXPECT_TRUE(spec.atoms().empty());
}

TEST(ParseSpec, MixedDocument) {
    const auto spec = parse_spec(R"({"components": [
        {"kind": "atom", "location": 1, "mass": 0.25},
        {"kind": "atom", "location": -1, "mass": 0.25},
        {"kind": "uniform", "lo": -1, "hi": 1, "weight": 0.5}]})");
    EXPECT_EQ(spec.atoms().size(), 2u);
    EXPECT_EQ(spec.atoms()[0].location, -1.0);
    EXPECT_DOUBLE_EQ(spec.ac_weight(), 0.5);
}

TEST(ParseSpec, RejectsBadDocuments) {
    EXPECT_THROW(parse_spec(R"({"components": [{"kind": "uniform", "lo": 0, "hi": 1, "weight": 0.9}]})"),
                 SpecError);
    EXPECT_THROW(parse_spec(R"({"components": [{"kind": "tabulated", "grid": [0, 1, 2],
                               "values": [1, -1, 1], "weight": 1}]})"),
                 SpecError);
    EXPECT_THROW(parse_spec(R"({"components": [{"kind": "atom", "location": 1, "mass": 0.5},
                               {"kind": "atom", "location": 1, "mass": 0.5}]})"),
                 SpecError);
    EXPECT_THROW(parse_spec(R"({"components": [{"kind": "tabulated", "grid": [0, 2, 1],
                               "values": [1, 1, 1], "weight": 1}]})"),
                 SpecError);
    EXPECT_THROW(parse_spec("{not json"), SpecError);
    EXPECT_THROW(parse_spec(R"({"parts": []})"), SpecError);
    EXPECT_THROW(parse_spec(R"({"components": [{"kind": "gamma", "weight": 1}]})"), SpecError);
    EXPECT_THROW(parse_spec(R"({"components": [{"kind": "normal", "mean": 0, "sd": -1, "weight": 1}]})"),
                 SpecError);
}

TEST(ParseSpec, JsonRoundTrip) {
    for (const auto& c : corpus::all_cases()) {
        const auto back = parse_spec(to_json(c.spec));
        EXPECT_EQ(back.moments().mean, c.spec.moments().mean) << c.name;
        EXPECT_EQ(back.moments().variance, c.spec.moments().variance) << c.name;
        EXPECT_EQ(to_json(back), to_json(c.spec)) << c.name;
    }
}

TEST(Moments, TextbookValues) {
    const auto u = moments(corpus::uniform());
    EXPECT_DOUBLE_EQ(u.mean, 0.5);
    EXPECT_NEAR(u.variance, 1.0 / 12.0, 1e-15);
    const auto tb = moments(corpus::two_bump());
    EXPECT_NEAR(tb.mean, 0.0, 1e-15);
    EXPECT_NEAR(tb.variance, 7.0 / 3.0, 1e-12);
    const auto mx = moments(corpus::mixed_example());
    EXPECT_NEAR(mx.mean, 0.0, 1e-15);
    EXPECT_NEAR(mx.variance, 2.0 / 3.0, 1e-15);
    EXPECT_EQ(moments(corpus::single_atom(3.0)).variance, 0.0);
}

TEST(Moments, MatchBruteForceOnCorpus) {
    int checked = 0;
    for (const auto& c : corpus::all_cases()) {
        if (c.spec.single_atom()) continue;
        const auto want = oracle_moments(c.spec);
        EXPECT_NEAR(c.spec.moments().mean, want.mean, 1e-8) << c.name;
        EXPECT_NEAR(c.spec.moments().variance, want.variance, 1e-8) << c.name;
        ++checked;
    }
    EXPECT_GE(checked, 10);
}

TEST(AcDensity, PointValues) {
    EXPECT_DOUBLE_EQ(ac_density(corpus::mixed_example(), 0.0), 0.25);
    EXPECT_NEAR(ac_density(corpus::normal(), 0.0), 0.3989422804014327, 1e-15);
    EXPECT_EQ(ac_density(corpus::uniform(), 1.5), 0.0);
    EXPECT_EQ(ac_density(corpus::exponential(), -0.1), 0.0);
}

TEST(AcDensity, IntegratesToAcWeight) {
    for (const auto& c : corpus::all_cases()) {
        if (c.spec.ac_pieces().empty()) continue;
        EXPECT_NEAR(oracle_ac(c.spec, [](double) { return 1.0; }), c.spec.ac_weight(), 1e-8) << c.name;
    }
}

TEST(PartialExpectation, PointValues) {
    EXPECT_NEAR(partial_expectation(corpus::rademacher(), 0.0), 0.5, 1e-15);
    EXPECT_NEAR(partial_expectation(corpus::uniform(), 0.5), 0.125, 1e-15);
    EXPECT_NEAR(partial_expectation(corpus::normal(), 0.0), 1.0 / std::sqrt(2.0 * std::numbers::pi), 1e-15);
}

TEST(PartialExpectation, VanishesAtBothEnds) {
    for (const auto& c : corpus::all_cases()) {
        const auto sup = c.spec.support();
        const double lo = std::isinf(sup.lo) ? -60.0 : sup.lo;
        const double hi = std::isinf(sup.hi) ? 60.0 : sup.hi + 1e-12;
        EXPECT_NEAR(partial_expectation(c.spec, lo), 0.0, 1e-9) << c.name;
        EXPECT_NEAR(partial_expectation(c.spec, hi), 0.0, 1e-9) << c.name;
    }
}

TEST(PartialExpectation, MatchesQuadratureOracle) {
    for (const auto& c : corpus::kernel_cases()) {
        if (!c.spec.pure_ac()) continue;
        const double m = c.spec.moments().mean;
        const auto span = truncated_support(c.spec, {});
        for (int i = 1; i < 10; ++i) {
            const double t = span.lo + (span.hi - span.lo) * i / 10.0;
            double want = 0.0;
            std::vector<double> cuts{t};
            for (double b : c.spec.breakpoints()) {
                if (b > t) cuts.push_back(b);
            }
            cuts.push_back(kInf);
            for (std::size_t k = 0; k + 1 < cuts.size(); ++k) {
                want += oracle([&](double x) { return (x - m) * ac_density(c.spec, x); }, cuts[k], cuts[k + 1]);
            }
            EXPECT_NEAR(partial_expectation(c.spec, t), want, 1e-10) << c.name << " t=" << t;
        }
    }
}

TEST(PartialExpectation, NonNegativeAboveTheMean) {
    for (const auto& c : corpus::all_cases()) {
        const double m = c.spec.moments().mean;
        const auto span = truncated_support(c.spec, {});
        for (int i = 0; i <= 50; ++i) {
            const double t = m + (span.hi - m) * i / 50.0;
            EXPECT_GE(partial_expectation(c.spec, t), -1e-12) << c.name;
        }
    }
}

TEST(PartialExpectation, JumpsAtAtomsByMassTimesOffset) {
    for (const auto& c : corpus::all_cases()) {
        const double m = c.spec.moments().mean;
        for (const auto& a : c.spec.atoms()) {
            const double eps = 1e-10;
            const double left = partial_expectation(c.spec, a.location);
            const double right = partial_expectation(c.spec, a.location + eps);
            EXPECT_NEAR(left - right, a.mass * (a.location - m), 1e-8) << c.name;
        }
    }
}

TEST(Support, Examples) {
    const auto tb = support(corpus::two_bump());
    EXPECT_EQ(tb.lo, -2.0);
    EXPECT_EQ(tb.hi, 2.0);
    const auto e = support(corpus::exponential());
    EXPECT_EQ(e.lo, 0.0);
    EXPECT_TRUE(std::isinf(e.hi));
    const auto a = support(corpus::single_atom(2.5));
    EXPECT_TRUE(a.degenerate());
    EXPECT_EQ(a.lo, 2.5);
}

TEST(Cdf, QuantileInvertsCdf) {
    for (const auto& c : corpus::kernel_cases()) {
        for (double p : {0.01, 0.3, 0.5, 0.77, 0.99}) {
            const double q = quantile(c.spec, p);
            EXPECT_GE(cdf(c.spec, q), p - 1e-9) << c.name;
        }
    }
}

TEST(Cdf, TruncatedSupportUsesTailQuantile) {
    const auto span = truncated_support(corpus::exponential(), {});
    EXPECT_EQ(span.lo, 0.0);
    EXPECT_NEAR(span.hi, -std::log(1e-9), 1e-6);
    const auto n = truncated_support(corpus::normal(), {});
    EXPECT_NEAR(n.lo, -n.hi, 1e-8);
}

TEST(Tabulated, TriangleAgainstClosedForm) {
    const Tabulated tri({-1.0, 0.0, 1.0}, {0.0, 1.0, 0.0});
    for (double t : {-0.9, -0.3, 0.0, 0.4, 0.8}) {
        EXPECT_NEAR(tri.density(t), 1.0 - std::abs(t), 1e-15);
        const double cdf_t = t < 0 ? 0.5 * (1 + t) * (1 + t) : 1.0 - 0.5 * (1 - t) * (1 - t);
        EXPECT_NEAR(tri.cdf(t), cdf_t, 1e-14);
        // Integral of x (1 - |x|) over [t, 1].
        auto antideriv = [](double x) { return x >= 0 ? x * x / 2 - x * x * x / 3 : x * x / 2 + x * x * x / 3; };
        double upper = antideriv(1.0) - antideriv(t);
        if (t < 0) upper = (antideriv(0.0) - antideriv(t)) + (antideriv(1.0) - antideriv(0.0));
        EXPECT_NEAR(tri.upper_partial(t, 0.0), upper, 1e-14);
        EXPECT_NEAR(tri.upper_partial(t, 0.0) + tri.lower_partial(t, 0.0), 0.0, 1e-14);
    }
    EXPECT_NEAR(tri.variance(), 1.0 / 6.0, 1e-15);
}

TEST(Tabulated, RenormalisesAtLoad) {
    const Tabulated t({0.0, 1.0}, {2.0, 2.0});
    EXPECT_NEAR(t.density(0.5), 1.0, 1e-15);
}

TEST(Cantor, TailsMatchEnumeration) {
    // Level-24 construction points, each carrying mass 2^-24.
    constexpr int depth = 24;
    std::vector<double> pts{0.0};
    for (int j = 1; j <= depth; ++j) {
        const double step = 2.0 * std::pow(3.0, -j);
        const std::size_t n = pts.size();
        for (std::size_t i = 0; i < n; ++i) pts.push_back(pts[i] + step);
    }
    for (double s : {0.05, 0.1, 0.2, 0.25, 0.5, 0.7, 0.75, 0.9, 0.99}) {
        double prob = 0.0;
        double moment = 0.0;
        for (double x : pts) {
            if (x >= s) {
                prob += 1.0;
                moment += x;
            }
        }
        prob /= static_cast<double>(pts.size());
        moment /= static_cast<double>(pts.size());
        const auto tail = cantor::upper_tail(s);
        EXPECT_NEAR(tail.prob, prob, 1e-7) << s;
        EXPECT_NEAR(tail.moment, moment, 1e-7) << s;
    }
}

TEST(Cantor, ExpectationRule) {
    EXPECT_NEAR(cantor::expectation([](double x) { return x; }), 0.5, 1e-15);
    EXPECT_NEAR(cantor::expectation([](double x) { return x * x; }), 3.0 / 8.0, 1e-12);
    for (double s : cantor::rule_nodes(0.0, 1.0)) ASSERT_TRUE(s >= 0.0 && s <= 1.0);
}

TEST(Cantor, SetMembership) {
    EXPECT_TRUE(cantor::in_set(0.0));
    EXPECT_TRUE(cantor::in_set(0.25));
    EXPECT_TRUE(cantor::in_set(0.75));
    EXPECT_FALSE(cantor::in_set(0.5));
    EXPECT_FALSE(cantor::in_set(0.4));
}

TEST(AffineTransform, MomentsTransform) {
    for (const auto& c : corpus::kernel_cases()) {
        const auto y = affine_transform(c.spec, 3.0, -2.0);
        EXPECT_NEAR(y.moments().mean, 3.0 * c.spec.moments().mean - 2.0, 1e-12) << c.name;
        EXPECT_NEAR(y.moments().variance, 9.0 * c.spec.moments().variance, 1e-11) << c.name;
    }
    const auto r = affine_transform(corpus::mixed_example(), -0.5, 1.0);
    EXPECT_NEAR(r.moments().variance, 0.25 * 2.0 / 3.0, 1e-14);
    EXPECT_THROW(affine_transform(corpus::exponential(), -1.0, 0.0), SpecError);
}
