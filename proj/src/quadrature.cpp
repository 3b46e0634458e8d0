#include "steinkit/quadrature.hpp"

#include "steinkit/errors.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <queue>

namespace steinkit {

namespace {

constexpr std::array<double, 8> kXgk = {
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.000000000000000000000000000000000};

constexpr std::array<double, 8> kWgk = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};

// Gauss weights for the odd Kronrod nodes 1, 3, 5 and the centre.
constexpr std::array<double, 4> kWg = {
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

struct Panel {
    double a = 0.0;
    double b = 0.0;
    double value = 0.0;
    double error = 0.0;
};

Panel gk15(const Integrand& g, double a, double b) {
    const double centre = 0.5 * (a + b);
    const double half = 0.5 * (b - a);
    const double fc = g(centre);
    double kronrod = fc * kWgk[7];
    double gauss = fc * kWg[3];
    for (int j = 0; j < 7; ++j) {
        const double dx = half * kXgk[j];
        const double sum = g(centre - dx) + g(centre + dx);
        kronrod += kWgk[j] * sum;
        if (j % 2 == 1) gauss += kWg[j / 2] * sum;
    }
    Panel p{a, b, kronrod * half, std::abs((kronrod - gauss) * half)};
    if (!std::isfinite(p.value)) {
        throw NumericalError("non-finite integrand value on [" + std::to_string(a) + ", " +
                             std::to_string(b) + "]");
    }
    return p;
}

// Integrand in the integration variable of one sub-interval. Infinite ends are
// mapped onto [0, 1) by x = anchor +/- s / (1 - s).
struct MappedInterval {
    Integrand g;
    double lo = 0.0;
    double hi = 0.0;
};

MappedInterval map_interval(const Integrand& f, double a, double b) {
    const bool left_inf = std::isinf(a);
    const bool right_inf = std::isinf(b);
    if (!left_inf && !right_inf) return {f, a, b};
    if (!left_inf && right_inf) {
        return {[&f, a](double s) {
                    const double r = 1.0 - s;
                    return f(a + s / r) / (r * r);
                },
                0.0, 1.0};
    }
    if (left_inf && !right_inf) {
        return {[&f, b](double s) {
                    const double r = 1.0 - s;
                    return f(b - s / r) / (r * r);
                },
                0.0, 1.0};
    }
    throw std::invalid_argument("doubly infinite sub-interval; split it first");
}

}  // namespace

void QuadratureConfig::validate() const {
    if (!(abs_tol > 0.0) || !(rel_tol > 0.0)) {
        throw SpecError("quadrature tolerances must be positive");
    }
    if (max_subdivisions < 1) throw SpecError("max_subdivisions must be positive");
    if (!(tail_quantile > 0.0) || tail_quantile > 1e-6) {
        throw SpecError("tail_quantile must lie in (0, 1e-6]");
    }
}

double kronrod_panel(const Integrand& f, double a, double b) {
    if (a == b) return 0.0;
    return gk15(f, a, b).value;
}

std::vector<double> make_partition(std::vector<double> points, double lo, double hi) {
    std::erase_if(points, [&](double x) { return !(x > lo && x < hi); });
    points.push_back(lo);
    points.push_back(hi);
    std::sort(points.begin(), points.end());
    points.erase(std::unique(points.begin(), points.end()), points.end());
    if (points.size() == 2 && std::isinf(lo) && std::isinf(hi)) {
        points.insert(points.begin() + 1, 0.0);
    }
    return points;
}

QuadratureResult integrate(const Integrand& f, std::span<const double> breakpoints,
                           const QuadratureConfig& cfg) {
    QuadratureResult result;
    if (breakpoints.size() < 2) return result;

    std::vector<double> cuts(breakpoints.begin(), breakpoints.end());
    if (std::isinf(cuts.front()) && std::isinf(cuts.back()) && cuts.size() == 2) {
        cuts.insert(cuts.begin() + 1, 0.0);
    }

    std::vector<MappedInterval> mapped;
    mapped.reserve(cuts.size() - 1);
    for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
        if (!(cuts[i] < cuts[i + 1])) continue;
        mapped.push_back(map_interval(f, cuts[i], cuts[i + 1]));
    }

    // Panels remember which mapped interval they belong to so that the final
    // sum runs in a fixed spatial order.
    struct Tagged {
        Panel panel;
        std::size_t owner = 0;
    };
    auto worse = [](const Tagged& x, const Tagged& y) {
        if (x.panel.error != y.panel.error) return x.panel.error < y.panel.error;
        if (x.owner != y.owner) return x.owner > y.owner;
        return x.panel.a > y.panel.a;
    };
    std::priority_queue<Tagged, std::vector<Tagged>, decltype(worse)> queue(worse);

    double total = 0.0;
    double total_err = 0.0;
    for (std::size_t k = 0; k < mapped.size(); ++k) {
        Tagged t{gk15(mapped[k].g, mapped[k].lo, mapped[k].hi), k};
        total += t.panel.value;
        total_err += t.panel.error;
        queue.push(t);
    }

    int count = static_cast<int>(queue.size());
    const int budget = std::max(cfg.max_subdivisions, count);
    auto tolerance = [&] { return std::max(cfg.abs_tol, cfg.rel_tol * std::abs(total)); };
    while (total_err > tolerance() && count < budget) {
        Tagged worst = queue.top();
        // Stop refining panels that have collapsed to machine resolution.
        const double mid = 0.5 * (worst.panel.a + worst.panel.b);
        if (!(mid > worst.panel.a && mid < worst.panel.b)) break;
        queue.pop();
        const auto& g = mapped[worst.owner].g;
        Tagged left{gk15(g, worst.panel.a, mid), worst.owner};
        Tagged right{gk15(g, mid, worst.panel.b), worst.owner};
        total += left.panel.value + right.panel.value - worst.panel.value;
        total_err += left.panel.error + right.panel.error - worst.panel.error;
        queue.push(left);
        queue.push(right);
        ++count;
    }

    std::vector<Tagged> panels;
    panels.reserve(queue.size());
    while (!queue.empty()) {
        panels.push_back(queue.top());
        queue.pop();
    }
    std::sort(panels.begin(), panels.end(), [](const Tagged& x, const Tagged& y) {
        if (x.owner != y.owner) return x.owner < y.owner;
        return x.panel.a < y.panel.a;
    });
    // Neumaier summation in spatial order.
    double sum = 0.0;
    double comp = 0.0;
    double err = 0.0;
    for (const auto& t : panels) {
        const double v = t.panel.value;
        const double s = sum + v;
        comp += std::abs(sum) >= std::abs(v) ? (sum - s) + v : (v - s) + sum;
        sum = s;
        err += t.panel.error;
    }
    result.value = sum + comp;
    result.abs_error = err;
    result.intervals = static_cast<int>(panels.size());
    result.converged = err <= std::max(cfg.abs_tol, cfg.rel_tol * std::abs(result.value));
    return result;
}

QuadratureResult integrate(const Integrand& f, double a, double b, const QuadratureConfig& cfg) {
    if (a == b) return {};
    if (a > b) {
        auto r = integrate(f, b, a, cfg);
        r.value = -r.value;
        return r;
    }
    const std::vector<double> cuts = make_partition({}, a, b);
    return integrate(f, cuts, cfg);
}

QuadratureResult integrate_abs(const Integrand& g, std::span<const double> breakpoints,
                               const QuadratureConfig& cfg, int scan_points, int max_brackets) {
    std::vector<double> cuts(breakpoints.begin(), breakpoints.end());
    std::vector<double> extra;
    for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
        const double a = cuts[i];
        const double b = cuts[i + 1];
        if (!(a < b)) continue;
        // Scan in the mapped variable for infinite ends.
        auto to_x = [&](double s) {
            if (std::isinf(a) && std::isinf(b)) return s;
            if (std::isinf(b)) return a + s / (1.0 - s);
            if (std::isinf(a)) return b - (1.0 - s) / s;
            return a + (b - a) * s;
        };
        double prev_x = to_x(0.5 / scan_points);
        double prev_g = g(prev_x);
        int brackets = 0;
        for (int k = 1; k < scan_points && brackets < max_brackets; ++k) {
            const double x = to_x((k + 0.5) / scan_points);
            const double gx = g(x);
            if ((prev_g < 0.0 && gx > 0.0) || (prev_g > 0.0 && gx < 0.0)) {
                double lo = prev_x;
                double hi = x;
                double glo = prev_g;
                for (int it = 0; it < 200; ++it) {
                    const double mid = 0.5 * (lo + hi);
                    if (!(mid > lo && mid < hi)) break;
                    const double gm = g(mid);
                    if ((gm < 0.0) == (glo < 0.0)) {
                        lo = mid;
                        glo = gm;
                    } else {
                        hi = mid;
                    }
                }
                extra.push_back(0.5 * (lo + hi));
                ++brackets;
            }
            prev_x = x;
            prev_g = gx;
        }
    }
    cuts.insert(cuts.end(), extra.begin(), extra.end());
    cuts = make_partition(std::move(cuts), breakpoints.front(), breakpoints.back());
    return integrate([&g](double x) { return std::abs(g(x)); }, cuts, cfg);
}

}  // namespace steinkit
