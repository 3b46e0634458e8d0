#include "steinkit/distribution.hpp"

#include "steinkit/errors.hpp"

#include "json.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numbers>
#include <set>
#include <sstream>

namespace steinkit {

namespace {

template <class... Ts>
struct overloaded : Ts... {
    using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kInvSqrt2Pi = 0.398942280401432677939946059934381868;
constexpr int kCantorBreakDepth = 10;
constexpr int kCantorRuleDepth = 12;
constexpr int kCantorTailDepth = 64;

double std_normal_pdf(double z) { return kInvSqrt2Pi * std::exp(-0.5 * z * z); }
double std_normal_cdf(double z) { return 0.5 * std::erfc(-z / std::numbers::sqrt2); }
double std_normal_sf(double z) { return 0.5 * std::erfc(z / std::numbers::sqrt2); }

// ---- per-family primitives --------------------------------------------------

double family_density(const AcFamily& fam, double t) {
    return std::visit(
        overloaded{
            [t](const Uniform& u) { return (t >= u.lo && t <= u.hi) ? 1.0 / (u.hi - u.lo) : 0.0; },
            [t](const Normal& n) { return std_normal_pdf((t - n.mean) / n.sd) / n.sd; },
            [t](const Exponential& e) {
                return t >= e.loc ? e.rate * std::exp(-e.rate * (t - e.loc)) : 0.0;
            },
            [t](const Tabulated& tab) { return tab.density(t); },
        },
        fam);
}

double family_cdf(const AcFamily& fam, double t) {
    return std::visit(overloaded{
                          [t](const Uniform& u) {
                              if (t <= u.lo) return 0.0;
                              if (t >= u.hi) return 1.0;
                              return (t - u.lo) / (u.hi - u.lo);
                          },
                          [t](const Normal& n) { return std_normal_cdf((t - n.mean) / n.sd); },
                          [t](const Exponential& e) {
                              return t <= e.loc ? 0.0 : -std::expm1(-e.rate * (t - e.loc));
                          },
                          [t](const Tabulated& tab) { return tab.cdf(t); },
                      },
                      fam);
}

Moments family_moments(const AcFamily& fam) {
    return std::visit(
        overloaded{
            [](const Uniform& u) {
                const double w = u.hi - u.lo;
                return Moments{0.5 * (u.lo + u.hi), w * w / 12.0};
            },
            [](const Normal& n) { return Moments{n.mean, n.sd * n.sd}; },
            [](const Exponential& e) { return Moments{e.loc + 1.0 / e.rate, 1.0 / (e.rate * e.rate)}; },
            [](const Tabulated& tab) { return Moments{tab.mean(), tab.variance()}; },
        },
        fam);
}

// Integral of (x - c) p(x) over [t, inf).
double family_upper(const AcFamily& fam, double t, double c) {
    return std::visit(
        overloaded{
            [t, c](const Uniform& u) {
                const double tt = std::clamp(t, u.lo, u.hi);
                return ((u.hi - c) * (u.hi - c) - (tt - c) * (tt - c)) / (2.0 * (u.hi - u.lo));
            },
            [t, c](const Normal& n) {
                const double z = (t - n.mean) / n.sd;
                return (n.mean - c) * std_normal_sf(z) + n.sd * std_normal_pdf(z);
            },
            [t, c](const Exponential& e) {
                if (t <= e.loc) return e.loc + 1.0 / e.rate - c;
                return std::exp(-e.rate * (t - e.loc)) * (t - c + 1.0 / e.rate);
            },
            [t, c](const Tabulated& tab) { return tab.upper_partial(t, c); },
        },
        fam);
}

// Integral of (x - c) p(x) over (-inf, t].
double family_lower(const AcFamily& fam, double t, double c) {
    return std::visit(
        overloaded{
            [t, c](const Uniform& u) {
                const double tt = std::clamp(t, u.lo, u.hi);
                return ((tt - c) * (tt - c) - (u.lo - c) * (u.lo - c)) / (2.0 * (u.hi - u.lo));
            },
            [t, c](const Normal& n) {
                const double z = (t - n.mean) / n.sd;
                return (n.mean - c) * std_normal_cdf(z) - n.sd * std_normal_pdf(z);
            },
            [t, c](const Exponential& e) {
                if (t <= e.loc) return 0.0;
                const double u = t - e.loc;
                const double tail = std::exp(-e.rate * u);
                return (e.loc - c + 1.0 / e.rate) * (-std::expm1(-e.rate * u)) - u * tail;
            },
            [t, c](const Tabulated& tab) { return tab.lower_partial(t, c); },
        },
        fam);
}

std::vector<SupportInterval> family_positive_set(const AcFamily& fam) {
    return std::visit(overloaded{
                          [](const Uniform& u) { return std::vector<SupportInterval>{{u.lo, u.hi}}; },
                          [](const Normal&) { return std::vector<SupportInterval>{{-kInf, kInf}}; },
                          [](const Exponential& e) {
                              return std::vector<SupportInterval>{{e.loc, kInf}};
                          },
                          [](const Tabulated& tab) {
                              std::vector<SupportInterval> out;
                              const auto& g = tab.grid();
                              const auto& v = tab.values();
                              for (std::size_t i = 0; i + 1 < g.size(); ++i) {
                                  if (v[i] > 0.0 || v[i + 1] > 0.0) out.push_back({g[i], g[i + 1]});
                              }
                              return out;
                          },
                      },
                      fam);
}

void family_breakpoints(const AcFamily& fam, std::vector<double>& out) {
    std::visit(overloaded{
                   [&](const Uniform& u) {
                       out.push_back(u.lo);
                       out.push_back(u.hi);
                   },
                   [&](const Normal& n) { out.push_back(n.mean); },
                   [&](const Exponential& e) { out.push_back(e.loc); },
                   [&](const Tabulated& tab) {
                       out.insert(out.end(), tab.grid().begin(), tab.grid().end());
                   },
               },
               fam);
}

void validate_family(const AcFamily& fam) {
    std::visit(overloaded{
                   [](const Uniform& u) {
                       if (!std::isfinite(u.lo) || !std::isfinite(u.hi) || !(u.lo < u.hi)) {
                           throw SpecError("uniform piece needs finite lo < hi");
                       }
                   },
                   [](const Normal& n) {
                       if (!std::isfinite(n.mean) || !std::isfinite(n.sd) || !(n.sd > 0.0)) {
                           throw SpecError("normal piece needs finite mean and sd > 0");
                       }
                   },
                   [](const Exponential& e) {
                       if (!std::isfinite(e.rate) || !(e.rate > 0.0) || !std::isfinite(e.loc)) {
                           throw SpecError("exponential piece needs rate > 0 and finite loc");
                       }
                   },
                   [](const Tabulated&) {},
               },
               fam);
}

std::vector<SupportInterval> merge_intervals(std::vector<SupportInterval> v) {
    std::sort(v.begin(), v.end(), [](const auto& a, const auto& b) { return a.lo < b.lo; });
    std::vector<SupportInterval> out;
    for (const auto& iv : v) {
        if (!out.empty() && iv.lo <= out.back().hi) {
            out.back().hi = std::max(out.back().hi, iv.hi);
        } else {
            out.push_back(iv);
        }
    }
    return out;
}

double get_number(const nlohmann::json& obj, const char* key) {
    auto it = obj.find(key);
    if (it == obj.end()) throw SpecError(std::string("component is missing \"") + key + "\"");
    if (!it->is_number()) throw SpecError(std::string("\"") + key + "\" must be a number");
    return it->get<double>();
}

std::vector<double> get_array(const nlohmann::json& obj, const char* key) {
    auto it = obj.find(key);
    if (it == obj.end() || !it->is_array()) {
        throw SpecError(std::string("component needs array \"") + key + "\"");
    }
    std::vector<double> out;
    out.reserve(it->size());
    for (const auto& x : *it) {
        if (!x.is_number()) throw SpecError(std::string("\"") + key + "\" must hold numbers");
        out.push_back(x.get<double>());
    }
    return out;
}

}  // namespace

// ---- Tabulated ----------------------------------------------------------------

Tabulated::Tabulated(std::vector<double> grid, std::vector<double> values)
    : grid_(std::move(grid)), values_(std::move(values)) {
    if (grid_.size() < 2 || grid_.size() != values_.size()) {
        throw SpecError("tabulated piece needs grid and values of equal length >= 2");
    }
    for (std::size_t i = 0; i < grid_.size(); ++i) {
        if (!std::isfinite(grid_[i]) || !std::isfinite(values_[i])) {
            throw SpecError("tabulated piece has non-finite entries");
        }
        if (values_[i] < 0.0) throw SpecError("tabulated piece has negative density values");
        if (i > 0 && !(grid_[i] > grid_[i - 1])) {
            throw SpecError("tabulated grid must be strictly increasing");
        }
    }
    double total = 0.0;
    for (std::size_t i = 0; i + 1 < grid_.size(); ++i) {
        total += 0.5 * (values_[i] + values_[i + 1]) * (grid_[i + 1] - grid_[i]);
    }
    if (!(total > 0.0)) throw SpecError("tabulated density has zero mass");
    for (double& v : values_) v /= total;

    const std::size_t n = grid_.size();
    suffix_mass_.assign(n, 0.0);
    suffix_moment_.assign(n, 0.0);
    for (std::size_t i = n - 1; i-- > 0;) {
        suffix_mass_[i] = suffix_mass_[i + 1] + segment_integral(i, grid_[i], grid_[i + 1], kInf);
        suffix_moment_[i] = suffix_moment_[i + 1] + segment_integral(i, grid_[i], grid_[i + 1], 0.0);
    }
    mean_ = suffix_moment_[0] / suffix_mass_[0];
    double var = 0.0;
    for (std::size_t i = 0; i + 1 < n; ++i) {
        const double a = grid_[i];
        const double slope = (values_[i + 1] - values_[i]) / (grid_[i + 1] - a);
        var += kronrod_panel(
            [&](double x) {
                const double d = x - mean_;
                return d * d * (values_[i] + slope * (x - a));
            },
            a, grid_[i + 1]);
    }
    variance_ = var;
}

std::size_t Tabulated::segment(double t) const {
    auto it = std::upper_bound(grid_.begin(), grid_.end(), t);
    std::size_t i = it == grid_.begin() ? 0 : static_cast<std::size_t>(it - grid_.begin()) - 1;
    return std::min(i, grid_.size() - 2);
}

// c = +inf is a sentinel meaning "plain mass" (integrand p instead of (x-c) p).
double Tabulated::segment_integral(std::size_t i, double a, double b, double c) const {
    const double x0 = grid_[i];
    const double slope = (values_[i + 1] - values_[i]) / (grid_[i + 1] - x0);
    const double v0 = values_[i];
    if (std::isinf(c)) {
        return kronrod_panel([&](double x) { return v0 + slope * (x - x0); }, a, b);
    }
    return kronrod_panel([&](double x) { return (x - c) * (v0 + slope * (x - x0)); }, a, b);
}

double Tabulated::density(double t) const {
    if (t < grid_.front() || t > grid_.back()) return 0.0;
    const std::size_t i = segment(t);
    const double frac = (t - grid_[i]) / (grid_[i + 1] - grid_[i]);
    return values_[i] + frac * (values_[i + 1] - values_[i]);
}

double Tabulated::cdf(double t) const {
    if (t <= grid_.front()) return 0.0;
    if (t >= grid_.back()) return 1.0;
    const std::size_t i = segment(t);
    return (suffix_mass_[0] - suffix_mass_[i]) + segment_integral(i, grid_[i], t, kInf);
}

double Tabulated::upper_partial(double t, double c) const {
    if (t <= grid_.front()) return suffix_moment_[0] - c * suffix_mass_[0];
    if (t >= grid_.back()) return 0.0;
    const std::size_t i = segment(t);
    return segment_integral(i, t, grid_[i + 1], c) +
           (suffix_moment_[i + 1] - c * suffix_mass_[i + 1]);
}

double Tabulated::lower_partial(double t, double c) const {
    if (t <= grid_.front()) return 0.0;
    if (t >= grid_.back()) return suffix_moment_[0] - c * suffix_mass_[0];
    const std::size_t i = segment(t);
    double acc = 0.0;
    for (std::size_t j = 0; j < i; ++j) acc += segment_integral(j, grid_[j], grid_[j + 1], c);
    return acc + segment_integral(i, grid_[i], t, c);
}

// ---- Cantor helpers -----------------------------------------------------------

namespace cantor {

Tail upper_tail(double s) {
    // U(s) = cu0 + cu1 U(s'), V(s) = cv0 + cvu U(s') + cvv V(s') for the
    // current rescaled point s'.
    double cu0 = 0.0, cu1 = 1.0;
    double cv0 = 0.0, cvu = 0.0, cvv = 1.0;
    double us = 0.0;
    double vs = 0.0;
    int depth = 0;
    for (;; ++depth) {
        if (s <= 0.0) {
            us = 1.0;
            vs = 0.5;
            break;
        }
        if (s >= 1.0) {
            us = 0.0;
            vs = 0.0;
            break;
        }
        if (depth == kCantorTailDepth) {
            us = 1.0 - s;
            vs = 0.5 * (1.0 - s * s);
            break;
        }
        if (s <= 1.0 / 3.0) {
            cu0 += 0.5 * cu1;
            cu1 *= 0.5;
            cv0 += 0.5 * cvu + (5.0 / 12.0) * cvv;
            cvu *= 0.5;
            cvv /= 6.0;
            s *= 3.0;
        } else if (s <= 2.0 / 3.0) {
            us = 0.5;
            vs = 5.0 / 12.0;
            break;
        } else {
            cu1 *= 0.5;
            cvu = 0.5 * cvu + cvv / 3.0;
            cvv /= 6.0;
            s = 3.0 * s - 2.0;
        }
    }
    return {cu0 + cu1 * us, cv0 + cvu * us + cvv * vs};
}

std::vector<double> rule_nodes(double lo, double hi) {
    // Both endpoints of every level-12 construction interval lie on the
    // Cantor set; averaging g over them has error g'' * 3^-24 / 16.
    return construction_points(lo, hi, kCantorRuleDepth);
}

double expectation(const std::function<double(double)>& g) {
    const auto nodes = rule_nodes(0.0, 1.0);
    double sum = 0.0;
    for (double s : nodes) sum += g(s);
    return sum / static_cast<double>(nodes.size());
}

bool in_set(double s) {
    if (s < 0.0 || s > 1.0) return false;
    for (int depth = 0; depth < kCantorTailDepth; ++depth) {
        if (s <= 1.0 / 3.0) {
            s *= 3.0;
        } else if (s < 2.0 / 3.0) {
            return false;
        } else {
            s = 3.0 * s - 2.0;
        }
    }
    return true;
}

std::vector<double> construction_points(double lo, double hi, int depth) {
    std::vector<double> left{0.0};
    double width = 1.0;
    for (int d = 0; d < depth; ++d) {
        width /= 3.0;
        std::vector<double> next;
        next.reserve(left.size() * 2);
        for (double a : left) {
            next.push_back(a);
            next.push_back(a + 2.0 * width);
        }
        left = std::move(next);
    }
    std::vector<double> out;
    out.reserve(left.size() * 2);
    for (double a : left) {
        out.push_back(lo + (hi - lo) * a);
        out.push_back(lo + (hi - lo) * (a + width));
    }
    return out;
}

}  // namespace cantor

// ---- DistributionSpec -----------------------------------------------------------

DistributionSpec::DistributionSpec(std::vector<AcPiece> ac, std::vector<Atom> atoms,
                                   std::optional<CantorPart> cantor)
    : ac_(std::move(ac)), atoms_(std::move(atoms)), cantor_(cantor) {
    if (ac_.empty() && atoms_.empty() && !cantor_) {
        throw SpecError("distribution has no components");
    }
    double total = 0.0;
    for (const auto& piece : ac_) {
        validate_family(piece.family);
        if (!(piece.weight > 0.0 && piece.weight <= 1.0)) {
            throw SpecError("AC piece weight must lie in (0, 1]");
        }
        total += piece.weight;
        ac_weight_ += piece.weight;
    }
    for (const auto& atom : atoms_) {
        if (!std::isfinite(atom.location)) throw SpecError("atom location must be finite");
        if (!(atom.mass > 0.0 && atom.mass <= 1.0)) throw SpecError("atom mass must lie in (0, 1]");
        total += atom.mass;
    }
    std::sort(atoms_.begin(), atoms_.end(),
              [](const Atom& a, const Atom& b) { return a.location < b.location; });
    for (std::size_t i = 1; i < atoms_.size(); ++i) {
        if (atoms_[i].location == atoms_[i - 1].location) {
            throw SpecError("duplicate atom at " + std::to_string(atoms_[i].location));
        }
    }
    if (cantor_) {
        if (!std::isfinite(cantor_->lo) || !std::isfinite(cantor_->hi) ||
            !(cantor_->lo < cantor_->hi)) {
            throw SpecError("cantor part needs finite lo < hi");
        }
        if (!(cantor_->weight > 0.0 && cantor_->weight <= 1.0)) {
            throw SpecError("cantor weight must lie in (0, 1]");
        }
        total += cantor_->weight;
    }
    if (std::abs(total - 1.0) > 1e-12) {
        std::ostringstream msg;
        msg.precision(17);
        msg << "weights and masses sum to " << total << ", expected 1";
        throw SpecError(msg.str());
    }

    // Moments, accumulated about the mixture mean to avoid cancellation.
    std::vector<std::pair<double, Moments>> parts;
    for (const auto& piece : ac_) parts.emplace_back(piece.weight, family_moments(piece.family));
    for (const auto& atom : atoms_) parts.emplace_back(atom.mass, Moments{atom.location, 0.0});
    if (cantor_) {
        const double w = cantor_->hi - cantor_->lo;
        parts.emplace_back(cantor_->weight,
                           Moments{0.5 * (cantor_->lo + cantor_->hi), w * w / 8.0});
    }
    double mean = 0.0;
    for (const auto& [w, mo] : parts) mean += w * mo.mean;
    double var = 0.0;
    for (const auto& [w, mo] : parts) {
        const double d = mo.mean - mean;
        var += w * (mo.variance + d * d);
    }
    moments_ = {mean, single_atom() ? 0.0 : var};

    std::vector<SupportInterval> pos;
    for (const auto& piece : ac_) {
        auto s = family_positive_set(piece.family);
        pos.insert(pos.end(), s.begin(), s.end());
    }
    ac_positive_ = merge_intervals(std::move(pos));

    double lo = kInf;
    double hi = -kInf;
    if (!ac_positive_.empty()) {
        lo = ac_positive_.front().lo;
        hi = ac_positive_.back().hi;
        for (const auto& iv : ac_positive_) hi = std::max(hi, iv.hi);
    }
    for (const auto& atom : atoms_) {
        lo = std::min(lo, atom.location);
        hi = std::max(hi, atom.location);
    }
    if (cantor_) {
        lo = std::min(lo, cantor_->lo);
        hi = std::max(hi, cantor_->hi);
    }
    support_ = {lo, hi};

    for (const auto& piece : ac_) family_breakpoints(piece.family, breakpoints_);
    for (const auto& atom : atoms_) breakpoints_.push_back(atom.location);
    if (cantor_ && !ac_.empty()) {
        auto pts = cantor::construction_points(cantor_->lo, cantor_->hi, kCantorBreakDepth);
        breakpoints_.insert(breakpoints_.end(), pts.begin(), pts.end());
    }
    std::sort(breakpoints_.begin(), breakpoints_.end());
    breakpoints_.erase(std::unique(breakpoints_.begin(), breakpoints_.end()), breakpoints_.end());
    if (cantor_) cantor_nodes_ = cantor::rule_nodes(cantor_->lo, cantor_->hi);
}

// ---- parsing ------------------------------------------------------------------------

DistributionSpec parse_spec(std::string_view json_text) {
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(json_text);
    } catch (const nlohmann::json::parse_error& e) {
        throw SpecError(std::string("malformed spec document: ") + e.what());
    }
    if (!doc.is_object() || !doc.contains("components") || !doc["components"].is_array()) {
        throw SpecError("spec document needs a \"components\" array");
    }
    std::vector<AcPiece> ac;
    std::vector<Atom> atoms;
    std::optional<CantorPart> cantor;
    for (const auto& c : doc["components"]) {
        if (!c.is_object() || !c.contains("kind") || !c["kind"].is_string()) {
            throw SpecError("every component needs a string \"kind\"");
        }
        const std::string kind = c["kind"].get<std::string>();
        if (kind == "uniform") {
            ac.push_back({Uniform{get_number(c, "lo"), get_number(c, "hi")}, get_number(c, "weight")});
        } else if (kind == "normal") {
            ac.push_back({Normal{get_number(c, "mean"), get_number(c, "sd")}, get_number(c, "weight")});
        } else if (kind == "exponential") {
            const double loc = c.contains("loc") ? get_number(c, "loc") : 0.0;
            ac.push_back({Exponential{get_number(c, "rate"), loc}, get_number(c, "weight")});
        } else if (kind == "tabulated") {
            ac.push_back({Tabulated(get_array(c, "grid"), get_array(c, "values")),
                          get_number(c, "weight")});
        } else if (kind == "atom") {
            atoms.push_back({get_number(c, "location"), get_number(c, "mass")});
        } else if (kind == "cantor") {
            if (cantor) throw SpecError("at most one cantor component is supported");
            cantor = CantorPart{get_number(c, "lo"), get_number(c, "hi"), get_number(c, "weight")};
        } else {
            throw SpecError("unknown component kind \"" + kind + "\"");
        }
    }
    return DistributionSpec(std::move(ac), std::move(atoms), cantor);
}

DistributionSpec load_spec(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw SpecError("cannot open spec file " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_spec(buf.str());
}

std::string to_json(const DistributionSpec& spec) {
    nlohmann::ordered_json comps = nlohmann::ordered_json::array();
    for (const auto& piece : spec.ac_pieces()) {
        nlohmann::ordered_json c;
        std::visit(overloaded{
                       [&](const Uniform& u) {
                           c["kind"] = "uniform";
                           c["lo"] = u.lo;
                           c["hi"] = u.hi;
                       },
                       [&](const Normal& n) {
                           c["kind"] = "normal";
                           c["mean"] = n.mean;
                           c["sd"] = n.sd;
                       },
                       [&](const Exponential& e) {
                           c["kind"] = "exponential";
                           c["rate"] = e.rate;
                           c["loc"] = e.loc;
                       },
                       [&](const Tabulated& t) {
                           c["kind"] = "tabulated";
                           c["grid"] = t.grid();
                           c["values"] = t.values();
                       },
                   },
                   piece.family);
        c["weight"] = piece.weight;
        comps.push_back(std::move(c));
    }
    for (const auto& atom : spec.atoms()) {
        comps.push_back({{"kind", "atom"}, {"location", atom.location}, {"mass", atom.mass}});
    }
    if (const auto& c = spec.cantor()) {
        comps.push_back({{"kind", "cantor"}, {"lo", c->lo}, {"hi", c->hi}, {"weight", c->weight}});
    }
    nlohmann::ordered_json doc;
    doc["components"] = std::move(comps);
    return doc.dump(2);
}

// ---- evaluation ---------------------------------------------------------------------

Moments moments(const DistributionSpec& spec) { return spec.moments(); }

SupportInterval support(const DistributionSpec& spec) { return spec.support(); }

double ac_density(const DistributionSpec& spec, double t) {
    double p = 0.0;
    for (const auto& piece : spec.ac_pieces()) p += piece.weight * family_density(piece.family, t);
    return p;
}

double cdf(const DistributionSpec& spec, double t) {
    double acc = 0.0;
    for (const auto& piece : spec.ac_pieces()) acc += piece.weight * family_cdf(piece.family, t);
    for (const auto& atom : spec.atoms()) {
        if (atom.location <= t) acc += atom.mass;
    }
    if (const auto& c = spec.cantor()) {
        const double s = (t - c->lo) / (c->hi - c->lo);
        acc += c->weight * (1.0 - cantor::upper_tail(s).prob);
    }
    return std::min(acc, 1.0);
}

double quantile(const DistributionSpec& spec, double prob) {
    const auto& sup = spec.support();
    const double m = spec.moments().mean;
    const double step0 = std::max(std::sqrt(spec.moments().variance), 1e-3);
    double lo = sup.lo;
    double hi = sup.hi;
    if (std::isinf(lo)) {
        double step = step0;
        lo = m - step;
        while (cdf(spec, lo) >= prob) {
            step *= 2.0;
            lo = m - step;
        }
    }
    if (std::isinf(hi)) {
        double step = step0;
        hi = m + step;
        while (cdf(spec, hi) < prob) {
            step *= 2.0;
            hi = m + step;
        }
    }
    for (int it = 0; it < 300; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (!(mid > lo && mid < hi)) break;
        if (cdf(spec, mid) >= prob) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    return hi;
}

double partial_expectation(const DistributionSpec& spec, double t) {
    const double m = spec.moments().mean;
    // The upper form is accurate near esssup, the lower form near essinf.
    if (t >= m) {
        double acc = 0.0;
        for (const auto& piece : spec.ac_pieces()) acc += piece.weight * family_upper(piece.family, t, m);
        for (const auto& atom : spec.atoms()) {
            if (atom.location >= t) acc += atom.mass * (atom.location - m);
        }
        if (const auto& c = spec.cantor()) {
            const double width = c->hi - c->lo;
            const auto tail = cantor::upper_tail((t - c->lo) / width);
            acc += c->weight * (width * tail.moment + (c->lo - m) * tail.prob);
        }
        return acc;
    }
    double acc = 0.0;
    for (const auto& piece : spec.ac_pieces()) acc += piece.weight * family_lower(piece.family, t, m);
    for (const auto& atom : spec.atoms()) {
        if (atom.location < t) acc += atom.mass * (atom.location - m);
    }
    if (const auto& c = spec.cantor()) {
        // Reflection C -> 1 - C turns the lower tail into an upper one.
        const double width = c->hi - c->lo;
        const auto tail = cantor::upper_tail(1.0 - (t - c->lo) / width);
        acc += c->weight * (width * (tail.prob - tail.moment) + (c->lo - m) * tail.prob);
    }
    return 0.0 - acc;
}

SupportInterval truncated_support(const DistributionSpec& spec, const QuadratureConfig& cfg) {
    SupportInterval s = spec.support();
    if (std::isinf(s.lo)) s.lo = quantile(spec, cfg.tail_quantile);
    if (std::isinf(s.hi)) s.hi = quantile(spec, 1.0 - cfg.tail_quantile);
    return s;
}

QuadratureResult expect_ac(const DistributionSpec& spec, const Integrand& g,
                           const QuadratureConfig& cfg, std::span<const double> extra_cuts) {
    const auto& pos = spec.ac_positive_set();
    if (pos.empty()) return {};
    double hi = pos.front().hi;
    for (const auto& iv : pos) hi = std::max(hi, iv.hi);
    std::vector<double> points = spec.breakpoints();
    points.insert(points.end(), extra_cuts.begin(), extra_cuts.end());
    const auto cuts = make_partition(points, pos.front().lo, hi);
    return integrate([&](double t) {
        const double p = ac_density(spec, t);
        return p == 0.0 ? 0.0 : g(t) * p;
    },
                     cuts, cfg);
}

double expect_singular(const DistributionSpec& spec, const Integrand& g) {
    double acc = 0.0;
    for (const auto& atom : spec.atoms()) acc += atom.mass * g(atom.location);
    if (const auto& c = spec.cantor()) {
        double sum = 0.0;
        for (double t : spec.cantor_nodes()) sum += g(t);
        acc += c->weight * sum / static_cast<double>(spec.cantor_nodes().size());
    }
    return acc;
}

double expect(const DistributionSpec& spec, const Integrand& g, const QuadratureConfig& cfg) {
    return expect_ac(spec, g, cfg).value + expect_singular(spec, g);
}

DistributionSpec affine_transform(const DistributionSpec& spec, double scale, double shift) {
    if (!(scale != 0.0) || !std::isfinite(scale) || !std::isfinite(shift)) {
        throw SpecError("affine map needs a finite non-zero scale");
    }
    auto map = [&](double x) { return scale * x + shift; };
    std::vector<AcPiece> ac;
    for (const auto& piece : spec.ac_pieces()) {
        AcFamily fam = std::visit(
            overloaded{
                [&](const Uniform& u) -> AcFamily {
                    return Uniform{std::min(map(u.lo), map(u.hi)), std::max(map(u.lo), map(u.hi))};
                },
                [&](const Normal& n) -> AcFamily { return Normal{map(n.mean), std::abs(scale) * n.sd}; },
                [&](const Exponential& e) -> AcFamily {
                    if (scale < 0.0) throw SpecError("reflected exponential piece is not representable");
                    return Exponential{e.rate / scale, map(e.loc)};
                },
                [&](const Tabulated& t) -> AcFamily {
                    std::vector<double> g;
                    std::vector<double> v;
                    for (std::size_t i = 0; i < t.grid().size(); ++i) {
                        g.push_back(map(t.grid()[i]));
                        v.push_back(t.values()[i] / std::abs(scale));
                    }
                    if (scale < 0.0) {
                        std::reverse(g.begin(), g.end());
                        std::reverse(v.begin(), v.end());
                    }
                    return Tabulated(std::move(g), std::move(v));
                },
            },
            piece.family);
        ac.push_back({std::move(fam), piece.weight});
    }
    std::vector<Atom> atoms;
    for (const auto& atom : spec.atoms()) atoms.push_back({map(atom.location), atom.mass});
    std::optional<CantorPart> cantor;
    if (const auto& c = spec.cantor()) {
        // The Cantor law is symmetric, so a reflection maps it onto itself.
        cantor = CantorPart{std::min(map(c->lo), map(c->hi)), std::max(map(c->lo), map(c->hi)),
                            c->weight};
    }
    return DistributionSpec(std::move(ac), std::move(atoms), cantor);
}

}  // namespace steinkit
