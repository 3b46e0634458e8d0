#include "steinkit/io.hpp"

#include "steinkit/errors.hpp"

#include <cmath>
#include <cstdio>
#include <sstream>

namespace steinkit::io {

namespace {

std::string quote(std::string_view s) {
    std::string out = "\"";
    for (char c : s) {
        switch (c) {
            case '"': out += "\\\""; break;
            case '\\': out += "\\\\"; break;
            case '\n': out += "\\n"; break;
            default: out += c;
        }
    }
    out += '"';
    return out;
}

std::string json_number(double x) { return std::isfinite(x) ? format_double(x) : "null"; }

}  // namespace

std::string format_double(double x) {
    if (!std::isfinite(x)) return "";
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

JsonObject& JsonObject::add(std::string_view key, double value) {
    fields_.emplace_back(std::string(key), json_number(value));
    return *this;
}

JsonObject& JsonObject::add(std::string_view key, std::optional<double> value) {
    fields_.emplace_back(std::string(key), value ? json_number(*value) : "null");
    return *this;
}

JsonObject& JsonObject::add(std::string_view key, std::string_view value) {
    fields_.emplace_back(std::string(key), quote(value));
    return *this;
}

JsonObject& JsonObject::add(std::string_view key, bool value) {
    fields_.emplace_back(std::string(key), value ? "true" : "false");
    return *this;
}

JsonObject& JsonObject::add(std::string_view key, const std::vector<double>& values) {
    std::string arr = "[";
    for (std::size_t i = 0; i < values.size(); ++i) {
        if (i) arr += ", ";
        arr += json_number(values[i]);
    }
    arr += "]";
    fields_.emplace_back(std::string(key), std::move(arr));
    return *this;
}

JsonObject& JsonObject::add(std::string_view key, const std::vector<std::string>& values) {
    std::string arr = "[";
    for (std::size_t i = 0; i < values.size(); ++i) {
        if (i) arr += ", ";
        arr += quote(values[i]);
    }
    arr += "]";
    fields_.emplace_back(std::string(key), std::move(arr));
    return *this;
}

JsonObject& JsonObject::add(std::string_view key, const JsonObject& nested) {
    fields_.emplace_back(std::string(key), nested.str());
    return *this;
}

JsonObject& JsonObject::add_null(std::string_view key) {
    fields_.emplace_back(std::string(key), "null");
    return *this;
}

std::string JsonObject::str() const {
    std::string out = "{";
    for (std::size_t i = 0; i < fields_.size(); ++i) {
        if (i) out += ", ";
        out += quote(fields_[i].first);
        out += ": ";
        out += fields_[i].second;
    }
    out += "}";
    return out;
}

std::string existence_json(const ExistenceReport& report) {
    std::vector<std::string> reasons;
    for (auto r : report.reasons) reasons.emplace_back(to_string(r));
    std::vector<std::string> notes;
    for (auto r : report.notes) notes.emplace_back(to_string(r));
    JsonObject obj;
    obj.add("schema", kSchema).add("verdict", to_string(report.verdict)).add("reasons", reasons);
    if (report.failing_region) {
        // Infinite ends are written as null.
        obj.add("failing_region",
                std::vector<double>{report.failing_region->lo, report.failing_region->hi});
    } else {
        obj.add_null("failing_region");
    }
    obj.add("notes", notes);
    return obj.str();
}

std::string kernel_csv(const KernelFn& kernel) {
    std::string out = "t,tau\n";
    const auto grid = kernel.grid();
    const auto values = kernel.values();
    for (std::size_t i = 0; i < grid.size(); ++i) {
        out += format_double(grid[i]) + "," + format_double(values[i]) + "\n";
    }
    for (double a : kernel.atom_zeros()) {
        out += format_double(a) + ",0\n# atom\n";
    }
    return out;
}

std::string kernel_descriptor_json(const KernelFn& kernel) {
    const auto c = kernel.coefficients();
    JsonObject params;
    switch (kernel.form()) {
        case KernelForm::constant:
            params.add("value", c[0]);
            break;
        case KernelForm::linear:
            params.add("intercept", c[0]).add("slope", c[1]);
            break;
        case KernelForm::polynomial:
            params.add("coefficients", std::vector<double>(c.begin(), c.end()));
            break;
        case KernelForm::custom:
            params.add("grid_size", static_cast<double>(kernel.grid().size()))
                .add("atoms", std::vector<double>(kernel.atom_zeros().begin(), kernel.atom_zeros().end()));
            break;
    }
    params.add("domain", std::vector<double>{kernel.domain().lo, kernel.domain().hi});
    JsonObject obj;
    obj.add("schema", kSchema)
        .add("form", kernel.closed_form() ? to_string(kernel.form()) : std::string_view("grid"))
        .add("params", params);
    return obj.str();
}

KernelFn parse_kernel_csv(std::string_view text, SupportInterval domain) {
    std::istringstream in{std::string(text)};
    std::string line;
    if (!std::getline(in, line) || line != "t,tau") throw SpecError("kernel CSV must start with t,tau");
    std::vector<double> grid;
    std::vector<double> values;
    std::vector<double> atoms;
    bool have_row = false;
    double last_t = 0.0;
    double last_tau = 0.0;
    auto flush = [&] {
        if (have_row) {
            grid.push_back(last_t);
            values.push_back(last_tau);
        }
        have_row = false;
    };
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        if (line == "# atom") {
            if (!have_row) throw SpecError("'# atom' without a preceding row");
            atoms.push_back(last_t);
            have_row = false;
            continue;
        }
        flush();
        const auto comma = line.find(',');
        if (comma == std::string::npos) throw SpecError("malformed kernel CSV row: " + line);
        try {
            last_t = std::stod(line.substr(0, comma));
            last_tau = std::stod(line.substr(comma + 1));
        } catch (const std::exception&) {
            throw SpecError("malformed kernel CSV row: " + line);
        }
        have_row = true;
    }
    flush();
    return KernelFn::from_samples(domain, std::move(grid), std::move(values), std::move(atoms));
}

std::string discrepancy_json(const DiscrepancyReport& report) {
    JsonObject obj;
    obj.add("schema", kSchema)
        .add("tv", report.tv_exact)
        .add("bound_l1", report.bound_l1)
        .add("bound_sd", report.bound_sd)
        .add("bound_l1_scaled", report.scaled_l1)
        .add("bound_sd_scaled", report.scaled_sd);
    return obj.str();
}

std::string curve_csv(const CltCurve& curve) {
    std::string out = "n,bound,empirical\n";
    for (std::size_t i = 0; i < curve.ns.size(); ++i) {
        out += std::to_string(curve.ns[i]) + "," + format_double(curve.bounds[i]) + ",";
        if (curve.empirical[i]) out += format_double(*curve.empirical[i]);
        out += "\n";
    }
    return out;
}

std::string curve_json(const CltCurve& curve) {
    JsonObject obj;
    obj.add("schema", kSchema)
        .add("ns", std::vector<double>(curve.ns.begin(), curve.ns.end()))
        .add("bounds", curve.bounds)
        .add("slope_bound", curve.slope_bound)
        .add("slope_empirical", curve.slope_empirical);
    return obj.str();
}

std::string density_csv(const RecoveredDensity& density) {
    std::string out = "x,p\n";
    for (std::size_t i = 0; i < density.grid.size(); ++i) {
        out += format_double(density.grid[i]) + "," + format_double(density.values[i]) + "\n";
    }
    return out;
}

}  // namespace steinkit::io
