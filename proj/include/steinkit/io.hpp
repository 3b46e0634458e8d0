#pragma once

#include "steinkit/clt.hpp"
#include "steinkit/kernel.hpp"
#include "steinkit/normal_approx.hpp"
#include "steinkit/recover.hpp"

#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace steinkit::io {

inline constexpr std::string_view kSchema = "steinkit/1";

/// "%.17g"; non-finite values become null in JSON and empty in CSV.
std::string format_double(double x);

/// Minimal ordered JSON object writer with fixed number formatting.
class JsonObject {
  public:
    JsonObject& add(std::string_view key, double value);
    JsonObject& add(std::string_view key, std::optional<double> value);
    JsonObject& add(std::string_view key, std::string_view value);
    JsonObject& add(std::string_view key, const char* value) { return add(key, std::string_view(value)); }
    JsonObject& add(std::string_view key, bool value);
    JsonObject& add(std::string_view key, const std::vector<double>& values);
    JsonObject& add(std::string_view key, const std::vector<std::string>& values);
    JsonObject& add(std::string_view key, const JsonObject& nested);
    JsonObject& add_null(std::string_view key);

    std::string str() const;

  private:
    std::vector<std::pair<std::string, std::string>> fields_;
};

std::string existence_json(const ExistenceReport& report);

/// `t,tau` rows for the grid, then one `loc,0` row per atom, each followed
/// by a `# atom` comment line.
std::string kernel_csv(const KernelFn& kernel);

/// {"schema", "form", "params"} descriptor.
std::string kernel_descriptor_json(const KernelFn& kernel);

/// Parses kernel_csv output back into a sampled kernel on `domain`.
KernelFn parse_kernel_csv(std::string_view text, SupportInterval domain);

std::string discrepancy_json(const DiscrepancyReport& report);

/// `n,bound,empirical` with an empty empirical field when undefined.
std::string curve_csv(const CltCurve& curve);
std::string curve_json(const CltCurve& curve);

/// `x,p` rows.
std::string density_csv(const RecoveredDensity& density);

}  // namespace steinkit::io
