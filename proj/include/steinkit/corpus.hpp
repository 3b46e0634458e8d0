#pragma once

#include "steinkit/distribution.hpp"
#include "steinkit/kernel.hpp"

#include <string>
#include <vector>

namespace steinkit::corpus {

struct Case {
    std::string name;
    DistributionSpec spec;
    Verdict expected;
};

// Named laws used across tests, the acceptance suite and the CLI.
DistributionSpec mixed_example();      // 1/4 d(-1) + 1/4 d(1) + 1/2 U(-1, 1)
DistributionSpec two_bump();           // 1/2 U(-2, -1) + 1/2 U(1, 2)
DistributionSpec rademacher();         // 1/2 d(-1) + 1/2 d(1)
DistributionSpec cantor_only();        // standard Cantor law on [0, 1]
DistributionSpec single_atom(double c = 0.0);
DistributionSpec rational_cover();     // first 8 intervals around 0, 1, -1, 1/2, -1/2, 2, -2, 1/3
DistributionSpec uniform(double lo = 0.0, double hi = 1.0);
DistributionSpec normal(double mean = 0.0, double sd = 1.0);
DistributionSpec exponential(double rate = 1.0);

/// Laws that admit a kernel (at least 10).
std::vector<Case> kernel_cases();

/// Laws that do not, or are degenerate.
std::vector<Case> gate_cases();

/// kernel_cases() followed by gate_cases().
std::vector<Case> all_cases();

struct Row {
    std::string name;
    std::string check;
    bool passed = false;
    std::string detail;
};

/// Runs the verdict check on every case and, for laws with a kernel, the
/// moment identity, Stein residuals and the discrepancy ordering.
std::vector<Row> run(const QuadratureConfig& cfg = {});

std::string format_table(const std::vector<Row>& rows);

}  // namespace steinkit::corpus
