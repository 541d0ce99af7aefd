#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <utility>
#include <vector>

namespace levyns {

struct CriterionInfo {
    int id = 0;
    std::string name;
    /// Wall-clock budget in seconds.
    double budget = 0.0;
};

/// The acceptance suite, in execution order.
const std::vector<CriterionInfo>& acceptance_criteria();

struct CriterionResult {
    int id = 0;
    std::string name;
    bool pass = false;
    std::string detail;
    std::vector<std::pair<std::string, double>> metrics;
    /// Not part of the report (timings are not reproducible).
    double seconds = 0.0;
    double budget = 0.0;
};

struct VerifyOptions {
    std::uint64_t seed = 20240601;
    int workers = 0;
    /// Criteria to run; empty means all.
    std::vector<int> only;
    /// Called after each criterion finishes.
    std::function<void(const CriterionResult&)> progress;
};

/// Runs one criterion. Criterion 11 (determinism) reruns criteria 1-10 twice.
CriterionResult run_criterion(int id, const VerifyOptions& options);

/// Runs the selected criteria. The determinism criterion reuses the first
/// pass and reruns the others once, comparing the reports byte for byte.
std::vector<CriterionResult> run_acceptance(const VerifyOptions& options);

/// Versioned JSON of the results without timings.
std::string acceptance_report_json(const std::vector<CriterionResult>& results, std::uint64_t seed);

/// One line per criterion: "[PASS] 3 density_max_principle (1.2 s / 60 s): detail".
std::string format_result_line(const CriterionResult& r);

} // namespace levyns
