#pragma once

#include "levyns/config.hpp"
#include "levyns/harness.hpp"

#include <filesystem>
#include <string>

namespace levyns {

inline constexpr int kReportSchemaVersion = 1;

/// Versioned JSON rendering of an ensemble report. Contains no timestamps,
/// so equal inputs give byte-identical text.
std::string report_json(const EnsembleReport& report, const RunConfig& cfg, const std::string& command);

/// Columns: theta,estimate,stderr,u_estimate,u_stderr
std::string increments_csv(const EnsembleReport& report);
/// Columns: p,estimate,stderr,gronwall_bound,grad_estimate,grad_stderr
std::string moments_csv(const EnsembleReport& report);

/// One JSON record per recorded step: t, energy, grad_norm, jump_count,
/// rho_min, rho_max.
std::string trajectory_jsonl(const EnergyLedger& ledger);
/// Same records as CSV (columns t,energy,grad_norm,jump_count,rho_min,rho_max).
std::string trajectory_csv(const EnergyLedger& ledger);

/// gnuplot command file plotting the moment ladder, the theta scaling and
/// (when present) the trajectories.
std::string plot_script(const EnsembleReport& report, int trajectory_files);

void write_text(const std::filesystem::path& file, const std::string& text);

} // namespace levyns
