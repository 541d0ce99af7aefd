#pragma once

#include "levyns/basis.hpp"
#include "levyns/galerkin.hpp"
#include "levyns/noise.hpp"
#include "levyns/stats.hpp"
#include "levyns/transport.hpp"

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace levyns {

struct JumpEvent {
    double time = 0.0;
    double energy_before = 0.0;
    double energy_after = 0.0;
};

/// Per-path series sampled at every slice end (index 0 is t = 0).
struct EnergyLedger {
    double horizon = 0.0;
    std::vector<double> times;
    std::vector<double> energy;
    std::vector<double> energy_prejump;
    std::vector<double> grad;
    std::vector<int> jump_count;
    std::vector<double> rho_min;
    std::vector<double> rho_max;
    std::optional<double> stopped_at;
    std::vector<JumpEvent> jump_log;

    void record(double t, double e, double e_pre, double g, int jumps, double rmin, double rmax);
};

enum class StopMode { Observe, Enforce };

struct StoppingRule {
    double N = 1e6;
    StopMode mode = StopMode::Observe;
};

/// First recorded time with sqrt(energy) >= N, else the horizon.
double stopping_time(const EnergyLedger& ledger, double N);

/// Everything a path simulation needs besides its noise.
struct Problem {
    std::shared_ptr<const BasisSet> basis;
    std::shared_ptr<const BasisSet> dual_basis;
    std::shared_ptr<const GalerkinModel> model;
    NoiseSpec noise;
    DensityField rho0;
    CoefficientVector phi0;
    double m = 1.0;
    double M = 1.0;
    double T = 1.0;
    int n_steps = 64;
    int storage_stride = 1;
    StoppingRule stopping;
    std::vector<int> moments{2, 4};
    std::vector<double> theta;
    std::uint64_t seed = 1;
    int n_paths = 1;
    int ito_mode = 0;
    bool record_trace = false;

    double storage_dt() const { return T / n_steps * storage_stride; }
};

struct PathResult {
    std::uint64_t index = 0;
    EnergyLedger ledger;
    bool aborted = false;
    double abort_time = 0.0;
    std::string abort_reason;
    double sup_energy = 0.0;
    double grad_integral = 0.0;
    double tau = 0.0;
    /// <rho u, w_k> for every dual mode at each storage time.
    std::vector<Eigen::VectorXd> dual_snapshots;
    /// Velocity coefficients at each storage time.
    std::vector<Eigen::VectorXd> phi_snapshots;
    double ito_integral = 0.0;
    double ito_quadratic = 0.0;
    double max_mass_drift = 0.0;
    bool bounds_kept = true;
    bool bounds_monotone = true;
    double max_jump_increment = 0.0;
    std::optional<PathTrace> trace;
};

/// Runs one path on the given noise (whose schedule must match the problem).
PathResult simulate_path(const Problem& problem, const NoisePath& noise);

/// Generates path `index` of the ensemble and simulates it.
PathResult simulate_path(const Problem& problem, std::uint64_t index);

/// Number of worker threads: LEVYNS_WORKERS if set, else the hardware count.
int worker_count();

/// Runs fn(i) for i in [0, count) on the worker pool; results are stored by
/// index so the outcome does not depend on scheduling. The first exception
/// thrown by any task is rethrown after all workers stop.
void parallel_for(std::size_t count, const std::function<void(std::size_t)>& fn, int workers = 0);

std::vector<PathResult> run_paths(const Problem& problem, int workers = 0);

struct MomentRow {
    int p = 2;
    Estimate energy_sup;
    Estimate grad_integral;
    double gronwall_bound = 0.0;
};

struct IncrementRow {
    double theta = 0.0;
    Estimate rho_u;
    Estimate u_proxy;
};

struct EnsembleReport {
    int n_paths = 0;
    int aborted = 0;
    double aborted_fraction = 0.0;
    std::vector<MomentRow> moments;
    std::vector<IncrementRow> increments;
    std::optional<LinearFit> increment_exponent;
    std::optional<LinearFit> u_increment_exponent;
    /// Relative change of the smallest-lag increment estimate when only
    /// half of the dual modes are used.
    double dual_truncation_change = 0.0;
    Estimate stopping_time;
    double stopped_fraction = 0.0;
    Estimate ito_lhs;
    Estimate ito_rhs;
    double max_mass_drift = 0.0;
    bool max_principle_ok = true;
    bool stop_rule_ok = true;
    double compensator_mass = 0.0;
    double neglected_variance = 0.0;
};

EnsembleReport summarize(const Problem& problem, const std::vector<PathResult>& paths);
EnsembleReport run_ensemble(const Problem& problem, int workers = 0);

struct IncrementValue {
    Estimate rho_u;
    Estimate u_proxy;
};

/// Monte Carlo estimate of E integral_0^{T-theta} ||X(t+theta) - X(t)||^2_{V'} dt
/// for X = rho u (and the same dual proxy for u), using the first
/// `dual_modes` dual modes (0 means all). Throws UsageError when theta is
/// not a multiple of the storage spacing.
IncrementValue increment_statistic(const Problem& problem, const std::vector<PathResult>& paths, double theta,
                                   int dual_modes = 0);

struct ItoReport {
    Estimate lhs;
    Estimate rhs;
    double pooled_se = 0.0;
    bool pass = true;
};

/// E|int <rho g, w> dW|^2 against E int sum_i <rho g_i, w>^2 ds.
ItoReport ito_isometry_check(const std::vector<PathResult>& paths);

struct GronwallInputs {
    double p = 2.0;
    double Cf = 0.0;
    double Cg = 0.0;
    double J2 = 0.0;
    double Jp = 0.0;
    double Cmu = 0.0;
    double m = 1.0;
    double M = 1.0;
    double T = 1.0;
    /// ||sqrt(rho0) u0||^p.
    double q_p = 0.0;
};

/// Explicit Gronwall bound on E sup_t ||sqrt(rho) u||^p.
double gronwall_comparator(const GronwallInputs& in);
/// log10 of the same bound; finite where the bound itself overflows.
double gronwall_log10(const GronwallInputs& in);

/// Comparator inputs assembled from a problem's declared constants.
GronwallInputs gronwall_inputs(const Problem& problem, int p, double T);

} // namespace levyns
