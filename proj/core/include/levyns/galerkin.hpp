#pragma once

#include "levyns/basis.hpp"
#include "levyns/forcing.hpp"
#include "levyns/noise.hpp"
#include "levyns/transport.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Dense>

#include <vector>

namespace levyns {

/// Density-weighted Gram matrix of the basis with its Cholesky factor.
struct MassMatrix {
    Eigen::MatrixXd matrix;
    Eigen::LLT<Eigen::MatrixXd> llt;

    Eigen::VectorXd solve(const Eigen::VectorXd& b) const { return llt.solve(b); }
};

/// M_kl = integral rho w_k . w_l. Throws DensityBoundViolation when the
/// factorisation fails.
MassMatrix assemble_mass(const DensityField& rho, const BasisSet& basis);

struct GalerkinSystem {
    MassMatrix mass;
    Eigen::MatrixXd stiffness;
    int n = 0;
    double nu = 0.0;
};

GalerkinSystem assemble_system(const DensityField& rho, const BasisSet& basis, double nu);

/// b_l = integral rho (u . grad) u . w_l for u = sum phi_k w_k.
Eigen::VectorXd convection_rhs(const DensityField& rho, const CoefficientVector& phi, const BasisSet& basis);

/// C with C phi = convection_rhs: C_lk = integral rho (u . grad w_k) . w_l.
Eigen::MatrixXd convection_matrix(const DensityField& rho, const GridField& u, const BasisSet& basis);

/// l-th entry: integral rho field . w_l.
Eigen::VectorXd project_force(const GridField& field, const DensityField& rho, const BasisSet& basis);

struct SimulationState {
    double t = 0.0;
    DensityField rho;
    CoefficientVector phi;
    MassMatrix mass;
    int steps_since_mass = 0;
};

/// Data of one slice kept for the weak-form residual.
struct SliceRecord {
    double t0 = 0.0;
    double dt = 0.0;
    GridField rho_start;
    CoefficientVector phi_start;
    CoefficientVector phi_prejump;
    std::vector<MarkedJump> jumps;
};

struct PathTrace {
    DensityField rho0;
    CoefficientVector phi0;
    std::vector<SliceRecord> slices;
    DensityField rho_final;
    CoefficientVector phi_final;
};

/// Jump-adapted semi-implicit scheme for the coefficient SDE coupled to
/// density transport. Per slice (t, t+h]:
///   1. rho is transported by the frozen velocity u^n,
///   2. [ (M^{n+1} + M^n)/2 + h (K + A) ] phi^- = M^n phi^n
///        + h (P_f - P_comp) + sum_i P_{g_i} dW_i
///      with K the skew part of the convection matrix at (rho^n, u^n),
///   3. jumps at t+h add (M^{n+1})^{-1} integral rho^{n+1} F|G(u^-, z) w.
/// With f = 0 and no noise the discrete energy phi^T M phi cannot grow.
class GalerkinModel {
public:
    GalerkinModel(const BasisSet& basis, ForcingSpec forcing, const IntensityMeasure& mu, double nu,
                  double epsilon, int mass_reuse_steps = 1);

    const BasisSet& basis() const noexcept { return basis_; }
    const ForcingSpec& forcing() const noexcept { return forcing_; }
    double nu() const noexcept { return nu_; }
    /// integral over eps <= |z| < 1 of scale_F(|z|) mu(dz).
    double compensator_scale() const noexcept { return comp_scale_; }
    const Eigen::MatrixXd& stiffness() const noexcept { return stiffness_; }

    SimulationState initial_state(DensityField rho0, CoefficientVector phi0) const;

    /// Steps 1 and 2; the result holds the pre-jump state at t + h.
    SimulationState advance_continuous(const SimulationState& s, const NoiseSlice& slice) const;
    /// Step 3, in place. Returns the number of jumps applied.
    int apply_jumps(SimulationState& s, const NoiseSlice& slice) const;
    SimulationState step(const SimulationState& s, const NoiseSlice& slice) const;

    double energy(const SimulationState& s) const { return s.phi.dot(s.mass.matrix * s.phi); }
    double grad_norm_sq(const SimulationState& s) const { return grad_sq_norm(s.phi, basis_); }

    /// Drift integrand of the weak identity tested with every mode:
    /// <rho u (x) u, grad w> - nu <grad u, grad w> + <rho f(u), w> - compensator.
    Eigen::VectorXd weak_drift(const GridField& rho, const CoefficientVector& phi) const;
    /// <rho g_i(u), w> for each Brownian component i (columns).
    Eigen::MatrixXd brownian_projections(const GridField& rho, const CoefficientVector& phi) const;
    /// Sum over the slice's jumps of <rho F|G(u, z), w>.
    Eigen::VectorXd jump_projections(const GridField& rho, const CoefficientVector& phi,
                                     std::span<const MarkedJump> jumps) const;

private:
    Eigen::VectorXd projected(const GridField& rho, const GridField& field) const;

    const BasisSet& basis_;
    ForcingSpec forcing_;
    double nu_;
    int mass_reuse_;
    double comp_scale_ = 0.0;
    Eigen::MatrixXd stiffness_;
};

/// Difference of the two sides of the time-integrated weak identity along a
/// recorded path, for each test mode in `modes`. The drift and Ito
/// integrals are evaluated on the slices of `reference` (a refinement of
/// the simulated schedule) along the continuous Euler interpolant of the
/// discrete path: drift by the midpoint rule, Ito integral at left points.
Eigen::VectorXd weak_form_residual(const GalerkinModel& model, const PathTrace& trace, const NoisePath& reference,
                                   const std::vector<int>& modes);

} // namespace levyns
