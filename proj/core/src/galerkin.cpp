#include "levyns/galerkin.hpp"

#include "levyns/errors.hpp"

#include <Eigen/LU>

#include <cmath>
#include <sstream>

namespace levyns {

namespace {

/// Row scaling rho_p * w_p repeated over the components of node p.
Eigen::VectorXd node_weights(const GridField& rho, int dim) {
    const auto w = rho.grid->weights();
    Eigen::VectorXd s(rho.node_count() * dim);
    for (std::size_t p = 0; p < rho.node_count(); ++p)
        for (int c = 0; c < dim; ++c) s(p * dim + c) = w[p] * rho.values[p];
    return s;
}

Eigen::MatrixXd mass_from_grid(const GridField& rho, const BasisSet& basis) {
    const auto& W = basis.values();
    const Eigen::VectorXd s = node_weights(rho, basis.dim());
    Eigen::MatrixXd m = W.transpose() * s.asDiagonal() * W;
    return 0.5 * (m + m.transpose());
}

MassMatrix factor(Eigen::MatrixXd m) {
    MassMatrix out{std::move(m), {}};
    out.llt.compute(out.matrix);
    if (out.llt.info() != Eigen::Success) {
        throw DensityBoundViolation("mass matrix is not positive definite; the density left its admissible bounds");
    }
    return out;
}

Eigen::VectorXd as_vector(const GridField& f) {
    return Eigen::Map<const Eigen::VectorXd>(f.values.data(), static_cast<Eigen::Index>(f.values.size()));
}

bool finite(const Eigen::VectorXd& v) { return v.allFinite(); }

} // namespace

MassMatrix assemble_mass(const DensityField& rho, const BasisSet& basis) {
    if (!(*rho.grid() == *basis.grid())) throw UsageError("assemble_mass: density and basis grids differ");
    return factor(mass_from_grid(rho.values, basis));
}

GalerkinSystem assemble_system(const DensityField& rho, const BasisSet& basis, double nu) {
    if (!(nu > 0.0)) throw ConfigError("viscosity nu must be positive");
    GalerkinSystem sys;
    sys.mass = assemble_mass(rho, basis);
    sys.stiffness = nu * gradient_gram(basis);
    sys.n = basis.size();
    sys.nu = nu;
    return sys;
}

Eigen::MatrixXd convection_matrix(const DensityField& rho, const GridField& u, const BasisSet& basis) {
    const int dim = basis.dim(), n = basis.size();
    const std::size_t nodes = basis.grid()->node_count();
    const auto& G = basis.gradients();
    Eigen::MatrixXd Y = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(nodes * dim), n);
    for (std::size_t p = 0; p < nodes; ++p)
        for (int c = 0; c < dim; ++c)
            for (int j = 0; j < dim; ++j) {
                const double uj = u.values[p * dim + j];
                if (uj != 0.0) Y.row(p * dim + c) += uj * G.row((p * dim + c) * dim + j);
            }
    const Eigen::VectorXd s = node_weights(rho.values, dim);
    return basis.values().transpose() * (s.asDiagonal() * Y);
}

Eigen::VectorXd convection_rhs(const DensityField& rho, const CoefficientVector& phi, const BasisSet& basis) {
    if (phi.size() != basis.size()) throw UsageError("convection_rhs: coefficient length mismatch");
    const GridField u = eval_velocity(phi, basis);
    return convection_matrix(rho, u, basis) * phi;
}

Eigen::VectorXd project_force(const GridField& field, const DensityField& rho, const BasisSet& basis) {
    if (field.components != basis.dim() || !(*field.grid == *basis.grid())) {
        throw UsageError("project_force: field does not live on the basis grid");
    }
    const Eigen::VectorXd s = node_weights(rho.values, basis.dim());
    return basis.values().transpose() * s.cwiseProduct(as_vector(field));
}

GalerkinModel::GalerkinModel(const BasisSet& basis, ForcingSpec forcing, const IntensityMeasure& mu, double nu,
                             double epsilon, int mass_reuse_steps)
    : basis_(basis), forcing_(std::move(forcing)), nu_(nu), mass_reuse_(mass_reuse_steps) {
    if (!(nu > 0.0)) throw ConfigError("viscosity nu must be positive");
    if (mass_reuse_steps < 1) throw ConfigError("mass_reuse_steps must be at least 1");
    stiffness_ = nu * gradient_gram(basis);
    if (!forcing_.F.zero() && mu.kind() != IntensityKind::None) {
        comp_scale_ = mu.radial_integral([this](double r) { return forcing_.F.scale(r); }, epsilon, 1.0);
    }
}

SimulationState GalerkinModel::initial_state(DensityField rho0, CoefficientVector phi0) const {
    if (phi0.size() != basis_.size()) throw UsageError("initial coefficients do not match the basis size");
    SimulationState s;
    s.mass = assemble_mass(rho0, basis_);
    s.rho = std::move(rho0);
    s.phi = std::move(phi0);
    return s;
}

Eigen::VectorXd GalerkinModel::projected(const GridField& rho, const GridField& field) const {
    const Eigen::VectorXd s = node_weights(rho, basis_.dim());
    return basis_.values().transpose() * s.cwiseProduct(as_vector(field));
}

SimulationState GalerkinModel::advance_continuous(const SimulationState& s, const NoiseSlice& slice) const {
    const double h = slice.dt;
    if (!(h > 0.0)) throw UsageError("advance_continuous: slice length must be positive");
    const bool moving = !s.phi.isZero(0.0);
    const GridField u = eval_velocity(s.phi, basis_);

    Eigen::VectorXd rhs = s.mass.matrix * s.phi;
    if (!forcing_.f.zero()) rhs += h * projected(s.rho.values, forcing_.f(u));
    if (comp_scale_ != 0.0) rhs -= h * comp_scale_ * projected(s.rho.values, forcing_.F.shape(u));
    for (std::size_t i = 0; i < forcing_.g.size() && i < slice.dW.size(); ++i) {
        if (forcing_.g[i].zero() || slice.dW[i] == 0.0) continue;
        rhs += slice.dW[i] * projected(s.rho.values, forcing_.g[i](u));
    }

    SimulationState next;
    next.t = s.t + h;
    if (moving) {
        SpectralVelocity vel(basis_, s.phi);
        next.rho = advance_density(s.rho, vel, h);
    } else {
        next.rho = s.rho;
    }
    if (moving && s.steps_since_mass + 1 >= mass_reuse_) {
        next.mass = assemble_mass(next.rho, basis_);
        next.steps_since_mass = 0;
    } else {
        next.mass = s.mass;
        next.steps_since_mass = s.steps_since_mass + 1;
    }

    Eigen::MatrixXd S = 0.5 * (next.mass.matrix + s.mass.matrix) + h * stiffness_;
    if (moving) {
        const Eigen::MatrixXd C = convection_matrix(s.rho, u, basis_);
        S += 0.5 * h * (C - C.transpose());
    }
    Eigen::PartialPivLU<Eigen::MatrixXd> lu(S);
    next.phi = lu.solve(rhs);
    if (!finite(next.phi)) {
        std::ostringstream msg;
        msg << "non-finite Galerkin coefficients at t = " << next.t;
        throw BlowUpError(msg.str(), next.t);
    }
    return next;
}

Eigen::VectorXd GalerkinModel::jump_projections(const GridField& rho, const CoefficientVector& phi,
                                                std::span<const MarkedJump> jumps) const {
    Eigen::VectorXd acc = Eigen::VectorXd::Zero(basis_.size());
    if (jumps.empty()) return acc;
    const GridField u = eval_velocity(phi, basis_);
    GridField shapeF, shapeG;
    for (const auto& j : jumps) {
        const JumpMap& m = j.size_class == SizeClass::Small ? forcing_.F : forcing_.G;
        if (m.zero()) continue;
        GridField& shape = j.size_class == SizeClass::Small ? shapeF : shapeG;
        if (!shape.grid) shape = m.shape(u);
        acc += m.scale(j.radius) * projected(rho, shape);
    }
    return acc;
}

int GalerkinModel::apply_jumps(SimulationState& s, const NoiseSlice& slice) const {
    if (slice.jumps.empty() || !forcing_.has_jumps()) return static_cast<int>(slice.jumps.size());
    const Eigen::VectorXd acc = jump_projections(s.rho.values, s.phi, slice.jumps);
    s.phi += s.mass.solve(acc);
    if (!finite(s.phi)) {
        std::ostringstream msg;
        msg << "non-finite Galerkin coefficients after a jump at t = " << s.t;
        throw BlowUpError(msg.str(), s.t);
    }
    return static_cast<int>(slice.jumps.size());
}

SimulationState GalerkinModel::step(const SimulationState& s, const NoiseSlice& slice) const {
    SimulationState next = advance_continuous(s, slice);
    apply_jumps(next, slice);
    return next;
}

Eigen::VectorXd GalerkinModel::weak_drift(const GridField& rho, const CoefficientVector& phi) const {
    const int dim = basis_.dim();
    const GridField u = eval_velocity(phi, basis_);
    const auto w = rho.grid->weights();
    Eigen::VectorXd T(static_cast<Eigen::Index>(rho.node_count() * dim * dim));
    for (std::size_t p = 0; p < rho.node_count(); ++p)
        for (int c = 0; c < dim; ++c)
            for (int j = 0; j < dim; ++j)
                T((p * dim + c) * dim + j) = w[p] * rho.values[p] * u.values[p * dim + c] * u.values[p * dim + j];
    Eigen::VectorXd out = basis_.gradients().transpose() * T - stiffness_ * phi;
    if (!forcing_.f.zero()) out += projected(rho, forcing_.f(u));
    if (comp_scale_ != 0.0) out -= comp_scale_ * projected(rho, forcing_.F.shape(u));
    return out;
}

Eigen::MatrixXd GalerkinModel::brownian_projections(const GridField& rho, const CoefficientVector& phi) const {
    const int m = static_cast<int>(forcing_.g.size());
    Eigen::MatrixXd out = Eigen::MatrixXd::Zero(basis_.size(), m);
    if (!forcing_.has_brownian()) return out;
    const GridField u = eval_velocity(phi, basis_);
    for (int i = 0; i < m; ++i)
        if (!forcing_.g[i].zero()) out.col(i) = projected(rho, forcing_.g[i](u));
    return out;
}

Eigen::VectorXd weak_form_residual(const GalerkinModel& model, const PathTrace& trace, const NoisePath& reference,
                                   const std::vector<int>& modes) {
    const BasisSet& basis = model.basis();
    const int n = basis.size();
    for (int k : modes)
        if (k < 0 || k >= n) throw UsageError("weak_form_residual: test mode index out of range");

    Eigen::VectorXd total = mass_from_grid(trace.rho_final.values, basis) * trace.phi_final -
                            mass_from_grid(trace.rho0.values, basis) * trace.phi0;
    const double tol = 1e-9 * reference.horizon();
    std::size_t r = 0;
    const int bdim = static_cast<int>(model.forcing().g.size());
    for (std::size_t k = 0; k < trace.slices.size(); ++k) {
        const auto& sr = trace.slices[k];
        const double t_end = sr.t0 + sr.dt;
        const GridField& rho = sr.rho_start;
        const GridField& rho_next = k + 1 < trace.slices.size() ? trace.slices[k + 1].rho_start : trace.rho_final.values;

        std::vector<NoiseSlice> subs;
        while (r < reference.slice_count() && reference.slice(r).t0 < t_end - tol) subs.push_back(reference.slice(r++));
        if (subs.empty()) throw UsageError("weak_form_residual: reference path does not cover the recorded slices");

        Eigen::MatrixXd G = Eigen::MatrixXd::Zero(n, bdim);
        Eigen::VectorXd dw_total = Eigen::VectorXd::Zero(bdim);
        if (model.forcing().has_brownian()) {
            const Eigen::MatrixXd B0 = model.brownian_projections(rho, sr.phi_start);
            G = mass_from_grid(rho, basis).llt().solve(B0);
            for (const auto& s : subs)
                for (int i = 0; i < bdim && i < static_cast<int>(s.dW.size()); ++i) dw_total(i) += s.dW[i];
        }
        const Eigen::VectorXd D = sr.phi_prejump - sr.phi_start - G * dw_total;

        Eigen::VectorXd wcum = Eigen::VectorXd::Zero(bdim);
        double s_time = sr.t0;
        for (const auto& s : subs) {
            Eigen::VectorXd dw = Eigen::VectorXd::Zero(bdim);
            for (int i = 0; i < bdim && i < static_cast<int>(s.dW.size()); ++i) dw(i) = s.dW[i];
            // drift by the midpoint rule (W linear inside a reference slice),
            // the stochastic integral at the left point
            const CoefficientVector mid = sr.phi_start + ((s_time + 0.5 * s.dt - sr.t0) / sr.dt) * D + G * (wcum + 0.5 * dw);
            total -= s.dt * model.weak_drift(rho, mid);
            if (model.forcing().has_brownian()) {
                const CoefficientVector left = sr.phi_start + ((s_time - sr.t0) / sr.dt) * D + G * wcum;
                total -= model.brownian_projections(rho, left) * dw;
                wcum += dw;
            }
            s_time += s.dt;
        }
        total -= model.jump_projections(rho_next, sr.phi_prejump, sr.jumps);
    }

    Eigen::VectorXd out(static_cast<Eigen::Index>(modes.size()));
    for (std::size_t i = 0; i < modes.size(); ++i) out(static_cast<Eigen::Index>(i)) = total(modes[i]);
    return out;
}

} // namespace levyns
