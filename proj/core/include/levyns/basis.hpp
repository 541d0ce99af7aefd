#pragma once

#include "levyns/grid.hpp"

#include <Eigen/Dense>

#include <string>
#include <string_view>
#include <vector>

namespace levyns {

enum class Provider { TorusFourier, DirichletStokes };

std::string_view to_string(Provider p) noexcept;
Provider provider_from_string(std::string_view name);

/// Galerkin coefficients of a velocity field, one per basis mode.
using CoefficientVector = Eigen::VectorXd;

/// Analytic descriptor of one torus mode: sqrt(2) * {cos,sin}(2 pi k.x) * dir.
struct TorusMode {
    std::array<int, 3> k{0, 0, 0};
    Point dir{0.0, 0.0, 0.0};
    bool sine = false;
};

/// Ordered, L2-orthonormal, divergence-free velocity modes on a grid.
///
/// Mode values are stored as a (nodes * dim) x n matrix whose row
/// `node * dim + c` holds component c; nodal gradients as a
/// (nodes * dim * dim) x n matrix with row `(node * dim + c) * dim + j`
/// holding d w_c / d x_j. Immutable after construction.
class BasisSet {
public:
    BasisSet(Provider provider, GridPtr grid, std::vector<double> eigenvalues,
             Eigen::MatrixXd values, std::vector<TorusMode> torus_modes = {});

    Provider provider() const noexcept { return provider_; }
    const GridPtr& grid() const noexcept { return grid_; }
    int dim() const noexcept { return grid_->dim(); }
    int size() const noexcept { return static_cast<int>(eigenvalues_.size()); }

    const std::vector<double>& eigenvalues() const noexcept { return eigenvalues_; }
    double eigenvalue(int k) const { return eigenvalues_.at(k); }

    const Eigen::MatrixXd& values() const noexcept { return values_; }
    const Eigen::MatrixXd& gradients() const noexcept { return gradients_; }
    const std::vector<TorusMode>& torus_modes() const noexcept { return torus_modes_; }

    GridField mode(int k) const;

    /// Pointwise velocity sum_k phi_k w_k(x) at an arbitrary point. Exact for
    /// the torus; for the box it interpolates the nodal field multilinearly.
    void velocity_at(const Point& x, const CoefficientVector& phi, double* out) const;

    /// Largest |k_j| among torus modes (0 for the box provider).
    int max_wavenumber() const noexcept;

private:
    void compute_gradients();

    Provider provider_;
    GridPtr grid_;
    std::vector<double> eigenvalues_;
    Eigen::MatrixXd values_;
    Eigen::MatrixXd gradients_;
    std::vector<TorusMode> torus_modes_;
};

/// Builds the first `n_modes` eigenmodes of the Stokes operator on the unit
/// torus (analytic Fourier fields) or the unit box with no-slip walls
/// (numerical eigenvectors of the discrete Stokes operator).
BasisSet build_basis(Provider provider, int n_modes, int resolution, int d_space);

/// Pointwise linear combination sum_k phi_k w_k on the basis grid.
GridField eval_velocity(const CoefficientVector& phi, const BasisSet& basis);

/// Trapezoidal approximation of integral weight * a . b; weight == nullptr
/// means weight 1.
double weighted_inner(const GridField& a, const GridField& b, const GridField* weight = nullptr);

/// ||grad u||^2 for u = sum phi_k w_k, i.e. sum_k lambda_k phi_k^2.
double grad_sq_norm(const CoefficientVector& phi, const BasisSet& basis);

/// Quadrature Gram matrix of gradients, integral grad w_j : grad w_l. For the
/// torus it integrates the analytic nodal gradients; for the box it sums
/// forward differences over grid edges, the form whose minimisers are the
/// discrete eigenmodes.
Eigen::MatrixXd gradient_gram(const BasisSet& basis);

/// Discrete L2 norm of div w_k (analytic gradients on the torus, centred
/// differences at interior nodes on the box).
double mode_divergence_norm(const BasisSet& basis, int k);

/// Coefficients <a, w_k> for every mode k.
CoefficientVector project(const GridField& a, const BasisSet& basis);

} // namespace levyns
