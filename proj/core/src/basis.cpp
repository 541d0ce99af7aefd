#include "levyns/basis.hpp"

#include "levyns/errors.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/QR>
#include <Eigen/Sparse>

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>
#include <sstream>

namespace levyns {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

int norm2(const std::array<int, 3>& k) { return k[0] * k[0] + k[1] * k[1] + k[2] * k[2]; }

bool canonical_half_space(const std::array<int, 3>& k) {
    for (int v : k) {
        if (v != 0) return v > 0;
    }
    return false;
}

Point normalized(Point v) {
    const double n = std::sqrt(v[0] * v[0] + v[1] * v[1] + v[2] * v[2]);
    return {v[0] / n, v[1] / n, v[2] / n};
}

Point cross(const Point& a, const Point& b) {
    return {a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]};
}

std::vector<TorusMode> enumerate_torus_modes(int n, int dim) {
    const int per_k = 2 * (dim - 1);
    for (int radius = 1;; ++radius) {
        std::vector<std::array<int, 3>> ks;
        const int kz = dim == 3 ? radius : 0;
        for (int a = -radius; a <= radius; ++a)
            for (int b = -radius; b <= radius; ++b)
                for (int c = -kz; c <= kz; ++c) {
                    std::array<int, 3> k{a, b, c};
                    if (canonical_half_space(k) && norm2(k) <= radius * radius) ks.push_back(k);
                }
        if (static_cast<int>(ks.size()) * per_k < n) continue;

        std::sort(ks.begin(), ks.end(), [](const auto& x, const auto& y) {
            const int nx = norm2(x), ny = norm2(y);
            return nx != ny ? nx < ny : x < y;
        });

        std::vector<TorusMode> modes;
        for (const auto& k : ks) {
            const Point kd{double(k[0]), double(k[1]), double(k[2])};
            std::vector<Point> dirs;
            if (dim == 2) {
                dirs.push_back(normalized({-kd[1], kd[0], 0.0}));
            } else {
                int axis = 0;
                for (int j = 1; j < 3; ++j)
                    if (std::abs(k[j]) < std::abs(k[axis])) axis = j;
                Point a{0.0, 0.0, 0.0};
                a[axis] = 1.0;
                const Point e1 = normalized(cross(kd, a));
                dirs.push_back(e1);
                dirs.push_back(normalized(cross(kd, e1)));
            }
            for (const auto& dir : dirs) {
                modes.push_back({k, dir, false});
                modes.push_back({k, dir, true});
            }
            if (static_cast<int>(modes.size()) >= n) break;
        }
        modes.resize(n);
        return modes;
    }
}

BasisSet build_torus(int n, int res, int dim) {
    auto modes = enumerate_torus_modes(n, dim);
    int kmax = 0;
    for (const auto& m : modes)
        for (int v : m.k) kmax = std::max(kmax, std::abs(v));
    if (res < 4 * kmax) {
        std::ostringstream msg;
        msg << "resolution " << res << " under-resolves " << n << " torus modes: highest wavenumber "
            << kmax << " needs at least " << 4 * kmax << " nodes per axis";
        throw ConfigError(msg.str());
    }

    auto grid = make_grid(dim, res, Boundary::Periodic);
    const std::size_t nodes = grid->node_count();
    Eigen::MatrixXd values(nodes * dim, n);
    std::vector<double> eig(n);
    for (int m = 0; m < n; ++m) {
        const auto& mode = modes[m];
        eig[m] = kTwoPi * kTwoPi * norm2(mode.k);
        for (std::size_t p = 0; p < nodes; ++p) {
            const auto idx = grid->index(p);
            // integer phase keeps nodal values exact to rounding
            long phase = 0;
            for (int d = 0; d < dim; ++d) phase += static_cast<long>(mode.k[d]) * idx[d];
            phase %= res;
            const double theta = kTwoPi * static_cast<double>(phase) / res;
            const double amp = std::numbers::sqrt2 * (mode.sine ? std::sin(theta) : std::cos(theta));
            for (int c = 0; c < dim; ++c) values(p * dim + c, m) = amp * mode.dir[c];
        }
    }
    return BasisSet(Provider::TorusFourier, std::move(grid), std::move(eig), std::move(values),
                    std::move(modes));
}

BasisSet build_dirichlet_stokes(int n, int res, int dim) {
    auto grid = make_grid(dim, res, Boundary::Dirichlet);
    const int m = res - 2;
    long interior = 1;
    for (int d = 0; d < dim; ++d) interior *= m;
    const long unknowns = dim * interior;
    const double h = grid->spacing();

    auto interior_index = [&](std::array<int, 3> idx) -> long {
        long p = 0, stride = 1;
        for (int d = 0; d < dim; ++d) {
            if (idx[d] < 0 || idx[d] >= m) return -1;
            p += idx[d] * stride;
            stride *= m;
        }
        return p;
    };
    auto interior_coords = [&](long p) {
        std::array<int, 3> idx{0, 0, 0};
        for (int d = 0; d < dim; ++d) {
            idx[d] = static_cast<int>(p % m);
            p /= m;
        }
        return idx;
    };

    // -Laplacian with homogeneous Dirichlet data, one block per component
    std::vector<Eigen::Triplet<double>> trip;
    trip.reserve(unknowns * (2 * dim + 1));
    const double inv_h2 = 1.0 / (h * h);
    // centred divergence, transposed: unknowns x interior nodes
    Eigen::MatrixXd div_t = Eigen::MatrixXd::Zero(unknowns, interior);
    for (long p = 0; p < interior; ++p) {
        const auto idx = interior_coords(p);
        for (int c = 0; c < dim; ++c) {
            const long row = p * dim + c;
            trip.emplace_back(row, row, 2.0 * dim * inv_h2);
            for (int a = 0; a < dim; ++a)
                for (int s : {-1, 1}) {
                    auto nb = idx;
                    nb[a] += s;
                    const long q = interior_index(nb);
                    if (q >= 0) trip.emplace_back(row, q * dim + c, -inv_h2);
                }
            for (int s : {-1, 1}) {
                auto nb = idx;
                nb[c] += s;
                const long q = interior_index(nb);
                if (q >= 0) div_t(q * dim + c, p) += s / (2.0 * h);
            }
        }
    }
    Eigen::SparseMatrix<double> neg_lap(unknowns, unknowns);
    neg_lap.setFromTriplets(trip.begin(), trip.end());

    // Orthonormal basis of ker(div) = complement of range(div^T).
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(unknowns, interior);
    qr.setThreshold(1e-10);
    qr.compute(div_t);
    const long rank = qr.rank();
    const long kernel = unknowns - rank;
    if (kernel < n) {
        throw ConfigError("resolution " + std::to_string(res) + " admits only " + std::to_string(kernel) +
                          " discretely divergence-free fields, fewer than the requested " + std::to_string(n));
    }
    Eigen::MatrixXd selector = Eigen::MatrixXd::Zero(unknowns, kernel);
    for (long i = 0; i < kernel; ++i) selector(rank + i, i) = 1.0;
    const Eigen::MatrixXd z = qr.householderQ() * selector;

    const Eigen::MatrixXd lz = neg_lap * z;
    Eigen::MatrixXd reduced = z.transpose() * lz;
    reduced = 0.5 * (reduced + reduced.transpose()).eval();

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(reduced);
    if (es.info() != Eigen::Success) {
        throw NumericalError("discrete Stokes eigen-solve did not converge (res=" + std::to_string(res) + ")");
    }

    const std::size_t nodes = grid->node_count();
    const double scale = 1.0 / std::sqrt(std::pow(h, dim));
    Eigen::MatrixXd values = Eigen::MatrixXd::Zero(nodes * dim, n);
    std::vector<double> eig(n);
    for (int k = 0; k < n; ++k) {
        const double lambda = es.eigenvalues()(k);
        const Eigen::VectorXd y = es.eigenvectors().col(k);
        const double residual = (reduced * y - lambda * y).norm() / std::max(1.0, std::abs(lambda));
        if (!(residual <= 1e-8) || !(lambda > 0.0)) {
            std::ostringstream msg;
            msg << "discrete Stokes eigenpair " << k << " failed verification: lambda=" << lambda
                << ", relative residual=" << residual;
            throw NumericalError(msg.str());
        }
        Eigen::VectorXd v = z * y;
        // deterministic sign: first clearly nonzero entry positive
        const double vmax = v.cwiseAbs().maxCoeff();
        for (long i = 0; i < v.size(); ++i) {
            if (std::abs(v(i)) > 1e-6 * vmax) {
                if (v(i) < 0) v = -v;
                break;
            }
        }
        eig[k] = lambda;
        for (long p = 0; p < interior; ++p) {
            const auto idx = interior_coords(p);
            const std::size_t node = grid->node(idx[0] + 1, dim > 1 ? idx[1] + 1 : 0, dim > 2 ? idx[2] + 1 : 0);
            for (int c = 0; c < dim; ++c) values(node * dim + c, k) = scale * v(p * dim + c);
        }
    }
    return BasisSet(Provider::DirichletStokes, std::move(grid), std::move(eig), std::move(values));
}

} // namespace

std::string_view to_string(Provider p) noexcept {
    return p == Provider::TorusFourier ? "torus_fourier" : "dirichlet_stokes";
}

Provider provider_from_string(std::string_view name) {
    if (name == "torus_fourier") return Provider::TorusFourier;
    if (name == "dirichlet_stokes") return Provider::DirichletStokes;
    throw ConfigError("unknown basis provider '" + std::string(name) +
                      "' (available: torus_fourier, dirichlet_stokes)");
}

BasisSet::BasisSet(Provider provider, GridPtr grid, std::vector<double> eigenvalues, Eigen::MatrixXd values,
                   std::vector<TorusMode> torus_modes)
    : provider_(provider),
      grid_(std::move(grid)),
      eigenvalues_(std::move(eigenvalues)),
      values_(std::move(values)),
      torus_modes_(std::move(torus_modes)) {
    const auto rows = static_cast<Eigen::Index>(grid_->node_count() * grid_->dim());
    if (values_.rows() != rows || values_.cols() != static_cast<Eigen::Index>(eigenvalues_.size())) {
        throw UsageError("BasisSet: mode matrix shape does not match grid and eigenvalue count");
    }
    compute_gradients();
}

void BasisSet::compute_gradients() {
    const int dim = grid_->dim();
    const std::size_t nodes = grid_->node_count();
    const int n = size();
    gradients_.setZero(nodes * dim * dim, n);

    if (provider_ == Provider::TorusFourier) {
        const int res = grid_->res();
        for (int m = 0; m < n; ++m) {
            const auto& mode = torus_modes_[m];
            for (std::size_t p = 0; p < nodes; ++p) {
                const auto idx = grid_->index(p);
                long phase = 0;
                for (int d = 0; d < dim; ++d) phase += static_cast<long>(mode.k[d]) * idx[d];
                phase %= res;
                const double theta = kTwoPi * static_cast<double>(phase) / res;
                // d/dx_j of sqrt2 cos = -sqrt2 2pi k_j sin ; of sqrt2 sin = sqrt2 2pi k_j cos
                const double amp =
                    std::numbers::sqrt2 * kTwoPi * (mode.sine ? std::cos(theta) : -std::sin(theta));
                for (int c = 0; c < dim; ++c)
                    for (int j = 0; j < dim; ++j)
                        gradients_((p * dim + c) * dim + j, m) = amp * mode.k[j] * mode.dir[c];
            }
        }
        return;
    }

    const int res = grid_->res();
    const double h = grid_->spacing();
    for (std::size_t p = 0; p < nodes; ++p) {
        const auto idx = grid_->index(p);
        for (int j = 0; j < dim; ++j) {
            auto at = [&](int offset) {
                auto q = idx;
                q[j] += offset;
                return grid_->node(q[0], q[1], q[2]);
            };
            for (int c = 0; c < dim; ++c) {
                const auto row = (p * dim + c) * dim + j;
                for (int m = 0; m < n; ++m) {
                    double g;
                    if (idx[j] == 0) {
                        g = (-3.0 * values_(p * dim + c, m) + 4.0 * values_(at(1) * dim + c, m) -
                             values_(at(2) * dim + c, m)) / (2.0 * h);
                    } else if (idx[j] == res - 1) {
                        g = (3.0 * values_(p * dim + c, m) - 4.0 * values_(at(-1) * dim + c, m) +
                             values_(at(-2) * dim + c, m)) / (2.0 * h);
                    } else {
                        g = (values_(at(1) * dim + c, m) - values_(at(-1) * dim + c, m)) / (2.0 * h);
                    }
                    gradients_(row, m) = g;
                }
            }
        }
    }
}

GridField BasisSet::mode(int k) const {
    if (k < 0 || k >= size()) throw UsageError("BasisSet::mode: index out of range");
    GridField f(grid_, dim());
    Eigen::Map<Eigen::VectorXd>(f.values.data(), f.values.size()) = values_.col(k);
    return f;
}

int BasisSet::max_wavenumber() const noexcept {
    int kmax = 0;
    for (const auto& m : torus_modes_)
        for (int v : m.k) kmax = std::max(kmax, std::abs(v));
    return kmax;
}

void BasisSet::velocity_at(const Point& x, const CoefficientVector& phi, double* out) const {
    const int dim = grid_->dim();
    if (phi.size() != size()) throw UsageError("BasisSet::velocity_at: coefficient length mismatch");
    for (int c = 0; c < dim; ++c) out[c] = 0.0;

    if (provider_ == Provider::TorusFourier) {
        const int kmax = max_wavenumber();
        std::array<std::array<std::complex<double>, 16>, 3> ex{};
        if (kmax >= 16) throw UsageError("BasisSet::velocity_at: wavenumber too large for fast evaluation");
        for (int d = 0; d < dim; ++d) {
            const std::complex<double> e1 = std::polar(1.0, kTwoPi * x[d]);
            ex[d][0] = 1.0;
            for (int m = 1; m <= kmax; ++m) ex[d][m] = ex[d][m - 1] * e1;
        }
        for (int m = 0; m < size(); ++m) {
            if (phi(m) == 0.0) continue;
            const auto& mode = torus_modes_[m];
            std::complex<double> z = 1.0;
            for (int d = 0; d < dim; ++d) {
                const int kd = mode.k[d];
                z *= kd >= 0 ? ex[d][kd] : std::conj(ex[d][-kd]);
            }
            const double amp = phi(m) * std::numbers::sqrt2 * (mode.sine ? z.imag() : z.real());
            for (int c = 0; c < dim; ++c) out[c] += amp * mode.dir[c];
        }
        return;
    }

    // multilinear interpolation of the nodal expansion on the closed box
    const int res = grid_->res();
    const double h = grid_->spacing();
    std::array<int, 3> base{0, 0, 0};
    std::array<double, 3> frac{0.0, 0.0, 0.0};
    for (int d = 0; d < dim; ++d) {
        const double s = std::clamp(x[d], 0.0, 1.0) / h;
        base[d] = std::min(static_cast<int>(std::floor(s)), res - 2);
        frac[d] = s - base[d];
    }
    const int corners = 1 << dim;
    for (int corner = 0; corner < corners; ++corner) {
        double w = 1.0;
        std::array<int, 3> idx{0, 0, 0};
        for (int d = 0; d < dim; ++d) {
            const int bit = (corner >> d) & 1;
            idx[d] = base[d] + bit;
            w *= bit ? frac[d] : 1.0 - frac[d];
        }
        if (w == 0.0) continue;
        const std::size_t node = grid_->node(idx[0], idx[1], idx[2]);
        for (int c = 0; c < dim; ++c) out[c] += w * values_.row(node * dim + c).dot(phi);
    }
}

BasisSet build_basis(Provider provider, int n_modes, int resolution, int d_space) {
    if (n_modes < 1) throw ConfigError("basis needs at least one mode");
    if (d_space != 2 && d_space != 3) throw ConfigError("d_space must be 2 or 3");
    return provider == Provider::TorusFourier ? build_torus(n_modes, resolution, d_space)
                                              : build_dirichlet_stokes(n_modes, resolution, d_space);
}

GridField eval_velocity(const CoefficientVector& phi, const BasisSet& basis) {
    if (phi.size() != basis.size()) {
        throw UsageError("eval_velocity: " + std::to_string(phi.size()) + " coefficients for a basis of " +
                         std::to_string(basis.size()) + " modes");
    }
    GridField u(basis.grid(), basis.dim());
    Eigen::Map<Eigen::VectorXd>(u.values.data(), u.values.size()).noalias() = basis.values() * phi;
    return u;
}

double weighted_inner(const GridField& a, const GridField& b, const GridField* weight) {
    require_compatible(a, b, "weighted_inner");
    if (weight && (!weight->grid || !(*weight->grid == *a.grid) || weight->components != 1)) {
        throw UsageError("weighted_inner: weight must be a scalar field on the same grid");
    }
    const auto w = a.grid->weights();
    const int c = a.components;
    double s = 0.0;
    for (std::size_t n = 0; n < a.node_count(); ++n) {
        double dot = 0.0;
        for (int i = 0; i < c; ++i) dot += a.values[n * c + i] * b.values[n * c + i];
        s += w[n] * (weight ? weight->values[n] : 1.0) * dot;
    }
    return s;
}

double grad_sq_norm(const CoefficientVector& phi, const BasisSet& basis) {
    if (phi.size() != basis.size()) throw UsageError("grad_sq_norm: coefficient length mismatch");
    double s = 0.0;
    for (int k = 0; k < basis.size(); ++k) s += basis.eigenvalue(k) * phi(k) * phi(k);
    return s;
}

Eigen::MatrixXd gradient_gram(const BasisSet& basis) {
    const auto& grid = *basis.grid();
    const int dim = grid.dim();
    const int n = basis.size();
    if (basis.provider() == Provider::TorusFourier) {
        const auto& g = basis.gradients();
        Eigen::VectorXd w(g.rows());
        const auto gw = grid.weights();
        for (Eigen::Index r = 0; r < g.rows(); ++r) w(r) = gw[r / (dim * dim)];
        return g.transpose() * w.asDiagonal() * g;
    }
    const int res = grid.res();
    const double h = grid.spacing();
    const double cell = std::pow(h, dim);
    const auto& v = basis.values();
    Eigen::MatrixXd gram = Eigen::MatrixXd::Zero(n, n);
    Eigen::MatrixXd diff(1, n);
    for (std::size_t p = 0; p < grid.node_count(); ++p) {
        const auto idx = grid.index(p);
        for (int a = 0; a < dim; ++a) {
            if (idx[a] == res - 1) continue;
            auto q = idx;
            q[a] += 1;
            const std::size_t nb = grid.node(q[0], q[1], q[2]);
            for (int c = 0; c < dim; ++c) {
                diff = (v.row(nb * dim + c) - v.row(p * dim + c)) / h;
                gram.noalias() += cell * diff.transpose() * diff;
            }
        }
    }
    return gram;
}

double mode_divergence_norm(const BasisSet& basis, int k) {
    const auto& grid = *basis.grid();
    const int dim = grid.dim();
    const auto w = grid.weights();
    double s = 0.0;
    if (basis.provider() == Provider::TorusFourier) {
        const auto& g = basis.gradients();
        for (std::size_t p = 0; p < grid.node_count(); ++p) {
            double div = 0.0;
            for (int c = 0; c < dim; ++c) div += g((p * dim + c) * dim + c, k);
            s += w[p] * div * div;
        }
        return std::sqrt(s);
    }
    const int res = grid.res();
    const double h = grid.spacing();
    const auto& v = basis.values();
    for (std::size_t p = 0; p < grid.node_count(); ++p) {
        if (grid.on_boundary(p)) continue;
        const auto idx = grid.index(p);
        double div = 0.0;
        for (int c = 0; c < dim; ++c) {
            auto up = idx, dn = idx;
            up[c] += 1;
            dn[c] -= 1;
            div += (v(grid.node(up[0], up[1], up[2]) * dim + c, k) - v(grid.node(dn[0], dn[1], dn[2]) * dim + c, k)) /
                   (2.0 * h);
        }
        (void)res;
        s += std::pow(h, dim) * div * div;
    }
    return std::sqrt(s);
}

CoefficientVector project(const GridField& a, const BasisSet& basis) {
    if (!a.grid || !(*a.grid == *basis.grid()) || a.components != basis.dim()) {
        throw UsageError("project: field does not live on the basis grid");
    }
    const int dim = basis.dim();
    const auto w = basis.grid()->weights();
    Eigen::VectorXd wa(a.values.size());
    for (std::size_t i = 0; i < a.values.size(); ++i) wa(i) = w[i / dim] * a.values[i];
    return basis.values().transpose() * wa;
}

} // namespace levyns
