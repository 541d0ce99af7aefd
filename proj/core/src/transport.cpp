#include "levyns/transport.hpp"

#include "levyns/errors.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace levyns {

namespace {

void multilinear(const GridField& u, const Point& x, double* out) {
    const auto& g = *u.grid;
    const int dim = g.dim(), res = g.res(), comps = u.components;
    const double h = g.spacing();
    std::array<int, 3> lo{0, 0, 0}, hi{0, 0, 0};
    std::array<double, 3> frac{0.0, 0.0, 0.0};
    for (int d = 0; d < dim; ++d) {
        if (g.periodic()) {
            double s = x[d] / h;
            s -= res * std::floor(s / res);
            int b = static_cast<int>(std::floor(s));
            frac[d] = s - b;
            b %= res;
            lo[d] = b;
            hi[d] = (b + 1) % res;
        } else {
            const double s = std::clamp(x[d], 0.0, 1.0) / h;
            const int b = std::min(static_cast<int>(std::floor(s)), res - 2);
            frac[d] = s - b;
            lo[d] = b;
            hi[d] = b + 1;
        }
    }
    for (int c = 0; c < comps; ++c) out[c] = 0.0;
    for (int corner = 0; corner < (1 << dim); ++corner) {
        double w = 1.0;
        std::array<int, 3> idx{0, 0, 0};
        for (int d = 0; d < dim; ++d) {
            const bool up = (corner >> d) & 1;
            idx[d] = up ? hi[d] : lo[d];
            w *= up ? frac[d] : 1.0 - frac[d];
        }
        if (w == 0.0) continue;
        const std::size_t n = g.node(idx[0], idx[1], idx[2]);
        for (int c = 0; c < comps; ++c) out[c] += w * u.values[n * comps + c];
    }
}

/// Four-point Lagrange stencil around index coordinate s.
struct Stencil {
    std::array<int, 4> idx;
    std::array<double, 4> w;
    int cell_lo, cell_hi;
};

Stencil make_stencil(double s, int res, bool periodic) {
    Stencil st{};
    int base = static_cast<int>(std::floor(s));
    int start = base - 1;
    if (!periodic) {
        base = std::clamp(base, 0, res - 2);
        start = std::clamp(base - 1, 0, res - 4);
    }
    for (int j = 0; j < 4; ++j) {
        const int pj = start + j;
        double w = 1.0;
        for (int m = 0; m < 4; ++m) {
            if (m == j) continue;
            const int pm = start + m;
            w *= (s - pm) / static_cast<double>(pj - pm);
        }
        st.w[j] = w;
        st.idx[j] = periodic ? ((pj % res) + res) % res : pj;
    }
    st.cell_lo = periodic ? ((base % res) + res) % res : base;
    st.cell_hi = periodic ? (st.cell_lo + 1) % res : base + 1;
    return st;
}

GridField advect_values(const GridField& rho, const VelocitySampler& u, double dt) {
    const auto& g = *rho.grid;
    const int dim = g.dim(), res = g.res();
    const double h = g.spacing();
    const bool periodic = g.periodic();
    GridField out(rho.grid, 1);

    for (std::size_t n = 0; n < g.node_count(); ++n) {
        const auto idx = g.index(n);
        // departure point in index coordinates: RK2 midpoint rule
        double v[3] = {0.0, 0.0, 0.0};
        Point x{0.0, 0.0, 0.0};
        for (int d = 0; d < dim; ++d) x[d] = idx[d] * h;
        u.at(x, v);
        Point xm{0.0, 0.0, 0.0};
        for (int d = 0; d < dim; ++d) xm[d] = (idx[d] - 0.5 * dt * v[d] / h) * h;
        u.at(xm, v);
        std::array<double, 3> s{0.0, 0.0, 0.0};
        for (int d = 0; d < dim; ++d) {
            s[d] = idx[d] - dt * v[d] / h;
            if (!periodic) {
                if (s[d] < -1.0 || s[d] > res) {
                    std::ostringstream msg;
                    msg << "departure point leaves the box by more than one cell (|u| dt = "
                        << std::abs(dt * v[d]) << ", h = " << h << "); refine dt or the grid";
                    throw ConfigError(msg.str());
                }
                s[d] = std::clamp(s[d], 0.0, static_cast<double>(res - 1));
            }
        }
        std::array<Stencil, 3> st{};
        for (int d = 0; d < dim; ++d) st[d] = make_stencil(s[d], res, periodic);

        double value = 0.0;
        const int kz = dim == 3 ? 4 : 1;
        for (int c = 0; c < kz; ++c)
            for (int b = 0; b < 4; ++b)
                for (int a = 0; a < 4; ++a) {
                    const double w = st[0].w[a] * st[1].w[b] * (dim == 3 ? st[2].w[c] : 1.0);
                    value += w * rho.values[g.node(st[0].idx[a], st[1].idx[b], dim == 3 ? st[2].idx[c] : 0)];
                }

        double lo = std::numeric_limits<double>::infinity(), hi = -lo;
        for (int corner = 0; corner < (1 << dim); ++corner) {
            std::array<int, 3> ci{0, 0, 0};
            for (int d = 0; d < dim; ++d) ci[d] = ((corner >> d) & 1) ? st[d].cell_hi : st[d].cell_lo;
            const double r = rho.values[g.node(ci[0], ci[1], ci[2])];
            lo = std::min(lo, r);
            hi = std::max(hi, r);
        }
        out.values[n] = std::clamp(value, lo, hi);
    }
    return out;
}

double weighted_sum(const GridField& f) {
    const auto w = f.grid->weights();
    double s = 0.0;
    for (std::size_t i = 0; i < f.values.size(); ++i) s += w[i] * f.values[i];
    return s;
}

/// Restores the target mass by a convex blend toward the input extremes,
/// which keeps every value inside [lo, hi].
double correct_mass(GridField& f, double target, double lo, double hi) {
    const auto w = f.grid->weights();
    const double defect = target - weighted_sum(f);
    if (defect == 0.0) return 0.0;
    double room = 0.0;
    for (std::size_t i = 0; i < f.values.size(); ++i) room += w[i] * (defect > 0 ? hi - f.values[i] : f.values[i] - lo);
    if (room <= 0.0) return defect / target;
    const double theta = std::min(1.0, std::abs(defect) / room);
    for (auto& v : f.values) {
        v += defect > 0 ? theta * (hi - v) : -theta * (v - lo);
        v = std::clamp(v, lo, hi);
    }
    return defect / target;
}

} // namespace

DensityField::DensityField(GridField v, double lo, double hi) : values(std::move(v)), lower(lo), upper(hi) {
    if (!values.grid || values.components != 1) throw UsageError("DensityField needs a scalar grid field");
    if (!(lo > 0.0)) {
        throw ConfigError("density lower bound must be positive: the model requires 0 < m <= rho0 <= M");
    }
    if (!(hi >= lo)) throw ConfigError("density bounds must satisfy m <= M");
    const double mn = min(), mx = max();
    if (mn < lo || mx > hi) {
        std::ostringstream msg;
        msg << "density samples span [" << mn << ", " << mx << "], outside the declared bounds [" << lo << ", " << hi
            << "]";
        throw ConfigError(msg.str());
    }
    initial_mass = mass();
}

DensityField DensityField::constant(const GridPtr& grid, double value) {
    return DensityField(GridField(grid, 1, value), value, value);
}

double DensityField::min() const { return *std::min_element(values.values.begin(), values.values.end()); }
double DensityField::max() const { return *std::max_element(values.values.begin(), values.values.end()); }
double DensityField::mass() const { return weighted_sum(values); }

SpectralVelocity::SpectralVelocity(const BasisSet& basis, CoefficientVector phi)
    : basis_(basis), phi_(std::move(phi)), zero_(phi_.isZero(0.0)) {
    if (basis.provider() == Provider::DirichletStokes) nodal_ = eval_velocity(phi_, basis);
}

void SpectralVelocity::at(const Point& x, double* out) const {
    if (zero_) {
        for (int c = 0; c < basis_.dim(); ++c) out[c] = 0.0;
        return;
    }
    if (basis_.provider() == Provider::TorusFourier) basis_.velocity_at(x, phi_, out);
    else multilinear(nodal_, x, out);
}

NodalVelocity::NodalVelocity(GridField u) : u_(std::move(u)) {
    zero_ = std::all_of(u_.values.begin(), u_.values.end(), [](double v) { return v == 0.0; });
}

void NodalVelocity::at(const Point& x, double* out) const { multilinear(u_, x, out); }

DensityField advance_density(const DensityField& rho, const VelocitySampler& u, double dt, TransportStats* stats) {
    if (!(dt > 0.0)) throw UsageError("advance_density: dt must be positive");
    if (stats) stats->mass_correction = 0.0;
    if (u.is_zero()) return rho;
    DensityField out = rho;
    const double lo = rho.min(), hi = rho.max();
    out.values = advect_values(rho.values, u, dt);
    const double c = correct_mass(out.values, rho.initial_mass, lo, hi);
    if (stats) stats->mass_correction = c;
    return out;
}

DensityField advance_density(const DensityField& rho, const GridField& velocity, double dt, TransportStats* stats) {
    require_compatible(velocity, GridField(rho.grid(), rho.grid()->dim()), "advance_density");
    return advance_density(rho, NodalVelocity(velocity), dt, stats);
}

ReciprocalReport reciprocal_check(const std::vector<DensityField>& rho_path, const std::vector<TransportStep>& steps) {
    if (rho_path.size() != steps.size() + 1) {
        throw UsageError("reciprocal_check: density path must have one more entry than velocity steps");
    }
    ReciprocalReport rep;
    const auto& r0 = rho_path.front();
    GridField inv(r0.grid(), 1);
    for (std::size_t i = 0; i < inv.values.size(); ++i) inv.values[i] = 1.0 / r0.values.values[i];
    DensityField sigma(std::move(inv), 1.0 / r0.upper, 1.0 / r0.lower);
    auto deviation = [&](const DensityField& rho) {
        double m = 0.0;
        for (std::size_t i = 0; i < rho.values.values.size(); ++i)
            m = std::max(m, std::abs(rho.values.values[i] * sigma.values.values[i] - 1.0));
        return m;
    };
    rep.max_deviation = deviation(r0);
    for (std::size_t k = 0; k < steps.size(); ++k) {
        sigma = advance_density(sigma, *steps[k].velocity, steps[k].dt);
        rep.max_deviation = std::max(rep.max_deviation, deviation(rho_path[k + 1]));
    }
    return rep;
}

} // namespace levyns
