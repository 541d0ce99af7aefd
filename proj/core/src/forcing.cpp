#include "levyns/forcing.hpp"

#include "levyns/errors.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

namespace levyns {

namespace {

FieldMap linear_map(double c) {
    if (c == 0.0) return {};
    return {[c](const GridField& u, GridField& out) {
                for (std::size_t i = 0; i < u.values.size(); ++i) out.values[i] = c * u.values[i];
            },
            std::abs(c), 0.0, std::abs(c)};
}

/// x -> x / (1 + ||x||_{L2}), a global saturation with values in the unit ball.
FieldMap global_saturation() {
    return {[](const GridField& u, GridField& out) {
                const double s = 1.0 / (1.0 + l2_norm(u));
                for (std::size_t i = 0; i < u.values.size(); ++i) out.values[i] = s * u.values[i];
            },
            1.0, 1.0, 0.0};
}

FieldMap tanh_map(double c) {
    if (c == 0.0) return {};
    return {[c](const GridField& u, GridField& out) {
                for (std::size_t i = 0; i < u.values.size(); ++i) out.values[i] = c * std::tanh(u.values[i]);
            },
            std::abs(c), 0.0, std::abs(c)};
}

/// Pointwise x -> c x / sqrt(1 + |x|^2) on the component vector.
FieldMap soft_clip(double c) {
    if (c == 0.0) return {};
    return {[c](const GridField& u, GridField& out) {
                const int k = u.components;
                for (std::size_t n = 0; n < u.node_count(); ++n) {
                    double r2 = 0.0;
                    for (int i = 0; i < k; ++i) r2 += u.values[n * k + i] * u.values[n * k + i];
                    const double s = c / std::sqrt(1.0 + r2);
                    for (int i = 0; i < k; ++i) out.values[n * k + i] = s * u.values[n * k + i];
                }
            },
            std::abs(c), 0.0, std::abs(c)};
}

/// Fixed smooth field of unit L2 norm vanishing on the box boundary.
FieldMap constant_field(const GridPtr& grid) {
    const int d = grid->dim();
    auto h = std::make_shared<GridField>(grid, d);
    constexpr double pi = std::numbers::pi;
    for (std::size_t n = 0; n < grid->node_count(); ++n) {
        const auto x = grid->coord(n);
        double bump = 1.0;
        for (int j = 0; j < d; ++j) bump *= std::sin(pi * x[j]);
        for (int c = 0; c < d; ++c) h->at(n, c) = bump * std::cos(2.0 * pi * x[(c + 1) % d]);
    }
    *h *= 1.0 / l2_norm(*h);
    return {[h](const GridField&, GridField& out) { out.values = h->values; }, 0.0, 1.0, 0.0};
}

double get(const ParamTable& p, const std::string& key) {
    const auto it = p.find(key);
    if (it == p.end()) throw ConfigError("forcing parameter '" + key + "' is missing");
    return it->second;
}

} // namespace

GridField FieldMap::operator()(const GridField& u) const {
    GridField out(u.grid, u.components);
    if (apply) apply(u, out);
    return out;
}

GridField JumpMap::operator()(const GridField& u, double radius) const {
    GridField out(u.grid, u.components);
    if (zero()) return out;
    shape.apply(u, out);
    out *= scale(radius);
    return out;
}

double DeclaredConstants::jump_moment_at(int p) const {
    const auto it = jump_moment.find(p);
    if (it == jump_moment.end()) throw UsageError("no declared jump moment constant for p = " + std::to_string(p));
    return it->second;
}

bool ForcingSpec::has_brownian() const noexcept {
    return std::any_of(g.begin(), g.end(), [](const FieldMap& m) { return !m.zero(); });
}

const std::vector<std::string>& forcing_catalog() {
    static const std::vector<std::string> names{"zero", "linear_damping", "bounded_saturation", "jump_scaled"};
    return names;
}

ParamTable forcing_defaults(const std::string& name) {
    if (name == "zero") return {};
    if (name == "linear_damping") return {{"kappa", 0.5}, {"sigma", 0.2}, {"a_F", 0.3}, {"b_G", 0.3}};
    if (name == "bounded_saturation") return {{"beta", 0.5}, {"gamma", 0.2}, {"a", 0.3}, {"b", 0.3}};
    if (name == "jump_scaled") return {{"kappa", 0.5}, {"c_s", 0.2}, {"c0", 0.1}, {"c1", 0.2}};
    std::ostringstream msg;
    msg << "unknown forcing '" << name << "' (available:";
    for (const auto& n : forcing_catalog()) msg << ' ' << n;
    msg << ')';
    throw UsageError(msg.str());
}

DeclaredConstants derive_constants(const ForcingSpec& spec, const IntensityMeasure& mu) {
    DeclaredConstants c;
    double g_lip2 = 0.0, g0_2 = 0.0, g1_2 = 0.0;
    for (const auto& gi : spec.g) {
        g_lip2 += gi.lipschitz * gi.lipschitz;
        g0_2 += gi.growth0 * gi.growth0;
        g1_2 += gi.growth1 * gi.growth1;
    }
    c.lipschitz = std::max(spec.f.lipschitz, std::sqrt(g_lip2));
    c.growth = std::max({spec.f.growth0, spec.f.growth1, std::sqrt(g0_2), std::sqrt(g1_2)});

    auto small_int = [&](double p) {
        if (spec.F.zero()) return 0.0;
        return mu.radial_integral([&](double r) { return std::pow(std::abs(spec.F.scale(r)), p); }, 0.0, 1.0);
    };
    auto large_int = [&](double p) {
        if (spec.G.zero()) return 0.0;
        return mu.radial_integral([&](double r) { return std::pow(std::abs(spec.G.scale(r)), p); }, 1.0);
    };
    const double s2 = small_int(2.0), l2 = large_int(2.0);
    c.jump_lipschitz = s2 * spec.F.shape.lipschitz * spec.F.shape.lipschitz +
                       l2 * spec.G.shape.lipschitz * spec.G.shape.lipschitz;
    const double kF = std::max(spec.F.shape.growth0, spec.F.shape.growth1);
    const double kG = std::max(spec.G.shape.growth0, spec.G.shape.growth1);
    for (int p : {2, 4, 8}) {
        c.jump_moment[p] = std::pow(2.0, p - 1) * (small_int(p) * std::pow(kF, p) + large_int(p) * std::pow(kG, p));
    }
    // the growth condition also covers the mark-integrated size of (F, G) at u = 0
    const double origin = std::sqrt(s2 * spec.F.shape.growth0 * spec.F.shape.growth0 +
                                    l2 * spec.G.shape.growth0 * spec.G.shape.growth0);
    c.growth = std::max(c.growth, origin);
    return c;
}

ForcingSpec builtin_forcing(const std::string& name, const ParamTable& params, int brownian_dim,
                            const IntensityMeasure& mu, const GridPtr& grid, const ParamTable& overrides) {
    ParamTable p = forcing_defaults(name);
    for (const auto& [k, v] : params) {
        if (!p.count(k)) throw ConfigError("forcing '" + name + "' has no parameter '" + k + "'");
        p[k] = v;
    }
    ForcingSpec s;
    s.name = name;
    if (name == "linear_damping") {
        const double a = get(p, "a_F"), b = get(p, "b_G");
        s.f = linear_map(-get(p, "kappa"));
        s.g.assign(brownian_dim, linear_map(get(p, "sigma")));
        if (a != 0.0) s.F = {linear_map(1.0), [a](double r) { return a * std::min(r, 1.0); }};
        if (b != 0.0) s.G = {global_saturation(), [b](double r) { return b * r; }};
    } else if (name == "bounded_saturation") {
        const double a = get(p, "a"), b = get(p, "b");
        s.f = tanh_map(get(p, "beta"));
        s.g.assign(brownian_dim, soft_clip(get(p, "gamma")));
        if (a != 0.0) s.F = {tanh_map(1.0), [a](double r) { return a * r; }};
        if (b != 0.0) s.G = {tanh_map(1.0), [b](double r) { return b * (1.0 - std::exp(-r)); }};
    } else if (name == "jump_scaled") {
        const double cs = get(p, "c_s"), c0 = get(p, "c0"), c1 = get(p, "c1");
        s.f = linear_map(-get(p, "kappa"));
        s.g.assign(brownian_dim, FieldMap{});
        if (cs != 0.0) s.F = {constant_field(grid), [cs](double r) { return cs * r; }};
        if (c0 != 0.0 || c1 != 0.0) s.G = {constant_field(grid), [c0, c1](double r) { return c0 + c1 * r; }};
    } else {
        s.g.assign(brownian_dim, FieldMap{});
    }
    s.declared = derive_constants(s, mu);

    for (const auto& [k, v] : overrides) {
        if (k == "lipschitz") s.declared.lipschitz = v;
        else if (k == "growth") s.declared.growth = v;
        else if (k == "jump_lipschitz") s.declared.jump_lipschitz = v;
        else if (k.rfind("jump_moment_", 0) == 0) s.declared.jump_moment[std::stoi(k.substr(12))] = v;
        else throw ConfigError("unknown declared constant '" + k + "'");
    }
    return s;
}

GridField random_field(const GridPtr& grid, int components, PathRng& rng) {
    GridField u(grid, components);
    const double amp = std::pow(10.0, -2.0 + 4.0 * rng.uniform());
    const bool smooth = rng.uniform() < 0.5;
    if (smooth) {
        constexpr double two_pi = 2.0 * std::numbers::pi;
        for (int c = 0; c < components; ++c) {
            const int kx = 1 + static_cast<int>(3 * rng.uniform());
            const int ky = static_cast<int>(3 * rng.uniform());
            const double ph = two_pi * rng.uniform();
            const double a = rng.normal();
            for (std::size_t n = 0; n < grid->node_count(); ++n) {
                const auto x = grid->coord(n);
                u.at(n, c) = amp * a * std::sin(two_pi * (kx * x[0] + ky * x[1]) + ph);
            }
        }
    } else {
        for (auto& v : u.values) v = amp * rng.normal();
    }
    return u;
}

ContractReport verify_contract(const ForcingSpec& spec, const IntensityMeasure& mu, const GridPtr& grid,
                               int samples, PathRng& rng) {
    ContractReport rep;
    const int d = grid->dim();
    const auto& dc = spec.declared;

    auto small_int = [&](double p) {
        if (spec.F.zero()) return 0.0;
        return mu.radial_integral([&](double r) { return std::pow(std::abs(spec.F.scale(r)), p); }, 0.0, 1.0);
    };
    auto large_int = [&](double p) {
        if (spec.G.zero()) return 0.0;
        return mu.radial_integral([&](double r) { return std::pow(std::abs(spec.G.scale(r)), p); }, 1.0);
    };
    std::map<int, double> sI, lI;
    for (int p : {2, 4, 8}) {
        sI[p] = small_int(p);
        lI[p] = large_int(p);
        rep.jump_moment_ratio[p] = 0.0;
    }

    auto g_tuple_diff = [&](const GridField& u, const GridField& v) {
        double s = 0.0;
        for (const auto& gi : spec.g) {
            if (gi.zero()) continue;
            const double n = l2_norm(gi(u) - gi(v));
            s += n * n;
        }
        return std::sqrt(s);
    };
    auto g_tuple_norm = [&](const GridField& u) {
        double s = 0.0;
        for (const auto& gi : spec.g) {
            if (gi.zero()) continue;
            const double n = l2_norm(gi(u));
            s += n * n;
        }
        return std::sqrt(s);
    };
    auto shape_norm = [](const JumpMap& m, const GridField& u) { return m.zero() ? 0.0 : l2_norm(m.shape(u)); };
    auto shape_diff = [](const JumpMap& m, const GridField& u, const GridField& v) {
        return m.zero() ? 0.0 : l2_norm(m.shape(u) - m.shape(v));
    };

    const GridField zero(grid, d);
    {
        const double f0 = shape_norm(spec.F, zero), g0 = shape_norm(spec.G, zero);
        rep.origin_norm = std::sqrt(sI[2] * f0 * f0 + lI[2] * g0 * g0);
    }

    for (int s = 0; s < samples; ++s) {
        const GridField u = random_field(grid, d, rng);
        GridField v = random_field(grid, d, rng);
        if (s % 2 == 1) {
            // nearby pair probes the local slope
            v *= 1e-3;
            v = u + v;
        }
        const double duv = l2_norm(u - v);
        const double nu = l2_norm(u);
        if (duv > 0.0) {
            const double lf = spec.f.zero() ? 0.0 : l2_norm(spec.f(u) - spec.f(v)) / duv;
            rep.lipschitz_ratio = std::max({rep.lipschitz_ratio, lf, g_tuple_diff(u, v) / duv});
            const double jf = shape_diff(spec.F, u, v), jg = shape_diff(spec.G, u, v);
            rep.jump_lipschitz_ratio =
                std::max(rep.jump_lipschitz_ratio, (sI[2] * jf * jf + lI[2] * jg * jg) / (duv * duv));
        }
        const double gf = spec.f.zero() ? 0.0 : l2_norm(spec.f(u));
        rep.growth_ratio = std::max({rep.growth_ratio, gf / (1.0 + nu), g_tuple_norm(u) / (1.0 + nu)});
        const double nf = shape_norm(spec.F, u), ng = shape_norm(spec.G, u);
        for (int p : {2, 4, 8}) {
            const double lhs = sI[p] * std::pow(nf, p) + lI[p] * std::pow(ng, p);
            rep.jump_moment_ratio[p] = std::max(rep.jump_moment_ratio[p], lhs / (1.0 + std::pow(nu, p)));
        }
    }

    auto check = [&](const std::string& what, double observed, double declared) {
        if (!(observed <= declared * 1.0001)) {
            std::ostringstream msg;
            msg << what << ": observed " << observed << " exceeds declared " << declared;
            rep.failures.push_back(msg.str());
        }
    };
    check("lipschitz", rep.lipschitz_ratio, dc.lipschitz);
    check("growth", rep.growth_ratio, dc.growth);
    check("origin growth", rep.origin_norm, dc.growth);
    check("jump lipschitz", rep.jump_lipschitz_ratio, dc.jump_lipschitz);
    for (int p : {2, 4, 8}) {
        const auto it = dc.jump_moment.find(p);
        check("jump moment p=" + std::to_string(p), rep.jump_moment_ratio[p], it == dc.jump_moment.end() ? 0.0 : it->second);
    }
    rep.pass = rep.failures.empty();
    return rep;
}

} // namespace levyns
