#include "levyns/config.hpp"

#include "levyns/basis_cache.hpp"
#include "levyns/errors.hpp"

#include "json.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <set>
#include <sstream>

namespace levyns {

using nlohmann::json;

namespace {

class Reader {
public:
    explicit Reader(std::vector<std::string>& errors) : errors_(errors) {}

    /// Returns the section object (or an empty one) and records unknown keys.
    const json& section(const json& root, const std::string& name, const std::set<std::string>& allowed) {
        static const json empty = json::object();
        if (!root.contains(name)) return empty;
        const json& s = root.at(name);
        if (!s.is_object()) {
            errors_.push_back("'" + name + "' must be an object");
            return empty;
        }
        for (const auto& [k, v] : s.items()) {
            if (!allowed.count(k)) errors_.push_back("unknown key '" + name + "." + k + "'");
        }
        return s;
    }

    template <class T>
    void get(const json& s, const std::string& section, const std::string& key, T& out, bool required = false) {
        if (!s.contains(key)) {
            if (required) errors_.push_back("missing required key '" + section + "." + key + "'");
            return;
        }
        try {
            out = s.at(key).get<T>();
        } catch (const json::exception&) {
            errors_.push_back("key '" + section + "." + key + "' has the wrong type");
        }
    }

    void params(const json& s, const std::string& section, const std::string& key, ParamTable& out) {
        if (!s.contains(key)) return;
        const json& p = s.at(key);
        if (!p.is_object()) {
            errors_.push_back("key '" + section + "." + key + "' must be an object of numbers");
            return;
        }
        for (const auto& [k, v] : p.items()) {
            if (!v.is_number()) {
                errors_.push_back("parameter '" + section + "." + key + "." + k + "' must be a number");
                continue;
            }
            out[k] = v.get<double>();
        }
    }

private:
    std::vector<std::string>& errors_;
};

[[noreturn]] void fail(const std::vector<std::string>& errors) {
    std::ostringstream msg;
    msg << "invalid configuration:";
    for (const auto& e : errors) msg << "\n  - " << e;
    throw ConfigError(msg.str());
}

void check_invariants(const RunConfig& c, std::vector<std::string>& errors) {
    auto require = [&](bool ok, const std::string& what) {
        if (!ok) errors.push_back(what);
    };
    require(c.basis.provider == "torus_fourier" || c.basis.provider == "dirichlet_stokes",
            "unknown basis.provider '" + c.basis.provider + "' (available: torus_fourier, dirichlet_stokes)");
    require(c.basis.n >= 1, "basis.n must be at least 1");
    require(c.basis.resolution >= 4, "basis.resolution must be at least 4");
    require(c.basis.d_space == 2 || c.basis.d_space == 3, "basis.d_space must be 2 or 3");
    require(c.physics.nu > 0.0, "physics.nu must be positive");
    require(c.physics.mass_reuse_steps >= 1, "physics.mass_reuse_steps must be at least 1");
    require(c.noise.intensity == "none" || c.noise.intensity == "uniform_ball" || c.noise.intensity == "tempered_stable",
            "unknown noise.intensity '" + c.noise.intensity + "' (available: none, uniform_ball, tempered_stable)");
    require(c.noise.epsilon > 0.0 && c.noise.epsilon < 1.0, "noise.epsilon must lie in (0, 1)");
    require(c.noise.mark_dim >= 1 && c.noise.mark_dim <= 8, "noise.mark_dim must lie in [1, 8]");
    require(c.noise.brownian_dim >= 0 && c.noise.brownian_dim <= 16, "noise.brownian_dim must lie in [0, 16]");
    {
        const auto& cat = forcing_catalog();
        if (std::find(cat.begin(), cat.end(), c.forcing.name) == cat.end()) {
            std::string names;
            for (const auto& n : cat) names += (names.empty() ? "" : ", ") + n;
            errors.push_back("unknown forcing.name '" + c.forcing.name + "' (available: " + names + ")");
        }
    }
    require(c.initial.m > 0.0 && c.initial.m <= c.initial.M,
            "initial density bounds must satisfy 0 < m <= rho0 <= M (got m = " + std::to_string(c.initial.m) +
                ", M = " + std::to_string(c.initial.M) + "); vacuum states are not supported");
    require(c.initial.velocity == "zero" || c.initial.velocity == "mode" || c.initial.velocity == "coefficients" ||
                c.initial.velocity == "decay",
            "unknown initial.velocity '" + c.initial.velocity + "' (available: zero, mode, coefficients, decay)");
    require(c.initial.density == "constant" || c.initial.density == "smooth",
            "unknown initial.density '" + c.initial.density + "' (available: constant, smooth)");
    require(c.time.T > 0.0, "time.T must be positive");
    require(c.time.dt > 0.0, "time.dt must be positive");
    require(c.time.storage_stride >= 1, "time.storage_stride must be at least 1");
    if (c.time.T > 0.0 && c.time.dt > 0.0) {
        const double steps = c.time.T / c.time.dt;
        if (std::abs(steps - std::round(steps)) > 1e-9 * steps) {
            errors.push_back("time.dt must divide time.T into a whole number of steps");
        } else if (c.time.storage_stride >= 1 && std::lround(steps) % c.time.storage_stride != 0) {
            errors.push_back("time.storage_stride must divide the number of steps T/dt");
        } else if (c.time.storage_stride >= 1) {
            const double ds = c.storage_dt();
            for (double th : c.ensemble.theta) {
                const double j = th / ds;
                if (th < 0.0 || th >= c.time.T || std::abs(j - std::round(j)) > 1e-9 * std::max(1.0, j)) {
                    std::ostringstream msg;
                    msg << "ensemble.theta value " << th << " is not on the storage grid {k * " << ds
                        << ", k = 0.." << std::lround(c.time.T / ds) - 1 << "}";
                    errors.push_back(msg.str());
                }
            }
        }
    }
    require(c.ensemble.n_paths >= 1, "ensemble.n_paths must be at least 1");
    for (int p : c.ensemble.moments)
        require(p == 2 || p == 4 || p == 8, "ensemble.moments entries must be 2, 4 or 8 (got " + std::to_string(p) + ")");
    require(c.ensemble.k_dual == 0 || c.ensemble.k_dual >= 2 * c.basis.n, "ensemble.k_dual must be 0 (auto) or at least 2 n");
    require(c.ensemble.ito_mode >= 0 && c.ensemble.ito_mode < std::max(1, c.basis.n), "ensemble.ito_mode must index a basis mode");
    require(c.stopping.N > 0.0, "stopping.N must be positive");
    require(c.stopping.mode == "observe" || c.stopping.mode == "enforce", "stopping.mode must be 'observe' or 'enforce'");
    for (const auto& f : c.output.formats)
        require(f == "json" || f == "csv" || f == "gnuplot" || f == "jsonl",
                "unknown output format '" + f + "' (available: json, csv, gnuplot, jsonl)");
    require(c.output.trajectory_paths >= 0, "output.trajectory_paths must be nonnegative");
}

} // namespace

int RunConfig::n_steps() const { return static_cast<int>(std::lround(time.T / time.dt)); }

void validate(const RunConfig& cfg) {
    std::vector<std::string> errors;
    check_invariants(cfg, errors);
    if (!errors.empty()) fail(errors);
}

RunConfig parse_config_text(const std::string& text, const std::string& origin) {
    json root;
    try {
        root = json::parse(text, nullptr, true, true);
    } catch (const json::parse_error& e) {
        throw ConfigError(origin + ": not valid JSON: " + e.what());
    }
    if (!root.is_object()) throw ConfigError(origin + ": top level must be an object");

    RunConfig c;
    std::vector<std::string> errors;
    Reader r(errors);
    const std::set<std::string> sections{"basis", "physics", "noise", "forcing", "initial", "time",
                                         "ensemble", "stopping", "output"};
    for (const auto& [k, v] : root.items())
        if (!sections.count(k)) errors.push_back("unknown section '" + k + "'");
    if (!root.contains("basis")) errors.push_back("missing required key 'basis.n'");
    if (!root.contains("time")) errors.push_back("missing required keys 'time.T' and 'time.dt'");

    const auto& b = r.section(root, "basis", {"provider", "n", "resolution", "d_space", "cache_dir"});
    r.get(b, "basis", "provider", c.basis.provider);
    r.get(b, "basis", "n", c.basis.n, root.contains("basis"));
    r.get(b, "basis", "resolution", c.basis.resolution);
    r.get(b, "basis", "d_space", c.basis.d_space);
    r.get(b, "basis", "cache_dir", c.basis.cache_dir);

    const auto& ph = r.section(root, "physics", {"nu", "mass_reuse_steps"});
    r.get(ph, "physics", "nu", c.physics.nu);
    r.get(ph, "physics", "mass_reuse_steps", c.physics.mass_reuse_steps);

    const auto& n = r.section(root, "noise", {"enabled", "brownian", "jumps", "intensity", "parameters", "mark_dim",
                                               "epsilon", "brownian_dim"});
    r.get(n, "noise", "enabled", c.noise.enabled);
    r.get(n, "noise", "brownian", c.noise.brownian);
    r.get(n, "noise", "jumps", c.noise.jumps);
    if (n.contains("intensity")) {
        r.get(n, "noise", "intensity", c.noise.intensity);
        c.noise.parameters.clear();
    }
    r.params(n, "noise", "parameters", c.noise.parameters);
    r.get(n, "noise", "mark_dim", c.noise.mark_dim);
    r.get(n, "noise", "epsilon", c.noise.epsilon);
    r.get(n, "noise", "brownian_dim", c.noise.brownian_dim);

    const auto& f = r.section(root, "forcing", {"name", "parameters", "declared"});
    r.get(f, "forcing", "name", c.forcing.name);
    r.params(f, "forcing", "parameters", c.forcing.parameters);
    r.params(f, "forcing", "declared", c.forcing.declared);

    const auto& in = r.section(root, "initial", {"velocity", "velocity_parameters", "coefficients", "density",
                                                  "density_parameters", "m", "M"});
    if (in.contains("velocity")) {
        r.get(in, "initial", "velocity", c.initial.velocity);
        c.initial.velocity_parameters.clear();
    }
    r.params(in, "initial", "velocity_parameters", c.initial.velocity_parameters);
    r.get(in, "initial", "coefficients", c.initial.coefficients);
    if (in.contains("density")) {
        r.get(in, "initial", "density", c.initial.density);
        c.initial.density_parameters.clear();
    }
    r.params(in, "initial", "density_parameters", c.initial.density_parameters);
    r.get(in, "initial", "m", c.initial.m);
    r.get(in, "initial", "M", c.initial.M);

    const auto& t = r.section(root, "time", {"T", "dt", "storage_stride"});
    r.get(t, "time", "T", c.time.T, root.contains("time"));
    r.get(t, "time", "dt", c.time.dt, root.contains("time"));
    r.get(t, "time", "storage_stride", c.time.storage_stride);

    const auto& e = r.section(root, "ensemble", {"n_paths", "seed", "moments", "theta", "k_dual", "ito_mode"});
    r.get(e, "ensemble", "n_paths", c.ensemble.n_paths);
    r.get(e, "ensemble", "seed", c.ensemble.seed);
    r.get(e, "ensemble", "moments", c.ensemble.moments);
    r.get(e, "ensemble", "theta", c.ensemble.theta);
    r.get(e, "ensemble", "k_dual", c.ensemble.k_dual);
    r.get(e, "ensemble", "ito_mode", c.ensemble.ito_mode);

    const auto& s = r.section(root, "stopping", {"N", "mode"});
    r.get(s, "stopping", "N", c.stopping.N);
    r.get(s, "stopping", "mode", c.stopping.mode);

    const auto& o = r.section(root, "output", {"directory", "formats", "trajectories", "trajectory_paths"});
    r.get(o, "output", "directory", c.output.directory);
    r.get(o, "output", "formats", c.output.formats);
    r.get(o, "output", "trajectories", c.output.trajectories);
    r.get(o, "output", "trajectory_paths", c.output.trajectory_paths);

    check_invariants(c, errors);
    if (!errors.empty()) fail(errors);
    if (c.ensemble.theta.empty()) c.ensemble.theta = default_theta(c);
    return c;
}

RunConfig parse_config(const std::filesystem::path& file) {
    std::ifstream is(file);
    if (!is) throw ConfigError("cannot read configuration file " + file.string());
    std::stringstream ss;
    ss << is.rdbuf();
    return parse_config_text(ss.str(), file.string());
}

std::vector<double> default_theta(const RunConfig& cfg) {
    std::vector<double> out;
    const double ds = cfg.storage_dt();
    for (int q : {64, 32, 16, 8, 4}) {
        const double th = cfg.time.T / q;
        const double j = th / ds;
        if (th >= ds * (1 - 1e-12) && std::abs(j - std::round(j)) <= 1e-9 * j) out.push_back(th);
    }
    return out;
}

std::string config_echo(const RunConfig& c) {
    json j;
    j["basis"] = {{"provider", c.basis.provider}, {"n", c.basis.n}, {"resolution", c.basis.resolution},
                  {"d_space", c.basis.d_space}, {"cache_dir", c.basis.cache_dir}};
    j["physics"] = {{"nu", c.physics.nu}, {"mass_reuse_steps", c.physics.mass_reuse_steps}};
    j["noise"] = {{"enabled", c.noise.enabled}, {"brownian", c.noise.brownian}, {"jumps", c.noise.jumps},
                  {"intensity", c.noise.intensity}, {"parameters", c.noise.parameters}, {"mark_dim", c.noise.mark_dim},
                  {"epsilon", c.noise.epsilon}, {"brownian_dim", c.noise.brownian_dim}};
    j["forcing"] = {{"name", c.forcing.name}, {"parameters", c.forcing.parameters}, {"declared", c.forcing.declared}};
    j["initial"] = {{"velocity", c.initial.velocity}, {"velocity_parameters", c.initial.velocity_parameters},
                    {"coefficients", c.initial.coefficients}, {"density", c.initial.density},
                    {"density_parameters", c.initial.density_parameters}, {"m", c.initial.m}, {"M", c.initial.M}};
    j["time"] = {{"T", c.time.T}, {"dt", c.time.dt}, {"storage_stride", c.time.storage_stride}};
    j["ensemble"] = {{"n_paths", c.ensemble.n_paths}, {"seed", c.ensemble.seed}, {"moments", c.ensemble.moments},
                     {"theta", c.ensemble.theta}, {"k_dual", c.ensemble.k_dual}, {"ito_mode", c.ensemble.ito_mode}};
    j["stopping"] = {{"N", c.stopping.N}, {"mode", c.stopping.mode}};
    j["output"] = {{"directory", c.output.directory}, {"formats", c.output.formats},
                   {"trajectories", c.output.trajectories}, {"trajectory_paths", c.output.trajectory_paths}};
    return j.dump(2) + "\n";
}

IntensityMeasure make_intensity(const RunConfig& c) {
    auto param = [&](const std::string& k, double def) {
        const auto it = c.noise.parameters.find(k);
        return it == c.noise.parameters.end() ? def : it->second;
    };
    auto allow = [&](std::set<std::string> keys) {
        for (const auto& [k, v] : c.noise.parameters)
            if (!keys.count(k)) throw ConfigError("intensity '" + c.noise.intensity + "' has no parameter '" + k + "'");
    };
    if (c.noise.intensity == "uniform_ball") {
        allow({"rate", "radius"});
        return IntensityMeasure::uniform_ball(c.noise.mark_dim, param("rate", 2.0), param("radius", 2.0));
    }
    if (c.noise.intensity == "tempered_stable") {
        allow({"c", "alpha"});
        return IntensityMeasure::tempered_stable(c.noise.mark_dim, param("c", 0.5), param("alpha", 0.8));
    }
    allow({});
    return IntensityMeasure::none(c.noise.mark_dim);
}

CoefficientVector initial_velocity(const RunConfig& c, const BasisSet& basis) {
    const int n = basis.size();
    CoefficientVector phi = CoefficientVector::Zero(n);
    auto param = [&](const std::string& k, double def) {
        const auto it = c.initial.velocity_parameters.find(k);
        return it == c.initial.velocity_parameters.end() ? def : it->second;
    };
    if (c.initial.velocity == "mode") {
        const int k = static_cast<int>(param("index", 0));
        if (k < 0 || k >= n) throw ConfigError("initial.velocity_parameters.index is outside the basis");
        phi(k) = param("amplitude", 1.0);
    } else if (c.initial.velocity == "coefficients") {
        for (int k = 0; k < n && k < static_cast<int>(c.initial.coefficients.size()); ++k) phi(k) = c.initial.coefficients[k];
    } else if (c.initial.velocity == "decay") {
        const double a = param("amplitude", 1.0);
        for (int k = 0; k < n; ++k) phi(k) = a / (1.0 + k);
    }
    return phi;
}

DensityField initial_density(const RunConfig& c, const GridPtr& grid) {
    const double m = c.initial.m, M = c.initial.M;
    auto param = [&](const std::string& k, double def) {
        const auto it = c.initial.density_parameters.find(k);
        return it == c.initial.density_parameters.end() ? def : it->second;
    };
    GridField rho(grid, 1);
    if (c.initial.density == "constant") {
        const double v = param("value", 0.5 * (m + M));
        std::fill(rho.values.begin(), rho.values.end(), v);
    } else {
        const double contrast = std::clamp(param("contrast", 0.9), 0.0, 1.0);
        constexpr double two_pi = 2.0 * std::numbers::pi;
        for (std::size_t p = 0; p < grid->node_count(); ++p) {
            const auto x = grid->coord(p);
            double s = std::sin(two_pi * x[0]) * std::cos(two_pi * x[1]);
            if (grid->dim() == 3) s *= std::cos(two_pi * x[2]);
            rho.values[p] = std::clamp(0.5 * (m + M) + 0.5 * (M - m) * contrast * s, m, M);
        }
    }
    return DensityField(std::move(rho), m, M);
}

Problem build_problem(const RunConfig& c) {
    validate(c);
    Problem p;
    const Provider prov = provider_from_string(c.basis.provider);
    p.basis = std::make_shared<const BasisSet>(
        build_basis_cached(prov, c.basis.n, c.basis.resolution, c.basis.d_space, c.basis.cache_dir));
    const int k_dual = c.ensemble.k_dual > 0 ? c.ensemble.k_dual : 2 * c.basis.n;
    p.dual_basis = std::make_shared<const BasisSet>(
        build_basis_cached(prov, k_dual, c.basis.resolution, c.basis.d_space, c.basis.cache_dir));

    p.noise.mu = make_intensity(c);
    p.noise.epsilon = c.noise.epsilon;
    p.noise.brownian_dim = c.noise.brownian_dim;
    p.noise.brownian = c.noise.enabled && c.noise.brownian;
    p.noise.jumps = c.noise.enabled && c.noise.jumps;

    ForcingSpec spec;
    try {
        spec = builtin_forcing(c.forcing.name, c.forcing.parameters, c.noise.brownian_dim, p.noise.mu, p.basis->grid(),
                               c.forcing.declared);
    } catch (const UsageError& e) {
        throw ConfigError(e.what());
    }
    p.model = std::make_shared<const GalerkinModel>(*p.basis, std::move(spec), p.noise.mu, c.physics.nu, c.noise.epsilon,
                                                    c.physics.mass_reuse_steps);
    p.rho0 = initial_density(c, p.basis->grid());
    p.phi0 = initial_velocity(c, *p.basis);
    p.m = c.initial.m;
    p.M = c.initial.M;
    p.T = c.time.T;
    p.n_steps = c.n_steps();
    p.storage_stride = c.time.storage_stride;
    p.stopping.N = c.stopping.N;
    p.stopping.mode = c.stopping.mode == "enforce" ? StopMode::Enforce : StopMode::Observe;
    p.moments = c.ensemble.moments;
    p.theta = c.ensemble.theta.empty() ? default_theta(c) : c.ensemble.theta;
    p.seed = c.ensemble.seed;
    p.n_paths = c.ensemble.n_paths;
    p.ito_mode = c.ensemble.ito_mode;
    return p;
}

} // namespace levyns
