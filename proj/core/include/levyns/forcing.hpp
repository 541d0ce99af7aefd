#pragma once

#include "levyns/grid.hpp"
#include "levyns/intensity.hpp"
#include "levyns/rng.hpp"

#include <functional>
#include <map>
#include <string>
#include <vector>

namespace levyns {

/// Map from a velocity field to a forcing field, with the constants it was
/// built to satisfy: ||Phi(u) - Phi(v)|| <= lipschitz ||u - v|| and
/// ||Phi(u)|| <= growth0 + growth1 ||u|| (L2 norms on the grid).
struct FieldMap {
    std::function<void(const GridField& u, GridField& out)> apply;
    double lipschitz = 0.0;
    double growth0 = 0.0;
    double growth1 = 0.0;

    bool zero() const noexcept { return !apply; }
    GridField operator()(const GridField& u) const;
};

/// Separable jump coefficient (u, z) -> scale(|z|) * shape(u).
struct JumpMap {
    FieldMap shape;
    std::function<double(double)> scale;

    bool zero() const noexcept { return shape.zero() || !scale; }
    GridField operator()(const GridField& u, double radius) const;
};

struct DeclaredConstants {
    double lipschitz = 0.0;
    double growth = 0.0;
    /// Constant of the integrated Lipschitz condition on (F, G).
    double jump_lipschitz = 0.0;
    /// p -> constant of the integrated p-th moment growth condition on (F, G).
    std::map<int, double> jump_moment;

    double jump_moment_at(int p) const;
};

/// f and g act on the velocity; F on small marks |z| < 1; G on large marks.
/// All maps are time independent.
struct ForcingSpec {
    std::string name = "zero";
    FieldMap f;
    std::vector<FieldMap> g;
    JumpMap F;
    JumpMap G;
    DeclaredConstants declared;

    bool has_drift() const noexcept { return !f.zero(); }
    bool has_brownian() const noexcept;
    bool has_jumps() const noexcept { return !F.zero() || !G.zero(); }
};

using ParamTable = std::map<std::string, double>;

/// Names accepted by builtin_forcing.
const std::vector<std::string>& forcing_catalog();

/// Default parameter table of a catalog entry.
ParamTable forcing_defaults(const std::string& name);

/// Instantiates a catalog entry. Declared constants are computed from the
/// parameters, the intensity measure and the Brownian dimension; entries in
/// `overrides` (keys lipschitz, growth, jump_lipschitz, jump_moment_<p>)
/// replace them.
ForcingSpec builtin_forcing(const std::string& name, const ParamTable& params, int brownian_dim,
                            const IntensityMeasure& mu, const GridPtr& grid, const ParamTable& overrides = {});

/// Fills in declared constants of a spec from the constants of its maps.
DeclaredConstants derive_constants(const ForcingSpec& spec, const IntensityMeasure& mu);

struct ContractReport {
    double lipschitz_ratio = 0.0;
    double growth_ratio = 0.0;
    double jump_lipschitz_ratio = 0.0;
    std::map<int, double> jump_moment_ratio;
    /// sqrt of the mark-integrated squared norm of (F, G) at u = 0.
    double origin_norm = 0.0;
    bool pass = true;
    std::vector<std::string> failures;
};

/// Falsification sampler: evaluates the contract quotients on `samples`
/// random field pairs and compares each maximum with the declared constant.
ContractReport verify_contract(const ForcingSpec& spec, const IntensityMeasure& mu, const GridPtr& grid,
                               int samples, PathRng& rng);

/// Random vector field on the grid with amplitudes spread over four decades.
GridField random_field(const GridPtr& grid, int components, PathRng& rng);

} // namespace levyns
