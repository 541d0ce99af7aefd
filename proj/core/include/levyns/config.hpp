#pragma once

#include "levyns/forcing.hpp"
#include "levyns/harness.hpp"

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace levyns {

/// Run configuration. The file format is JSON; every key except basis.n,
/// time.T and time.dt has a default (see configs/default.json).
struct RunConfig {
    struct Basis {
        std::string provider = "torus_fourier";
        int n = 8;
        int resolution = 32;
        int d_space = 2;
        std::string cache_dir;
    } basis;
    struct Physics {
        double nu = 0.05;
        int mass_reuse_steps = 1;
    } physics;
    struct Noise {
        bool enabled = true;
        bool brownian = true;
        bool jumps = true;
        std::string intensity = "tempered_stable";
        ParamTable parameters{{"c", 0.5}, {"alpha", 0.8}};
        int mark_dim = 2;
        double epsilon = 1e-2;
        int brownian_dim = 2;
    } noise;
    struct Forcing {
        std::string name = "linear_damping";
        ParamTable parameters;
        ParamTable declared;
    } forcing;
    struct Initial {
        std::string velocity = "decay";
        ParamTable velocity_parameters{{"amplitude", 1.0}};
        std::vector<double> coefficients;
        std::string density = "smooth";
        ParamTable density_parameters{{"contrast", 0.9}};
        double m = 0.5;
        double M = 2.0;
    } initial;
    struct Time {
        double T = 1.0;
        double dt = 1.0 / 128;
        int storage_stride = 1;
    } time;
    struct Ensemble {
        int n_paths = 64;
        std::uint64_t seed = 20240601;
        std::vector<int> moments{2, 4};
        std::vector<double> theta;
        int k_dual = 0;
        int ito_mode = 0;
    } ensemble;
    struct Stopping {
        double N = 1e3;
        std::string mode = "observe";
    } stopping;
    struct Output {
        std::string directory = "levyns-out";
        std::vector<std::string> formats{"json", "csv", "gnuplot"};
        bool trajectories = false;
        int trajectory_paths = 4;
    } output;

    int n_steps() const;
    double storage_dt() const { return time.T / n_steps() * time.storage_stride; }
};

/// Reads and validates a configuration file. All violations are collected
/// into one ConfigError.
RunConfig parse_config(const std::filesystem::path& file);
RunConfig parse_config_text(const std::string& text, const std::string& origin = "<config>");

/// Re-checks cross-field invariants (used after command-line overrides).
void validate(const RunConfig& cfg);

/// Canonical JSON rendering of the configuration with defaults filled in.
std::string config_echo(const RunConfig& cfg);

/// Default increment lags {T/64, ..., T/4} clipped to the storage grid.
std::vector<double> default_theta(const RunConfig& cfg);

IntensityMeasure make_intensity(const RunConfig& cfg);

/// Instantiates basis, dual basis, forcing, model and initial data.
Problem build_problem(const RunConfig& cfg);

/// Initial coefficients from the velocity recipe.
CoefficientVector initial_velocity(const RunConfig& cfg, const BasisSet& basis);
/// Initial density from the density recipe; must lie in [m, M].
DensityField initial_density(const RunConfig& cfg, const GridPtr& grid);

} // namespace levyns
