#pragma once

#include "levyns/basis.hpp"
#include "levyns/grid.hpp"

#include <memory>
#include <vector>

namespace levyns {

/// Scalar density on a grid with certified bounds lower <= rho <= upper and
/// the total mass recorded when the field was created.
struct DensityField {
    GridField values;
    double lower = 1.0;
    double upper = 1.0;
    double initial_mass = 0.0;

    DensityField() = default;
    /// Throws ConfigError unless 0 < lower <= values <= upper.
    DensityField(GridField v, double lower, double upper);

    static DensityField constant(const GridPtr& grid, double value);

    const GridPtr& grid() const noexcept { return values.grid; }
    double min() const;
    double max() const;
    double mass() const;
};

/// Point evaluation of a frozen velocity field.
class VelocitySampler {
public:
    virtual ~VelocitySampler() = default;
    virtual void at(const Point& x, double* out) const = 0;
    /// True when the field vanishes identically (lets transport skip work).
    virtual bool is_zero() const { return false; }
};

/// Exact spectral sum on the torus, multilinear nodal interpolation on the box.
class SpectralVelocity final : public VelocitySampler {
public:
    SpectralVelocity(const BasisSet& basis, CoefficientVector phi);
    void at(const Point& x, double* out) const override;
    bool is_zero() const override { return zero_; }

private:
    const BasisSet& basis_;
    CoefficientVector phi_;
    GridField nodal_;
    bool zero_;
};

/// Multilinear interpolation of nodal samples (periodic wrap or box clamp).
class NodalVelocity final : public VelocitySampler {
public:
    explicit NodalVelocity(GridField u);
    void at(const Point& x, double* out) const override;
    bool is_zero() const override { return zero_; }

private:
    GridField u_;
    bool zero_;
};

class ConstantVelocity final : public VelocitySampler {
public:
    explicit ConstantVelocity(Point v) : v_(v) {}
    void at(const Point&, double* out) const override {
        for (int c = 0; c < 3; ++c) out[c] = v_[c];
    }
    bool is_zero() const override { return v_[0] == 0.0 && v_[1] == 0.0 && v_[2] == 0.0; }

private:
    Point v_;
};

struct TransportStats {
    /// Relative mass defect removed by the conservative correction.
    double mass_correction = 0.0;
};

/// Semi-Lagrangian step: RK2 departure points, tensor cubic interpolation
/// clamped to the enclosing cell's corner values, then a bound-preserving
/// mass fix. Output values stay inside [min, max] of the input.
DensityField advance_density(const DensityField& rho, const VelocitySampler& u, double dt,
                             TransportStats* stats = nullptr);
DensityField advance_density(const DensityField& rho, const GridField& velocity, double dt,
                             TransportStats* stats = nullptr);

struct TransportStep {
    std::shared_ptr<const VelocitySampler> velocity;
    double dt = 0.0;
};

struct ReciprocalReport {
    double max_deviation = 0.0;
};

/// Advances 1/rho_0 along the recorded velocity slices with the same scheme
/// and compares with the recorded density path (rho_path[k] after k steps).
ReciprocalReport reciprocal_check(const std::vector<DensityField>& rho_path, const std::vector<TransportStep>& steps);

} // namespace levyns
