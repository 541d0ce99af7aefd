#pragma once

#include "levyns/intensity.hpp"
#include "levyns/rng.hpp"

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

namespace levyns {

enum class SizeClass { Small, Large };

struct MarkedJump {
    double time = 0.0;
    std::vector<double> mark;
    double radius = 0.0;
    SizeClass size_class = SizeClass::Small;
};

/// Brownian increments, one row of `dim` entries per schedule step.
std::vector<double> sample_brownian(int dim, std::span<const double> schedule, PathRng& rng);

struct JumpSample {
    std::vector<MarkedJump> jumps;
    double compensator_mass = 0.0;
};

/// Large jumps on {|z| >= 1} and truncated small jumps on {eps <= |z| < 1}
/// over [0, horizon], merged and sorted by time.
JumpSample sample_jumps(const IntensityMeasure& mu, double horizon, double epsilon, PathRng& large_rng,
                        PathRng& small_rng);

/// Sum of integrand over the given small jumps minus dt * compensator, the
/// increment of the compensated small-jump integral over one slice.
double compensated_increment(std::span<const double> small_jump_values, double dt, double compensator);

struct NoiseSpec {
    IntensityMeasure mu = IntensityMeasure::none(1);
    double epsilon = 1e-2;
    int brownian_dim = 1;
    bool brownian = true;
    bool jumps = true;
};

/// One sub-interval of the jump-adapted grid: (t0, t0 + dt], Brownian
/// increment dW, and the jumps that occur exactly at t0 + dt.
struct NoiseSlice {
    double t0 = 0.0;
    double dt = 0.0;
    std::span<const double> dW;
    std::span<const MarkedJump> jumps;
    bool ends_base_step = false;
};

/// Complete driving noise of one path on a uniform base schedule, refined
/// at every jump time. Brownian increments on the refined grid come from a
/// Brownian bridge between base-step values, so the base increments do not
/// depend on the jumps.
class NoisePath {
public:
    NoisePath() = default;

    static NoisePath generate(const NoiseSpec& spec, double horizon, int n_steps, std::uint64_t seed,
                              std::uint64_t path_index);

    double horizon() const noexcept { return horizon_; }
    int n_steps() const noexcept { return n_steps_; }
    double base_dt() const noexcept { return horizon_ / n_steps_; }
    int brownian_dim() const noexcept { return dim_; }
    double epsilon() const noexcept { return epsilon_; }
    std::uint64_t seed() const noexcept { return seed_; }
    std::uint64_t path_index() const noexcept { return path_index_; }
    double compensator_mass() const noexcept { return compensator_mass_; }

    const std::vector<MarkedJump>& jumps() const noexcept { return jumps_; }
    std::span<const double> base_increment(int step) const;
    std::size_t slice_count() const noexcept { return slice_t0_.size(); }
    NoiseSlice slice(std::size_t k) const;

    /// Same path on a base schedule `factor` times coarser.
    NoisePath coarsen(int factor) const;

    /// Removes Brownian and/or jump parts, keeping the schedule.
    NoisePath without(bool drop_brownian, bool drop_jumps) const;

    void write(const std::filesystem::path& file) const;
    static NoisePath read(const std::filesystem::path& file);
    std::uint64_t schedule_hash() const noexcept;

    bool operator==(const NoisePath& o) const;

private:
    void refine(PathRng& bridge);

    double horizon_ = 0.0;
    int n_steps_ = 0;
    int dim_ = 0;
    double epsilon_ = 0.0;
    std::uint64_t seed_ = 0;
    std::uint64_t path_index_ = 0;
    double compensator_mass_ = 0.0;
    std::vector<double> base_dw_;
    std::vector<MarkedJump> jumps_;
    // refined grid
    std::vector<double> slice_t0_;
    std::vector<double> slice_dt_;
    std::vector<double> slice_dw_;
    std::vector<std::size_t> slice_jump_begin_;
    std::vector<std::size_t> slice_jump_end_;
    std::vector<char> slice_ends_base_;
};

} // namespace levyns
