#pragma once

#include <array>
#include <cstdint>

namespace levyns {

/// Philox4x32-10 block function: maps (counter, key) to four 32-bit words.
std::array<std::uint32_t, 4> philox4x32(std::array<std::uint32_t, 4> counter, std::array<std::uint32_t, 2> key) noexcept;

/// Independent sub-streams of one path.
enum class Stream : std::uint32_t { Brownian = 0, LargeJumps = 1, SmallJumps = 2, Bridge = 3, Test = 4 };

/// Counter-based generator: the draw sequence depends only on
/// (seed, path index, stream), never on how many other paths ran first.
class PathRng {
public:
    PathRng(std::uint64_t seed, std::uint64_t path, Stream stream) noexcept;
    PathRng(std::uint64_t seed, std::uint64_t path, std::uint32_t stream) noexcept;

    std::uint32_t next_u32() noexcept;
    std::uint64_t next_u64() noexcept;
    /// Uniform on the open interval (0, 1), 53-bit resolution.
    double uniform() noexcept;
    double normal() noexcept;
    double exponential(double rate) noexcept;

private:
    void refill() noexcept;

    std::array<std::uint32_t, 2> key_;
    std::array<std::uint32_t, 4> counter_;
    std::array<std::uint32_t, 4> buffer_{};
    int used_ = 4;
    bool has_spare_ = false;
    double spare_ = 0.0;
};

} // namespace levyns
