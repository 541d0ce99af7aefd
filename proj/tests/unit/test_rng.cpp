#include "doctest.h"

#include "levyns/rng.hpp"

#include <cmath>
#include <set>
#include <vector>

using namespace levyns;

// Known-answer vectors of the Philox4x32-10 reference implementation.
TEST_CASE("philox known answers") {
    using C = std::array<std::uint32_t, 4>;
    using K = std::array<std::uint32_t, 2>;
    CHECK(philox4x32(C{0, 0, 0, 0}, K{0, 0}) == C{0x6627e8d5, 0xe169c58d, 0xbc57ac4c, 0x9b00dbd8});
    CHECK(philox4x32(C{0xffffffff, 0xffffffff, 0xffffffff, 0xffffffff}, K{0xffffffff, 0xffffffff}) ==
          C{0x408f276d, 0x41c83b0e, 0xa20bc7c6, 0x6d5451fd});
    CHECK(philox4x32(C{0x243f6a88, 0x85a308d3, 0x13198a2e, 0x03707344}, K{0xa4093822, 0x299f31d0}) ==
          C{0xd16cfe09, 0x94fdcceb, 0x5001e420, 0x24126ea1});
}

TEST_CASE("streams depend only on (seed, path, stream)") {
    PathRng a(7, 3, Stream::Brownian), b(7, 3, Stream::Brownian);
    PathRng other_path(7, 4, Stream::Brownian), other_stream(7, 3, Stream::Bridge), other_seed(8, 3, Stream::Brownian);
    std::vector<std::uint32_t> xa, xb;
    bool differs_path = false, differs_stream = false, differs_seed = false;
    for (int i = 0; i < 64; ++i) {
        const auto v = a.next_u32();
        xa.push_back(v);
        xb.push_back(b.next_u32());
        differs_path |= other_path.next_u32() != v;
        differs_stream |= other_stream.next_u32() != v;
        differs_seed |= other_seed.next_u32() != v;
    }
    CHECK(xa == xb);
    CHECK(differs_path);
    CHECK(differs_stream);
    CHECK(differs_seed);
}

TEST_CASE("uniform stays in the open unit interval and has the right moments") {
    PathRng r(1, 0, Stream::Test);
    const int n = 200000;
    double s = 0.0, s2 = 0.0;
    for (int i = 0; i < n; ++i) {
        const double u = r.uniform();
        REQUIRE(u > 0.0);
        REQUIRE(u < 1.0);
        s += u;
        s2 += u * u;
    }
    const double mean = s / n, var = s2 / n - mean * mean;
    CHECK(std::abs(mean - 0.5) < 4.0 * std::sqrt(1.0 / 12.0 / n));
    CHECK(std::abs(var - 1.0 / 12.0) < 2e-3);
}

TEST_CASE("normal and exponential moments") {
    PathRng r(2, 0, Stream::Test);
    const int n = 200000;
    double s = 0.0, s2 = 0.0, s4 = 0.0, e = 0.0;
    for (int i = 0; i < n; ++i) {
        const double z = r.normal();
        s += z;
        s2 += z * z;
        s4 += z * z * z * z;
        e += r.exponential(2.0);
    }
    CHECK(std::abs(s / n) < 4.0 / std::sqrt(n));
    CHECK(std::abs(s2 / n - 1.0) < 4.0 * std::sqrt(2.0 / n));
    CHECK(std::abs(s4 / n - 3.0) < 4.0 * std::sqrt(96.0 / n));
    CHECK(std::abs(e / n - 0.5) < 4.0 * 0.5 / std::sqrt(n));
}
