#include <array>
#include <cmath>
#include <cstdint>

#include "doctest.h"
#include "mutomo/rng.hpp"

using namespace mutomo;

// Reference vectors for Philox4x32-10 from the Random123 known-answer tests.
TEST_CASE("philox4x32-10 known-answer vectors") {
    using A4 = std::array<std::uint32_t, 4>;
    using A2 = std::array<std::uint32_t, 2>;

    CHECK(detail::philox10(A4{0, 0, 0, 0}, A2{0, 0}) ==
          A4{0x6627e8d5u, 0xe169c58du, 0xbc57ac4cu, 0x9b00dbd8u});
    CHECK(detail::philox10(A4{0xffffffffu, 0xffffffffu, 0xffffffffu, 0xffffffffu},
                           A2{0xffffffffu, 0xffffffffu}) ==
          A4{0x408f276du, 0x41c83b0eu, 0xa20bc7c6u, 0x6d5451fdu});
    CHECK(detail::philox10(A4{0x243f6a88u, 0x85a308d3u, 0x13198a2eu, 0x03707344u},
                           A2{0xa4093822u, 0x299f31d0u}) ==
          A4{0xd16cfe09u, 0x94fdccebu, 0x5001e420u, 0x24126ea1u});
}

// FNV-1a reference values: the offset basis and the single-byte case.
TEST_CASE("tag_of matches FNV-1a reference values") {
    CHECK(tag_of("") == 0xcbf29ce484222325ull);
    CHECK(tag_of("a") == 0xaf63dc4c8601ec8cull);
    CHECK(tag_of("scatter-place") != tag_of("train-shuffle"));
}

TEST_CASE("streams are deterministic and separated") {
    RngStream a(7, stream_id(tag_of("test"), 3));
    RngStream b(7, stream_id(tag_of("test"), 3));
    RngStream c(7, stream_id(tag_of("test"), 4));
    bool all_equal = true;
    bool any_differ = false;
    for (int i = 0; i < 64; ++i) {
        const std::uint32_t va = a.next_u32();
        all_equal = all_equal && va == b.next_u32();
        any_differ = any_differ || va != c.next_u32();
    }
    CHECK(all_equal);
    CHECK(any_differ);
}

TEST_CASE("uniform stays in [0, 1) with the right moments") {
    RngStream rng(42, stream_id(tag_of("unit"), 0));
    const int n = 100000;
    double sum = 0.0, sq = 0.0;
    for (int i = 0; i < n; ++i) {
        const double u = rng.uniform();
        REQUIRE(u >= 0.0);
        REQUIRE(u < 1.0);
        sum += u;
        sq += u * u;
    }
    const double mean = sum / n;
    const double var = sq / n - mean * mean;
    CHECK(mean == doctest::Approx(0.5).epsilon(0.01));
    CHECK(var == doctest::Approx(1.0 / 12.0).epsilon(0.03));
}

TEST_CASE("uniform(lo, hi) respects its bounds") {
    RngStream rng(1, 2);
    for (int i = 0; i < 1000; ++i) {
        const double u = rng.uniform(-3.0, 5.0);
        REQUIRE(u >= -3.0);
        REQUIRE(u < 5.0);
    }
}

TEST_CASE("normal has standard moments") {
    RngStream rng(9, stream_id(tag_of("unit"), 1));
    const int n = 100000;
    double sum = 0.0, sq = 0.0;
    for (int i = 0; i < n; ++i) {
        const double z = rng.normal();
        sum += z;
        sq += z * z;
    }
    const double mean = sum / n;
    CHECK(mean == doctest::Approx(0.0).epsilon(1.0));  // epsilon is relative; use abs below
    CHECK(std::abs(mean) < 0.02);
    CHECK(sq / n - mean * mean == doctest::Approx(1.0).epsilon(0.02));
}

TEST_CASE("below(n) covers [0, n)") {
    RngStream rng(3, 4);
    std::array<int, 5> hits{};
    for (int i = 0; i < 5000; ++i) {
        const std::uint64_t k = rng.below(5);
        REQUIRE(k < 5);
        ++hits[k];
    }
    for (int h : hits) CHECK(h > 500);
}

TEST_CASE("stream_id mixes tag and index") {
    CHECK(stream_id(tag_of("a"), 0) != stream_id(tag_of("a"), 1));
    CHECK(stream_id(tag_of("a"), 0) != stream_id(tag_of("b"), 0));
}
