#include <cmath>

#include "doctest.h"
#include "mutomo/geometry.hpp"
#include "mutomo/raypath.hpp"
#include "mutomo/rng.hpp"

using namespace mutomo;

TEST_CASE("clip_to_cube: axis-aligned ray") {
    const Ray ray{Vec3(0, 0, 200), Vec3(0, 0, -1)};
    const auto clip = clip_to_cube(ray, 50.0);
    REQUIRE(clip.has_value());
    CHECK(clip->first == doctest::Approx(150.0));
    CHECK(clip->second == doctest::Approx(250.0));
    CHECK(clip->second - clip->first == doctest::Approx(100.0));
}

TEST_CASE("clip_to_cube: main diagonal spans side * sqrt(3)") {
    const Vec3 d = Vec3(1, 1, 1).normalized();
    const Ray ray{Vec3(-100, -100, -100), d};
    const auto clip = clip_to_cube(ray, 50.0);
    REQUIRE(clip.has_value());
    CHECK(clip->second - clip->first == doctest::Approx(100.0 * std::sqrt(3.0)).epsilon(1e-12));
}

TEST_CASE("clip_to_cube: misses") {
    CHECK_FALSE(clip_to_cube(Ray{Vec3(60, 0, 200), Vec3(0, 0, -1)}, 50.0).has_value());
    // Parallel to a slab while outside it.
    CHECK_FALSE(clip_to_cube(Ray{Vec3(0, 60, 0), Vec3(1, 0, 0)}, 50.0).has_value());
}

TEST_CASE("transverse_basis is orthonormal for random directions") {
    RngStream rng(11, stream_id(tag_of("geom"), 0));
    for (int i = 0; i < 200; ++i) {
        Vec3 d(rng.normal(), rng.normal(), rng.normal());
        if (d.norm() < 1e-6) continue;
        d.normalize();
        Vec3 e1, e2;
        transverse_basis(d, e1, e2);
        CHECK(std::abs(e1.dot(d)) < 1e-12);
        CHECK(std::abs(e2.dot(d)) < 1e-12);
        CHECK(std::abs(e1.dot(e2)) < 1e-12);
        CHECK(e1.norm() == doctest::Approx(1.0).epsilon(1e-12));
        CHECK(e2.norm() == doctest::Approx(1.0).epsilon(1e-12));
    }
}

TEST_CASE("voxel_path: axis-aligned ray through r = 4 gives 4 x 25 cm") {
    VoxelGrid grid(4, 100.0);
    const Ray ray{Vec3(-10.0, 5.0, 200.0), Vec3(0, 0, -1)};
    const auto clip = clip_to_cube(ray, 50.0);
    REQUIRE(clip.has_value());
    const auto segs = voxel_path(ray, ray.at(clip->first), ray.at(clip->second), grid);
    REQUIRE(segs.size() == 4);
    for (const auto& s : segs) CHECK(s.length == doctest::Approx(25.0).epsilon(1e-12));
    // Ordered along flight: z = -1 direction walks iz from 3 down to 0.
    for (int i = 0; i < 4; ++i) CHECK(segs[i].voxel.z() == 3 - i);
}

TEST_CASE("voxel_path: main diagonal through r = 1 is one segment of 100 sqrt(3)") {
    VoxelGrid grid(1, 100.0);
    const Vec3 d = Vec3(1, 1, 1).normalized();
    const Ray ray{Vec3(-50, -50, -50), d};
    const auto clip = clip_to_cube(ray, 50.0);
    REQUIRE(clip.has_value());
    const auto segs = voxel_path(ray, ray.at(clip->first), ray.at(clip->second), grid);
    REQUIRE(segs.size() == 1);
    CHECK(segs[0].length == doctest::Approx(100.0 * std::sqrt(3.0)).epsilon(1e-12));
    CHECK(segs[0].voxel == Eigen::Vector3i(0, 0, 0));
}

TEST_CASE("voxel_path: zero-length chord gives an empty list") {
    VoxelGrid grid(4, 100.0);
    const Ray ray{Vec3(0, 0, 0), Vec3(0, 0, -1)};
    CHECK(voxel_path(ray, Vec3(1, 2, 3), Vec3(1, 2, 3), grid).empty());
}

TEST_CASE("voxel_path: 1000 random chords tile the clip interval exactly") {
    VoxelGrid grid(16, 100.0);
    RngStream rng(5, stream_id(tag_of("geom"), 1));
    int tested = 0;
    for (int i = 0; i < 1200 && tested < 1000; ++i) {
        // aim from above at a point inside the cube so nearly every ray crosses
        const Vec3 target(rng.uniform(-49, 49), rng.uniform(-49, 49), rng.uniform(-49, 49));
        Vec3 o(rng.uniform(-80, 80), rng.uniform(-80, 80), 120.0);
        Vec3 d = (target - o).normalized();
        const Ray ray{o, d};
        const auto clip = clip_to_cube(ray, 50.0);
        if (!clip) continue;
        ++tested;
        const double chord = clip->second - clip->first;
        const auto segs = voxel_path(ray, ray.at(clip->first), ray.at(clip->second), grid);
        double total = 0.0;
        for (std::size_t k = 0; k < segs.size(); ++k) {
            REQUIRE(segs[k].length > 0.0);
            REQUIRE(grid.inside_index(segs[k].voxel.x(), segs[k].voxel.y(), segs[k].voxel.z()));
            if (k > 0) REQUIRE(segs[k].voxel != segs[k - 1].voxel);
            total += segs[k].length;
        }
        REQUIRE(total == doctest::Approx(chord).epsilon(1e-9));
    }
    CHECK(tested == 1000);
}

TEST_CASE("geometry plane bookkeeping") {
    Geometry g;
    CHECK(g.half_side() == 50.0);
    CHECK(g.upper_z() == 100.0);
    CHECK(g.lower_z() == -100.0);
    CHECK(g.upper_aux_z() == 110.0);
    CHECK(g.lower_aux_z() == -110.0);
    g.detector_gap = 0.0;
    CHECK_THROWS_AS(g.validate(), ConfigError);
}
