#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include "doctest.h"
#include "mutomo/geometry.hpp"
#include "mutomo/mlem.hpp"
#include "mutomo/rng.hpp"
#include "mutomo/simulator.hpp"

using namespace mutomo;

namespace {

// Exit direction whose transverse-plane angles against the entry frame are
// exactly (ax, ay): d0 + tan(ax) e1 + tan(ay) e2, renormalized.
MuonEvent crafted_event(const Vec3& entry_pos, const Vec3& d0_raw, double ax, double ay,
                        double momentum) {
    MuonEvent ev;
    const Vec3 d0 = d0_raw.normalized();
    Vec3 e1, e2;
    transverse_basis(d0, e1, e2);
    ev.entry_position = entry_pos;
    ev.entry_direction = d0;
    ev.exit_direction = (d0 + std::tan(ax) * e1 + std::tan(ay) * e2).normalized();
    const double t = (-100.0 - entry_pos.z()) / ev.exit_direction.z();
    ev.exit_position = entry_pos + t * ev.exit_direction;
    ev.momentum = momentum;
    ev.true_momentum = momentum;
    return ev;
}

}  // namespace

TEST_CASE("log_likelihood: single event through a one-voxel grid") {
    VoxelGrid grid(1, 100.0);
    grid.values()[0] = 0.03;
    const Geometry geom;
    const double ax = 0.01, ay = -0.02;
    const MuonEvent ev = crafted_event(Vec3(0, 0, 100), Vec3(0, 0, -1), ax, ay, kNominalP);

    // Chord is the full 100 cm, p_r = 1: sigma^2 = 100 lambda.
    const double sigma2 = 100.0 * 0.03;
    const double expected = -std::log(sigma2) - (ax * ax + ay * ay) / (2.0 * sigma2);
    CHECK(log_likelihood(grid, {ev}, geom) == doctest::Approx(expected).epsilon(1e-12));

    // With no deflection the likelihood decreases as lambda grows.
    const MuonEvent straight = crafted_event(Vec3(0, 0, 100), Vec3(0, 0, -1), 0.0, 0.0, kNominalP);
    const double ll_thin = log_likelihood(grid, {straight}, geom);
    grid.values()[0] = 0.06;
    CHECK(log_likelihood(grid, {straight}, geom) < ll_thin);
}

TEST_CASE("log_likelihood: events missing the cube contribute nothing") {
    VoxelGrid grid(2, 100.0);
    grid.values().setConstant(0.05);
    const MuonEvent miss = crafted_event(Vec3(90, 90, 100), Vec3(0, 0, -1), 0.01, 0.0, 1000.0);
    CHECK(log_likelihood(grid, {miss}, Geometry{}) == 0.0);
}

TEST_CASE("log_likelihood_gradient matches central finite differences") {
    const Geometry geom;
    VoxelGrid grid(2, 100.0);
    RngStream rng(3, stream_id(tag_of("mlem-test"), 0));
    for (Eigen::Index j = 0; j < grid.values().size(); ++j)
        grid.values()[j] = rng.uniform(0.01, 0.1);

    std::vector<MuonEvent> events;
    for (int i = 0; i < 40; ++i) {
        const Vec3 pos(rng.uniform(-40, 40), rng.uniform(-40, 40), 100.0);
        const Vec3 d0(rng.uniform(-0.2, 0.2), rng.uniform(-0.2, 0.2), -1.0);
        events.push_back(crafted_event(pos, d0, rng.uniform(-0.05, 0.05),
                                       rng.uniform(-0.05, 0.05), rng.uniform(500, 3000)));
    }

    const Eigen::ArrayXd grad = log_likelihood_gradient(grid, events, geom);
    for (Eigen::Index j = 0; j < grid.values().size(); ++j) {
        const double h = 1e-5 * grid.values()[j];
        VoxelGrid up = grid, down = grid;
        up.values()[j] += h;
        down.values()[j] -= h;
        const double fd = (log_likelihood(up, events, geom) - log_likelihood(down, events, geom)) /
                          (2.0 * h);
        REQUIRE(grad[j] == doctest::Approx(fd).epsilon(1e-6).scale(1.0));
    }
}

TEST_CASE("mlem_reconstruct: likelihood trace starts at the initial guess and never decreases") {
    VoxelGrid iron(4, 100.0);
    iron.values().setConstant(1.0 / 1.757);
    SimConfig sim;
    const auto events = simulate_event_set(iron, 2048, sim, 404);

    MlemConfig cfg;
    cfg.resolution = 4;
    cfg.max_iterations = 10;
    std::vector<double> trace;
    mlem_reconstruct(events, cfg, sim.geometry, &trace);

    REQUIRE(trace.size() >= 2);
    REQUIRE(trace.size() <= static_cast<std::size_t>(cfg.max_iterations) + 1);
    VoxelGrid init(cfg.resolution, sim.geometry.object_side);
    init.values().setConstant(cfg.initial_lambda);
    CHECK(trace.front() ==
          doctest::Approx(log_likelihood(init, events, sim.geometry, cfg.p0)).epsilon(1e-9));
    for (std::size_t i = 1; i < trace.size(); ++i) REQUIRE(trace[i] >= trace[i - 1]);
}

TEST_CASE("mlem_reconstruct: homogeneous iron cube is recovered within 20%") {
    VoxelGrid iron(8, 100.0);
    iron.values().setConstant(1.0 / 1.757);
    SimConfig sim;
    const auto events = simulate_event_set(iron, 16384, sim, 1912);

    MlemConfig cfg;
    const VoxelGrid rec = mlem_reconstruct(events, cfg, sim.geometry);
    const double mean = rec.values().mean();
    CHECK(mean > 0.8 / 1.757);
    CHECK(mean < 1.2 / 1.757);
}

TEST_CASE("mlem_reconstruct: zero-deflection data drives lambda to the floor") {
    // One perfectly straight vertical muon per voxel column: the likelihood
    // is maximized by the thinnest allowed material everywhere.
    std::vector<MuonEvent> events;
    for (double x : {-25.0, 25.0})
        for (double y : {-25.0, 25.0})
            events.push_back(crafted_event(Vec3(x, y, 100), Vec3(0, 0, -1), 0.0, 0.0, kNominalP));

    MlemConfig cfg;
    cfg.resolution = 2;
    std::vector<double> trace;
    const VoxelGrid rec = mlem_reconstruct(events, cfg, Geometry{}, &trace);
    CHECK((rec.values() == cfg.lambda_floor).all());
    for (std::size_t i = 1; i < trace.size(); ++i) REQUIRE(trace[i] >= trace[i - 1]);
}

TEST_CASE("mlem_reconstruct: rejects data that never crosses the object") {
    const MuonEvent miss = crafted_event(Vec3(90, 90, 100), Vec3(0, 0, -1), 0.01, 0.0, 1000.0);
    CHECK_THROWS_WITH_AS(mlem_reconstruct({miss}, MlemConfig{}, Geometry{}),
                         "mlem: no data (no event crosses the object)", ConfigError);
}

TEST_CASE("mlem_reconstruct: validates its configuration") {
    const MuonEvent ev = crafted_event(Vec3(0, 0, 100), Vec3(0, 0, -1), 0.01, 0.0, 1000.0);
    MlemConfig bad;
    bad.resolution = 0;
    CHECK_THROWS_AS(mlem_reconstruct({ev}, bad, Geometry{}), ConfigError);
    bad = MlemConfig{};
    bad.lambda_floor = 0.0;
    CHECK_THROWS_AS(mlem_reconstruct({ev}, bad, Geometry{}), ConfigError);
    bad = MlemConfig{};
    bad.tolerance = 0.0;
    CHECK_THROWS_AS(mlem_reconstruct({ev}, bad, Geometry{}), ConfigError);
}

TEST_CASE("mlem_reconstruct: invariant under event permutation") {
    VoxelGrid iron(4, 100.0);
    iron.values().setConstant(1.0 / 1.757);
    SimConfig sim;
    auto events = simulate_event_set(iron, 1024, sim, 808);
    MlemConfig cfg;
    cfg.resolution = 4;
    cfg.max_iterations = 8;
    const VoxelGrid base = mlem_reconstruct(events, cfg, sim.geometry);
    std::mt19937 shuffler(99);
    std::shuffle(events.begin(), events.end(), shuffler);
    const VoxelGrid again = mlem_reconstruct(events, cfg, sim.geometry);
    REQUIRE((again.values() == base.values()).all());
}
