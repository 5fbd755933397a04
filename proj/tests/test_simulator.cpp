#include <cmath>
#include <numbers>
#include <vector>

#include "doctest.h"
#include "mutomo/parallel.hpp"
#include "mutomo/phantom.hpp"
#include "mutomo/simulator.hpp"

using namespace mutomo;

namespace {

bool same_event(const MuonEvent& a, const MuonEvent& b) {
    return a.raw() == b.raw() && a.true_momentum == b.true_momentum;
}

}  // namespace

TEST_CASE("zenith law: P(theta < 30 deg) matches the cos^2 flux integral") {
    // Huge lower detector so rejection cannot bias the zenith distribution.
    Geometry geom;
    geom.detector_half_side = 1e6;
    BeamConfig beam;
    RngStream rng(21, stream_id(tag_of("sim-test"), 0));
    const int n = 1000000;
    int below = 0;
    const double cos30 = std::cos(30.0 * std::numbers::pi / 180.0);
    for (int i = 0; i < n; ++i) {
        const MuonState s = sample_muon(rng, beam, geom);
        if (-s.direction.z() > cos30) ++below;
    }
    // P(theta < 30 deg) = 1 - cos^3(30 deg) under pdf proportional to cos^2 sin.
    const double expected = 1.0 - cos30 * cos30 * cos30;
    CHECK(expected == doctest::Approx(0.3505).epsilon(2e-3));
    CHECK(std::abs(static_cast<double>(below) / n - expected) < 0.01);
}

TEST_CASE("sample_muon: acceptance, momentum truncation, power-law CDF") {
    Geometry geom;
    BeamConfig beam;
    RngStream rng(4, stream_id(tag_of("sim-test"), 1));
    const int n = 100000;
    int below_1gev = 0;
    for (int i = 0; i < n; ++i) {
        const MuonState s = sample_muon(rng, beam, geom);
        REQUIRE(s.momentum >= beam.p_min);
        REQUIRE(s.momentum <= beam.p_max);
        REQUIRE(s.direction.norm() == doctest::Approx(1.0).epsilon(1e-12));
        REQUIRE(s.position.z() == geom.upper_z());
        // Rejection contract: the straight ray reaches the lower square.
        const double t = (geom.lower_z() - s.position.z()) / s.direction.z();
        const Vec3 landing = s.position + t * s.direction;
        REQUIRE(std::abs(landing.x()) <= geom.detector_half_side + 1e-9);
        REQUIRE(std::abs(landing.y()) <= geom.detector_half_side + 1e-9);
        if (s.momentum < 1000.0) ++below_1gev;
    }
    // Truncated power-law CDF at 1 GeV (gamma = 2.7 on [500, 100000] MeV).
    const double e = 1.0 - beam.gamma;
    const double cdf = (std::pow(beam.p_min, e) - std::pow(1000.0, e)) /
                       (std::pow(beam.p_min, e) - std::pow(beam.p_max, e));
    CHECK(std::abs(static_cast<double>(below_1gev) / n - cdf) < 0.01);
}

TEST_CASE("step_scatter: vacuum and zero-length are exact no-ops") {
    RngStream rng(1, 2);
    MuonState s;
    s.position = Vec3(1, 2, 150);
    s.direction = Vec3(0.1, -0.2, -0.9).normalized();
    s.momentum = 3000.0;
    const MuonState v = step_scatter(s, 10.0, 0.0, rng);
    CHECK(v.position == s.position);
    CHECK(v.direction == s.direction);
    const MuonState z = step_scatter(s, 0.0, 0.5, rng);
    CHECK(z.position == s.position);
    CHECK(z.direction == s.direction);
}

TEST_CASE("step_scatter: slab calibration against the closed form") {
    // sigma = (21 MeV / p) * sqrt(x / (2 X0)); p = 3 GeV, X0 = 1.757 cm, x = 10 cm.
    const double sigma_expected = (21.0 / 3000.0) * std::sqrt(10.0 / (2.0 * 1.757));
    CHECK(sigma_expected == doctest::Approx(0.0118085).epsilon(1e-4));

    RngStream rng(7, stream_id(tag_of("sim-test"), 2));
    MuonState s;
    s.position = Vec3::Zero();
    s.direction = Vec3(0, 0, -1);
    s.momentum = 3000.0;
    Vec3 e1, e2;
    transverse_basis(s.direction, e1, e2);

    const int n = 100000;
    double sq = 0.0, sq_disp = 0.0, cross = 0.0;
    for (int i = 0; i < n; ++i) {
        const MuonState out = step_scatter(s, 10.0, 1.0 / 1.757, rng);
        const double theta = std::atan2(out.direction.dot(e1), out.direction.dot(s.direction));
        const double disp = (out.position - s.position).dot(e1);
        sq += theta * theta;
        sq_disp += disp * disp;
        cross += theta * disp;
    }
    const double rms = std::sqrt(sq / n);
    CHECK(std::abs(rms - sigma_expected) / sigma_expected < 0.03);
    // Correlated pair: Var(dy) = x^2 sigma^2 / 3, corr(theta, dy) = sqrt(3)/2.
    const double var_disp_expected = 10.0 * 10.0 * sigma_expected * sigma_expected / 3.0;
    CHECK(sq_disp / n == doctest::Approx(var_disp_expected).epsilon(0.05));
    const double corr = (cross / n) / std::sqrt((sq / n) * (sq_disp / n));
    CHECK(corr == doctest::Approx(std::sqrt(3.0) / 2.0).epsilon(0.02));
}

TEST_CASE("step_scatter: variance is linear in thickness") {
    RngStream rng(8, stream_id(tag_of("sim-test"), 3));
    MuonState s;
    s.direction = Vec3(0, 0, -1);
    s.momentum = 3000.0;
    Vec3 e1, e2;
    transverse_basis(s.direction, e1, e2);
    const int n = 100000;
    double sq1 = 0.0, sq2 = 0.0;
    for (int i = 0; i < n; ++i) {
        const MuonState a = step_scatter(s, 10.0, 1.0 / 1.757, rng);
        const MuonState b = step_scatter(s, 20.0, 1.0 / 1.757, rng);
        const double ta = std::atan2(a.direction.dot(e1), a.direction.dot(s.direction));
        const double tb = std::atan2(b.direction.dot(e1), b.direction.dot(s.direction));
        sq1 += ta * ta;
        sq2 += tb * tb;
    }
    CHECK(sq2 / sq1 == doctest::Approx(2.0).epsilon(0.05));
}

TEST_CASE("transport: vacuum is straight-line exact") {
    Geometry geom;
    VoxelGrid grid(16, 100.0);  // all empty
    RngStream rng(3, stream_id(tag_of("sim-test"), 4));
    BeamConfig beam;
    for (int i = 0; i < 1000; ++i) {
        const MuonState mu = sample_muon(rng, beam, geom);
        const TransportResult tr = transport(mu, grid, geom, rng);
        REQUIRE_FALSE(tr.dropped);
        CHECK(tr.exit.direction == mu.direction);
        const double t = (geom.lower_z() - mu.position.z()) / mu.direction.z();
        const Vec3 expected = mu.position + t * mu.direction;
        CHECK((tr.exit.position - expected).norm() < 1e-9);
        CHECK(tr.entry.position == mu.position);
    }
}

TEST_CASE("transport: dense material scatters more than vacuum") {
    Geometry geom;
    VoxelGrid empty(8, 100.0);
    VoxelGrid dense(8, 100.0);
    dense.values().setConstant(1.0 / 0.3166);  // uranium everywhere
    BeamConfig beam;
    double sum_empty = 0.0, sum_dense = 0.0;
    int n_empty = 0, n_dense = 0;
    RngStream rng(10, stream_id(tag_of("sim-test"), 5));
    for (int i = 0; i < 10000; ++i) {
        const MuonState mu = sample_muon(rng, beam, geom);
        const TransportResult a = transport(mu, empty, geom, rng);
        const TransportResult b = transport(mu, dense, geom, rng);
        if (!a.dropped) {
            sum_empty += std::acos(std::clamp(a.entry.direction.dot(a.exit.direction), -1.0, 1.0));
            ++n_empty;
        }
        if (!b.dropped) {
            sum_dense += std::acos(std::clamp(b.entry.direction.dot(b.exit.direction), -1.0, 1.0));
            ++n_dense;
        }
    }
    REQUIRE(n_empty > 0);
    REQUIRE(n_dense > 0);
    CHECK(sum_dense / n_dense > sum_empty / n_empty);
}

TEST_CASE("transport: drop rate on a uniform water cube stays below 5%") {
    VoxelGrid water(8, 100.0);
    water.values().setConstant(1.0 / 36.08);
    SimConfig cfg;
    SimStats stats;
    simulate_event_set(water, 10000, cfg, 77, &stats);
    CHECK(stats.attempts >= 10000);
    CHECK(static_cast<double>(stats.dropped) / static_cast<double>(stats.attempts) < 0.05);
}

TEST_CASE("detect: infinite resolution and zero momentum error is the identity") {
    Geometry geom;
    TransportResult tr;
    tr.entry = {Vec3(3.0, -4.0, 100.0), Vec3(0.1, 0.1, -0.9).normalized()};
    tr.exit = {Vec3(1.0, 2.0, -100.0), Vec3(-0.05, 0.02, -0.99).normalized()};
    tr.momentum = 2500.0;
    DetectorConfig det;
    det.pixels_per_side = 0;
    det.momentum_error = 0.0;
    RngStream rng(5, 6);
    const MuonEvent ev = detect(tr, det, geom, rng);
    CHECK(ev.entry_position == tr.entry.position);
    CHECK(ev.exit_position == tr.exit.position);
    CHECK(ev.entry_direction == tr.entry.direction);
    CHECK(ev.exit_direction == tr.exit.direction);
    CHECK(ev.momentum == tr.momentum);
    CHECK(ev.true_momentum == tr.momentum);
}

TEST_CASE("detect: 64-pixel coordinates sit on odd multiples of 1.5625 cm") {
    VoxelGrid grid(8, 100.0);
    SimConfig cfg;
    cfg.detector.pixels_per_side = 64;
    const auto events = simulate_event_set(grid, 256, cfg, 13);
    for (const MuonEvent& ev : events) {
        for (double coord : {ev.entry_position.x(), ev.entry_position.y(), ev.exit_position.x(),
                             ev.exit_position.y()}) {
            const double k = (coord + 100.0) / 1.5625;
            const double nearest_odd = 2.0 * std::floor(k / 2.0) + 1.0;
            REQUIRE(std::abs(k - nearest_odd) < 1e-9);
        }
        REQUIRE(ev.entry_direction.norm() == doctest::Approx(1.0).epsilon(1e-9));
        REQUIRE(ev.exit_direction.norm() == doctest::Approx(1.0).epsilon(1e-9));
        REQUIRE(ev.entry_direction.z() < 0.0);
        REQUIRE(ev.exit_direction.z() < 0.0);
    }
}

TEST_CASE("detect: momentum error is bounded multiplicative noise") {
    VoxelGrid grid(8, 100.0);
    SimConfig cfg;
    cfg.detector.momentum_error = 0.2;
    const auto events = simulate_event_set(grid, 512, cfg, 14);
    for (const MuonEvent& ev : events) {
        REQUIRE(ev.momentum >= 100.0);
        REQUIRE(std::abs(ev.momentum / ev.true_momentum - 1.0) <= 0.2 + 1e-12);
    }
}

TEST_CASE("simulate_event_set: count, determinism, seed sensitivity") {
    VoxelGrid grid = generate_phantom(2, PhantomConfig{}, default_library());
    SimConfig cfg;
    const auto a = simulate_event_set(grid, 1024, cfg, 99);
    CHECK(a.size() == 1024);
    const auto b = simulate_event_set(grid, 1024, cfg, 99);
    REQUIRE(a.size() == b.size());
    for (std::size_t i = 0; i < a.size(); ++i) REQUIRE(same_event(a[i], b[i]));
    const auto c = simulate_event_set(grid, 1024, cfg, 100);
    bool differ = false;
    for (std::size_t i = 0; i < a.size(); ++i) differ = differ || !same_event(a[i], c[i]);
    CHECK(differ);
    CHECK_THROWS_AS(simulate_event_set(grid, 0, cfg, 1), ConfigError);
}

TEST_CASE("simulate_event_set: independent of thread count") {
    VoxelGrid grid = generate_phantom(6, PhantomConfig{}, default_library());
    SimConfig cfg;
    const int saved = thread_count_override();
    thread_count_override() = 1;
    const auto a = simulate_event_set(grid, 512, cfg, 31);
    thread_count_override() = 4;
    const auto b = simulate_event_set(grid, 512, cfg, 31);
    thread_count_override() = saved;
    REQUIRE(a.size() == b.size());
    for (std::size_t i = 0; i < a.size(); ++i) REQUIRE(same_event(a[i], b[i]));
}
