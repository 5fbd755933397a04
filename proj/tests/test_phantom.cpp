#include <set>
#include <vector>

#include "doctest.h"
#include "mutomo/phantom.hpp"

using namespace mutomo;

TEST_CASE("material_lambda is the reciprocal radiation length") {
    CHECK(material_lambda(make_material("lead", 0.5612)) ==
          doctest::Approx(1.0 / 0.5612).epsilon(1e-15));
    CHECK(material_lambda(make_empty_material()) == 0.0);
    CHECK(material_lambda(make_material("unit", 1.0)) == 1.0);
    CHECK_THROWS_AS(make_material("bad", -1.0), std::invalid_argument);
    CHECK_THROWS_AS(make_material("bad", 0.0), std::invalid_argument);
}

TEST_CASE("default library spans low-Z to high-Z with unique names") {
    const MaterialLibrary lib = default_library();
    CHECK(lib.at(0).empty());
    CHECK(lib.solids().size() == 6);
    CHECK(lib.lambda_max() == doctest::Approx(1.0 / 0.3166));
    CHECK_THROWS_AS(MaterialLibrary(std::vector<Material>{}), std::invalid_argument);
    CHECK_THROWS_AS(MaterialLibrary({make_material("x", 1.0), make_material("x", 2.0)}),
                    std::invalid_argument);
}

TEST_CASE("fractal_noise is deterministic, in range, and validates arguments") {
    const Eigen::ArrayXd a = fractal_noise(123, 12, 3, 0.5);
    const Eigen::ArrayXd b = fractal_noise(123, 12, 3, 0.5);
    CHECK((a == b).all());
    CHECK(a.minCoeff() >= 0.0);
    CHECK(a.maxCoeff() <= 1.0);
    CHECK(a.minCoeff() == 0.0);  // rescaled field attains both endpoints
    CHECK(a.maxCoeff() == 1.0);
    CHECK_FALSE((a == fractal_noise(124, 12, 3, 0.5)).all());

    CHECK_THROWS_AS(fractal_noise(1, 0, 3, 0.5), std::invalid_argument);
    CHECK_THROWS_AS(fractal_noise(1, 8, 0, 0.5), std::invalid_argument);
    CHECK_THROWS_AS(fractal_noise(1, 8, 3, 0.0), std::invalid_argument);
    CHECK_THROWS_AS(fractal_noise(1, 8, 3, 1.5), std::invalid_argument);
}

TEST_CASE("octaves = 1 ignores persistence") {
    const Eigen::ArrayXd a = fractal_noise(7, 10, 1, 0.5);
    const Eigen::ArrayXd b = fractal_noise(7, 10, 1, 0.9);
    CHECK((a == b).all());
}

namespace {

// Independent flood fill over the same noise field; returns component labels.
std::vector<int> reference_components(const Eigen::ArrayXd& noise, int r, double threshold) {
    const auto lin = [r](int x, int y, int z) {
        return static_cast<std::size_t>(x) +
               static_cast<std::size_t>(r) * (static_cast<std::size_t>(y) +
                                              static_cast<std::size_t>(r) * z);
    };
    std::vector<int> label(noise.size(), -1);
    int next = 0;
    std::vector<std::size_t> queue;
    for (Eigen::Index s = 0; s < noise.size(); ++s) {
        if (noise[s] < threshold || label[s] >= 0) continue;
        queue.assign(1, static_cast<std::size_t>(s));
        label[s] = next;
        while (!queue.empty()) {
            const std::size_t cur = queue.back();
            queue.pop_back();
            const int x = static_cast<int>(cur % r);
            const int y = static_cast<int>((cur / r) % r);
            const int z = static_cast<int>(cur / (static_cast<std::size_t>(r) * r));
            const int nb[6][3] = {{x - 1, y, z}, {x + 1, y, z}, {x, y - 1, z},
                                  {x, y + 1, z}, {x, y, z - 1}, {x, y, z + 1}};
            for (const auto& q : nb) {
                if (q[0] < 0 || q[1] < 0 || q[2] < 0 || q[0] >= r || q[1] >= r || q[2] >= r)
                    continue;
                const std::size_t ni = lin(q[0], q[1], q[2]);
                if (noise[static_cast<Eigen::Index>(ni)] < threshold || label[ni] >= 0) continue;
                label[ni] = next;
                queue.push_back(ni);
            }
        }
        ++next;
    }
    return label;
}

}  // namespace

TEST_CASE("seed 42 phantom: occupancy in range, one material per component") {
    PhantomConfig cfg;  // r = 16, threshold 0.5
    const MaterialLibrary lib = default_library();
    const VoxelGrid grid = generate_phantom(42, cfg, lib);
    const Eigen::ArrayXd noise =
        fractal_noise(42, cfg.resolution, cfg.octaves, cfg.persistence, cfg.base_cells);

    int occupied = 0;
    std::set<double> allowed;
    for (const Material& m : lib.solids()) allowed.insert(m.lambda);

    const std::vector<int> label =
        reference_components(noise, cfg.resolution, cfg.occupancy_threshold);
    std::vector<double> component_lambda;
    for (Eigen::Index i = 0; i < grid.values().size(); ++i) {
        const double v = grid.values()[i];
        if (label[static_cast<std::size_t>(i)] < 0) {
            CHECK(v == 0.0);
            continue;
        }
        ++occupied;
        REQUIRE(allowed.count(v) == 1);
        const std::size_t comp = static_cast<std::size_t>(label[static_cast<std::size_t>(i)]);
        if (comp >= component_lambda.size()) component_lambda.resize(comp + 1, -1.0);
        if (component_lambda[comp] < 0.0)
            component_lambda[comp] = v;
        else
            REQUIRE(component_lambda[comp] == v);
    }
    const double frac = static_cast<double>(occupied) / static_cast<double>(grid.voxel_count());
    CHECK(frac >= 0.2);
    CHECK(frac <= 0.8);
    CHECK(component_lambda.size() >= 1);
}

TEST_CASE("phantom regeneration is bit-identical") {
    PhantomConfig cfg;
    const VoxelGrid a = generate_phantom(9, cfg, default_library());
    const VoxelGrid b = generate_phantom(9, cfg, default_library());
    CHECK((a.values() == b.values()).all());
}

TEST_CASE("degenerate threshold: single-voxel noise is 0, grid all empty") {
    // Rescaling a one-voxel field yields exactly 0, strictly below 1 - eps.
    PhantomConfig cfg;
    cfg.resolution = 1;
    cfg.occupancy_threshold = 0.999;
    const VoxelGrid grid = generate_phantom(3, cfg, default_library());
    CHECK(grid.values()[0] == 0.0);
}

TEST_CASE("single-material library forces that lambda everywhere occupied") {
    PhantomConfig cfg;
    cfg.resolution = 8;
    const MaterialLibrary lib({make_material("iron", 1.757)});
    const VoxelGrid grid = generate_phantom(5, cfg, lib);
    bool any = false;
    for (Eigen::Index i = 0; i < grid.values().size(); ++i) {
        const double v = grid.values()[i];
        REQUIRE((v == 0.0 || v == doctest::Approx(1.0 / 1.757).epsilon(1e-15)));
        any = any || v > 0.0;
    }
    CHECK(any);
}

TEST_CASE("generate_phantom rejects out-of-range thresholds") {
    PhantomConfig cfg;
    cfg.occupancy_threshold = 0.0;
    CHECK_THROWS_AS(generate_phantom(1, cfg, default_library()), std::invalid_argument);
    cfg.occupancy_threshold = 1.0;
    CHECK_THROWS_AS(generate_phantom(1, cfg, default_library()), std::invalid_argument);
}
