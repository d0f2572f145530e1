#include <doctest.h>

#include <cmath>
#include <set>
#include <sstream>

#include "biphoton/error.hpp"
#include "biphoton/scene.hpp"

using namespace biphoton;

TEST_SUITE("scene") {

TEST_CASE("sampled particles respect the exclusion distance and the box") {
    auto const spec = SceneSpec::random_cube(400, 8.0);
    for (std::uint64_t r = 0; r < 5; ++r) {
        auto const scene = sample_scene(spec, r, 99);
        REQUIRE(scene.size() == 400);
        double min_d = 1e300;
        for (std::size_t i = 0; i < scene.size(); ++i) {
            for (double c : {scene.positions[i].x, scene.positions[i].y, scene.positions[i].z}) {
                CHECK(c >= -4.0);
                CHECK(c < 4.0);
            }
            for (std::size_t j = i + 1; j < scene.size(); ++j)
                min_d = std::min(min_d, distance(scene.positions[i], scene.positions[j]));
        }
        CHECK(min_d >= 2.0 * spec.particle_radius);
    }
}

TEST_CASE("custom minimum separation is honoured") {
    auto spec = SceneSpec::random_cube(60, 6.0);
    spec.min_separation = 0.9;
    auto const scene = sample_scene(spec, 3, 1);
    for (std::size_t i = 0; i < scene.size(); ++i)
        for (std::size_t j = i + 1; j < scene.size(); ++j)
            CHECK(distance(scene.positions[i], scene.positions[j]) >= 0.9);
}

TEST_CASE("sampling is a pure function of spec, index and seed") {
    auto const spec = SceneSpec::random_cube(50, 5.0);
    auto const a = sample_scene(spec, 17, 5);
    auto const b = sample_scene(spec, 17, 5);
    auto const c = sample_scene(spec, 18, 5);
    auto const d = sample_scene(spec, 17, 6);
    CHECK(a.positions == b.positions);
    CHECK(a.realization_seed == b.realization_seed);
    CHECK(a.positions != c.positions);
    CHECK(a.positions != d.positions);
}

TEST_CASE("realization seeds do not collide over a range of indices") {
    std::set<std::uint64_t> seen;
    for (std::uint64_t i = 0; i < 10000; ++i)
        seen.insert(realization_seed(42, i));
    CHECK(seen.size() == 10000);
}

TEST_CASE("overfull box reports a packing failure") {
    // 2000 spheres of diameter 1/pi cannot fit at this spacing in a 1.5 cube.
    auto const spec = SceneSpec::random_cube(2000, 1.5);
    try {
        (void)sample_scene(spec, 0, 0);
        FAIL("expected PackingFailure");
    } catch (PackingFailure const& e) {
        CHECK(e.particle_index() < 2000);
        CHECK(std::string(e.what()).find("packing failure") != std::string::npos);
    }
}

TEST_CASE("density is the volume filling fraction") {
    // Reference values quoted for the L = 20 cube.
    CHECK(density(SceneSpec::random_cube(3000, 20.0)) == doctest::Approx(0.00633).epsilon(2e-3));
    CHECK(density(SceneSpec::random_cube(6000, 20.0)) == doctest::Approx(0.01267).epsilon(2e-3));
    CHECK(density(SceneSpec::random_cube(10000, 20.0)) == doctest::Approx(0.02111).epsilon(2e-3));
    double const r = 0.3;
    CHECK(density(SceneSpec::random_cube(10, 2.0, r)) ==
          doctest::Approx(4.0 * std::numbers::pi * r * r * r * 10 / (3.0 * 8.0)));
    CHECK_THROWS_AS(density(fixed_layout(FixedLayout::Pair, 1.0)), InvalidArgument);
}

TEST_CASE("fixed layouts have the requested nearest-neighbour spacing") {
    double const d = 1.3;
    auto near = [](SceneSpec const& s) {
        double m = 1e300;
        for (std::size_t i = 0; i < s.positions.size(); ++i)
            for (std::size_t j = i + 1; j < s.positions.size(); ++j)
                m = std::min(m, distance(s.positions[i], s.positions[j]));
        return m;
    };
    auto const pair = fixed_layout(FixedLayout::Pair, d);
    CHECK(pair.positions.size() == 2);
    CHECK(near(pair) == doctest::Approx(d));
    auto const line = fixed_layout(FixedLayout::TripleLine, d);
    CHECK(line.positions.size() == 3);
    CHECK(near(line) == doctest::Approx(d));
    auto const tri = fixed_layout(FixedLayout::Triangle, d);
    CHECK(tri.positions.size() == 3);
    for (std::size_t i = 0; i < 3; ++i)
        for (std::size_t j = i + 1; j < 3; ++j)
            CHECK(distance(tri.positions[i], tri.positions[j]) == doctest::Approx(d));
    auto const quad = fixed_layout(FixedLayout::Quad, d);
    CHECK(quad.positions.size() == 4);
    CHECK(near(quad) == doctest::Approx(d));
    for (auto const& s : {pair, line, tri, quad}) {
        Vec3 c{0, 0, 0};
        for (auto const& p : s.positions)
            c = c + p;
        CHECK(norm(c) == doctest::Approx(0.0).epsilon(1e-12));
    }
}

TEST_CASE("layouts closer than a particle diameter are rejected") {
    CHECK_THROWS_AS(fixed_layout(FixedLayout::Pair, 0.2), InvalidArgument);
    CHECK_NOTHROW(fixed_layout(FixedLayout::Pair, 2.0 * kDefaultParticleRadius));
    CHECK_THROWS_AS(parse_layout("hexagon"), InvalidArgument);
    for (auto l : {FixedLayout::Pair, FixedLayout::TripleLine, FixedLayout::Triangle, FixedLayout::Quad})
        CHECK(parse_layout(to_string(l)) == l);
}

TEST_CASE("invalid specs name the offending field") {
    auto s = SceneSpec::random_cube(0, 5.0);
    CHECK_THROWS_WITH_AS(s.validate(), doctest::Contains("scene.n_particles"), InvalidArgument);
    s = SceneSpec::random_cube(5, -1.0);
    CHECK_THROWS_WITH_AS(s.validate(), doctest::Contains("scene.box_edge"), InvalidArgument);
    s = SceneSpec::random_cube(5, 5.0, 0.1, 0.9);
    CHECK_THROWS_WITH_AS(s.validate(), doctest::Contains("scene.refractive_index"), InvalidArgument);
    auto overlap = SceneSpec::deterministic({{0, 0, 0}, {0.05, 0, 0}});
    CHECK_THROWS_WITH_AS(overlap.validate(), doctest::Contains("scene.positions"), InvalidArgument);
}

TEST_CASE("deterministic specs pass through sampling unchanged") {
    auto const spec = fixed_layout(FixedLayout::Triangle, 1.0);
    auto const a = sample_scene(spec, 0, 1);
    auto const b = sample_scene(spec, 9, 2);
    CHECK(a.positions == spec.positions);
    CHECK(b.positions == spec.positions);
}

TEST_CASE("positions export as x,y,z rows") {
    auto const scene = sample_scene(fixed_layout(FixedLayout::Pair, 1.0), 0, 0);
    std::ostringstream os;
    write_positions_csv(os, scene);
    std::istringstream is(os.str());
    std::string line;
    std::getline(is, line);
    CHECK(line == "x,y,z");
    int rows = 0;
    while (std::getline(is, line)) {
        ++rows;
        CHECK(std::count(line.begin(), line.end(), ',') == 2);
    }
    CHECK(rows == 2);
}

}
