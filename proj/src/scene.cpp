#include "biphoton/scene.hpp"

#include <cmath>
#include <cstdio>
#include <ostream>
#include <random>

#include "biphoton/error.hpp"

namespace biphoton {
namespace {

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

// Uniform double in [0, 1) from the top 53 bits; independent of the
// standard library's distribution implementation.
double unit_uniform(std::mt19937_64& rng) {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

void check_pairwise(std::vector<Vec3> const& positions, double min_sep) {
    for (std::size_t i = 0; i < positions.size(); ++i)
        for (std::size_t j = i + 1; j < positions.size(); ++j)
            if (distance(positions[i], positions[j]) < min_sep)
                throw InvalidArgument("scene.positions: particles " + std::to_string(i) + " and " +
                                      std::to_string(j) + " overlap");
}

} // namespace

SceneSpec SceneSpec::random_cube(std::size_t n_particles, double box_edge, double particle_radius,
                                 double refractive_index) {
    SceneSpec s;
    s.kind = SceneKind::RandomCube;
    s.n_particles = n_particles;
    s.box_edge = box_edge;
    s.particle_radius = particle_radius;
    s.refractive_index = refractive_index;
    return s;
}

SceneSpec SceneSpec::deterministic(std::vector<Vec3> positions, double particle_radius,
                                   double refractive_index) {
    SceneSpec s;
    s.kind = SceneKind::Deterministic;
    s.positions = std::move(positions);
    s.particle_radius = particle_radius;
    s.refractive_index = refractive_index;
    return s;
}

void SceneSpec::validate() const {
    if (!(particle_radius > 0.0))
        throw InvalidArgument("scene.particle_radius: must be > 0");
    if (!(refractive_index > 1.0))
        throw InvalidArgument("scene.refractive_index: must be > 1");
    if (min_separation > 0.0 && min_separation < 2.0 * particle_radius)
        throw InvalidArgument("scene.min_separation: must be >= 2 * particle_radius");
    if (kind == SceneKind::RandomCube) {
        if (n_particles < 1)
            throw InvalidArgument("scene.n_particles: must be >= 1");
        if (!(box_edge > 0.0))
            throw InvalidArgument("scene.box_edge: must be > 0");
    } else {
        if (positions.empty())
            throw InvalidArgument("scene.positions: deterministic layout needs at least one particle");
        check_pairwise(positions, 2.0 * particle_radius);
    }
}

double density(SceneSpec const& spec) {
    if (spec.kind != SceneKind::RandomCube)
        throw InvalidArgument("density undefined for deterministic layout");
    double const r = spec.particle_radius;
    double const l = spec.box_edge;
    return 4.0 * std::numbers::pi * r * r * r * static_cast<double>(spec.n_particles) / (3.0 * l * l * l);
}

std::uint64_t realization_seed(std::uint64_t master_seed, std::uint64_t realization_index) {
    return splitmix64(splitmix64(master_seed) ^ splitmix64(realization_index + 0x632be59bd9b4e019ULL));
}

Scene sample_scene(SceneSpec const& spec, std::uint64_t realization_index, std::uint64_t master_seed) {
    spec.validate();
    Scene scene;
    scene.spec = spec;
    scene.realization_seed = realization_seed(master_seed, realization_index);
    if (spec.kind == SceneKind::Deterministic) {
        scene.positions = spec.positions;
        return scene;
    }

    std::mt19937_64 rng(scene.realization_seed);
    double const half = 0.5 * spec.box_edge;
    double const min_sep2 = spec.effective_min_separation() * spec.effective_min_separation();
    auto& pos = scene.positions;
    pos.reserve(spec.n_particles);

    for (std::size_t p = 0; p < spec.n_particles; ++p) {
        bool placed = false;
        for (std::size_t attempt = 0; attempt < kPlacementRetryBudget && !placed; ++attempt) {
            Vec3 const c{spec.box_edge * unit_uniform(rng) - half, spec.box_edge * unit_uniform(rng) - half,
                         spec.box_edge * unit_uniform(rng) - half};
            placed = true;
            for (auto const& q : pos) {
                Vec3 const d = c - q;
                if (dot(d, d) < min_sep2) {
                    placed = false;
                    break;
                }
            }
            if (placed)
                pos.push_back(c);
        }
        if (!placed)
            throw PackingFailure(p, spec.n_particles);
    }
    return scene;
}

FixedLayout parse_layout(std::string const& name) {
    if (name == "pair")
        return FixedLayout::Pair;
    if (name == "triple_line")
        return FixedLayout::TripleLine;
    if (name == "triangle")
        return FixedLayout::Triangle;
    if (name == "quad")
        return FixedLayout::Quad;
    throw InvalidArgument("unknown layout '" + name + "' (expected pair, triple_line, triangle, quad)");
}

std::string to_string(FixedLayout layout) {
    switch (layout) {
    case FixedLayout::Pair: return "pair";
    case FixedLayout::TripleLine: return "triple_line";
    case FixedLayout::Triangle: return "triangle";
    case FixedLayout::Quad: return "quad";
    }
    return "?";
}

SceneSpec fixed_layout(FixedLayout layout, double spacing, double particle_radius, double refractive_index) {
    if (!(spacing >= 2.0 * particle_radius))
        throw InvalidArgument("layout spacing " + std::to_string(spacing) +
                              " is below 2 * particle_radius; particles would overlap");
    double const d = spacing;
    std::vector<Vec3> p;
    switch (layout) {
    case FixedLayout::Pair:
        p = {{-0.5 * d, 0, 0}, {0.5 * d, 0, 0}};
        break;
    case FixedLayout::TripleLine:
        p = {{-d, 0, 0}, {0, 0, 0}, {d, 0, 0}};
        break;
    case FixedLayout::Triangle: {
        // Circumradius d / sqrt(3); one vertex on +x.
        double const rc = d / std::sqrt(3.0);
        p = {{rc, 0, 0}, {-0.5 * rc, 0.5 * d, 0}, {-0.5 * rc, -0.5 * d, 0}};
        break;
    }
    case FixedLayout::Quad:
        p = {{-0.5 * d, -0.5 * d, 0}, {0.5 * d, -0.5 * d, 0}, {-0.5 * d, 0.5 * d, 0}, {0.5 * d, 0.5 * d, 0}};
        break;
    }
    auto spec = SceneSpec::deterministic(std::move(p), particle_radius, refractive_index);
    spec.validate();
    return spec;
}

void write_positions_csv(std::ostream& os, Scene const& scene) {
    os << "x,y,z\n";
    char buf[96];
    for (auto const& p : scene.positions) {
        std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g\n", p.x, p.y, p.z);
        os << buf;
    }
}

} // namespace biphoton
