#pragma once

#include <cstdint>
#include <iosfwd>
#include <numbers>
#include <string>
#include <vector>

#include "biphoton/geometry.hpp"

namespace biphoton {

inline constexpr double kDefaultParticleRadius = 1.0 / kTwoPi;
inline constexpr double kDefaultRefractiveIndex = 1.5;
inline constexpr std::size_t kPlacementRetryBudget = 10000;

enum class SceneKind { Deterministic, RandomCube };

/// Parameters of a scatterer arrangement. All lengths in wavelengths.
///
/// A Deterministic spec carries explicit positions; a RandomCube spec carries
/// the particle count and cube edge and is turned into positions by
/// sample_scene(). The cube is centred at the origin.
struct SceneSpec {
    SceneKind kind = SceneKind::RandomCube;
    std::vector<Vec3> positions;
    std::size_t n_particles = 0;
    double box_edge = 0.0;
    double particle_radius = kDefaultParticleRadius;
    double refractive_index = kDefaultRefractiveIndex;
    /// Centre-to-centre lower bound. A value <= 0 means 2 * particle_radius.
    double min_separation = 0.0;

    static SceneSpec random_cube(std::size_t n_particles, double box_edge,
                                 double particle_radius = kDefaultParticleRadius,
                                 double refractive_index = kDefaultRefractiveIndex);
    static SceneSpec deterministic(std::vector<Vec3> positions,
                                   double particle_radius = kDefaultParticleRadius,
                                   double refractive_index = kDefaultRefractiveIndex);

    double effective_min_separation() const {
        return min_separation > 0.0 ? min_separation : 2.0 * particle_radius;
    }

    /// Throws InvalidArgument naming the offending field.
    void validate() const;

    friend bool operator==(SceneSpec const&, SceneSpec const&) = default;
};

struct Scene {
    std::vector<Vec3> positions;
    std::uint64_t realization_seed = 0;
    SceneSpec spec;

    std::size_t size() const { return positions.size(); }
};

/// Volume filling fraction 4 pi r^3 N / (3 L^3) of a RandomCube spec.
double density(SceneSpec const& spec);

/// Per-realization seed; a pure function of its arguments.
std::uint64_t realization_seed(std::uint64_t master_seed, std::uint64_t realization_index);

/// Draws a RandomCube scene by sequential rejection sampling. Deterministic
/// specs are returned as-is (after validation), which lets an ensemble run
/// over a fixed layout.
Scene sample_scene(SceneSpec const& spec, std::uint64_t realization_index, std::uint64_t master_seed);

enum class FixedLayout { Pair, TripleLine, Triangle, Quad };

FixedLayout parse_layout(std::string const& name);
std::string to_string(FixedLayout layout);

/// Few-particle arrangements centred at the origin with nearest-neighbour
/// spacing d. Pair and triple_line lie on the x axis; triangle (equilateral)
/// and quad (square) lie in the x-y plane, transverse to normal incidence.
SceneSpec fixed_layout(FixedLayout layout, double spacing,
                       double particle_radius = kDefaultParticleRadius,
                       double refractive_index = kDefaultRefractiveIndex);

/// One "x,y,z" row per particle, with header.
void write_positions_csv(std::ostream& os, Scene const& scene);

} // namespace biphoton
