#pragma once

#include <complex>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "biphoton/geometry.hpp"
#include "biphoton/scene.hpp"

namespace biphoton {

using Complex = std::complex<double>;
using CMatrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;

/// Free-space scalar Helmholtz kernel exp(ikr) / (4 pi r), exp(-i omega t)
/// convention. Throws for r <= 0 (the self term is excluded).
Complex green(double k, double r);

/// Scalar t-matrix of a small sphere: the Born strength
/// t0 = k^2 (n^2 - 1) (4 pi r^3 / 3) with the radiative correction
/// t = t0 / (1 - i k t0 / 4 pi), which makes Im(1/t) = -k / 4 pi exactly.
Complex t_matrix(double k, double radius, double refractive_index);

/// True when k r <= 1, i.e. the point-scatterer model is in its Rayleigh range.
bool in_rayleigh_regime(double k, double radius);

/// Wavenumber and scattering strength shared by all particles of a scene.
struct PointScatterer {
    double k = kWavenumber;
    Complex t{0.0, 0.0};

    static PointScatterer for_spec(SceneSpec const& spec, double k = kWavenumber);
};

struct SolverOptions {
    /// Accept a solution only if |(I - tG)E - E_inc| <= tol * |E_inc| per column.
    double residual_tolerance = 1e-8;
    /// Control experiment: multiply column j of the coupling matrix by a random
    /// phase exp(i phi_j) drawn from the scene's realization seed. A path and
    /// its time reverse then carry different phases, which scrambles their
    /// interference; single scattering is untouched. The modified coupling no
    /// longer conserves energy, so only curve shapes are comparable.
    bool nonreciprocal_control = false;
};

/// The Foldy-Lax system (I - t G) E = E_inc of one scene, factored once and
/// reused for any number of incident plane waves.
class FoldyLaxSolver {
public:
    FoldyLaxSolver(Scene const& scene, PointScatterer scatterer, SolverOptions options = {});

    /// Exciting fields at every particle, one column per incident direction.
    CMatrix solve(std::span<Direction const> incident) const;
    CVector solve(Direction const& incident) const;

    Scene const& scene() const { return scene_; }
    PointScatterer const& scatterer() const { return scatterer_; }

    /// Incident plane wave exp(i k khat . r_j) at every particle.
    CVector incident_field(Direction const& incident) const;

private:
    CMatrix system_block(Eigen::Index row0, Eigen::Index rows) const;

    Scene scene_;
    PointScatterer scatterer_;
    SolverOptions options_;
    std::vector<Complex> column_phase_;
    Eigen::PartialPivLU<CMatrix> lu_;
};

/// Convenience: factor and solve for one incident direction.
CVector solve_fields(Scene const& scene, Direction const& incident, double k = kWavenumber);

/// Far-field amplitude t * sum_j E_j exp(-i k khat_o . r_j). The overall
/// constant prefactor of the true radiated field is dropped.
Complex far_field(Scene const& scene, CVector const& fields, Direction const& detect,
                  PointScatterer const& scatterer);

/// exp(-i k khat_o . r_j) for every grid angle (rows) and particle (columns).
CMatrix detection_phases(Scene const& scene, AngularGrid const& grid, double k);

/// Far-field amplitudes indexed by (detection angle, incident direction).
struct ScatteringMatrix {
    CMatrix amplitudes;
    std::vector<Direction> incident_dirs;
    AngularGrid grid;
    Complex t_matrix{0.0, 0.0};
    double k = kWavenumber;

    std::size_t rows() const { return static_cast<std::size_t>(amplitudes.rows()); }
    std::size_t cols() const { return static_cast<std::size_t>(amplitudes.cols()); }

    /// Column holding the given incidence (angles compared to 1e-12).
    std::optional<std::size_t> column_of(Direction const& incident) const;
    std::size_t require_column(Direction const& incident) const;
};

ScatteringMatrix assemble_smatrix(Scene const& scene, std::span<Direction const> incident_dirs,
                                  AngularGrid const& grid, PointScatterer const& scatterer,
                                  SolverOptions const& options = {});

ScatteringMatrix assemble_smatrix(Scene const& scene, std::span<Direction const> incident_dirs,
                                  AngularGrid const& grid, double k = kWavenumber);

} // namespace biphoton
