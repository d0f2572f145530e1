#include "biphoton/solver.hpp"

#include <cmath>
#include <numbers>
#include <random>
#include <string>

#include "biphoton/error.hpp"

namespace biphoton {
namespace {

constexpr Complex kI{0.0, 1.0};
constexpr double kFourPi = 4.0 * std::numbers::pi;
constexpr Eigen::Index kBlockRows = 256;

bool same_angle(double a, double b) { return std::abs(a - b) <= 1e-12; }

} // namespace

Complex green(double k, double r) {
    if (!(r > 0.0))
        throw InvalidArgument("green: separation must be > 0 (self-interaction excluded)");
    return std::exp(kI * (k * r)) / (kFourPi * r);
}

Complex t_matrix(double k, double radius, double refractive_index) {
    if (!(radius > 0.0))
        throw InvalidArgument("t_matrix: radius must be > 0");
    if (!(refractive_index > 1.0))
        throw InvalidArgument("t_matrix: refractive index must be > 1");
    double const volume = kFourPi * radius * radius * radius / 3.0;
    double const t0 = k * k * (refractive_index * refractive_index - 1.0) * volume;
    return t0 / (1.0 - kI * (k * t0 / kFourPi));
}

bool in_rayleigh_regime(double k, double radius) { return k * radius <= 1.0 + 1e-12; }

PointScatterer PointScatterer::for_spec(SceneSpec const& spec, double k) {
    return {k, t_matrix(k, spec.particle_radius, spec.refractive_index)};
}

FoldyLaxSolver::FoldyLaxSolver(Scene const& scene, PointScatterer scatterer, SolverOptions options)
    : scene_(scene), scatterer_(scatterer), options_(options) {
    auto const n = static_cast<Eigen::Index>(scene_.size());
    if (n == 0)
        throw InvalidArgument("solver: scene has no particles");
    column_phase_.assign(static_cast<std::size_t>(n), Complex{1.0, 0.0});
    if (options_.nonreciprocal_control) {
        std::mt19937_64 rng(scene_.realization_seed ^ 0xa5a5f00dcafe1234ULL);
        for (auto& ph : column_phase_) {
            double const u = static_cast<double>(rng() >> 11) * 0x1.0p-53;
            ph = std::exp(kI * (kTwoPi * u));
        }
    }
    lu_.compute(system_block(0, n));
}

CMatrix FoldyLaxSolver::system_block(Eigen::Index row0, Eigen::Index rows) const {
    auto const n = static_cast<Eigen::Index>(scene_.size());
    auto const& pos = scene_.positions;
    Complex const t = scatterer_.t;
    double const k = scatterer_.k;
    CMatrix a(rows, n);
    for (Eigen::Index j = 0; j < n; ++j) {
        for (Eigen::Index r = 0; r < rows; ++r) {
            Eigen::Index const i = row0 + r;
            if (i == j) {
                a(r, j) = 1.0;
                continue;
            }
            double const d = distance(pos[static_cast<std::size_t>(i)], pos[static_cast<std::size_t>(j)]);
            a(r, j) = -t * column_phase_[static_cast<std::size_t>(j)] * green(k, d);
        }
    }
    return a;
}

CVector FoldyLaxSolver::incident_field(Direction const& incident) const {
    auto const& pos = scene_.positions;
    CVector e(static_cast<Eigen::Index>(pos.size()));
    Vec3 const khat = incident.unit_vector();
    for (std::size_t j = 0; j < pos.size(); ++j)
        e(static_cast<Eigen::Index>(j)) = std::exp(kI * (scatterer_.k * dot(khat, pos[j])));
    return e;
}

CMatrix FoldyLaxSolver::solve(std::span<Direction const> incident) const {
    auto const n = static_cast<Eigen::Index>(scene_.size());
    auto const m = static_cast<Eigen::Index>(incident.size());
    CMatrix rhs(n, m);
    for (Eigen::Index c = 0; c < m; ++c)
        rhs.col(c) = incident_field(incident[static_cast<std::size_t>(c)]);
    CMatrix fields = lu_.solve(rhs);

    // Residuals for all columns at once, one row block at a time.
    Eigen::VectorXd res_sq = Eigen::VectorXd::Zero(m);
    for (Eigen::Index row0 = 0; row0 < n; row0 += kBlockRows) {
        Eigen::Index const rows = std::min(kBlockRows, n - row0);
        CMatrix const r = system_block(row0, rows) * fields - rhs.middleRows(row0, rows);
        res_sq += r.colwise().squaredNorm().transpose();
    }
    for (Eigen::Index c = 0; c < m; ++c) {
        double const res = std::sqrt(res_sq(c));
        double const ref = rhs.col(c).norm();
        if (!std::isfinite(res) || res > options_.residual_tolerance * ref)
            throw SolverError("incident direction " + std::to_string(c) + ": linear solve residual " +
                              std::to_string(res) + " exceeds " +
                              std::to_string(options_.residual_tolerance) + " * |E_inc| = " +
                              std::to_string(options_.residual_tolerance * ref));
    }
    return fields;
}

CVector FoldyLaxSolver::solve(Direction const& incident) const {
    return solve(std::span<Direction const>(&incident, 1)).col(0);
}

CVector solve_fields(Scene const& scene, Direction const& incident, double k) {
    FoldyLaxSolver solver(scene, PointScatterer::for_spec(scene.spec, k));
    return solver.solve(incident);
}

Complex far_field(Scene const& scene, CVector const& fields, Direction const& detect,
                  PointScatterer const& scatterer) {
    Vec3 const khat = detect.unit_vector();
    Complex sum{0.0, 0.0};
    for (std::size_t j = 0; j < scene.positions.size(); ++j)
        sum += fields(static_cast<Eigen::Index>(j)) *
               std::exp(-kI * (scatterer.k * dot(khat, scene.positions[j])));
    return scatterer.t * sum;
}

CMatrix detection_phases(Scene const& scene, AngularGrid const& grid, double k) {
    auto const rows = static_cast<Eigen::Index>(grid.size());
    auto const cols = static_cast<Eigen::Index>(scene.size());
    CMatrix p(rows, cols);
    for (Eigen::Index r = 0; r < rows; ++r) {
        Vec3 const khat = grid.direction(static_cast<std::size_t>(r)).unit_vector();
        for (Eigen::Index j = 0; j < cols; ++j)
            p(r, j) = std::exp(-kI * (k * dot(khat, scene.positions[static_cast<std::size_t>(j)])));
    }
    return p;
}

std::optional<std::size_t> ScatteringMatrix::column_of(Direction const& incident) const {
    for (std::size_t c = 0; c < incident_dirs.size(); ++c)
        if (same_angle(incident_dirs[c].theta(), incident.theta()) &&
            same_angle(incident_dirs[c].phi(), incident.phi()))
            return c;
    return std::nullopt;
}

std::size_t ScatteringMatrix::require_column(Direction const& incident) const {
    auto c = column_of(incident);
    if (!c)
        throw InvalidArgument("scattering matrix has no column for incidence theta = " +
                              std::to_string(rad_to_deg(incident.theta())) + " deg");
    return *c;
}

ScatteringMatrix assemble_smatrix(Scene const& scene, std::span<Direction const> incident_dirs,
                                  AngularGrid const& grid, PointScatterer const& scatterer,
                                  SolverOptions const& options) {
    if (incident_dirs.empty())
        throw InvalidArgument("assemble_smatrix: no incident directions");
    FoldyLaxSolver solver(scene, scatterer, options);
    CMatrix const fields = solver.solve(incident_dirs);
    ScatteringMatrix s;
    s.amplitudes = scatterer.t * (detection_phases(scene, grid, scatterer.k) * fields);
    s.incident_dirs.assign(incident_dirs.begin(), incident_dirs.end());
    s.grid = grid;
    s.t_matrix = scatterer.t;
    s.k = scatterer.k;
    return s;
}

ScatteringMatrix assemble_smatrix(Scene const& scene, std::span<Direction const> incident_dirs,
                                  AngularGrid const& grid, double k) {
    return assemble_smatrix(scene, incident_dirs, grid, PointScatterer::for_spec(scene.spec, k));
}

} // namespace biphoton
