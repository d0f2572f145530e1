#include <doctest.h>

#include <cmath>
#include <random>
#include <sstream>

#include "biphoton/error.hpp"
#include "biphoton/scene.hpp"
#include "biphoton/smatrix_io.hpp"
#include "biphoton/solver.hpp"

using namespace biphoton;

namespace {

Scene scene_of(std::vector<Vec3> pts, double radius = kDefaultParticleRadius, double n = kDefaultRefractiveIndex) {
    return sample_scene(SceneSpec::deterministic(std::move(pts), radius, n), 0, 0);
}

double rel_diff(Complex a, Complex b) {
    return std::abs(a - b) / std::max(std::abs(b), 1e-300);
}

} // namespace

TEST_SUITE("solver") {

TEST_CASE("green function value and symmetry") {
    double const k = kWavenumber;
    Complex const g = green(k, 0.37);
    Complex const expect = std::exp(Complex(0.0, k * 0.37)) / (4.0 * std::numbers::pi * 0.37);
    CHECK(std::abs(g - expect) < 1e-15);
    CHECK_THROWS_AS(green(k, 0.0), InvalidArgument);
    CHECK_THROWS_AS(green(k, -1.0), InvalidArgument);
}

TEST_CASE("t-matrix conserves energy for a lossless sphere") {
    for (double n : {1.1, 1.5, 2.0})
        for (double r : {0.05, 0.1, 1.0 / kTwoPi}) {
            Complex const t = t_matrix(kWavenumber, r, n);
            CHECK(std::imag(1.0 / t) == doctest::Approx(-kWavenumber / (4.0 * std::numbers::pi)).epsilon(1e-12));
        }
    // Default particle: k r = 1 exactly and t0 = 8 pi^2 (n^2 - 1) / (3 k) ...
    double const k = kWavenumber;
    double const r = kDefaultParticleRadius;
    double const t0 = k * k * (1.5 * 1.5 - 1.0) * 4.0 * std::numbers::pi * r * r * r / 3.0;
    Complex const t = t_matrix(k, r, 1.5);
    CHECK(std::abs(t - t0 / Complex(1.0, -k * t0 / (4.0 * std::numbers::pi))) < 1e-14);
    CHECK(in_rayleigh_regime(k, r));
    CHECK_FALSE(in_rayleigh_regime(k, 2.0 * r));
}

TEST_CASE("single scatterer: exciting field is the incident wave") {
    Vec3 const p{0.3, -0.2, 0.7};
    auto const scene = scene_of({p});
    auto const dir = Direction::from_degrees(150.0);
    CVector const e = solve_fields(scene, dir);
    Complex const inc = std::exp(Complex(0.0, kWavenumber * dot(dir.unit_vector(), p)));
    CHECK(std::abs(e(0) - inc) < 1e-14);
    auto const sc = PointScatterer::for_spec(scene.spec);
    auto const out = Direction::from_degrees(-20.0);
    Complex const f = far_field(scene, e, out, sc);
    Complex const expect = sc.t * std::exp(Complex(0.0, kWavenumber * dot(dir.unit_vector() - out.unit_vector(), p)));
    CHECK(rel_diff(f, expect) < 1e-13);
}

TEST_CASE("two scatterers match the closed-form solution") {
    Vec3 const p1{0.0, 0.0, 0.0}, p2{0.8, 0.3, -0.4};
    auto const scene = scene_of({p1, p2});
    auto const sc = PointScatterer::for_spec(scene.spec);
    auto const dir = Direction::from_degrees(170.0, 30.0);
    Complex const g = green(sc.k, distance(p1, p2));
    auto inc = [&](Vec3 const& p) { return std::exp(Complex(0.0, sc.k * dot(dir.unit_vector(), p))); };
    Complex const den = 1.0 - sc.t * sc.t * g * g;
    Complex const e1 = (inc(p1) + sc.t * g * inc(p2)) / den;
    Complex const e2 = (inc(p2) + sc.t * g * inc(p1)) / den;
    CVector const e = solve_fields(scene, dir);
    CHECK(rel_diff(e(0), e1) < 1e-12);
    CHECK(rel_diff(e(1), e2) < 1e-12);
}

TEST_CASE("weak scattering agrees with the Neumann series") {
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> u(-2.0, 2.0);
    std::vector<Vec3> pts;
    while (pts.size() < 30) {
        Vec3 const p{u(rng), u(rng), u(rng)};
        bool ok = true;
        for (auto const& q : pts)
            ok = ok && distance(p, q) > 0.4;
        if (ok)
            pts.push_back(p);
    }
    auto const scene = scene_of(pts, 0.05, 1.2);
    auto const sc = PointScatterer::for_spec(scene.spec);
    auto const dir = Direction::from_degrees(200.0);
    std::size_t const n = pts.size();
    CMatrix tg = CMatrix::Zero(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j)
            if (i != j)
                tg(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = sc.t * green(sc.k, distance(pts[i], pts[j]));
    CVector inc(static_cast<Eigen::Index>(n));
    for (std::size_t i = 0; i < n; ++i)
        inc(static_cast<Eigen::Index>(i)) = std::exp(Complex(0.0, sc.k * dot(dir.unit_vector(), pts[i])));
    CVector term = inc, sum = inc;
    for (int it = 0; it < 60; ++it) {
        term = tg * term;
        sum += term;
    }
    CHECK(term.norm() < 1e-14);
    CVector const e = solve_fields(scene, dir);
    CHECK((e - sum).norm() / sum.norm() < 1e-12);
}

TEST_CASE("assembled matrix is reciprocal") {
    auto const scene = sample_scene(SceneSpec::random_cube(60, 4.0), 2, 11);
    std::vector<double> thetas_deg = {-50.0, -20.0, 0.0, 15.0, 35.0};
    std::vector<double> thetas;
    std::vector<Direction> inc;
    for (double t : thetas_deg) {
        thetas.push_back(deg_to_rad(t));
        inc.push_back(Direction::from_degrees(180.0 + t));
    }
    AngularGrid const grid(thetas);
    auto const s = assemble_smatrix(scene, inc, grid);
    // S(k_i, q_j) with q_j = 180 + theta_j equals S(-q_j, -k_i) = S(k_j, q_i).
    for (std::size_t i = 0; i < thetas.size(); ++i)
        for (std::size_t j = 0; j < thetas.size(); ++j) {
            auto const a = s.amplitudes(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
            auto const b = s.amplitudes(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(i));
            CHECK(rel_diff(a, b) < 1e-10);
        }
}

TEST_CASE("non-reciprocal control breaks reciprocity but not single scattering") {
    auto const scene = sample_scene(SceneSpec::random_cube(60, 4.0), 2, 11);
    std::vector<Direction> inc = {Direction::from_degrees(150.0), Direction::from_degrees(200.0)};
    AngularGrid const grid(std::vector<double>{deg_to_rad(-30.0), deg_to_rad(20.0)});
    SolverOptions opt;
    opt.nonreciprocal_control = true;
    auto const sc = PointScatterer::for_spec(scene.spec);
    auto const s = assemble_smatrix(scene, inc, grid, sc, opt);
    CHECK(rel_diff(s.amplitudes(0, 1), s.amplitudes(1, 0)) > 1e-3);

    auto const single = scene_of({{0.1, 0.2, 0.3}});
    auto const a = assemble_smatrix(single, inc, grid, PointScatterer::for_spec(single.spec), opt);
    auto const b = assemble_smatrix(single, inc, grid);
    CHECK((a.amplitudes - b.amplitudes).norm() < 1e-14);
}

TEST_CASE("multi right-hand-side solve equals one-at-a-time solves") {
    auto const scene = sample_scene(SceneSpec::random_cube(80, 4.0), 0, 5);
    FoldyLaxSolver const solver(scene, PointScatterer::for_spec(scene.spec));
    std::vector<Direction> dirs = {Direction::from_degrees(140.0), Direction::from_degrees(181.0),
                                   Direction::from_degrees(225.0, 10.0)};
    CMatrix const all = solver.solve(dirs);
    for (std::size_t c = 0; c < dirs.size(); ++c)
        CHECK((all.col(static_cast<Eigen::Index>(c)) - solver.solve(dirs[c])).norm() < 1e-12);
}

TEST_CASE("residual check rejects a solution it cannot certify") {
    auto const scene = sample_scene(SceneSpec::random_cube(20, 3.0), 0, 5);
    SolverOptions opt;
    opt.residual_tolerance = -1.0;
    FoldyLaxSolver const solver(scene, PointScatterer::for_spec(scene.spec), opt);
    CHECK_THROWS_AS(solver.solve(Direction::from_degrees(180.0)), SolverError);
}

TEST_CASE("assembled amplitudes match the direct far-field sum") {
    auto const scene = sample_scene(SceneSpec::random_cube(40, 3.0), 1, 8);
    auto const grid = AngularGrid::uniform(deg_to_rad(-60.0), deg_to_rad(60.0), deg_to_rad(30.0));
    std::vector<Direction> inc = {Direction::from_degrees(160.0), Direction::from_degrees(190.0)};
    auto const sc = PointScatterer::for_spec(scene.spec);
    auto const s = assemble_smatrix(scene, inc, grid, sc);
    for (std::size_t c = 0; c < inc.size(); ++c) {
        CVector const e = solve_fields(scene, inc[c]);
        for (std::size_t r = 0; r < grid.size(); ++r)
            CHECK(rel_diff(s.amplitudes(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)),
                           far_field(scene, e, grid.direction(r), sc)) < 1e-12);
    }
    CHECK(s.column_of(inc[1]) == std::optional<std::size_t>(1));
    CHECK_FALSE(s.column_of(Direction::from_degrees(161.0)).has_value());
    CHECK_THROWS(s.require_column(Direction::from_degrees(161.0)));
}

TEST_CASE("scattering matrix dump round-trips exactly") {
    auto const scene = sample_scene(SceneSpec::random_cube(30, 3.0), 0, 2);
    auto const grid = AngularGrid::uniform(deg_to_rad(-10.0), deg_to_rad(10.0), deg_to_rad(5.0), deg_to_rad(3.0));
    std::vector<Direction> inc = {Direction::from_degrees(170.0), Direction::from_degrees(185.0, 4.0)};
    auto const s = assemble_smatrix(scene, inc, grid);
    std::stringstream buf;
    write_smatrix(buf, s);
    auto const r = read_smatrix(buf);
    CHECK(r.amplitudes == s.amplitudes);
    CHECK(r.grid == s.grid);
    CHECK(r.t_matrix == s.t_matrix);
    CHECK(r.k == s.k);
    REQUIRE(r.incident_dirs.size() == 2);
    CHECK(r.incident_dirs[1].theta() == s.incident_dirs[1].theta());
    CHECK(r.incident_dirs[1].phi() == s.incident_dirs[1].phi());

    std::stringstream bad("XXXX0000");
    CHECK_THROWS(read_smatrix(bad));
}

TEST_CASE("direction reversal and grid validation") {
    auto const d = Direction::from_degrees(140.0);
    auto const r = d.reversed();
    CHECK(rad_to_deg(r.theta()) == doctest::Approx(-40.0));
    CHECK(norm(d.unit_vector() + r.unit_vector()) < 1e-15);
    CHECK(AngularGrid::half_plane_default().size() == 721);
    CHECK_THROWS_AS(AngularGrid(std::vector<double>{0.1, 0.1}), InvalidArgument);
    CHECK_THROWS_AS(AngularGrid(std::vector<double>{}), InvalidArgument);
    CHECK_THROWS_AS(AngularGrid(std::vector<double>{2.0}), InvalidArgument);
}

}
