#include <doctest.h>

#include <cmath>
#include <random>

#include "biphoton/analytics.hpp"
#include "biphoton/error.hpp"

using namespace biphoton;

namespace {

Covariance iid(double sigma2) {
    return [sigma2](std::size_t i, std::size_t j) { return i == j ? Complex(sigma2, 0.0) : Complex(0.0, 0.0); };
}

std::vector<double> triangle(AngularGrid const& grid, double center, double height, double base, double halfwidth) {
    std::vector<double> y;
    for (double t : grid.thetas())
        y.push_back(base + height * std::max(0.0, 1.0 - std::abs(t - center) / halfwidth));
    return y;
}

} // namespace

TEST_SUITE("analytics") {

TEST_CASE("Wick moments of circular Gaussian variables") {
    double const s2 = 1.7;
    CHECK(wick_moment({0}, {0}, iid(s2)) == Complex(s2, 0.0));
    CHECK(wick_moment({0, 0}, {0, 0}, iid(s2)) == Complex(2.0 * s2 * s2, 0.0));
    CHECK(wick_moment({0, 1}, {0, 1}, iid(s2)) == Complex(s2 * s2, 0.0));
    CHECK(wick_moment({0, 0, 0}, {0, 0, 0}, iid(s2)).real() == doctest::Approx(6.0 * s2 * s2 * s2));
    CHECK(wick_moment({0}, {0, 0}, iid(s2)) == Complex(0.0, 0.0));
    CHECK(wick_moment({0, 1}, {}, iid(s2)) == Complex(0.0, 0.0));
    CHECK(wick_moment({0}, {1}, iid(s2)) == Complex(0.0, 0.0));
    std::vector<std::size_t> seven(7, 0);
    CHECK_THROWS_WITH(wick_moment(seven, seven, iid(1.0)), doctest::Contains("moment order too high"));
    CHECK_NOTHROW(wick_moment(std::vector<std::size_t>(6, 0), std::vector<std::size_t>(6, 0), iid(1.0)));
}

TEST_CASE("Wick moment with correlated variables matches sampling") {
    // z2 = rho z1 + sqrt(1 - |rho|^2) w; cov(1, 2) = E[conj(z1) z2] = rho.
    Complex const rho(0.6, 0.3);
    Covariance cov = [rho](std::size_t i, std::size_t j) {
        if (i == j)
            return Complex(1.0, 0.0);
        return i == 0 ? rho : std::conj(rho);
    };
    Complex const exact = wick_moment({0, 1}, {0, 1}, cov);  // E|z1|^2|z2|^2 = 1 + |rho|^2
    CHECK(exact.real() == doctest::Approx(1.0 + std::norm(rho)));
    std::mt19937_64 rng(4);
    std::normal_distribution<double> g(0.0, std::sqrt(0.5));
    double sum = 0.0;
    int const n = 400000;
    for (int i = 0; i < n; ++i) {
        Complex const z1(g(rng), g(rng)), w(g(rng), g(rng));
        Complex const z2 = rho * z1 + std::sqrt(1.0 - std::norm(rho)) * w;
        sum += std::norm(z1) * std::norm(z2);
    }
    CHECK(sum / n == doctest::Approx(exact.real()).epsilon(0.02));
}

TEST_CASE("closed-form Gaussian predictions equal the Wick enumeration") {
    for (int m : {1, 2, 3})
        for (double s2 : {1.0, 0.37}) {
            auto const a = gaussian_prediction(m, s2);
            auto const b = gaussian_prediction_by_enumeration(m, s2);
            CHECK(a.c_coinciding == doctest::Approx(b.c_coinciding).epsilon(1e-14));
            CHECK(a.c_distinct == doctest::Approx(b.c_distinct).epsilon(1e-14));
            CHECK(a.i1_mean == doctest::Approx(b.i1_mean).epsilon(1e-14));
            CHECK(a.i2_mean_coinciding == doctest::Approx(b.i2_mean_coinciding).epsilon(1e-14));
            CHECK(a.i2_mean_distinct == doctest::Approx(b.i2_mean_distinct).epsilon(1e-14));
        }
    CHECK(gaussian_prediction(2, 1.0).c_coinciding == doctest::Approx(0.8));
    CHECK(gaussian_prediction(1, 1.0).c_coinciding == doctest::Approx(2.0 / 3.0));
    CHECK_THROWS_AS(gaussian_prediction(0, 1.0), InvalidArgument);
    CHECK_THROWS_AS(gaussian_prediction(1, 0.0), InvalidArgument);
}

TEST_CASE("Gaussian correlation stays below one and grows with M") {
    double prev = 0.0;
    for (int m = 1; m <= 50; ++m) {
        auto const g = gaussian_prediction(m, 1.0);
        CHECK(g.c_coinciding < 1.0);
        CHECK(g.c_coinciding > prev);
        CHECK(g.c_coinciding >= g.c_distinct);
        CHECK(g.c_distinct == 0.5);
        prev = g.c_coinciding;
    }
}

TEST_CASE("triangle cone is recovered exactly") {
    auto const grid = AngularGrid::half_plane_default();
    double const w = deg_to_rad(6.0);
    double const center = deg_to_rad(-40.0);
    auto const y = triangle(grid, center, 1.0, 1.0, w);
    auto const fit = fit_cone(y, grid, center);
    CHECK(fit.enhancement == doctest::Approx(2.0).epsilon(1e-12));
    CHECK(fit.fwhm == doctest::Approx(w).epsilon(1e-9));
    CHECK(fit.background == doctest::Approx(1.0));
    CHECK(fit.peak_angle == doctest::Approx(center).epsilon(1e-9));
    CHECK(fit.mean_free_path == doctest::Approx(0.7 / (kWavenumber * w)));
    CHECK(fit.kl_star == doctest::Approx(kTwoPi * fit.mean_free_path));
}

TEST_CASE("cone fit is scale invariant") {
    auto const grid = AngularGrid::half_plane_default();
    std::mt19937_64 rng(2);
    std::uniform_real_distribution<double> u(-0.05, 0.05);
    auto y = triangle(grid, deg_to_rad(-30.0), 0.6, 1.0, deg_to_rad(5.0));
    for (auto& v : y)
        v += u(rng);
    auto const a = fit_cone(y, grid, deg_to_rad(-30.0), {.search_halfwidth = deg_to_rad(5.0), .exclusions = {}, .smoothing = deg_to_rad(1.0)});
    for (auto& v : y)
        v *= 37.5;
    auto const b = fit_cone(y, grid, deg_to_rad(-30.0), {.search_halfwidth = deg_to_rad(5.0), .exclusions = {}, .smoothing = deg_to_rad(1.0)});
    CHECK(a.fwhm == doctest::Approx(b.fwhm).epsilon(1e-12));
    CHECK(a.enhancement == doctest::Approx(b.enhancement).epsilon(1e-12));
}

TEST_CASE("flat or misplaced curves have no cone") {
    auto const grid = AngularGrid::half_plane_default();
    std::vector<double> const flat(grid.size(), 3.0);
    CHECK_THROWS_WITH_AS(fit_cone(flat, grid, 0.0), doctest::Contains("no cone detected"), Error);
    auto const far = triangle(grid, deg_to_rad(30.0), 1.0, 1.0, deg_to_rad(3.0));
    CHECK_THROWS_WITH_AS(fit_cone(far, grid, deg_to_rad(-30.0)), doctest::Contains("no cone detected"), Error);
}

TEST_CASE("exclusion windows keep the specular lobe out of the background") {
    auto const grid = AngularGrid::half_plane_default();
    auto y = triangle(grid, deg_to_rad(-40.0), 1.0, 1.0, deg_to_rad(4.0));
    // A wide plateau of height 3 around +40 deg would otherwise lift the median.
    for (std::size_t i = 0; i < grid.size(); ++i)
        if (std::abs(grid.theta(i) - deg_to_rad(40.0)) < deg_to_rad(45.0))
            y[i] = std::max(y[i], 3.0);
    ConeFitOptions o;
    o.exclusions = {{deg_to_rad(-5.0), deg_to_rad(85.0)}};
    auto const fit = fit_cone(y, grid, deg_to_rad(-40.0), o);
    CHECK(fit.background == doctest::Approx(1.0));
    CHECK(fit.enhancement == doctest::Approx(2.0));
}

TEST_CASE("state geometry of the cone") {
    InputStateSpec s;
    s.kind = StateKind::EntangledPure;
    s.theta_middle = deg_to_rad(140.0);
    s.delta_theta = deg_to_rad(1.0);
    CHECK(rad_to_deg(backscatter_angle(s)) == doctest::Approx(-40.0));
    CHECK(rad_to_deg(specular_angle(s)) == doctest::Approx(40.0));
    CHECK(cone_options_for(s).exclusions.size() == 1);
    s.kind = StateKind::CoherentSingleWave;
    CHECK(rad_to_deg(backscatter_angle(s)) == doctest::Approx(-39.0));
    s.theta_middle = deg_to_rad(180.0);
    s.delta_theta = 0.0;
    CHECK(cone_options_for(s).exclusions.empty());
}

TEST_CASE("speckle correlation of synthetic correlated fields") {
    SpeckleProbe probe;
    probe.reference = Direction::from_degrees(140.0);
    probe.offsets = {deg_to_rad(-1.0), 0.0, deg_to_rad(1.0), deg_to_rad(2.0)};
    std::vector<double> const rho = {0.5, 1.0, 0.5, 0.1};  // field correlation per offset
    auto sums = SpeckleSums::zeros(4);
    std::mt19937_64 rng(8);
    std::normal_distribution<double> g(0.0, std::sqrt(0.5));
    int const n = 200000;
    for (int i = 0; i < n; ++i) {
        Complex const a(g(rng), g(rng));
        for (std::size_t o = 0; o < 4; ++o) {
            Complex const w(g(rng), g(rng));
            Complex const b = rho[o] * a + std::sqrt(1.0 - rho[o] * rho[o]) * w;
            double const ia = std::norm(a), ib = std::norm(b);
            sums.ref_i[o] += ia;
            sums.off_i[o] += ib;
            sums.ref_i2[o] += ia * ia;
            sums.off_i2[o] += ib * ib;
            sums.cross_i[o] += ia * ib;
            sums.cross_field[o] += a * std::conj(b);
        }
    }
    sums.samples = n;
    auto const sc = speckle_correlation(sums, probe);
    REQUIRE(sc.offsets_deg.size() == 4);
    CHECK(sc.offsets_deg[1] == doctest::Approx(0.0));
    CHECK(sc.gamma_exact[1] == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(sc.gamma_wick[1] == doctest::Approx(1.0).epsilon(1e-12));
    for (std::size_t o : {0u, 2u, 3u}) {
        CHECK(sc.gamma_exact[o] == doctest::Approx(rho[o] * rho[o]).epsilon(0.03));
        CHECK(sc.gamma_wick[o] == doctest::Approx(rho[o] * rho[o]).epsilon(0.03));
    }
    // Half maximum 0.5 is crossed 2/3 of the way to +-1 deg.
    CHECK(sc.corr_width_deg == doctest::Approx(4.0 / 3.0).epsilon(0.02));
}

TEST_CASE("speckle correlation rejects dead channels") {
    SpeckleProbe probe;
    probe.offsets = {0.0};
    auto sums = SpeckleSums::zeros(1);
    sums.samples = 10;
    CHECK_THROWS_AS(speckle_correlation(sums, probe), Error);
}

TEST_CASE("small helpers") {
    CHECK(median({3.0, 1.0, 2.0}) == 2.0);
    CHECK(median({4.0, 1.0, 2.0, 3.0}) == 2.5);
    CHECK_THROWS(median({}));
    auto const avg = moving_average({0.0, 3.0, 6.0, 9.0}, 3);
    CHECK(avg[0] == doctest::Approx(1.5));
    CHECK(avg[1] == doctest::Approx(3.0));
    CHECK(avg[3] == doctest::Approx(7.5));
    std::vector<double> const c = {0, 1, 0, 2, 0, 0.5, 0, 3, 2.9, 0};
    CHECK(find_peaks(c, 0.0, 1) == std::vector<std::size_t>{1, 3, 5, 7});
    CHECK(find_peaks(c, 1.5, 1) == std::vector<std::size_t>{3, 7});
    CHECK(find_peaks(c, 0.0, 3) == std::vector<std::size_t>{3, 7});
    auto const same = mixed_vs_pure_contrast(c, c);
    CHECK_FALSE(same.violation);
    CHECK(same.pure_range == same.mixed_range);
    auto const v = mixed_vs_pure_contrast({1.0, 1.1}, {0.0, 2.0});
    CHECK(v.violation);
}

}
