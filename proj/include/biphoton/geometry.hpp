#pragma once

#include <array>
#include <cmath>
#include <numbers>
#include <vector>

namespace biphoton {

/// Lengths are measured in units of the vacuum wavelength, so k = 2 pi.
inline constexpr double kTwoPi = 2.0 * std::numbers::pi;
inline constexpr double kWavenumber = kTwoPi;

inline constexpr double deg_to_rad(double deg) { return deg * std::numbers::pi / 180.0; }
inline constexpr double rad_to_deg(double rad) { return rad * 180.0 / std::numbers::pi; }

struct Vec3 {
    double x = 0.0;
    double y = 0.0;
    double z = 0.0;

    friend Vec3 operator+(Vec3 a, Vec3 b) { return {a.x + b.x, a.y + b.y, a.z + b.z}; }
    friend Vec3 operator-(Vec3 a, Vec3 b) { return {a.x - b.x, a.y - b.y, a.z - b.z}; }
    friend Vec3 operator-(Vec3 a) { return {-a.x, -a.y, -a.z}; }
    friend Vec3 operator*(double s, Vec3 a) { return {s * a.x, s * a.y, s * a.z}; }
    friend bool operator==(Vec3 const&, Vec3 const&) = default;
};

inline double dot(Vec3 a, Vec3 b) { return a.x * b.x + a.y * b.y + a.z * b.z; }
inline double norm(Vec3 a) { return std::sqrt(dot(a, a)); }
inline double distance(Vec3 a, Vec3 b) { return norm(a - b); }

/// A propagation direction given by polar angle theta (from +z) and azimuth
/// phi. Negative theta is allowed and mirrors the direction through the
/// z axis, which is how detection angles in [-pi/2, pi/2] are expressed.
///
/// Incident plane waves use the same convention: theta = pi propagates along
/// -z (normal incidence on the top facet of the cloud), and detection at
/// theta = 0 looks straight back along +z.
class Direction {
public:
    Direction() = default;
    Direction(double theta, double phi = 0.0);

    static Direction from_degrees(double theta_deg, double phi_deg = 0.0) {
        return Direction(deg_to_rad(theta_deg), deg_to_rad(phi_deg));
    }

    double theta() const { return theta_; }
    double phi() const { return phi_; }
    Vec3 const& unit_vector() const { return unit_; }

    /// Direction of the time-reversed wave: unit vector negated. In the
    /// phi = 0 plane an incidence at theta maps to detection angle theta - pi.
    Direction reversed() const;

    friend bool operator==(Direction const& a, Direction const& b) {
        return a.theta_ == b.theta_ && a.phi_ == b.phi_;
    }

private:
    double theta_ = 0.0;
    double phi_ = 0.0;
    Vec3 unit_{0.0, 0.0, 1.0};
};

/// Ordered detection angles at fixed azimuth.
class AngularGrid {
public:
    AngularGrid() = default;
    explicit AngularGrid(std::vector<double> thetas, double phi = 0.0);

    /// Uniform grid from theta_min to theta_max inclusive. The number of points
    /// is rounded from the span / step.
    static AngularGrid uniform(double theta_min, double theta_max, double step, double phi = 0.0);

    /// -90 deg .. 90 deg in 0.25 deg steps (721 angles).
    static AngularGrid half_plane_default();

    std::size_t size() const { return thetas_.size(); }
    std::vector<double> const& thetas() const { return thetas_; }
    double theta(std::size_t i) const { return thetas_[i]; }
    double phi() const { return phi_; }
    Direction direction(std::size_t i) const { return Direction(thetas_[i], phi_); }

    /// Index of the grid angle closest to theta.
    std::size_t nearest_index(double theta) const;

    friend bool operator==(AngularGrid const&, AngularGrid const&) = default;

private:
    std::vector<double> thetas_;
    double phi_ = 0.0;
};

} // namespace biphoton
