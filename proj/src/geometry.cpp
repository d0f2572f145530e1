#include "biphoton/geometry.hpp"

#include <algorithm>

#include "biphoton/error.hpp"

namespace biphoton {

Direction::Direction(double theta, double phi)
    : theta_(theta), phi_(phi),
      unit_{std::sin(theta) * std::cos(phi), std::sin(theta) * std::sin(phi), std::cos(theta)} {}

Direction Direction::reversed() const {
    // Keep detection angles in [-pi/2, pi/2] and incidences in (pi/2, 3pi/2).
    double const theta = theta_ <= std::numbers::pi / 2 ? theta_ + std::numbers::pi
                                                        : theta_ - std::numbers::pi;
    Direction out;
    out.theta_ = theta;
    out.phi_ = phi_;
    out.unit_ = -unit_;
    return out;
}

AngularGrid::AngularGrid(std::vector<double> thetas, double phi) : thetas_(std::move(thetas)), phi_(phi) {
    if (thetas_.empty())
        throw InvalidArgument("angular grid: no angles");
    for (std::size_t i = 0; i < thetas_.size(); ++i) {
        double const t = thetas_[i];
        if (!(t >= -std::numbers::pi / 2 - 1e-12 && t <= std::numbers::pi / 2 + 1e-12))
            throw InvalidArgument("angular grid: angle outside [-pi/2, pi/2]");
        if (i > 0 && !(t > thetas_[i - 1]))
            throw InvalidArgument("angular grid: angles must be strictly increasing");
    }
}

AngularGrid AngularGrid::uniform(double theta_min, double theta_max, double step, double phi) {
    if (!(step > 0.0) || !(theta_max >= theta_min))
        throw InvalidArgument("angular grid: need step > 0 and theta_max >= theta_min");
    auto const n = static_cast<std::size_t>(std::llround((theta_max - theta_min) / step)) + 1;
    std::vector<double> thetas(n);
    for (std::size_t i = 0; i < n; ++i)
        thetas[i] = theta_min + static_cast<double>(i) * step;
    thetas.back() = std::min(thetas.back(), theta_max);
    return AngularGrid(std::move(thetas), phi);
}

AngularGrid AngularGrid::half_plane_default() {
    return uniform(-std::numbers::pi / 2, std::numbers::pi / 2, deg_to_rad(0.25));
}

std::size_t AngularGrid::nearest_index(double theta) const {
    auto it = std::lower_bound(thetas_.begin(), thetas_.end(), theta);
    if (it == thetas_.begin())
        return 0;
    if (it == thetas_.end())
        return thetas_.size() - 1;
    auto const hi = static_cast<std::size_t>(it - thetas_.begin());
    return (theta - thetas_[hi - 1] <= thetas_[hi] - theta) ? hi - 1 : hi;
}

} // namespace biphoton
