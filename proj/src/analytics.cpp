#include "biphoton/analytics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>

#include "biphoton/error.hpp"

namespace biphoton {

std::complex<double> wick_moment(std::vector<std::size_t> const& conjugated,
                                 std::vector<std::size_t> const& unconjugated, Covariance const& covariance) {
    if (conjugated.size() != unconjugated.size())
        return {0.0, 0.0};
    std::size_t const t = conjugated.size();
    if (t > kMaxWickOrder)
        throw InvalidArgument("moment order too high for enumeration");
    std::vector<std::size_t> perm(t);
    std::iota(perm.begin(), perm.end(), std::size_t{0});
    std::complex<double> total{0.0, 0.0};
    do {
        std::complex<double> term{1.0, 0.0};
        for (std::size_t s = 0; s < t; ++s)
            term *= covariance(conjugated[perm[s]], unconjugated[s]);
        total += term;
    } while (std::next_permutation(perm.begin(), perm.end()));
    return total;
}

GaussianPrediction gaussian_prediction(int schmidt_rank, double sigma2) {
    if (schmidt_rank < 1)
        throw InvalidArgument("gaussian_prediction: Schmidt rank must be >= 1");
    if (!(sigma2 > 0.0))
        throw InvalidArgument("gaussian_prediction: sigma2 must be > 0");
    double const two_m = 2.0 * schmidt_rank;
    GaussianPrediction g;
    g.schmidt_rank = schmidt_rank;
    g.sigma2 = sigma2;
    g.c_coinciding = two_m / (1.0 + two_m);
    g.c_distinct = 0.5;
    g.i1_mean = 2.0 * sigma2;
    g.i2_mean_coinciding = 4.0 * sigma2 * sigma2;
    g.i2_mean_distinct = 2.0 * sigma2 * sigma2;
    return g;
}

GaussianPrediction gaussian_prediction_by_enumeration(int schmidt_rank, double sigma2) {
    if (schmidt_rank < 1 || !(sigma2 > 0.0))
        throw InvalidArgument("gaussian_prediction_by_enumeration: need M >= 1 and sigma2 > 0");
    auto const m_count = static_cast<std::size_t>(schmidt_rank);
    double const inv_m = 1.0 / schmidt_rank;
    // Variables: row k holds (a_m, b_m) = (S_k,q_m, S_k,-q_m) at 2m, 2m+1;
    // row k' holds the same at offset 2M. All independent with variance sigma2.
    Covariance cov = [sigma2](std::size_t i, std::size_t j) {
        return i == j ? std::complex<double>(sigma2, 0.0) : std::complex<double>(0.0, 0.0);
    };
    auto a = [](std::size_t row, std::size_t m, std::size_t mm) { return row * 2 * mm + 2 * m; };
    auto b = [](std::size_t row, std::size_t m, std::size_t mm) { return row * 2 * mm + 2 * m + 1; };
    auto const mm = m_count;

    auto e = [&](std::vector<std::size_t> c, std::vector<std::size_t> u) { return wick_moment(c, u, cov).real(); };

    double i1 = 0.0;
    for (std::size_t m = 0; m < mm; ++m)
        i1 += e({a(0, m, mm)}, {a(0, m, mm)}) + e({b(0, m, mm)}, {b(0, m, mm)});
    i1 *= inv_m;

    // |sum_m 2 a_m b_m|^2 / M
    double i2_same = 0.0;
    for (std::size_t m = 0; m < mm; ++m)
        for (std::size_t n = 0; n < mm; ++n)
            i2_same += 4.0 * e({a(0, m, mm), b(0, m, mm)}, {a(0, n, mm), b(0, n, mm)});
    i2_same *= inv_m;

    // |sum_m (a_m b'_m + b_m a'_m)|^2 / M
    double i2_diff = 0.0;
    for (std::size_t m = 0; m < mm; ++m)
        for (std::size_t n = 0; n < mm; ++n) {
            std::vector<std::vector<std::size_t>> lhs = {{a(0, m, mm), b(1, m, mm)}, {b(0, m, mm), a(1, m, mm)}};
            std::vector<std::vector<std::size_t>> rhs = {{a(0, n, mm), b(1, n, mm)}, {b(0, n, mm), a(1, n, mm)}};
            for (auto const& l : lhs)
                for (auto const& r : rhs)
                    i2_diff += e(l, r);
        }
    i2_diff *= inv_m;

    // E[I1(k) I1(k)] and E[I1(k) I1(k')]
    double i1i1_same = 0.0;
    double i1i1_diff = 0.0;
    for (std::size_t p = 0; p < 2 * mm; ++p)
        for (std::size_t q = 0; q < 2 * mm; ++q) {
            i1i1_same += e({p, q}, {p, q});
            i1i1_diff += e({p, 2 * mm + q}, {p, 2 * mm + q});
        }
    i1i1_same *= inv_m * inv_m;
    i1i1_diff *= inv_m * inv_m;

    GaussianPrediction g;
    g.schmidt_rank = schmidt_rank;
    g.sigma2 = sigma2;
    g.i1_mean = i1;
    g.i2_mean_coinciding = i2_same;
    g.i2_mean_distinct = i2_diff;
    g.c_coinciding = i2_same / i1i1_same;
    g.c_distinct = i2_diff / i1i1_diff;
    return g;
}

namespace {

// Full width at `level` of a curve sampled at x around index `center`, by
// linear interpolation between neighbouring samples. Returns the (left,
// right) crossing abscissae; NaN when a side never drops below the level.
std::pair<double, double> half_level_crossings(std::vector<double> const& x, std::vector<double> const& y,
                                               std::size_t center, double level) {
    double const nan = std::numeric_limits<double>::quiet_NaN();
    double left = nan;
    double right = nan;
    for (std::size_t i = center; i > 0; --i)
        if (y[i - 1] < level) {
            double const f = (y[i] - level) / (y[i] - y[i - 1]);
            left = x[i] - f * (x[i] - x[i - 1]);
            break;
        }
    for (std::size_t i = center; i + 1 < y.size(); ++i)
        if (y[i + 1] < level) {
            double const f = (y[i] - level) / (y[i] - y[i + 1]);
            right = x[i] + f * (x[i + 1] - x[i]);
            break;
        }
    return {left, right};
}

} // namespace

SpeckleCorrelation speckle_correlation(SpeckleSums const& sums, SpeckleProbe const& probe) {
    std::size_t const n_off = probe.offsets.size();
    if (sums.ref_i.size() != n_off)
        throw InvalidArgument("speckle_correlation: accumulator does not match the probe offsets");
    if (sums.samples == 0)
        throw InvalidArgument("speckle_correlation: no samples recorded");

    std::vector<std::size_t> order(n_off);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(),
              [&](std::size_t a, std::size_t b) { return probe.offsets[a] < probe.offsets[b]; });

    auto const n = static_cast<double>(sums.samples);
    SpeckleCorrelation out;
    for (std::size_t o : order) {
        double const m0 = sums.ref_i[o] / n;
        double const mo = sums.off_i[o] / n;
        double const v0 = sums.ref_i2[o] / n - m0 * m0;
        double const vo = sums.off_i2[o] / n - mo * mo;
        if (!(v0 > 0.0) || !(vo > 0.0) || !(m0 > 0.0) || !(mo > 0.0))
            throw Error("speckle_correlation: zero variance channel at offset " +
                        std::to_string(rad_to_deg(probe.offsets[o])) + " deg");
        out.offsets_deg.push_back(rad_to_deg(probe.offsets[o]));
        out.gamma_exact.push_back((sums.cross_i[o] / n - m0 * mo) / std::sqrt(v0 * vo));
        out.gamma_wick.push_back(std::norm(sums.cross_field[o] / n) / (m0 * mo));
    }

    auto const& x = out.offsets_deg;
    auto const& y = out.gamma_exact;
    std::size_t center = 0;
    for (std::size_t i = 1; i < x.size(); ++i)
        if (std::abs(x[i]) < std::abs(x[center]))
            center = i;
    auto const [left, right] = half_level_crossings(x, y, center, 0.5 * y[center]);
    if (std::isfinite(left) && std::isfinite(right))
        out.corr_width_deg = right - left;
    else if (std::isfinite(left))
        out.corr_width_deg = 2.0 * (x[center] - left);
    else if (std::isfinite(right))
        out.corr_width_deg = 2.0 * (right - x[center]);
    else
        out.corr_width_deg = std::numeric_limits<double>::infinity();
    return out;
}

double median(std::vector<double> values) {
    if (values.empty())
        throw InvalidArgument("median of empty set");
    std::size_t const mid = values.size() / 2;
    std::nth_element(values.begin(), values.begin() + static_cast<std::ptrdiff_t>(mid), values.end());
    double const upper = values[mid];
    if (values.size() % 2 == 1)
        return upper;
    double const lower = *std::max_element(values.begin(), values.begin() + static_cast<std::ptrdiff_t>(mid));
    return 0.5 * (lower + upper);
}

std::vector<double> moving_average(std::vector<double> const& curve, std::size_t window) {
    if (window <= 1)
        return curve;
    std::size_t const half = window / 2;
    std::vector<double> out(curve.size());
    for (std::size_t i = 0; i < curve.size(); ++i) {
        std::size_t const lo = i >= half ? i - half : 0;
        std::size_t const hi = std::min(curve.size() - 1, i + half);
        double sum = 0.0;
        for (std::size_t j = lo; j <= hi; ++j)
            sum += curve[j];
        out[i] = sum / static_cast<double>(hi - lo + 1);
    }
    return out;
}

ConeFit fit_cone(std::vector<double> const& raw, AngularGrid const& grid, double expected_peak,
                 ConeFitOptions const& options) {
    if (raw.size() != grid.size())
        throw InvalidArgument("fit_cone: curve and grid sizes differ");
    if (raw.size() < 3)
        throw InvalidArgument("fit_cone: curve too short");
    auto const& x = grid.thetas();
    std::vector<double> y = raw;
    if (options.smoothing > 0.0 && grid.size() > 1) {
        double const step = (x.back() - x.front()) / static_cast<double>(x.size() - 1);
        auto const w = static_cast<std::size_t>(std::llround(options.smoothing / step));
        y = moving_average(raw, w | 1u);
    }

    std::size_t peak = grid.size();
    for (std::size_t i = 0; i < y.size(); ++i)
        if (std::abs(x[i] - expected_peak) <= options.search_halfwidth && (peak == grid.size() || y[i] > y[peak]))
            peak = i;
    if (peak == grid.size())
        throw Error("no cone detected: no samples near the expected peak");
    bool const local_max = (peak == 0 || y[peak] >= y[peak - 1]) && (peak + 1 == y.size() || y[peak] >= y[peak + 1]);

    auto excluded = [&](double t) {
        for (auto const& [lo, hi] : options.exclusions)
            if (t >= lo && t <= hi)
                return true;
        return false;
    };

    // Alternate between background and width estimates; the cone window used
    // for the background grows with the measured width.
    double cone_halfwidth = deg_to_rad(5.0);
    ConeFit fit;
    fit.peak_angle = x[peak];
    fit.peak_value = y[peak];
    for (int iter = 0; iter < 4; ++iter) {
        std::vector<double> outside;
        for (std::size_t i = 0; i < y.size(); ++i)
            if (std::abs(x[i] - x[peak]) > cone_halfwidth && !excluded(x[i]))
                outside.push_back(y[i]);
        if (outside.empty())
            throw Error("no cone detected: no background samples");
        fit.background = median(std::move(outside));
        if (!local_max || !(fit.peak_value > fit.background * (1.0 + 1e-9)) || !(fit.background > 0.0))
            throw Error("no cone detected");
        double const level = 0.5 * (fit.peak_value + fit.background);
        auto const [left, right] = half_level_crossings(x, y, peak, level);
        if (!std::isfinite(left) || !std::isfinite(right))
            throw Error("no cone detected: half maximum not reached on both sides");
        fit.fwhm = right - left;
        cone_halfwidth = std::max(deg_to_rad(5.0), 1.5 * fit.fwhm);
    }
    fit.enhancement = fit.peak_value / fit.background;
    fit.mean_free_path = kConeWidthConstant / (kWavenumber * fit.fwhm);
    fit.kl_star = kWavenumber * fit.mean_free_path;
    return fit;
}

namespace {

double occupied_theta(InputStateSpec const& spec) {
    return spec.is_pair_state() ? spec.theta_middle : spec.theta_middle + spec.delta_theta;
}

} // namespace

double backscatter_angle(InputStateSpec const& spec) {
    return occupied_theta(spec) - std::numbers::pi;
}

double specular_angle(InputStateSpec const& spec) {
    return std::numbers::pi - occupied_theta(spec);
}

ConeFitOptions cone_options_for(InputStateSpec const& spec) {
    ConeFitOptions o;
    o.smoothing = deg_to_rad(1.0);
    double const spec_angle = specular_angle(spec);
    double const halfwidth = deg_to_rad(8.0);
    if (std::abs(spec_angle - backscatter_angle(spec)) > 2.0 * halfwidth)
        o.exclusions.emplace_back(spec_angle - halfwidth, spec_angle + halfwidth);
    return o;
}

std::vector<std::size_t> find_peaks(std::vector<double> const& c, double min_height, std::size_t min_separation) {
    std::vector<std::size_t> cand;
    for (std::size_t i = 1; i + 1 < c.size(); ++i)
        if (c[i] > c[i - 1] && c[i] >= c[i + 1] && c[i] >= min_height)
            cand.push_back(i);
    std::sort(cand.begin(), cand.end(), [&](std::size_t a, std::size_t b) { return c[a] > c[b]; });
    std::vector<std::size_t> kept;
    for (std::size_t i : cand) {
        bool clear = true;
        for (std::size_t k : kept)
            if ((i > k ? i - k : k - i) < min_separation)
                clear = false;
        if (clear)
            kept.push_back(i);
    }
    std::sort(kept.begin(), kept.end());
    return kept;
}

ContrastSummary mixed_vs_pure_contrast(std::vector<double> const& pure, std::vector<double> const& mixed) {
    if (pure.size() != mixed.size() || pure.empty())
        throw InvalidArgument("mixed_vs_pure_contrast: curves must share a non-empty grid");
    auto [pmin, pmax] = std::minmax_element(pure.begin(), pure.end());
    auto [mmin, mmax] = std::minmax_element(mixed.begin(), mixed.end());
    ContrastSummary s;
    s.pure_range = *pmax - *pmin;
    s.mixed_range = *mmax - *mmin;
    s.pure_max = *pmax;
    s.mixed_max = *mmax;
    s.violation = s.mixed_range > s.pure_range;
    return s;
}

} // namespace biphoton
