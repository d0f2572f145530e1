#pragma once

#include <complex>
#include <functional>
#include <utility>
#include <vector>

#include "biphoton/ensemble.hpp"
#include "biphoton/geometry.hpp"

namespace biphoton {

// ---------------------------------------------------------------------------
// Circular Gaussian statistics

inline constexpr std::size_t kMaxWickOrder = 6;

using Covariance = std::function<std::complex<double>(std::size_t, std::size_t)>;

/// E[conj(z_m1) ... conj(z_ms) z_n1 ... z_nt] for a zero-mean circular complex
/// Gaussian vector with covariance(m, n) = E[conj(z_m) z_n]. Zero when s != t;
/// otherwise the sum over all t! pairings. Orders above 6 are rejected.
std::complex<double> wick_moment(std::vector<std::size_t> const& conjugated,
                                 std::vector<std::size_t> const& unconjugated, Covariance const& covariance);

/// Closed-form moments of currents and correlations for i.i.d. circular
/// Gaussian scattering elements with variance sigma2.
struct GaussianPrediction {
    int schmidt_rank = 1;
    double sigma2 = 1.0;
    double c_coinciding = 0.0;  // 2M / (1 + 2M)
    double c_distinct = 0.5;
    double i1_mean = 0.0;             // 2 sigma^2
    double i2_mean_coinciding = 0.0;  // 4 sigma^4
    double i2_mean_distinct = 0.0;    // 2 sigma^4
};

GaussianPrediction gaussian_prediction(int schmidt_rank, double sigma2);

/// The same quantities obtained by expanding the entangled-pure current
/// formulas into monomials of scattering elements and averaging each one with
/// wick_moment(). Independent of the closed forms above.
GaussianPrediction gaussian_prediction_by_enumeration(int schmidt_rank, double sigma2);

// ---------------------------------------------------------------------------
// Speckle correlation

struct SpeckleCorrelation {
    std::vector<double> offsets_deg;
    std::vector<double> gamma_exact;  // intensity cross-correlation coefficient
    std::vector<double> gamma_wick;   // |<A1 A2*>|^2 / (<|A1|^2> <|A2|^2>)
    double corr_width_deg = 0.0;      // full width at half maximum of gamma_exact; inf if unresolved
};

SpeckleCorrelation speckle_correlation(SpeckleSums const& sums, SpeckleProbe const& probe);

// ---------------------------------------------------------------------------
// Cone characterisation

struct ConeFitOptions {
    /// Peak must lie within this distance of the expected angle.
    double search_halfwidth = deg_to_rad(5.0);
    /// Angular windows [lo, hi] ignored when estimating the background.
    std::vector<std::pair<double, double>> exclusions;
    /// Moving-average window applied before fitting (0 = none).
    double smoothing = 0.0;
};

struct ConeFit {
    double peak_angle = 0.0;
    double peak_value = 0.0;
    double background = 0.0;
    double fwhm = 0.0;
    double enhancement = 0.0;
    double mean_free_path = 0.0;
    double kl_star = 0.0;
};

/// Width-to-transport-length constant: l* = 0.7 / (k * FWHM).
inline constexpr double kConeWidthConstant = 0.7;

/// Locates the cone near expected_peak, takes the background as the median
/// outside the cone and the exclusion windows, and measures the full width at
/// (peak + background) / 2 by linear interpolation. Throws Error("no cone
/// detected") when there is no peak above background.
ConeFit fit_cone(std::vector<double> const& curve, AngularGrid const& grid, double expected_peak,
                 ConeFitOptions const& options = {});

/// Detection angle of exact backscattering for a state: the retro direction
/// of theta_middle for pair states, of the occupied mode otherwise.
double backscatter_angle(InputStateSpec const& spec);
double specular_angle(InputStateSpec const& spec);

/// Options used for ensemble curves: 1 deg smoothing and the specular lobe
/// excluded from the background when it is clear of the cone.
ConeFitOptions cone_options_for(InputStateSpec const& spec);

std::vector<double> moving_average(std::vector<double> const& curve, std::size_t window);

/// Local maxima of curve that exceed min_height, at least min_separation
/// samples apart (the higher one wins).
std::vector<std::size_t> find_peaks(std::vector<double> const& curve, double min_height,
                                    std::size_t min_separation);

struct ContrastSummary {
    double pure_range = 0.0;
    double mixed_range = 0.0;
    double pure_max = 0.0;
    double mixed_max = 0.0;
    bool violation = false;  // mixed oscillates more than pure
};

ContrastSummary mixed_vs_pure_contrast(std::vector<double> const& pure, std::vector<double> const& mixed);

double median(std::vector<double> values);

} // namespace biphoton
