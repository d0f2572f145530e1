#pragma once

#include <optional>
#include <string>
#include <vector>

#include "biphoton/geometry.hpp"
#include "biphoton/solver.hpp"

namespace biphoton {

enum class StateKind {
    EntangledPure,          // M^-1/2 sum_m a+(q_m) a+(-q_m) |0>
    FullyMixed,             // M^-1 sum_m of the pair projectors
    CoherentSingleWave,     // one plane wave, |alpha| = 1
    CoherentIncoherentSum,  // equal-weight mixture of coherent waves at the 2M pair angles
    FockTwoSameMode,        // |2_q>
};

std::string to_string(StateKind kind);
StateKind parse_state_kind(std::string const& name);

/// Input illumination. Angles in radians.
///
/// Two-photon pair states (and the incoherent coherent-sum reference) occupy
/// the 2M incidences theta_middle +/- m * delta_theta, m = 1..M, in the
/// phi = 0 plane. Single-mode states occupy theta_middle + delta_theta.
struct InputStateSpec {
    StateKind kind = StateKind::EntangledPure;
    int schmidt_rank = 1;
    double theta_middle = deg_to_rad(180.0);
    double delta_theta = deg_to_rad(5.0);
    double qe_factor = 1.0;

    bool is_pair_state() const {
        return kind == StateKind::EntangledPure || kind == StateKind::FullyMixed ||
               kind == StateKind::CoherentIncoherentSum;
    }

    /// Short identifier used for output directories, e.g. "entangled_pure_M2_dt1".
    std::string label() const;

    void validate() const;

    friend bool operator==(InputStateSpec const&, InputStateSpec const&) = default;
};

/// Incidences of a pair state ordered (q_1, -q_1, q_2, -q_2, ...), where -q_m
/// is the reflection of q_m about theta_middle.
std::vector<Direction> incident_directions(InputStateSpec const& spec);

/// All incidences a state needs: the pair list, or the single mode.
std::vector<Direction> required_directions(InputStateSpec const& spec);

/// Column indices of a state's incidences within one scattering matrix.
/// For pair states plus[m] / minus[m] hold q_m / -q_m; single-mode states
/// use plus[0] only.
struct StateColumns {
    std::vector<std::size_t> plus;
    std::vector<std::size_t> minus;

    static StateColumns locate(ScatteringMatrix const& s, InputStateSpec const& spec);
};

/// Mean photon number I1 at detection index i.
double single_photon_current(ScatteringMatrix const& s, InputStateSpec const& spec, std::size_t i);
double single_photon_current(CMatrix const& amplitudes, StateColumns const& cols, InputStateSpec const& spec,
                             std::size_t i);

/// Normally ordered two-photon current I2(i, j) = <a+_i a+_j a_j a_i>.
double two_photon_current(ScatteringMatrix const& s, InputStateSpec const& spec, std::size_t i, std::size_t j);
double two_photon_current(CMatrix const& amplitudes, StateColumns const& cols, InputStateSpec const& spec,
                          std::size_t i, std::size_t j);

/// Coincidence probability P2 = I2 / (1 + delta_ij).
double coincidence_probability(ScatteringMatrix const& s, InputStateSpec const& spec, std::size_t i,
                               std::size_t j);

/// K * I2(i, j) / (I1(i) I1(j)) for one realization. Throws DarkChannel when
/// the denominator vanishes.
double correlation_single_realization(ScatteringMatrix const& s, InputStateSpec const& spec, std::size_t i,
                                      std::size_t j);

/// Currents and coinciding correlation over the whole detection grid.
struct CurrentCurves {
    std::vector<double> i1;
    std::vector<double> i2_coinciding;
    std::optional<std::vector<double>> i2_pairwise;  // row-major grid x grid

    std::vector<double> correlation(double qe_factor = 1.0) const;
};

CurrentCurves compute_currents(ScatteringMatrix const& s, InputStateSpec const& spec, bool pairwise = false);

} // namespace biphoton
