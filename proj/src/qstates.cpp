#include "biphoton/qstates.hpp"

#include <cmath>
#include <numbers>

#include "biphoton/error.hpp"

namespace biphoton {
namespace {

bool illuminates_input_facet(double theta) {
    return theta > std::numbers::pi / 2 && theta < 3 * std::numbers::pi / 2;
}

std::string angle_label(double rad) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%g", rad_to_deg(rad));
    std::string s = buf;
    for (auto& c : s)
        if (c == '.')
            c = 'p';
    return s;
}

} // namespace

std::string to_string(StateKind kind) {
    switch (kind) {
    case StateKind::EntangledPure: return "entangled_pure";
    case StateKind::FullyMixed: return "fully_mixed";
    case StateKind::CoherentSingleWave: return "coherent_single_wave";
    case StateKind::CoherentIncoherentSum: return "coherent_incoherent_sum";
    case StateKind::FockTwoSameMode: return "fock_two_same_mode";
    }
    return "?";
}

StateKind parse_state_kind(std::string const& name) {
    for (auto k : {StateKind::EntangledPure, StateKind::FullyMixed, StateKind::CoherentSingleWave,
                   StateKind::CoherentIncoherentSum, StateKind::FockTwoSameMode})
        if (to_string(k) == name)
            return k;
    throw InvalidArgument("unknown state kind '" + name + "'");
}

std::string InputStateSpec::label() const {
    std::string s = to_string(kind);
    if (is_pair_state())
        s += "_M" + std::to_string(schmidt_rank);
    s += "_mid" + angle_label(theta_middle) + "_dt" + angle_label(delta_theta);
    return s;
}

void InputStateSpec::validate() const {
    if (schmidt_rank < 1)
        throw InvalidArgument("state.schmidt_rank: must be >= 1");
    if (!(qe_factor >= 0.0) || !std::isfinite(qe_factor))
        throw InvalidArgument("state.qe_factor: must be >= 0");
    if (!std::isfinite(theta_middle) || !std::isfinite(delta_theta))
        throw InvalidArgument("state: angles must be finite");
    (void)required_directions(*this);
}

std::vector<Direction> incident_directions(InputStateSpec const& spec) {
    if (!spec.is_pair_state())
        throw InvalidArgument("incident_directions: state '" + to_string(spec.kind) + "' is not a pair state");
    if (spec.schmidt_rank < 1)
        throw InvalidArgument("state.schmidt_rank: must be >= 1");
    if (spec.delta_theta == 0.0)
        throw InvalidArgument("state.delta_theta: zero separation makes every pair degenerate (q = -q)");
    if (spec.delta_theta < 0.0)
        throw InvalidArgument("state.delta_theta: must be > 0");
    std::vector<Direction> dirs;
    dirs.reserve(2 * static_cast<std::size_t>(spec.schmidt_rank));
    for (int m = 1; m <= spec.schmidt_rank; ++m) {
        double const plus = spec.theta_middle + m * spec.delta_theta;
        double const minus = spec.theta_middle - m * spec.delta_theta;
        if (!illuminates_input_facet(plus) || !illuminates_input_facet(minus))
            throw InvalidArgument("state: pair " + std::to_string(m) + " incidence outside (90, 270) deg");
        dirs.emplace_back(plus);
        dirs.emplace_back(minus);
    }
    return dirs;
}

std::vector<Direction> required_directions(InputStateSpec const& spec) {
    if (spec.is_pair_state())
        return incident_directions(spec);
    if (spec.delta_theta < 0.0)
        throw InvalidArgument("state.delta_theta: must be >= 0");
    double const theta = spec.theta_middle + spec.delta_theta;
    if (!illuminates_input_facet(theta))
        throw InvalidArgument("state: incidence outside (90, 270) deg");
    return {Direction(theta)};
}

StateColumns StateColumns::locate(ScatteringMatrix const& s, InputStateSpec const& spec) {
    StateColumns cols;
    auto const dirs = required_directions(spec);
    if (spec.is_pair_state()) {
        for (std::size_t m = 0; m < dirs.size(); m += 2) {
            cols.plus.push_back(s.require_column(dirs[m]));
            cols.minus.push_back(s.require_column(dirs[m + 1]));
        }
    } else {
        cols.plus.push_back(s.require_column(dirs[0]));
    }
    return cols;
}

double single_photon_current(CMatrix const& a, StateColumns const& cols, InputStateSpec const& spec,
                             std::size_t i) {
    auto const r = static_cast<Eigen::Index>(i);
    auto amp = [&](std::size_t c) { return a(r, static_cast<Eigen::Index>(c)); };
    switch (spec.kind) {
    case StateKind::EntangledPure:
    case StateKind::FullyMixed: {
        double sum = 0.0;
        for (std::size_t m = 0; m < cols.plus.size(); ++m)
            sum += std::norm(amp(cols.plus[m])) + std::norm(amp(cols.minus[m]));
        return sum / static_cast<double>(cols.plus.size());
    }
    case StateKind::CoherentIncoherentSum: {
        double sum = 0.0;
        for (std::size_t m = 0; m < cols.plus.size(); ++m)
            sum += std::norm(amp(cols.plus[m])) + std::norm(amp(cols.minus[m]));
        return sum / static_cast<double>(2 * cols.plus.size());
    }
    case StateKind::CoherentSingleWave: return std::norm(amp(cols.plus[0]));
    case StateKind::FockTwoSameMode: return 2.0 * std::norm(amp(cols.plus[0]));
    }
    return 0.0;
}

double two_photon_current(CMatrix const& a, StateColumns const& cols, InputStateSpec const& spec, std::size_t i,
                          std::size_t j) {
    auto const ri = static_cast<Eigen::Index>(i);
    auto const rj = static_cast<Eigen::Index>(j);
    auto at = [&](Eigen::Index r, std::size_t c) { return a(r, static_cast<Eigen::Index>(c)); };
    auto const npairs = static_cast<double>(cols.plus.size());
    switch (spec.kind) {
    case StateKind::EntangledPure: {
        Complex amp{0.0, 0.0};
        for (std::size_t m = 0; m < cols.plus.size(); ++m)
            amp += at(ri, cols.plus[m]) * at(rj, cols.minus[m]) + at(ri, cols.minus[m]) * at(rj, cols.plus[m]);
        return std::norm(amp) / npairs;
    }
    case StateKind::FullyMixed: {
        double sum = 0.0;
        for (std::size_t m = 0; m < cols.plus.size(); ++m)
            sum += std::norm(at(ri, cols.plus[m]) * at(rj, cols.minus[m]) +
                             at(ri, cols.minus[m]) * at(rj, cols.plus[m]));
        return sum / npairs;
    }
    case StateKind::CoherentIncoherentSum: {
        double sum = 0.0;
        for (std::size_t m = 0; m < cols.plus.size(); ++m) {
            sum += std::norm(at(ri, cols.plus[m])) * std::norm(at(rj, cols.plus[m]));
            sum += std::norm(at(ri, cols.minus[m])) * std::norm(at(rj, cols.minus[m]));
        }
        return sum / (2.0 * npairs);
    }
    case StateKind::CoherentSingleWave:
        return std::norm(at(ri, cols.plus[0])) * std::norm(at(rj, cols.plus[0]));
    case StateKind::FockTwoSameMode:
        return 2.0 * std::norm(at(ri, cols.plus[0])) * std::norm(at(rj, cols.plus[0]));
    }
    return 0.0;
}

double single_photon_current(ScatteringMatrix const& s, InputStateSpec const& spec, std::size_t i) {
    return single_photon_current(s.amplitudes, StateColumns::locate(s, spec), spec, i);
}

double two_photon_current(ScatteringMatrix const& s, InputStateSpec const& spec, std::size_t i, std::size_t j) {
    return two_photon_current(s.amplitudes, StateColumns::locate(s, spec), spec, i, j);
}

double coincidence_probability(ScatteringMatrix const& s, InputStateSpec const& spec, std::size_t i,
                               std::size_t j) {
    double const i2 = two_photon_current(s, spec, i, j);
    return i == j ? 0.5 * i2 : i2;
}

double correlation_single_realization(ScatteringMatrix const& s, InputStateSpec const& spec, std::size_t i,
                                      std::size_t j) {
    auto const cols = StateColumns::locate(s, spec);
    double const den = single_photon_current(s.amplitudes, cols, spec, i) *
                       single_photon_current(s.amplitudes, cols, spec, j);
    if (!(den > 0.0))
        throw DarkChannel("dark channel: zero single-photon current at detection indices " + std::to_string(i) +
                          ", " + std::to_string(j));
    return spec.qe_factor * two_photon_current(s.amplitudes, cols, spec, i, j) / den;
}

std::vector<double> CurrentCurves::correlation(double qe_factor) const {
    std::vector<double> c(i1.size());
    for (std::size_t i = 0; i < i1.size(); ++i) {
        if (!(i1[i] > 0.0))
            throw DarkChannel("dark channel: zero single-photon current at detection index " + std::to_string(i));
        c[i] = qe_factor * i2_coinciding[i] / (i1[i] * i1[i]);
    }
    return c;
}

CurrentCurves compute_currents(ScatteringMatrix const& s, InputStateSpec const& spec, bool pairwise) {
    auto const cols = StateColumns::locate(s, spec);
    std::size_t const n = s.rows();
    CurrentCurves out;
    out.i1.resize(n);
    out.i2_coinciding.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        out.i1[i] = single_photon_current(s.amplitudes, cols, spec, i);
        out.i2_coinciding[i] = two_photon_current(s.amplitudes, cols, spec, i, i);
    }
    if (pairwise) {
        std::vector<double> m(n * n);
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = i; j < n; ++j)
                m[i * n + j] = m[j * n + i] = two_photon_current(s.amplitudes, cols, spec, i, j);
        out.i2_pairwise = std::move(m);
    }
    return out;
}

} // namespace biphoton
