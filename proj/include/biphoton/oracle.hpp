#pragma once

#include <cstddef>
#include <vector>

#include "biphoton/qstates.hpp"
#include "biphoton/solver.hpp"

namespace biphoton::oracle {

inline constexpr std::size_t kMaxOutputModes = 8;
inline constexpr int kMaxSchmidtRank = 3;

/// Fock states with at most two photons over n_modes modes, enumerated as
/// vacuum, then single photons, then pairs (p <= q).
class FockBasis {
public:
    explicit FockBasis(std::size_t n_modes);

    std::size_t n_modes() const { return n_modes_; }
    std::size_t size() const { return states_.size(); }
    std::vector<int> const& occupation(std::size_t index) const { return states_[index]; }

    /// Matrix of the annihilation operator of mode p on this basis.
    CMatrix annihilation(std::size_t mode) const;
    /// Adjoint of annihilation(mode); components leaving the basis are dropped.
    CMatrix creation(std::size_t mode) const;

    CVector vacuum() const;

private:
    std::size_t index_of(std::vector<int> const& occ) const;

    std::size_t n_modes_;
    std::vector<std::vector<int>> states_;
};

/// Input density operator over a basis whose first modes are the state's
/// inputs in the order (q_1, -q_1, ..., q_M, -q_M), or the single mode q.
/// Only two-photon states (pure, mixed, Fock) are representable.
CMatrix input_density(FockBasis const& basis, InputStateSpec const& state);

struct Currents {
    double i1_i = 0.0;
    double i1_j = 0.0;
    double i2 = 0.0;
};

/// Brute-force currents: the output annihilators a_k = sum_n S_kn a_n are
/// built as matrices on the truncated Fock space of inputs and sampled
/// outputs, and I1, I2 are evaluated as traces against the input density.
/// s_sub is outputs x inputs with the input ordering of input_density().
Currents oracle_currents(CMatrix const& s_sub, InputStateSpec const& state, std::size_t i, std::size_t j);

/// Columns of s gathered into the oracle input ordering for the given state.
CMatrix oracle_subblock(ScatteringMatrix const& s, InputStateSpec const& state,
                        std::vector<std::size_t> const& rows);

double trace_real(CMatrix const& m);
double purity(CMatrix const& rho);

} // namespace biphoton::oracle
