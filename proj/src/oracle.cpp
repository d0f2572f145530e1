#include "biphoton/oracle.hpp"

#include <algorithm>
#include <cmath>

#include "biphoton/error.hpp"

namespace biphoton::oracle {

FockBasis::FockBasis(std::size_t n_modes) : n_modes_(n_modes) {
    states_.emplace_back(n_modes, 0);
    for (std::size_t p = 0; p < n_modes; ++p) {
        std::vector<int> occ(n_modes, 0);
        occ[p] = 1;
        states_.push_back(std::move(occ));
    }
    for (std::size_t p = 0; p < n_modes; ++p)
        for (std::size_t q = p; q < n_modes; ++q) {
            std::vector<int> occ(n_modes, 0);
            ++occ[p];
            ++occ[q];
            states_.push_back(std::move(occ));
        }
}

std::size_t FockBasis::index_of(std::vector<int> const& occ) const {
    auto it = std::find(states_.begin(), states_.end(), occ);
    return it == states_.end() ? states_.size() : static_cast<std::size_t>(it - states_.begin());
}

CMatrix FockBasis::annihilation(std::size_t mode) const {
    auto const n = static_cast<Eigen::Index>(size());
    CMatrix a = CMatrix::Zero(n, n);
    for (std::size_t col = 0; col < states_.size(); ++col) {
        auto occ = states_[col];
        if (occ[mode] == 0)
            continue;
        double const amp = std::sqrt(static_cast<double>(occ[mode]));
        --occ[mode];
        auto const row = index_of(occ);
        a(static_cast<Eigen::Index>(row), static_cast<Eigen::Index>(col)) = amp;
    }
    return a;
}

CMatrix FockBasis::creation(std::size_t mode) const { return annihilation(mode).adjoint(); }

CVector FockBasis::vacuum() const {
    CVector v = CVector::Zero(static_cast<Eigen::Index>(size()));
    v(0) = 1.0;
    return v;
}

CMatrix input_density(FockBasis const& basis, InputStateSpec const& state) {
    CVector const vac = basis.vacuum();
    switch (state.kind) {
    case StateKind::EntangledPure: {
        auto const m = static_cast<std::size_t>(state.schmidt_rank);
        CVector psi = CVector::Zero(vac.size());
        for (std::size_t p = 0; p < m; ++p)
            psi += basis.creation(2 * p) * (basis.creation(2 * p + 1) * vac);
        psi /= std::sqrt(static_cast<double>(m));
        return psi * psi.adjoint();
    }
    case StateKind::FullyMixed: {
        auto const m = static_cast<std::size_t>(state.schmidt_rank);
        auto const n = vac.size();
        CMatrix rho = CMatrix::Zero(n, n);
        for (std::size_t p = 0; p < m; ++p) {
            CVector const pair = basis.creation(2 * p) * (basis.creation(2 * p + 1) * vac);
            rho += pair * pair.adjoint();
        }
        return rho / static_cast<double>(m);
    }
    case StateKind::FockTwoSameMode: {
        CVector const psi = basis.creation(0) * (basis.creation(0) * vac) / std::sqrt(2.0);
        return psi * psi.adjoint();
    }
    case StateKind::CoherentSingleWave:
    case StateKind::CoherentIncoherentSum:
        break;
    }
    throw InvalidArgument("oracle: state '" + to_string(state.kind) + "' is not a two-photon Fock state");
}

Currents oracle_currents(CMatrix const& s_sub, InputStateSpec const& state, std::size_t i, std::size_t j) {
    std::size_t const n_in = state.is_pair_state() ? 2 * static_cast<std::size_t>(state.schmidt_rank) : 1;
    auto const n_out = static_cast<std::size_t>(s_sub.rows());
    if (state.schmidt_rank > kMaxSchmidtRank || n_out > kMaxOutputModes)
        throw InvalidArgument("oracle: basis overflow (at most " + std::to_string(kMaxOutputModes) +
                              " outputs and Schmidt rank " + std::to_string(kMaxSchmidtRank) + ")");
    if (static_cast<std::size_t>(s_sub.cols()) != n_in)
        throw InvalidArgument("oracle: S sub-block has " + std::to_string(s_sub.cols()) + " columns, state needs " +
                              std::to_string(n_in));
    if (i >= n_out || j >= n_out)
        throw InvalidArgument("oracle: output index out of range");

    FockBasis const basis(n_in + n_out);
    CMatrix const rho = input_density(basis, state);

    auto const dim = static_cast<Eigen::Index>(basis.size());
    std::vector<CMatrix> a_in;
    for (std::size_t p = 0; p < n_in; ++p)
        a_in.push_back(basis.annihilation(p));
    auto output_op = [&](std::size_t k) {
        CMatrix a = CMatrix::Zero(dim, dim);
        for (std::size_t p = 0; p < n_in; ++p)
            a += s_sub(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(p)) * a_in[p];
        return a;
    };
    CMatrix const ai = output_op(i);
    CMatrix const aj = output_op(j);

    Currents c;
    c.i1_i = (rho * ai.adjoint() * ai).trace().real();
    c.i1_j = (rho * aj.adjoint() * aj).trace().real();
    c.i2 = (rho * ai.adjoint() * aj.adjoint() * aj * ai).trace().real();
    return c;
}

CMatrix oracle_subblock(ScatteringMatrix const& s, InputStateSpec const& state, std::vector<std::size_t> const& rows) {
    auto const cols = StateColumns::locate(s, state);
    std::vector<std::size_t> order;
    if (state.is_pair_state()) {
        for (std::size_t m = 0; m < cols.plus.size(); ++m) {
            order.push_back(cols.plus[m]);
            order.push_back(cols.minus[m]);
        }
    } else {
        order.push_back(cols.plus[0]);
    }
    CMatrix sub(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(order.size()));
    for (std::size_t r = 0; r < rows.size(); ++r)
        for (std::size_t c = 0; c < order.size(); ++c)
            sub(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) =
                s.amplitudes(static_cast<Eigen::Index>(rows[r]), static_cast<Eigen::Index>(order[c]));
    return sub;
}

double trace_real(CMatrix const& m) { return m.trace().real(); }

double purity(CMatrix const& rho) { return (rho * rho).trace().real(); }

} // namespace biphoton::oracle
