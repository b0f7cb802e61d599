#pragma once

#include <vector>

#include "epj/models.hpp"

namespace epj {

/// One continuum contribution to a state: R(a_1) ... R(a_k) Q H P |coeff> for a
/// ket, or <coeff| P H Q R(a_1) ... R(a_k) for a bra, with R(a) = (a - QHQ)^{-1}
/// on the sheet recorded with each node.
struct QTerm {
    VectorXc coeff;
    std::vector<SpectralNode> nodes;
};

/// A vector of the full (P + Q) space in the finite form reached by the
/// Feshbach construction: an explicit P-component plus resolvent strings
/// acting on P-vectors. Bras store their P-component as a column vector.
struct FullState {
    VectorXc p;
    std::vector<QTerm> q;

    FullState& operator+=(const FullState& other);
    FullState& operator*=(Complex s);
};

using FullKet = FullState;
using FullBra = FullState;

FullState operator+(FullState a, const FullState& b);
FullState operator-(FullState a, const FullState& b);
FullState operator*(Complex s, FullState a);

/// Eigenket (or eigenbra) of H with P-component p at eigenvalue node z:
/// P|phi> = p, Q|phi> = R(z) QHP p.
FullState eigen_state(const VectorXc& p, SpectralNode z);

/// Pseudo-eigenket at a coalescence z0 with chain constant c:
/// Q|phi1> = R(z0) QHP p1 - c R(z0)^2 QHP p0. Identical form for bras.
FullState jordan_pseudo_state(const VectorXc& p1, const VectorXc& p0, Complex c, SpectralNode z0);

/// P H Q R(a_1) ... R(a_k) Q H P = (-1)^{k-1} Sigma[a_1, ..., a_k].
MatrixXc resolvent_string(const ModelParams& params, const std::vector<SpectralNode>& nodes);

/// <bra|ket> with all continuum integrals done in closed form.
Complex inner(const ModelParams& params, const FullBra& bra, const FullKet& ket);

/// <bra|H|ket>, using QHQ R(a) = a R(a) - Q for the continuum-continuum block.
Complex h_element(const ModelParams& params, const FullBra& bra, const FullKet& ket);

} // namespace epj
