#pragma once

#include "epj/exceptional.hpp"
#include "epj/full_space.hpp"

namespace epj {

/// Jordan basis at an EP: eigenvector and pseudo-eigenvector (right and
/// left), stored through their P-components. The continuum parts follow from
/// the Jordan chain and are reconstructed on demand.
struct JordanBasis {
    ModelParams params;
    Sheet sheet = Sheet::Second;
    Complex z0;
    Complex c{1.0, 0.0};
    VectorXc phi0_p;    ///< P|phi0>
    VectorXc psphi0_p;  ///< P|phi0^(1)>
    VectorXc tphi0_p;   ///< <phi~0|P as a column
    VectorXc tpsphi0_p; ///< <phi~0^(1)|P as a column
    /// gram(i, j) = <dual_i|ket_j> with kets (phi0, phi0^(1)) and duals
    /// (phi~0^(1), phi~0); the identity for a biorthonormal basis.
    Matrix2c gram;
    /// block(i, j) = <dual_i|H|ket_j>; [[z0, c], [0, z0]] for a Jordan basis.
    Matrix2c block;
    double chain_residual_right = 0.0;
    double chain_residual_left = 0.0;

    SpectralNode node() const { return {z0, sheet}; }
    FullKet phi0() const { return eigen_state(phi0_p, node()); }
    FullKet psphi0() const { return jordan_pseudo_state(psphi0_p, phi0_p, c, node()); }
    FullBra tphi0() const { return eigen_state(tphi0_p, node()); }
    FullBra tpsphi0() const { return jordan_pseudo_state(tpsphi0_p, tphi0_p, c, node()); }
};

/// Raw full-space overlaps [[<phi~0|phi0>, <phi~0|phi0^(1)>], [<phi~0^(1)|phi0>, <phi~0^(1)|phi0^(1)>]].
Matrix2c raw_overlaps(const JordanBasis& basis);

/// Recomputes gram, block and the chain residuals from the vectors.
void refresh(JordanBasis& basis);

/// One-level model: closed-form P-components, symmetric (left = right).
JordanBasis build_jordan_n1(const EpCertificate& ep, Complex c);

/// Two-level (or larger) model: kernel vectors, restricted-inverse
/// pseudo-eigenvectors with zero admixture of the eigenvector, then
/// biorthonormalize and canonicalize.
JordanBasis build_jordan_n2(const EpCertificate& ep, Complex c);

/// Dispatches on the model dimension.
JordanBasis build_jordan(const EpCertificate& ep, Complex c);

/// Rescales <phi~0| by 1/<phi~0|phi0^(1)> and shifts <phi~0^(1)| along
/// <phi~0| so that the Gram matrix becomes the identity. `overlaps` is the
/// raw overlap matrix of the input basis.
JordanBasis biorthonormalize(JordanBasis basis, const Matrix2c& overlaps, double tol = 1e-12);

/// Fixes the remaining freedom (kets scaled by k, bras by 1/k; pseudo-ket
/// shifted by +b phi0 and pseudo-bra by -b phi~0) so that the reference
/// entry (largest |phi0| entry) satisfies phi0[r] = phi~0[r] and
/// psphi0[r]/phi0[r] = tpsphi0[r]/tphi0[r]. Gram and block are unchanged;
/// for a complex-symmetric H_eff the result is symmetric.
JordanBasis canonicalize(JordanBasis basis);

/// P-block of z0|phi0><phi~0^(1)| + z0|phi0^(1)><phi~0| + c|phi0><phi~0| in
/// the discrete-state basis. Independent of c.
MatrixXc p0_h_p0(const JordanBasis& basis);

/// Pseudo-eigenvector P-component through the other eigenvector of H_eff(z0):
/// c/(z0x - z0) psi (psi~ . (I - Sigma'(z0)) phi0) / (psi~ . psi).
VectorXc pseudo_vector_via_partner(const ModelParams& params, Complex z0, Sheet sheet, const VectorXc& phi0_p,
                                   Complex c);

} // namespace epj
