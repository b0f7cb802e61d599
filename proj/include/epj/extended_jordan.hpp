#pragma once

#include <iosfwd>
#include <vector>

#include "epj/jordan.hpp"
#include "epj/spectrum.hpp"

namespace epj {

/// Extended Jordan basis built from two distinct eigenstates near an EP.
/// Kets (phi+, phi-^(1)) with duals (phi~+^(1), phi~-).
struct ExtendedJordanBasis {
    ModelParams params;
    Complex c{1.0, 0.0};
    Eigenpair plus;
    Eigenpair minus;
    FullKet phi_plus;
    FullKet psphi_minus;
    FullBra tpsphi_plus;
    FullBra tphi_minus;
    /// gram(i, j) = <dual_i|ket_j>; identity
    Matrix2c gram;
    /// block(i, j) = <dual_i|H|ket_j>; [[z+, c], [0, z-]]
    Matrix2c block;

    Complex z_plus() const { return plus.z; }
    Complex z_minus() const { return minus.z; }
    const VectorXc& phi_plus_p() const { return phi_plus.p; }
    const VectorXc& psphi_minus_p() const { return psphi_minus.p; }
    const VectorXc& tphi_minus_p() const { return tphi_minus.p; }
    const VectorXc& tpsphi_plus_p() const { return tpsphi_plus.p; }
};

struct ExtendedTolerances {
    double pair = 1e-12; ///< relative |z+ - z-|
    double norm = 1e-14; ///< |<phi~|phi>| relative to |left| |right|
};

void refresh(ExtendedJordanBasis& basis);

/// |phi-^(1)> = |phi->/<phi~-|phi-> + c|phi+>/(z+ - z-) and
/// <phi~+^(1)| = <phi~+|/<phi~+|phi+> + c<phi~-|/(z- - z+).
ExtendedJordanBasis build_extended(const ModelParams& params, const Eigenpair& pair_plus, const Eigenpair& pair_minus,
                                   Complex c, const ExtendedTolerances& tol = {});

/// Same basis from the P-space equations: restricted inverse of
/// H_eff(z-) - z- applied to c (I - Sigma[z-, z+]) phi+, with the free
/// eigenvector admixtures fixed by <phi~-|phi-^(1)> = <phi~+^(1)|phi+> = 1.
ExtendedJordanBasis build_extended_feshbach(const ModelParams& params, const Eigenpair& pair_plus,
                                            const Eigenpair& pair_minus, Complex c,
                                            const ExtendedTolerances& tol = {});

/// Rescales an eigenpair so that its right and left P-components equal the
/// given reference vectors at entry r.
Eigenpair normalize_to_reference(const ModelParams& params, Eigenpair pair, const VectorXc& right_ref,
                                 const VectorXc& left_ref, Eigen::Index r);

/// Rescales P|phi+> by t and <phi~-|P by 1/t so that the extended
/// pseudo-ket and pseudo-bra agree at entry r; of the two roots t the one
/// nearer 1 is taken. This is the path analogue of the symmetric Jordan gauge.
void symmetrize_pair(const ModelParams& params, Eigenpair& plus, Eigenpair& minus, Complex c, Eigen::Index r);

struct ConvergenceSample {
    double eps = 0.0;
    Complex z_plus;
    Complex z_minus;
    double ket_deviation = 0.0;  ///< |P psphi-(eps) - P psphi0|
    double bra_deviation = 0.0;  ///< |P psphi~+(eps) - P psphi~0|
    double feshbach_gap = 0.0;   ///< largest P-component difference between the two constructions
    double gram_error = 0.0;     ///< |gram - I|
    double block_error = 0.0;    ///< |block - [[z+, c], [0, z-]]|
    double block_to_ep = 0.0;    ///< |block - [[z0, c], [0, z0]]|
    Complex n2_point;            ///< (<phi~-|phi-> c/(z- - z+) - 1)/(z- - z+)
};

struct ConvergenceReport {
    std::vector<ConvergenceSample> samples;
    double smallest_usable_eps = 0.0;
    double rate = 0.0;          ///< log-log slope of ket_deviation against |eps|
    Complex n2_linear;          ///< least-squares y - 1 = N2 d over the three smallest usable eps
    Complex n2_quadratic;       ///< least-squares y - 1 = N2 d + b d^2 over the same samples
};

/// Follows the bifurcating pair along kappa* + eps, normalizing the path
/// eigenvectors to the Jordan eigenvectors at the largest entry and then
/// symmetrizing the pair, and measures how the extended basis approaches the
/// Jordan basis.
ConvergenceReport limit_to_ep(const EpCertificate& ep, const std::vector<double>& eps_list, Complex c);

/// CSV: eps, re/im z+, re/im z-, deviations, gram error, re/im N2 estimate.
void write_convergence_csv(std::ostream& os, const ConvergenceReport& report);

} // namespace epj
