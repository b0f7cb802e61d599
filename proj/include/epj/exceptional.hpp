#pragma once

#include <utility>
#include <vector>

#include "epj/models.hpp"
#include "epj/spectrum.hpp"

namespace epj {

/// A located exceptional point with the residuals certifying it.
struct EpCertificate {
    ModelParams kappa_star;
    FreeParam free_param = FreeParam::EpsA;
    Complex z0;
    Sheet sheet = Sheet::Second;
    double f_residual = 0.0;        ///< |F(z0)|
    double df_residual = 0.0;       ///< |dF/dz(z0)|
    double selforth_residual = 0.0; ///< |<phi~0|(I - Sigma'(z0))|phi0>| / (|left| |right|)
    int iterations = 0;
};

struct EpTolerances {
    double f = 1e-10;
    double df = 1e-8;
    double selforth = 1e-8;
};

/// Closed-form coalescence of the one-level model:
/// eps_c = -3 (pi alpha^2/4)^{2/3} - alpha^2, z0 = -(pi alpha^2/4)^{2/3}.
EpCertificate ep_closed_form_model1(double alpha);

/// Fills the residual fields of a certificate from its parameters and z0.
void certify(EpCertificate& cert);

/// Solves F = 0, dF/dz = 0 for (z, kappa) with kappa real by Gauss-Newton on
/// the four real residuals. Throws NonConvergence when the iteration does not
/// reach the tolerances and DiabolicPoint when the collision found is not
/// self-orthogonal.
EpCertificate ep_find(const ModelParams& params0, FreeParam free_param, Complex z_init, Sheet sheet,
                      const EpTolerances& tol = {}, int max_iter = 100);

/// Sylvester-resultant discriminant of a polynomial, normalized by the product
/// of the Sylvester row norms (so 0 <= result <= 1). Vanishes exactly at a
/// multiple root.
double relative_discriminant(const std::vector<Complex>& coeffs);

/// Signed discriminant (real part) of a polynomial with real coefficients;
/// it changes sign where a real pair turns into a complex-conjugate pair.
double signed_discriminant(const std::vector<Complex>& coeffs);

/// Starting point for ep_find obtained from a discriminant sign change.
struct EpSeed {
    double kappa = 0.0;
    Complex z;
    Sheet sheet = Sheet::Second;
};

/// Scans the free parameter over [lo, hi], brackets every sign change of
/// the discriminant and refines it by bisection.
std::vector<EpSeed> ep_seed_scan(const ModelParams& params, FreeParam free_param, double lo, double hi, int steps);

/// Seed scan followed by ep_find on each seed; returns every certified EP
/// (throws NonConvergence if none certifies).
std::vector<EpCertificate> ep_search(const ModelParams& params, FreeParam free_param, double lo, double hi,
                                     int steps, const EpTolerances& tol = {});

/// The second eigenvalue z0x of the fixed matrix H_eff(z0) with its vectors
/// (largest entry gauged to 1). Not an eigenvalue of the total Hamiltonian.
struct ExtraneousPartner {
    Complex z0_cross;
    VectorXc right;
    VectorXc left;
};

ExtraneousPartner extraneous_partner(const ModelParams& params_at_ep, Complex z0, Sheet sheet,
                                     double degeneracy_tol = 1e-8);

/// sqrt(eps) with the sign convention of the fractional-power expansion:
/// positive for eps > 0, i sqrt(|eps|) for eps < 0.
Complex puiseux_sqrt(double eps);

/// Leading Puiseux coefficient z1 = sqrt(-2 F_kappa / F_zz) at the EP
/// (First-sheet square root), so that z_(+/-) ~ z0 +/- sqrt(eps) z1.
Complex puiseux_z1(const EpCertificate& ep);

/// The two eigenpairs bifurcating from the EP at kappa* + eps, labelled
/// +/- by proximity to z0 +/- sqrt(eps) z1. Throws LabelAmbiguity when the
/// assignment is not unique.
std::pair<Eigenpair, Eigenpair> coalescing_pair(const EpCertificate& ep, double eps);

/// The two roots on the EP sheet at kappa* + eps nearest to the predicted
/// positions; LabelAmbiguity when both predictions pick the same root or a
/// root lies further than half the predicted split from its prediction.
std::pair<Eigenpair, Eigenpair> nearest_pair(const EpCertificate& ep, double eps, Complex want_plus,
                                             Complex want_minus);

} // namespace epj
