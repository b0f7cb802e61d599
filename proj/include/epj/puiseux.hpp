#pragma once

#include <iosfwd>
#include <vector>

#include "epj/exceptional.hpp"

namespace epj {

/// The pair bifurcating from an EP at kappa* + eps, labelled so that
/// z_(+/-) ~ z0 +/- sqrt(eps) z1 with sqrt(eps) = i sqrt(|eps|) for eps < 0.
struct BifurcationSample {
    double eps = 0.0;
    Eigenpair plus;
    Eigenpair minus;
};

/// Tracks the pair outward from the smallest |eps| of each sign. The first
/// point is labelled by the leading Puiseux term, later points by continuity
/// (z -/+ z0 rescaled by sqrt(eps/eps_prev)); on LabelAmbiguity the step is
/// halved geometrically up to `max_halvings` times. Output follows the order
/// of `eps_list`.
std::vector<BifurcationSample> scan_bifurcation(const EpCertificate& ep, const std::vector<double>& eps_list,
                                                int max_halvings = 12);

struct PuiseuxFit {
    Complex z0;
    Complex z1;
    Complex z2;
    double slope = 0.0;     ///< log-log slope of |z+ - z-| against |eps|, both signs pooled
    double residual = 0.0;  ///< max relative misfit of z+/- over the fit window
    double eps_min = 0.0;   ///< |eps| range of the fit window
    double eps_max = 0.0;
    int samples_used = 0;
};

class PoorFitError : public Error {
public:
    PoorFitError(const std::string& what, PuiseuxFit fit) : Error(ErrorCode::PoorFit, what), fit_(fit) {}
    const PuiseuxFit& fit() const noexcept { return fit_; }

private:
    PuiseuxFit fit_;
};

struct PuiseuxFitOptions {
    double max_fit_eps = 1e-6;   ///< coefficients are fitted on |eps| <= this
    double max_residual = 1e-4;
    double max_slope_error = 0.05;
};

/// Least-squares fit of z+/-(eps) = z0 +/- sqrt(eps) z1 + eps z2 on the small
/// |eps| window, plus the slope over all samples. Needs at least four samples
/// spanning two decades. Throws PoorFitError (code PoorFit, fit attached) when
/// the residual or the slope is off, as for a diabolic crossing.
PuiseuxFit fit_puiseux(const std::vector<BifurcationSample>& samples, const PuiseuxFitOptions& opts = {});

/// Same fit from bare eigenvalue data.
struct EigenvalueSample {
    double eps = 0.0;
    Complex z_plus;
    Complex z_minus;
};
PuiseuxFit fit_puiseux(const std::vector<EigenvalueSample>& samples, const PuiseuxFitOptions& opts = {});

/// Log-log slope of |P phi+ - P phi-| against |eps| with each eigenvector
/// scaled to 1 at the reference entry (largest entry at the smallest |eps|).
double vector_puiseux_slope(const std::vector<BifurcationSample>& samples);

struct DifferenceQuotientResult {
    VectorXc phi0_p;         ///< P|phi0>, scaled so that <phi~0|phi0^(1)> = 1 with phi0 = phi~0 at the reference entry
    VectorXc psphi0_p;       ///< c lim (P phi+ - P phi-)/(z+ - z-) - c N2 P phi0
    Complex n2;              ///< from <phi~-|phi-> c/(z- - z+) = 1 + N2 (z- - z+) + ...
    double extrapolation_change = 0.0; ///< |order-2 minus order-1 Richardson estimate| relative to the result
};

/// Difference-quotient pseudo-eigenvector with Richardson extrapolation of
/// order 2 in h = sqrt(eps). The +/- combinations used are even in h, so the
/// leading error is O(eps). Throws NonConvergence when the two highest
/// extrapolation orders disagree by more than `max_change` (relative).
DifferenceQuotientResult difference_quotient_pseudovector(const EpCertificate& ep, const std::vector<double>& eps_list,
                                                          Complex c, double max_change = 1e-3);

/// |<phi~0|H'|phi0>| / (|phi~0| |phi0|) with H' = dH_eff/dkappa at fixed z
/// (central difference); must not vanish for the Puiseux expansion to hold.
double perturbation_overlap(const EpCertificate& ep, double step = 1e-6);

/// CSV: eps, re/im z+, re/im z-, |z+ - z-|.
void write_bifurcation_csv(std::ostream& os, const std::vector<BifurcationSample>& samples);

} // namespace epj
