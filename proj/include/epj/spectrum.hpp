#pragma once

#include <string>
#include <utility>
#include <vector>

#include "epj/full_space.hpp"
#include "epj/models.hpp"

namespace epj {

/// A discrete eigenvalue of the total Hamiltonian, represented by the
/// P-components of its right and left eigenvectors.
struct Eigenpair {
    Complex z;
    Sheet sheet = Sheet::First;
    VectorXc right_p;
    VectorXc left_p;  ///< <phi~|P as a column vector
    Complex full_norm; ///< <phi~|phi> including the continuum part
    bool near_degenerate = false;

    SpectralNode node() const { return {z, sheet}; }
    FullKet ket() const { return eigen_state(right_p, node()); }
    FullBra bra() const { return eigen_state(left_p, node()); }
};

struct SpectrumOptions {
    double poly_tol = 1e-10;     ///< poly_roots acceptance, relative to the polynomial scale
    double residual_tol = 1e-9;  ///< |det[H_eff(z) - z]| for accepting a root on a sheet
    double cluster_tol = 1e-6;   ///< relative spacing below which roots are flagged near-degenerate
};

/// Right and left kernel vectors of heff - z, each scaled so that its
/// largest-magnitude entry is exactly 1 (lowest index on ties).
std::pair<VectorXc, VectorXc> eigvec_p(const MatrixXc& heff_at_z, Complex z, double kernel_tol = 1e-7);

/// <phi~|phi> = left (I - Sigma'(z)) right.
Complex full_norm(const ModelParams& params, SpectralNode z, const VectorXc& right, const VectorXc& left);

/// Every root of the cleared characteristic polynomial that solves
/// det[H_eff(z) - z] = 0 on one of the two sheets, tagged with that sheet.
/// Roots at z = 0 (the branch point) are dropped. Sorted by sheet, then
/// (Re z, Im z).
std::vector<Eigenpair> discrete_spectrum(const ModelParams& params, const SpectrumOptions& opts = {});

/// Builds the eigenpair at a known eigenvalue.
Eigenpair make_eigenpair(const ModelParams& params, Complex z, Sheet sheet);

/// <phi~_j|phi_l> = left_j [I - Sigma[z_j, z_l]] right_l, continuous as
/// z_j -> z_l where it becomes the full norm.
Complex overlap_full(const ModelParams& params, const Eigenpair& j, const Eigenpair& l);

/// One line of an eigenvalue-trajectory table.
struct ScanRow {
    double param = 0.0;
    std::string branch_id; ///< g<k> for eigenvalues of H, x<k> for the extraneous partner of g<k>
    Sheet sheet = Sheet::First;
    Complex z;
    Complex full_norm;     ///< NaN for extraneous rows
    bool is_extraneous = false;
};

/// Genuine eigenvalues at one parameter value and, for N >= 2, the other
/// eigenvalue(s) of the fixed matrix H_eff(z_k) for each genuine z_k.
std::vector<ScanRow> scan_point(const ModelParams& params, FreeParam free_param, double value);

} // namespace epj
