#pragma once

#include <array>
#include <span>
#include <string_view>
#include <vector>

#include "epj/types.hpp"

namespace epj {

/// One or two discrete levels coupled to a 1D free-particle continuum with a
/// flat form factor below the cutoff. Units: hbar = 1, k_c = 1, 2m = 1.
enum class ModelKind { OneLevel, TwoLevel };

struct ModelParams {
    ModelKind kind = ModelKind::OneLevel;
    double eps_a = 0.0;
    double eps_b = 0.0;   // TwoLevel only
    double alpha_a = 0.0;
    double alpha_b = 0.0; // TwoLevel only

    int dim() const { return kind == ModelKind::OneLevel ? 1 : 2; }

    static ModelParams one_level(double eps_a, double alpha) { return {ModelKind::OneLevel, eps_a, 0.0, alpha, 0.0}; }
    static ModelParams two_level(double eps_a, double eps_b, double alpha_a, double alpha_b)
    {
        return {ModelKind::TwoLevel, eps_a, eps_b, alpha_a, alpha_b};
    }
};

enum class FreeParam { EpsA, EpsB, AlphaA, AlphaB };

const char* to_string(ModelKind kind);
const char* to_string(FreeParam p);
FreeParam parse_free_param(std::string_view name);

double get_param(const ModelParams& params, FreeParam p);
ModelParams with_param(ModelParams params, FreeParam p, double value);

/// Throws InvalidArgument for negative couplings or a free parameter the
/// model does not have.
void validate(const ModelParams& params);
void validate(const ModelParams& params, FreeParam p);

/// Coupling vector v with Sigma(z) = v v^T sigma(z).
Eigen::VectorXd coupling(const ModelParams& params);
/// diag(eps), the P-block of H_0.
MatrixXc bare_hamiltonian(const ModelParams& params);

/// sigma(z) = 1 - i pi / (2 sqrt(z)) on the given sheet, or its order-th
/// z-derivative (order 0..3).
Complex sigma_scalar(Complex z, Sheet sheet, int order);

/// A point of the complex energy plane together with the sheet on which the
/// self-energy is evaluated there.
struct SpectralNode {
    Complex z;
    Sheet sheet;

    friend bool operator==(const SpectralNode&, const SpectralNode&) = default;
};

/// Divided difference sigma[x_0, ..., x_n] over a multiset of nodes
/// (repeated nodes give the confluent form). Clustered nodes are handled by
/// a Taylor expansion about their centroid, so no cancellation occurs as
/// nodes merge.
Complex sigma_divided_difference(std::span<const SpectralNode> nodes);

/// v v^T sigma[nodes].
MatrixXc self_energy_divided_difference(const ModelParams& params, std::span<const SpectralNode> nodes);

struct EffHamEval {
    Complex z;
    Sheet sheet = Sheet::First;
    MatrixXc sigma;
    std::array<MatrixXc, 3> dsigma; ///< Sigma', Sigma'', Sigma''' (empty above max_order)
    MatrixXc heff;
};

EffHamEval eff_ham(const ModelParams& params, Complex z, Sheet sheet, int max_order);

struct CharPoly {
    std::vector<Complex> coeffs; ///< highest degree first

    int degree() const { return static_cast<int>(coeffs.size()) - 1; }
};

/// Polynomial obtained by clearing the square root from det[H_eff(z) - z].
/// Its roots contain the discrete eigenvalues on both sheets.
CharPoly char_poly(const ModelParams& params);

/// det[H_eff(z) - z] on the given sheet.
Complex residual_nonlinear(const ModelParams& params, Complex z, Sheet sheet);

/// F(z) = det[H_eff(z) - z] and its first two z-derivatives.
struct DispersionEval {
    Complex f;
    Complex df;
    Complex d2f;
};

DispersionEval dispersion(const ModelParams& params, Complex z, Sheet sheet);

/// dF/dkappa and d^2F/(dz dkappa) for a real model parameter kappa.
struct DispersionParamEval {
    Complex f_kappa;
    Complex df_kappa;
};

DispersionParamEval dispersion_param_derivs(const ModelParams& params, FreeParam p, Complex z, Sheet sheet);

} // namespace epj
