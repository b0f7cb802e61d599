#include "epj/jordan.hpp"

#include <cmath>

#include "epj/core_numerics.hpp"
#include "epj/spectrum.hpp"

namespace epj {

namespace {

void require_nonzero_c(Complex c)
{
    if (c == Complex(0.0)) throw Error(ErrorCode::InvalidArgument, "Jordan chain constant c must be nonzero");
}

Eigen::Index reference_index(const VectorXc& v)
{
    const double top = v.cwiseAbs().maxCoeff();
    Eigen::Index k = 0;
    while (std::abs(v(k)) < (1.0 - 1e-12) * top) ++k;
    return k;
}

JordanBasis skeleton(const EpCertificate& ep, Complex c)
{
    require_nonzero_c(c);
    JordanBasis b;
    b.params = ep.kappa_star;
    b.sheet = ep.sheet;
    b.z0 = ep.z0;
    b.c = c;
    return b;
}

} // namespace

Matrix2c raw_overlaps(const JordanBasis& basis)
{
    const auto k0 = basis.phi0();
    const auto k1 = basis.psphi0();
    const auto b0 = basis.tphi0();
    const auto b1 = basis.tpsphi0();
    Matrix2c g;
    g << inner(basis.params, b0, k0), inner(basis.params, b0, k1),
         inner(basis.params, b1, k0), inner(basis.params, b1, k1);
    return g;
}

void refresh(JordanBasis& basis)
{
    const FullKet kets[2] = {basis.phi0(), basis.psphi0()};
    const FullBra duals[2] = {basis.tpsphi0(), basis.tphi0()};
    for (int i = 0; i < 2; ++i) {
        for (int j = 0; j < 2; ++j) {
            basis.gram(i, j) = inner(basis.params, duals[i], kets[j]);
            basis.block(i, j) = h_element(basis.params, duals[i], kets[j]);
        }
    }

    const auto eval = eff_ham(basis.params, basis.z0, basis.sheet, 1);
    const auto n = eval.heff.rows();
    const MatrixXc id = MatrixXc::Identity(n, n);
    const MatrixXc shifted = eval.heff - basis.z0 * id;
    const MatrixXc metric = id - eval.dsigma[0];
    basis.chain_residual_right =
        std::max((shifted * basis.phi0_p).norm(),
                 (shifted * basis.psphi0_p - basis.c * metric * basis.phi0_p).norm());
    basis.chain_residual_left =
        std::max((shifted.transpose() * basis.tphi0_p).norm(),
                 (shifted.transpose() * basis.tpsphi0_p - basis.c * metric.transpose() * basis.tphi0_p).norm());
}

JordanBasis build_jordan_n1(const EpCertificate& ep, Complex c)
{
    if (ep.kappa_star.dim() != 1) throw Error(ErrorCode::InvalidArgument, "build_jordan_n1: one-level model required");
    JordanBasis b = skeleton(ep, c);
    const auto eval = eff_ham(b.params, b.z0, b.sheet, 3);
    const Complex s2 = eval.dsigma[1](0, 0);
    const Complex s3 = eval.dsigma[2](0, 0);
    if (std::abs(s2) <= 1e-12 * std::max(1.0, std::abs(eval.sigma(0, 0))))
        throw Error(ErrorCode::BranchAmbiguity, "build_jordan_n1: Sigma''(z0) vanishes");

    // <phi~0|phi0^(1)> = -c Sigma'' p0^2 / 2 = 1 and <phi~0^(1)|phi0^(1)> = 0
    const Complex p0 = sqrt_sheet(-2.0 / (c * s2), Sheet::First);
    const Complex p1 = -c * s3 * p0 / (6.0 * s2);
    b.phi0_p = VectorXc::Constant(1, p0);
    b.tphi0_p = b.phi0_p;
    b.psphi0_p = VectorXc::Constant(1, p1);
    b.tpsphi0_p = b.psphi0_p;
    refresh(b);
    return b;
}

JordanBasis build_jordan_n2(const EpCertificate& ep, Complex c)
{
    JordanBasis b = skeleton(ep, c);
    const auto eval = eff_ham(b.params, b.z0, b.sheet, 1);
    const auto n = eval.heff.rows();
    const MatrixXc metric = MatrixXc::Identity(n, n) - eval.dsigma[0];

    const auto [right, left] = eigvec_p(eval.heff, b.z0);
    b.phi0_p = right;
    b.tphi0_p = left;
    // solvability is the self-orthogonality of the coalesced pair
    b.psphi0_p = c * restricted_inverse_apply<double>(eval.heff, b.z0, right, left, metric * right, 1e-6);
    const MatrixXc heff_t = eval.heff.transpose();
    b.tpsphi0_p = c * restricted_inverse_apply<double>(heff_t, b.z0, left, right, metric.transpose() * left, 1e-6);

    b = biorthonormalize(b, raw_overlaps(b));
    b = canonicalize(b);
    refresh(b);
    return b;
}

JordanBasis build_jordan(const EpCertificate& ep, Complex c)
{
    return ep.kappa_star.dim() == 1 ? build_jordan_n1(ep, c) : build_jordan_n2(ep, c);
}

JordanBasis biorthonormalize(JordanBasis basis, const Matrix2c& overlaps, double tol)
{
    const Complex g01 = overlaps(0, 1);
    const Complex g10 = overlaps(1, 0);
    const Complex g11 = overlaps(1, 1);
    const double scale = std::max(1.0, overlaps.cwiseAbs().maxCoeff());
    if (std::abs(g01) <= tol * scale || std::abs(g10) <= tol * scale)
        throw Error(ErrorCode::DegenerateOverlap, "biorthonormalize: <phi~0|phi0^(1)> or <phi~0^(1)|phi0> vanishes");

    const VectorXc l0 = basis.tphi0_p;
    basis.tphi0_p = l0 / g01;
    basis.tpsphi0_p = (basis.tpsphi0_p - (g11 / g01) * l0) / g10;
    refresh(basis);
    return basis;
}

JordanBasis canonicalize(JordanBasis basis)
{
    const Eigen::Index r = reference_index(basis.phi0_p);
    if (basis.tphi0_p(r) == Complex(0.0))
        throw Error(ErrorCode::DegenerateOverlap, "canonicalize: left eigenvector vanishes at the reference entry");
    const Complex k = sqrt_sheet(basis.tphi0_p(r) / basis.phi0_p(r), Sheet::First);
    basis.phi0_p *= k;
    basis.psphi0_p *= k;
    basis.tphi0_p /= k;
    basis.tpsphi0_p /= k;

    const Complex beta = (basis.tpsphi0_p(r) / basis.tphi0_p(r) - basis.psphi0_p(r) / basis.phi0_p(r)) / 2.0;
    basis.psphi0_p += beta * basis.phi0_p;
    basis.tpsphi0_p -= beta * basis.tphi0_p;
    refresh(basis);
    return basis;
}

MatrixXc p0_h_p0(const JordanBasis& basis)
{
    return basis.z0 * (basis.phi0_p * basis.tpsphi0_p.transpose() + basis.psphi0_p * basis.tphi0_p.transpose()) +
           basis.c * basis.phi0_p * basis.tphi0_p.transpose();
}

VectorXc pseudo_vector_via_partner(const ModelParams& params, Complex z0, Sheet sheet, const VectorXc& phi0_p,
                                   Complex c)
{
    const auto partner = extraneous_partner(params, z0, sheet);
    const auto eval = eff_ham(params, z0, sheet, 1);
    const auto n = eval.heff.rows();
    const MatrixXc metric = MatrixXc::Identity(n, n) - eval.dsigma[0];
    const Complex num = bilinear(partner.left, metric * phi0_p);
    const Complex den = bilinear(partner.left, partner.right);
    return c / (partner.z0_cross - z0) * partner.right * (num / den);
}

} // namespace epj
