#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "epj/jordan.hpp"

using namespace epj;

namespace {

template<typename F>
ErrorCode code_of(F&& f)
{
    try {
        f();
    } catch (const Error& e) {
        return e.code();
    }
    FAIL("no epj::Error thrown");
    return ErrorCode::PoorFit;
}

EpCertificate model2_ep()
{
    static const EpCertificate ep =
        ep_search(ModelParams::two_level(-0.099, 0.2, 0.1, 0.1), FreeParam::EpsA, -0.3, 0.3, 61).front();
    return ep;
}

const Complex kI(0.0, 1.0);

} // namespace

TEST_CASE("gram and block of the Jordan basis for several chain constants")
{
    for (const auto& ep : {ep_closed_form_model1(0.1), ep_closed_form_model1(0.05), model2_ep()}) {
        for (Complex c : {Complex(1.0), kI, Complex(2.0, -3.0)}) {
            const auto jb = build_jordan(ep, c);
            CHECK((jb.gram - Matrix2c::Identity()).cwiseAbs().maxCoeff() <= 1e-8);
            Matrix2c want;
            want << ep.z0, c, 0.0, ep.z0;
            CHECK((jb.block - want).cwiseAbs().maxCoeff() <= 1e-8);
            CHECK(jb.chain_residual_right <= 1e-9);
            CHECK(jb.chain_residual_left <= 1e-9);

            // the chain itself, directly: (H_eff(z0) - z0) psphi0 = c (I - Sigma'(z0)) phi0
            const auto e = eff_ham(ep.kappa_star, ep.z0, ep.sheet, 1);
            const MatrixXc a = e.heff - ep.z0 * MatrixXc::Identity(e.heff.rows(), e.heff.cols());
            const MatrixXc b = MatrixXc::Identity(a.rows(), a.cols()) - e.dsigma[0];
            CHECK((a * jb.phi0_p).norm() <= 1e-9 * jb.phi0_p.norm());
            CHECK((a * jb.psphi0_p - c * b * jb.phi0_p).norm() <= 1e-8 * std::abs(c) * jb.phi0_p.norm());
            CHECK((a.transpose() * jb.tpsphi0_p - c * b.transpose() * jb.tphi0_p).norm() <=
                  1e-8 * std::abs(c) * jb.tphi0_p.norm());

            // complex-symmetric H_eff: canonical gauge makes bras equal kets
            CHECK((jb.phi0_p - jb.tphi0_p).norm() <= 1e-12 * jb.phi0_p.norm());
            CHECK((jb.psphi0_p - jb.tpsphi0_p).norm() <= 1e-10 * jb.psphi0_p.norm());
        }
    }
}

TEST_CASE("P0 H P0 block against high-precision values and its c-invariance")
{
    const auto ep1 = ep_closed_form_model1(0.1);
    for (Complex c : {Complex(1.0), kI, Complex(2.0, -3.0)}) {
        const MatrixXc m = p0_h_p0(build_jordan(ep1, c));
        REQUIRE(m.rows() == 1);
        CHECK(std::abs(m(0, 0) - (-0.096584349454591980773)) <= 1e-10);
    }

    Matrix2c want;
    want << -0.059752474335031755651, 0.016584741800664759193, 0.016584741800664759193, -0.0042734743224992555285;
    for (Complex c : {Complex(1.0), kI, Complex(2.0, -3.0)}) {
        const MatrixXc m = p0_h_p0(build_jordan(model2_ep(), c));
        CHECK((m - want).cwiseAbs().maxCoeff() <= 1e-9);
    }
}

TEST_CASE("one-level P-components at c = 1")
{
    const auto jb = build_jordan_n1(ep_closed_form_model1(0.1), 1.0);
    // the overall sign of the kets is a free choice
    const double s = jb.phi0_p(0).imag() > 0.0 ? 1.0 : -1.0;
    CHECK(std::abs(s * jb.phi0_p(0) - 0.2295264090029237660793 * kI) <= 1e-12);
    CHECK(std::abs(s * jb.psphi0_p(0) - (-2.420442849992389097386) * kI) <= 1e-10);
}

TEST_CASE("pseudo-vector through the extraneous partner")
{
    const auto ep = model2_ep();
    for (Complex c : {Complex(1.0), Complex(2.0, -3.0)}) {
        const auto jb = build_jordan(ep, c);
        const VectorXc alt = pseudo_vector_via_partner(ep.kappa_star, ep.z0, ep.sheet, jb.phi0_p, c);
        // solutions of the chain differ by a multiple of phi0 only
        const VectorXc diff = alt - jb.psphi0_p;
        const Complex along = bilinear(jb.phi0_p, diff) / bilinear(jb.phi0_p, jb.phi0_p);
        CHECK((diff - along * jb.phi0_p).norm() <= 1e-9 * jb.psphi0_p.norm());
    }
}

TEST_CASE("biorthonormalize and canonicalize keep the gram and block")
{
    auto jb = build_jordan(model2_ep(), Complex(0.5, 1.0));
    JordanBasis moved = jb;
    moved.phi0_p *= Complex(3.0, 1.0);
    moved.psphi0_p = moved.psphi0_p * Complex(3.0, 1.0) + 0.7 * moved.phi0_p;
    moved.tphi0_p /= Complex(3.0, 1.0);
    moved.tpsphi0_p = moved.tpsphi0_p / Complex(3.0, 1.0) - 0.7 * moved.tphi0_p;
    refresh(moved);
    CHECK((moved.gram - Matrix2c::Identity()).cwiseAbs().maxCoeff() <= 1e-8);
    const auto back = canonicalize(moved);
    CHECK((back.phi0_p - back.tphi0_p).norm() <= 1e-12);
    CHECK((back.gram - Matrix2c::Identity()).cwiseAbs().maxCoeff() <= 1e-8);
    CHECK((p0_h_p0(back) - p0_h_p0(jb)).norm() <= 1e-12);
}

TEST_CASE("errors")
{
    CHECK(code_of([] { build_jordan(ep_closed_form_model1(0.1), 0.0); }) == ErrorCode::InvalidArgument);
    CHECK(code_of([] { build_jordan_n1(model2_ep(), 1.0); }) == ErrorCode::InvalidArgument);
}
