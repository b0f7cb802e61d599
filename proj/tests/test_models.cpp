#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <numbers>
#include <random>

#include "epj/core_numerics.hpp"
#include "epj/models.hpp"

using namespace epj;

namespace {

const double kPi = std::numbers::pi;
const Complex kI(0.0, 1.0);

// model-1 coalescence at alpha = 0.1 (closed forms evaluated at 40 digits)
const double kEpsC = -0.12853533796699925;
const double kZ0 = -0.039511779322333083;

ErrorCode code_of(auto&& fn)
{
    try {
        fn();
    } catch (const Error& e) {
        return e.code();
    }
    FAIL("no exception");
    return ErrorCode::InvalidArgument;
}

} // namespace

TEST_CASE("sigma_scalar values")
{
    CHECK(std::abs(sigma_scalar(Complex(1.0), Sheet::First, 0) - (1.0 - kI * kPi / 2.0)) < 1e-15);
    CHECK(code_of([] { sigma_scalar(Complex(0.0), Sheet::First, 0); }) == ErrorCode::ZeroEnergy);

    // Sigma'(z0) = alpha^2 sigma'(z0) = 1 on the Second sheet only
    const Complex d1 = 0.01 * sigma_scalar(Complex(kZ0), Sheet::Second, 1);
    CHECK(std::abs(d1 - 1.0) < 1e-10);
    const Complex d1_first = 0.01 * sigma_scalar(Complex(kZ0), Sheet::First, 1);
    CHECK(std::abs(d1_first + 1.0) < 1e-10);
}

TEST_CASE("sigma_scalar derivatives agree with central differences")
{
    const std::vector<std::pair<Complex, Sheet>> points = {
        {Complex(1.0), Sheet::First}, {Complex(-0.04, 0.0), Sheet::Second},
        {Complex(0.2, -0.05), Sheet::Second}, {Complex(-0.3, 0.4), Sheet::First}};
    for (const auto& [z, sheet] : points) {
        for (int k = 1; k <= 3; ++k) {
            const double h = 1e-5 * std::abs(z);
            const Complex fd = (sigma_scalar(z + h, sheet, k - 1) - sigma_scalar(z - h, sheet, k - 1)) / (2.0 * h);
            const Complex exact = sigma_scalar(z, sheet, k);
            CHECK(std::abs(fd - exact) <= 1e-6 * std::abs(exact));
        }
    }
}

TEST_CASE("sigma divided differences")
{
    const Complex z0(kZ0);
    // single node: the value itself
    const SpectralNode one[] = {{z0, Sheet::Second}};
    CHECK(std::abs(sigma_divided_difference(one) - sigma_scalar(z0, Sheet::Second, 0)) < 1e-15);

    // confluent nodes: derivatives / k!
    const SpectralNode two[] = {{z0, Sheet::Second}, {z0, Sheet::Second}};
    const SpectralNode three[] = {{z0, Sheet::Second}, {z0, Sheet::Second}, {z0, Sheet::Second}};
    const SpectralNode four[] = {{z0, Sheet::Second}, {z0, Sheet::Second}, {z0, Sheet::Second}, {z0, Sheet::Second}};
    const Complex s1 = sigma_scalar(z0, Sheet::Second, 1);
    const Complex s2 = sigma_scalar(z0, Sheet::Second, 2);
    const Complex s3 = sigma_scalar(z0, Sheet::Second, 3);
    CHECK(std::abs(sigma_divided_difference(two) - s1) <= 1e-13 * std::abs(s1));
    CHECK(std::abs(sigma_divided_difference(three) - s2 / 2.0) <= 1e-13 * std::abs(s2));
    CHECK(std::abs(sigma_divided_difference(four) - s3 / 6.0) <= 1e-13 * std::abs(s3));

    // clustered distinct nodes, 50-digit oracle
    const SpectralNode cluster[] = {{z0, Sheet::Second}, {z0 + 1e-5, Sheet::Second}, {z0 + Complex(0, 1e-5), Sheet::Second}};
    const Complex want3(1898.5684612105664, 0.40042668091105161);
    CHECK(std::abs(sigma_divided_difference(cluster) - want3) <= 1e-11 * std::abs(want3));

    const SpectralNode cluster4[] = {{z0, Sheet::Second}, {z0 + 1e-5, Sheet::Second},
                                     {z0 + Complex(0, 1e-5), Sheet::Second}, {z0 - 2e-6, Sheet::Second}};
    const Complex want4(40040.894647301014, 8.8672190207325370);
    CHECK(std::abs(sigma_divided_difference(cluster4) - want4) <= 1e-10 * std::abs(want4));

    // well separated nodes on mixed sheets
    const SpectralNode mixed[] = {{Complex(-0.05, 0.01), Sheet::Second}, {Complex(0.3, -0.02), Sheet::First},
                                  {Complex(0.1, 0.2), Sheet::Second}};
    const Complex want_mixed(12.319939215445445, -75.400331340899340);
    CHECK(std::abs(sigma_divided_difference(mixed) - want_mixed) <= 1e-12 * std::abs(want_mixed));

    // node order does not matter
    const SpectralNode reordered[] = {mixed[2], mixed[0], mixed[1]};
    CHECK(std::abs(sigma_divided_difference(reordered) - want_mixed) <= 1e-12 * std::abs(want_mixed));
}

TEST_CASE("divided differences over nodes placed symmetrically about their centroid")
{
    // two nodes: the plain difference quotient is well conditioned at this spacing
    const Complex zc(-0.0395, 0.0);
    const Complex d(0.0, 0.007);
    const SpectralNode pair[] = {{zc - d, Sheet::Second}, {zc + d, Sheet::Second}};
    const Complex direct = (sigma_scalar(zc + d, Sheet::Second, 0) - sigma_scalar(zc - d, Sheet::Second, 0)) / (2.0 * d);
    CHECK(std::abs(sigma_divided_difference(pair) - direct) <= 1e-12 * std::abs(direct));

    // c +/- d, c +/- i d: only every fourth Taylor term is nonzero (50-digit oracle)
    const double c = -0.04, h = 0.01;
    const SpectralNode cross[] = {{Complex(c - h, 0), Sheet::Second}, {Complex(c + h, 0), Sheet::Second},
                                  {Complex(c, -h), Sheet::Second}, {Complex(c, h), Sheet::Second}};
    const double want = 38450.250392605755661;
    CHECK(std::abs(sigma_divided_difference(cross) - want) <= 1e-11 * want);
}

TEST_CASE("divided differences are continuous as nodes merge")
{
    const Complex c(-0.07, 0.02);
    const SpectralNode conf[] = {{c, Sheet::Second}, {c, Sheet::Second}};
    const Complex limit = sigma_divided_difference(conf);
    for (double h : {1e-3, 1e-5, 1e-7, 1e-9, 1e-11}) {
        const SpectralNode pair[] = {{c, Sheet::Second}, {c + h, Sheet::Second}};
        const Complex val = sigma_divided_difference(pair);
        // first-order Taylor: sigma[c, c+h] = sigma'(c) + h sigma''(c)/2 + ...
        CHECK(std::abs(val - limit) <= 2.0 * h * std::abs(sigma_scalar(c, Sheet::Second, 2)) + 1e-12 * std::abs(limit));
    }
}

TEST_CASE("eff_ham structure")
{
    const auto p1 = ModelParams::one_level(-0.3, 0.0);
    const auto e1 = eff_ham(p1, Complex(0.5, 0.1), Sheet::First, 3);
    CHECK(e1.heff.rows() == 1);
    CHECK(e1.heff(0, 0) == Complex(-0.3));
    CHECK(e1.sigma(0, 0) == Complex(0.0));

    const auto p2 = ModelParams::two_level(-0.099, 0.2, 0.1, 0.13);
    const Complex z(0.07, -0.03);
    const auto e2 = eff_ham(p2, z, Sheet::Second, 3);
    REQUIRE(e2.heff.rows() == 2);
    const Complex s = sigma_scalar(z, Sheet::Second, 0);
    CHECK(std::abs(e2.sigma(0, 1) - 0.1 * 0.13 * s) < 1e-15);
    CHECK(std::abs(e2.sigma(1, 1) - 0.13 * 0.13 * s) < 1e-15);
    CHECK(std::abs(e2.sigma.determinant()) < 1e-17);
    CHECK(e2.heff == MatrixXc(bare_hamiltonian(p2) + e2.sigma));
    for (int k = 0; k < 3; ++k) CHECK(std::abs(e2.dsigma[k].determinant()) < 1e-12 * e2.dsigma[k].squaredNorm());

    // continuum side, just above the positive axis: decaying self-energy
    const auto e3 = eff_ham(ModelParams::one_level(0.1, 0.1), Complex(0.2, 1e-12), Sheet::First, 0);
    CHECK(e3.heff(0, 0).imag() < 0.0);

    CHECK(code_of([&] { eff_ham(p2, Complex(0.0), Sheet::First, 1); }) == ErrorCode::ZeroEnergy);
}

TEST_CASE("char_poly coefficients")
{
    const auto c1 = char_poly(ModelParams::one_level(0.0, 0.1));
    REQUIRE(c1.degree() == 3);
    // z (z - 0.01)^2 + pi^2 alpha^4 / 4 with alpha^4 = 1e-4
    CHECK(std::abs(c1.coeffs[0] - 1.0) < 1e-16);
    CHECK(std::abs(c1.coeffs[1] + 0.02) < 1e-16);
    CHECK(std::abs(c1.coeffs[2] - 1e-4) < 1e-18);
    CHECK(std::abs(c1.coeffs[3] - kPi * kPi * 1e-4 / 4.0) < 1e-19);

    const auto c0 = char_poly(ModelParams::one_level(-0.4, 0.0));
    auto r0 = poly_roots(c0.coeffs, 1e-12);
    std::sort(r0.begin(), r0.end(), [](Complex a, Complex b) { return a.real() < b.real(); });
    CHECK(std::abs(r0[0] + 0.4) < 1e-7);
    CHECK(std::abs(r0[1] + 0.4) < 1e-7);
    CHECK(r0[2] == Complex(0.0));

    // two-level: compare against the factored form at random points
    const auto p2 = ModelParams::two_level(-0.099, 0.2, 0.1, 0.1);
    const auto c2 = char_poly(p2);
    REQUIRE(c2.degree() == 5);
    std::mt19937_64 rng(5);
    std::normal_distribution<double> g;
    for (int k = 0; k < 20; ++k) {
        const Complex z(g(rng), g(rng));
        const double a2 = 0.01, b2 = 0.01;
        const Complex cz = (z + 0.099 - a2) * (z - 0.2 - b2) - a2 * b2;
        const Complex dz = (a2 + b2) * z - (b2 * -0.099 + a2 * 0.2);
        const Complex want = 4.0 * z * cz * cz + kPi * kPi * dz * dz;
        CHECK(std::abs(poly_eval<double>(c2.coeffs, z) - want) <= 1e-13 * std::max(1.0, std::abs(want)));
    }
}

TEST_CASE("polynomial roots solve the dispersion on exactly one sheet")
{
    const std::vector<ModelParams> cases = {
        ModelParams::one_level(-0.2, 0.1), ModelParams::one_level(-0.1, 0.1), ModelParams::one_level(0.15, 0.1),
        ModelParams::two_level(-0.099, 0.2, 0.1, 0.1), ModelParams::two_level(0.05, 0.2, 0.1, 0.15)};
    for (const auto& p : cases) {
        const auto roots = poly_roots(char_poly(p).coeffs, 1e-12);
        for (const auto& z : roots) {
            const double r1 = std::abs(residual_nonlinear(p, z, Sheet::First));
            const double r2 = std::abs(residual_nonlinear(p, z, Sheet::Second));
            CHECK(std::min(r1, r2) <= 1e-10);
            CHECK(std::max(r1, r2) > 1e-6);
        }
    }
    // decoupled: z = eps_a exactly
    CHECK(residual_nonlinear(ModelParams::one_level(-0.3, 0.0), Complex(-0.3), Sheet::First) == Complex(0.0));
}

TEST_CASE("dispersion derivatives")
{
    const std::vector<std::tuple<ModelParams, Complex, Sheet>> cases = {
        {ModelParams::one_level(-0.2, 0.1), Complex(-0.05, 0.01), Sheet::Second},
        {ModelParams::two_level(-0.099, 0.2, 0.1, 0.1), Complex(0.1, -0.03), Sheet::Second},
        {ModelParams::two_level(-0.099, 0.2, 0.1, 0.17), Complex(-0.2, 0.0), Sheet::First}};
    for (const auto& [p, z, sheet] : cases) {
        const auto d = dispersion(p, z, sheet);
        const double h = 1e-6;
        const auto dp = dispersion(p, z + h, sheet);
        const auto dm = dispersion(p, z - h, sheet);
        CHECK(std::abs(d.f - residual_nonlinear(p, z, sheet)) < 1e-15);
        CHECK(std::abs((dp.f - dm.f) / (2 * h) - d.df) <= 1e-7 * std::max(1.0, std::abs(d.df)));
        CHECK(std::abs((dp.df - dm.df) / (2 * h) - d.d2f) <= 1e-6 * std::max(1.0, std::abs(d.d2f)));

        for (FreeParam fp : {FreeParam::EpsA, FreeParam::AlphaA}) {
            const double k = get_param(p, fp);
            const double hk = 1e-6;
            const auto up = dispersion(with_param(p, fp, k + hk), z, sheet);
            const auto dn = dispersion(with_param(p, fp, k - hk), z, sheet);
            const auto pd = dispersion_param_derivs(p, fp, z, sheet);
            CHECK(std::abs((up.f - dn.f) / (2 * hk) - pd.f_kappa) <= 1e-7 * std::max(1.0, std::abs(pd.f_kappa)));
            CHECK(std::abs((up.df - dn.df) / (2 * hk) - pd.df_kappa) <= 1e-6 * std::max(1.0, std::abs(pd.df_kappa)));
        }
    }
}

TEST_CASE("parameter plumbing")
{
    CHECK(parse_free_param("eps_b") == FreeParam::EpsB);
    CHECK(code_of([] { parse_free_param("gamma"); }) == ErrorCode::InvalidArgument);
    CHECK(code_of([] { validate(ModelParams::one_level(0.0, -0.1)); }) == ErrorCode::InvalidArgument);
    CHECK(code_of([] { validate(ModelParams::one_level(0.0, 0.1), FreeParam::EpsB); }) == ErrorCode::InvalidArgument);
    const auto p = with_param(ModelParams::two_level(0, 0, 0, 0), FreeParam::AlphaB, 0.3);
    CHECK(get_param(p, FreeParam::AlphaB) == 0.3);
}

TEST_CASE("model-1 coalescence is a double root of the cubic")
{
    const auto p = ModelParams::one_level(kEpsC, 0.1);
    const auto d = dispersion(p, Complex(kZ0), Sheet::Second);
    CHECK(std::abs(d.f) < 1e-15);
    CHECK(std::abs(d.df) < 1e-12);
}
