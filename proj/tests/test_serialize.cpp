#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <bit>
#include <charconv>
#include <cmath>
#include <limits>
#include <random>
#include <sstream>

#include "epj/format.hpp"
#include "epj/serialize.hpp"

using namespace epj;

namespace {

// dump and re-parse, as a file round trip would
Json through_text(const Json& j) { return Json::parse(j.dump()); }

} // namespace

TEST_CASE("shortest round-trip formatting")
{
    std::mt19937_64 rng(12345);
    for (int k = 0; k < 20000; ++k) {
        const double x = std::bit_cast<double>(rng());
        if (!std::isfinite(x)) continue;
        const std::string s = format_double(x);
        double y = 0.0;
        std::from_chars(s.data(), s.data() + s.size(), y); // stod rejects subnormals
        CHECK(std::bit_cast<std::uint64_t>(y) == std::bit_cast<std::uint64_t>(x));
    }
    CHECK(format_double(0.1) == "0.1");
    CHECK(format_double(std::numeric_limits<double>::quiet_NaN()) == "nan");
    CHECK(format_double(-std::numeric_limits<double>::infinity()) == "-inf");
}

TEST_CASE("complex numbers, vectors and non-finite values")
{
    const Complex z(0.1, -1e-300);
    CHECK(complex_from_json(through_text(to_json(z))) == z);
    const Json nan = to_json(Complex(std::numeric_limits<double>::quiet_NaN(), 2.0));
    CHECK(nan[0].is_null());
    CHECK(std::isnan(complex_from_json(through_text(nan)).real()));

    VectorXc v(3);
    v << Complex(1.0, 2.0), Complex(-0.3, 0.0), Complex(1e-17, 5e20);
    CHECK(vector_from_json(through_text(to_json(v))) == v);
    MatrixXc m(2, 3);
    m << 1.0, 2.0, Complex(0.0, 3.0), 4.0, 5.0, 6.0;
    CHECK(matrix_from_json(through_text(to_json(m))) == m);
}

TEST_CASE("model parameters")
{
    const auto two = ModelParams::two_level(-0.099, 0.2, 0.1, 0.07);
    const auto back = model_from_json(through_text(to_json(two)));
    CHECK(back.kind == two.kind);
    CHECK(back.eps_a == two.eps_a);
    CHECK(back.eps_b == two.eps_b);
    CHECK(back.alpha_a == two.alpha_a);
    CHECK(back.alpha_b == two.alpha_b);
    CHECK(to_json(two)["model"] == "two");
    CHECK(to_json(ModelParams::one_level(-0.13, 0.1))["model"] == "one");
    CHECK_THROWS(model_from_json(Json::parse(R"({"model": "three"})")));
}

TEST_CASE("certificates, Jordan bases and fits round-trip exactly")
{
    const auto ep = ep_search(ModelParams::two_level(-0.099, 0.2, 0.1, 0.1), FreeParam::EpsA, -0.3, 0.3, 61).front();
    const auto ep2 = ep_from_json(through_text(to_json(ep)));
    CHECK(ep2.z0 == ep.z0);
    CHECK(ep2.kappa_star.eps_a == ep.kappa_star.eps_a);
    CHECK(ep2.sheet == ep.sheet);
    CHECK(ep2.free_param == ep.free_param);
    CHECK(ep2.f_residual == ep.f_residual);

    const auto jb = build_jordan(ep, Complex(2.0, -3.0));
    const Json jj = to_json(jb);
    CHECK(jj.contains("p0_h_p0"));
    const auto jb2 = jordan_from_json(through_text(jj));
    CHECK(jb2.phi0_p == jb.phi0_p);
    CHECK(jb2.psphi0_p == jb.psphi0_p);
    CHECK(jb2.tphi0_p == jb.tphi0_p);
    CHECK(jb2.tpsphi0_p == jb.tpsphi0_p);
    CHECK(jb2.c == jb.c);
    CHECK(jb2.gram == jb.gram);
    CHECK(jb2.block == jb.block);

    const auto [plus, minus] = coalescing_pair(ep, 1e-4);
    const auto e2 = eigenpair_from_json(through_text(to_json(plus)));
    CHECK(e2.z == plus.z);
    CHECK(e2.right_p == plus.right_p);
    CHECK(e2.left_p == plus.left_p);
    CHECK(e2.full_norm == plus.full_norm);

    const auto params = with_param(ep.kappa_star, ep.free_param, ep.kappa_star.eps_a + 1e-4);
    const auto ext = build_extended(params, plus, minus, 1.0);
    const auto ext2 = extended_from_json(through_text(to_json(ext)));
    CHECK(ext2.psphi_minus_p() == ext.psphi_minus_p());
    CHECK(ext2.tpsphi_plus_p() == ext.tpsphi_plus_p());

    const auto fit = fit_puiseux(scan_bifurcation(ep, {1e-6, -1e-6, 1e-5, -1e-5, 1e-4, -1e-4}));
    const auto fit2 = puiseux_fit_from_json(through_text(to_json(fit)));
    CHECK(fit2.z0 == fit.z0);
    CHECK(fit2.z1 == fit.z1);
    CHECK(fit2.z2 == fit.z2);
    CHECK(fit2.slope == fit.slope);
    CHECK(fit2.samples_used == fit.samples_used);
}

TEST_CASE("scan csv")
{
    const auto rows = scan_point(ModelParams::two_level(-0.12, 0.2, 0.1, 0.1), FreeParam::EpsA, -0.11);
    std::ostringstream os;
    write_scan_csv(os, rows);
    std::istringstream is(os.str());
    std::string line;
    std::getline(is, line);
    CHECK(line == "param,branch_id,sheet,re_z,im_z,re_full_norm,im_full_norm,is_extraneous");
    std::size_t n = 0;
    while (std::getline(is, line)) {
        CHECK(std::count(line.begin(), line.end(), ',') == 7);
        const bool extraneous = line.ends_with(",true");
        CHECK((extraneous || line.ends_with(",false")));
        if (extraneous) CHECK(line.find("nan") != std::string::npos);
        CHECK((line.find(",first,") != std::string::npos || line.find(",second,") != std::string::npos));
        ++n;
    }
    CHECK(n == rows.size());
    CHECK(to_json(rows).size() == rows.size());
}
