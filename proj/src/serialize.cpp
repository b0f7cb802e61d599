#include "epj/serialize.hpp"

#include <cmath>
#include <limits>
#include <ostream>

#include "epj/format.hpp"

namespace epj {

namespace {

Json real(double x)
{
    if (!std::isfinite(x)) return nullptr;
    return x;
}

double real_from(const Json& j)
{
    if (j.is_null()) return std::numeric_limits<double>::quiet_NaN();
    return j.get<double>();
}

Sheet sheet_from(const Json& j)
{
    const auto s = j.get<std::string>();
    if (s == "first") return Sheet::First;
    if (s == "second") return Sheet::Second;
    throw Error(ErrorCode::InvalidArgument, "unknown sheet '" + s + "'");
}

Json matrix2_json(const Matrix2c& m) { return to_json(MatrixXc(m)); }

} // namespace

Json to_json(Complex z) { return Json::array({real(z.real()), real(z.imag())}); }

Complex complex_from_json(const Json& j)
{
    if (!j.is_array() || j.size() != 2) throw Error(ErrorCode::InvalidArgument, "complex number must be [re, im]");
    return {real_from(j[0]), real_from(j[1])};
}

Json to_json(const VectorXc& v)
{
    Json out = Json::array();
    for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(to_json(v(i)));
    return out;
}

VectorXc vector_from_json(const Json& j)
{
    VectorXc v(static_cast<Eigen::Index>(j.size()));
    for (std::size_t i = 0; i < j.size(); ++i) v(static_cast<Eigen::Index>(i)) = complex_from_json(j[i]);
    return v;
}

Json to_json(const MatrixXc& m)
{
    Json out = Json::array();
    for (Eigen::Index r = 0; r < m.rows(); ++r) out.push_back(to_json(VectorXc(m.row(r).transpose())));
    return out;
}

MatrixXc matrix_from_json(const Json& j)
{
    const auto rows = static_cast<Eigen::Index>(j.size());
    const auto cols = rows == 0 ? Eigen::Index{0} : static_cast<Eigen::Index>(j[0].size());
    MatrixXc m(rows, cols);
    for (Eigen::Index r = 0; r < rows; ++r) {
        const VectorXc row = vector_from_json(j[static_cast<std::size_t>(r)]);
        if (row.size() != cols) throw Error(ErrorCode::InvalidArgument, "ragged matrix");
        m.row(r) = row.transpose();
    }
    return m;
}

Json to_json(const ModelParams& p)
{
    Json j{{"model", to_string(p.kind)}, {"eps_a", p.eps_a}, {"alpha_a", p.alpha_a}};
    if (p.kind == ModelKind::TwoLevel) {
        j["eps_b"] = p.eps_b;
        j["alpha_b"] = p.alpha_b;
    }
    return j;
}

ModelParams model_from_json(const Json& j)
{
    const auto kind = j.at("model").get<std::string>();
    if (kind == "one") return ModelParams::one_level(j.at("eps_a").get<double>(), j.at("alpha_a").get<double>());
    if (kind == "two")
        return ModelParams::two_level(j.at("eps_a").get<double>(), j.at("eps_b").get<double>(),
                                      j.at("alpha_a").get<double>(), j.at("alpha_b").get<double>());
    throw Error(ErrorCode::InvalidArgument, "unknown model '" + kind + "'");
}

Json to_json(const EpCertificate& ep)
{
    return {{"params", to_json(ep.kappa_star)},
            {"free_param", to_string(ep.free_param)},
            {"kappa_star", get_param(ep.kappa_star, ep.free_param)},
            {"z0", to_json(ep.z0)},
            {"sheet", to_string(ep.sheet)},
            {"f_residual", real(ep.f_residual)},
            {"df_residual", real(ep.df_residual)},
            {"selforth_residual", real(ep.selforth_residual)},
            {"iterations", ep.iterations}};
}

EpCertificate ep_from_json(const Json& j)
{
    EpCertificate ep;
    ep.kappa_star = model_from_json(j.at("params"));
    ep.free_param = parse_free_param(j.at("free_param").get<std::string>());
    ep.z0 = complex_from_json(j.at("z0"));
    ep.sheet = sheet_from(j.at("sheet"));
    ep.f_residual = real_from(j.at("f_residual"));
    ep.df_residual = real_from(j.at("df_residual"));
    ep.selforth_residual = real_from(j.at("selforth_residual"));
    ep.iterations = j.at("iterations").get<int>();
    return ep;
}

Json to_json(const JordanBasis& b)
{
    return {{"params", to_json(b.params)},
            {"z0", to_json(b.z0)},
            {"sheet", to_string(b.sheet)},
            {"c", to_json(b.c)},
            {"phi0_p", to_json(b.phi0_p)},
            {"psphi0_p", to_json(b.psphi0_p)},
            {"tphi0_p", to_json(b.tphi0_p)},
            {"tpsphi0_p", to_json(b.tpsphi0_p)},
            {"gram", matrix2_json(b.gram)},
            {"block", matrix2_json(b.block)},
            {"gram_error", real((b.gram - Matrix2c::Identity()).norm())},
            {"chain_residual_right", real(b.chain_residual_right)},
            {"chain_residual_left", real(b.chain_residual_left)},
            {"p0_h_p0", to_json(p0_h_p0(b))}};
}

JordanBasis jordan_from_json(const Json& j)
{
    JordanBasis b;
    b.params = model_from_json(j.at("params"));
    b.z0 = complex_from_json(j.at("z0"));
    b.sheet = sheet_from(j.at("sheet"));
    b.c = complex_from_json(j.at("c"));
    b.phi0_p = vector_from_json(j.at("phi0_p"));
    b.psphi0_p = vector_from_json(j.at("psphi0_p"));
    b.tphi0_p = vector_from_json(j.at("tphi0_p"));
    b.tpsphi0_p = vector_from_json(j.at("tpsphi0_p"));
    const auto n = static_cast<Eigen::Index>(b.params.dim());
    for (const auto* v : {&b.phi0_p, &b.psphi0_p, &b.tphi0_p, &b.tpsphi0_p})
        if (v->size() != n) throw Error(ErrorCode::InvalidArgument, "Jordan vector length does not match the model");
    refresh(b);
    return b;
}

Json to_json(const Eigenpair& e)
{
    return {{"z", to_json(e.z)},
            {"sheet", to_string(e.sheet)},
            {"right_p", to_json(e.right_p)},
            {"left_p", to_json(e.left_p)},
            {"full_norm", to_json(e.full_norm)},
            {"near_degenerate", e.near_degenerate}};
}

Eigenpair eigenpair_from_json(const Json& j)
{
    Eigenpair e;
    e.z = complex_from_json(j.at("z"));
    e.sheet = sheet_from(j.at("sheet"));
    e.right_p = vector_from_json(j.at("right_p"));
    e.left_p = vector_from_json(j.at("left_p"));
    e.full_norm = complex_from_json(j.at("full_norm"));
    e.near_degenerate = j.value("near_degenerate", false);
    return e;
}

Json to_json(const ExtendedJordanBasis& b)
{
    return {{"params", to_json(b.params)},
            {"c", to_json(b.c)},
            {"plus", to_json(b.plus)},
            {"minus", to_json(b.minus)},
            {"psphi_minus_p", to_json(b.psphi_minus_p())},
            {"tpsphi_plus_p", to_json(b.tpsphi_plus_p())},
            {"gram", matrix2_json(b.gram)},
            {"block", matrix2_json(b.block)},
            {"gram_error", real((b.gram - Matrix2c::Identity()).norm())}};
}

ExtendedJordanBasis extended_from_json(const Json& j)
{
    return build_extended(model_from_json(j.at("params")), eigenpair_from_json(j.at("plus")),
                          eigenpair_from_json(j.at("minus")), complex_from_json(j.at("c")));
}

Json to_json(const PuiseuxFit& f)
{
    return {{"z0", to_json(f.z0)},
            {"z1", to_json(f.z1)},
            {"z2", to_json(f.z2)},
            {"slope", real(f.slope)},
            {"residual", real(f.residual)},
            {"eps_range", Json::array({real(f.eps_min), real(f.eps_max)})},
            {"samples_used", f.samples_used}};
}

PuiseuxFit puiseux_fit_from_json(const Json& j)
{
    PuiseuxFit f;
    f.z0 = complex_from_json(j.at("z0"));
    f.z1 = complex_from_json(j.at("z1"));
    f.z2 = complex_from_json(j.at("z2"));
    f.slope = real_from(j.at("slope"));
    f.residual = real_from(j.at("residual"));
    f.eps_min = real_from(j.at("eps_range").at(0));
    f.eps_max = real_from(j.at("eps_range").at(1));
    f.samples_used = j.at("samples_used").get<int>();
    return f;
}

Json to_json(const ConvergenceReport& r)
{
    Json samples = Json::array();
    for (const auto& s : r.samples) {
        samples.push_back({{"eps", s.eps},
                           {"z_plus", to_json(s.z_plus)},
                           {"z_minus", to_json(s.z_minus)},
                           {"ket_deviation", real(s.ket_deviation)},
                           {"bra_deviation", real(s.bra_deviation)},
                           {"feshbach_gap", real(s.feshbach_gap)},
                           {"gram_error", real(s.gram_error)},
                           {"block_error", real(s.block_error)},
                           {"block_to_ep", real(s.block_to_ep)},
                           {"n2", to_json(s.n2_point)}});
    }
    return {{"samples", samples},
            {"smallest_usable_eps", real(r.smallest_usable_eps)},
            {"rate", real(r.rate)},
            {"n2_linear", to_json(r.n2_linear)},
            {"n2_quadratic", to_json(r.n2_quadratic)}};
}

void write_scan_csv(std::ostream& os, const std::vector<ScanRow>& rows)
{
    os << "param,branch_id,sheet,re_z,im_z,re_full_norm,im_full_norm,is_extraneous\n";
    for (const auto& r : rows) {
        os << format_double(r.param) << ',' << r.branch_id << ',' << to_string(r.sheet) << ','
           << format_double(r.z.real()) << ',' << format_double(r.z.imag()) << ','
           << format_double(r.full_norm.real()) << ',' << format_double(r.full_norm.imag()) << ','
           << (r.is_extraneous ? "true" : "false") << '\n';
    }
}

Json to_json(const std::vector<ScanRow>& rows)
{
    Json out = Json::array();
    for (const auto& r : rows) {
        out.push_back({{"param", r.param},
                       {"branch_id", r.branch_id},
                       {"sheet", to_string(r.sheet)},
                       {"z", to_json(r.z)},
                       {"full_norm", to_json(r.full_norm)},
                       {"is_extraneous", r.is_extraneous}});
    }
    return out;
}

} // namespace epj
