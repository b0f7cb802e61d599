#include "epj/extended_jordan.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>

#include "epj/core_numerics.hpp"
#include "epj/format.hpp"

namespace epj {

namespace {

void check_pair(const Eigenpair& plus, const Eigenpair& minus, Complex c, const ExtendedTolerances& tol)
{
    if (c == Complex(0.0)) throw Error(ErrorCode::InvalidArgument, "extended basis: c must be nonzero");
    const double scale = std::max({1.0, std::abs(plus.z), std::abs(minus.z)});
    if (std::abs(plus.z - minus.z) <= tol.pair * scale)
        throw Error(ErrorCode::DegeneratePair, "extended basis: z+ and z- coincide");
    for (const auto* e : {&plus, &minus})
        if (std::abs(e->full_norm) <= tol.norm * e->left_p.norm() * e->right_p.norm())
            throw Error(ErrorCode::DegeneratePair, "extended basis: an eigenstate has vanishing norm");
}

ExtendedJordanBasis skeleton(const ModelParams& params, const Eigenpair& plus, const Eigenpair& minus, Complex c)
{
    ExtendedJordanBasis b;
    b.params = params;
    b.c = c;
    b.plus = plus;
    b.minus = minus;
    b.phi_plus = plus.ket();
    b.tphi_minus = minus.bra();
    return b;
}

Eigen::Index reference_index(const VectorXc& v)
{
    const double top = v.cwiseAbs().maxCoeff();
    Eigen::Index k = 0;
    while (std::abs(v(k)) < (1.0 - 1e-12) * top) ++k;
    return k;
}

double loglog_slope(const std::vector<double>& x, const std::vector<double>& y)
{
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    const double n = static_cast<double>(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double lx = std::log(x[i]), ly = std::log(y[i]);
        sx += lx;
        sy += ly;
        sxx += lx * lx;
        sxy += lx * ly;
    }
    return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

} // namespace

void refresh(ExtendedJordanBasis& basis)
{
    const FullKet* kets[2] = {&basis.phi_plus, &basis.psphi_minus};
    const FullBra* duals[2] = {&basis.tpsphi_plus, &basis.tphi_minus};
    for (int i = 0; i < 2; ++i) {
        for (int j = 0; j < 2; ++j) {
            basis.gram(i, j) = inner(basis.params, *duals[i], *kets[j]);
            basis.block(i, j) = h_element(basis.params, *duals[i], *kets[j]);
        }
    }
}

ExtendedJordanBasis build_extended(const ModelParams& params, const Eigenpair& pair_plus, const Eigenpair& pair_minus,
                                   Complex c, const ExtendedTolerances& tol)
{
    check_pair(pair_plus, pair_minus, c, tol);
    ExtendedJordanBasis b = skeleton(params, pair_plus, pair_minus, c);
    const Complex dz = pair_plus.z - pair_minus.z;
    b.psphi_minus = (1.0 / pair_minus.full_norm) * pair_minus.ket() + (c / dz) * pair_plus.ket();
    b.tpsphi_plus = (1.0 / pair_plus.full_norm) * pair_plus.bra() + (-c / dz) * pair_minus.bra();
    refresh(b);
    return b;
}

ExtendedJordanBasis build_extended_feshbach(const ModelParams& params, const Eigenpair& pair_plus,
                                            const Eigenpair& pair_minus, Complex c, const ExtendedTolerances& tol)
{
    check_pair(pair_plus, pair_minus, c, tol);
    ExtendedJordanBasis b = skeleton(params, pair_plus, pair_minus, c);
    const SpectralNode zp = pair_plus.node();
    const SpectralNode zm = pair_minus.node();
    const auto n = pair_plus.right_p.size();
    const MatrixXc id = MatrixXc::Identity(n, n);
    const SpectralNode both[] = {zm, zp};
    // P + PVQ R(z-) R(z+) QVP = I - Sigma[z-, z+]
    const MatrixXc factor = id - self_energy_divided_difference(params, both);

    VectorXc x = VectorXc::Zero(n);
    VectorXc y = VectorXc::Zero(n);
    // for N = 1 the factor multiplying both sides vanishes and only the
    // eigenvector admixture is left
    if (n > 1) {
        const MatrixXc heff_m = eff_ham(params, zm.z, zm.sheet, 0).heff;
        const MatrixXc heff_p = eff_ham(params, zp.z, zp.sheet, 0).heff;
        x = restricted_inverse_apply<double>(heff_m, zm.z, pair_minus.right_p, pair_minus.left_p,
                                             c * factor * pair_plus.right_p, 1e-6);
        y = restricted_inverse_apply<double>(MatrixXc(heff_p.transpose()), zp.z, pair_plus.left_p,
                                             pair_plus.right_p, c * factor.transpose() * pair_minus.left_p, 1e-6);
    }

    FullKet ket_x{x, {{x, {zm}}, {-c * pair_plus.right_p, {zm, zp}}}};
    const Complex alpha_m = (1.0 - inner(params, pair_minus.bra(), ket_x)) / pair_minus.full_norm;
    b.psphi_minus = ket_x + alpha_m * pair_minus.ket();

    FullBra bra_y{y, {{y, {zp}}, {-c * pair_minus.left_p, {zm, zp}}}};
    const Complex alpha_p = (1.0 - inner(params, bra_y, pair_plus.ket())) / pair_plus.full_norm;
    b.tpsphi_plus = bra_y + alpha_p * pair_plus.bra();
    refresh(b);
    return b;
}

Eigenpair normalize_to_reference(const ModelParams& params, Eigenpair pair, const VectorXc& right_ref,
                                 const VectorXc& left_ref, Eigen::Index r)
{
    if (pair.right_p(r) == Complex(0.0) || pair.left_p(r) == Complex(0.0))
        throw Error(ErrorCode::DegeneratePair, "normalize_to_reference: eigenvector vanishes at the reference entry");
    pair.right_p *= right_ref(r) / pair.right_p(r);
    pair.left_p *= left_ref(r) / pair.left_p(r);
    pair.full_norm = full_norm(params, pair.node(), pair.right_p, pair.left_p);
    return pair;
}

void symmetrize_pair(const ModelParams& params, Eigenpair& plus, Eigenpair& minus, Complex c, Eigen::Index r)
{
    const Complex d = plus.z - minus.z;
    const Complex ket_r = minus.right_p(r) / minus.full_norm + c * plus.right_p(r) / d;
    const Complex bra_r = plus.left_p(r) / plus.full_norm - c * minus.left_p(r) / d;
    if (ket_r == Complex(0.0) || bra_r == Complex(0.0))
        throw Error(ErrorCode::DegeneratePair, "symmetrize_pair: extended vectors vanish at the reference entry");
    Complex t = std::sqrt(bra_r / ket_r);
    if (std::abs(t + 1.0) < std::abs(t - 1.0)) t = -t;
    plus.right_p *= t;
    minus.left_p /= t;
    plus.full_norm = full_norm(params, plus.node(), plus.right_p, plus.left_p);
    minus.full_norm = full_norm(params, minus.node(), minus.right_p, minus.left_p);
}

ConvergenceReport limit_to_ep(const EpCertificate& ep, const std::vector<double>& eps_list, Complex c)
{
    const JordanBasis jb = build_jordan(ep, c);
    const Eigen::Index r = reference_index(jb.phi0_p);
    const double kappa0 = get_param(ep.kappa_star, ep.free_param);
    Matrix2c ep_block;
    ep_block << ep.z0, c, 0.0, ep.z0;

    ConvergenceReport report;
    std::string last_error = "empty eps list";
    for (double eps : eps_list) {
        try {
            const ModelParams p = with_param(ep.kappa_star, ep.free_param, kappa0 + eps);
            auto [plus, minus] = coalescing_pair(ep, eps);
            plus = normalize_to_reference(p, plus, jb.phi0_p, jb.tphi0_p, r);
            minus = normalize_to_reference(p, minus, jb.phi0_p, jb.tphi0_p, r);
            symmetrize_pair(p, plus, minus, c, r);
            const auto direct = build_extended(p, plus, minus, c);
            const auto feshbach = build_extended_feshbach(p, plus, minus, c);

            ConvergenceSample s;
            s.eps = eps;
            s.z_plus = plus.z;
            s.z_minus = minus.z;
            s.ket_deviation = (direct.psphi_minus_p() - jb.psphi0_p).norm();
            s.bra_deviation = (direct.tpsphi_plus_p() - jb.tpsphi0_p).norm();
            s.feshbach_gap = std::max((direct.psphi_minus_p() - feshbach.psphi_minus_p()).norm(),
                                      (direct.tpsphi_plus_p() - feshbach.tpsphi_plus_p()).norm());
            s.gram_error = (direct.gram - Matrix2c::Identity()).norm();
            Matrix2c want;
            want << plus.z, c, 0.0, minus.z;
            s.block_error = (direct.block - want).norm();
            s.block_to_ep = (direct.block - ep_block).norm();
            const Complex d = minus.z - plus.z;
            s.n2_point = (minus.full_norm * c / d - 1.0) / d;
            report.samples.push_back(s);
        } catch (const Error& e) {
            if (e.code() != ErrorCode::DegeneratePair && e.code() != ErrorCode::LabelAmbiguity) throw;
            last_error = e.what();
        }
    }
    if (report.samples.empty()) throw Error(ErrorCode::DegeneratePair, "limit_to_ep: no usable eps (" + last_error + ")");

    std::vector<const ConvergenceSample*> by_size;
    for (const auto& s : report.samples) by_size.push_back(&s);
    std::sort(by_size.begin(), by_size.end(),
              [](const auto* a, const auto* b) { return std::abs(a->eps) < std::abs(b->eps); });
    report.smallest_usable_eps = std::abs(by_size.front()->eps);

    std::vector<double> xs, ys;
    for (const auto& s : report.samples) {
        if (s.ket_deviation > 0.0) {
            xs.push_back(std::abs(s.eps));
            ys.push_back(s.ket_deviation);
        }
    }
    if (xs.size() >= 2) report.rate = loglog_slope(xs, ys);

    const std::size_t m = std::min<std::size_t>(3, by_size.size());
    Eigen::MatrixXcd design(m, 2);
    Eigen::VectorXcd rhs(m);
    for (std::size_t i = 0; i < m; ++i) {
        const auto* s = by_size[i];
        const Complex d = s->z_minus - s->z_plus;
        design(i, 0) = d;
        design(i, 1) = d * d;
        rhs(i) = s->n2_point * d;
    }
    report.n2_linear = (design.col(0).adjoint() * rhs).value() / design.col(0).squaredNorm();
    report.n2_quadratic = m >= 2 ? design.colPivHouseholderQr().solve(rhs)(0) : report.n2_linear;
    return report;
}

void write_convergence_csv(std::ostream& os, const ConvergenceReport& report)
{
    os << "eps,re_z_plus,im_z_plus,re_z_minus,im_z_minus,ket_deviation,bra_deviation,feshbach_gap,gram_error,"
          "re_n2,im_n2\n";
    for (const auto& s : report.samples) {
        os << format_double(s.eps) << ',' << format_double(s.z_plus.real()) << ',' << format_double(s.z_plus.imag())
           << ',' << format_double(s.z_minus.real()) << ',' << format_double(s.z_minus.imag()) << ','
           << format_double(s.ket_deviation) << ',' << format_double(s.bra_deviation) << ','
           << format_double(s.feshbach_gap) << ',' << format_double(s.gram_error) << ','
           << format_double(s.n2_point.real()) << ',' << format_double(s.n2_point.imag()) << '\n';
    }
}

} // namespace epj
