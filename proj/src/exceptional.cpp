#include "epj/exceptional.hpp"

#include <cmath>
#include <numbers>

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

#include "epj/core_numerics.hpp"
#include "epj/spectrum.hpp"

namespace epj {

namespace {

MatrixXc sylvester(const std::vector<Complex>& coeffs)
{
    const int n = static_cast<int>(coeffs.size()) - 1;
    if (n < 1) throw Error(ErrorCode::InvalidArgument, "discriminant: degree must be at least 1");
    std::vector<Complex> deriv(n);
    for (int k = 0; k < n; ++k) deriv[k] = coeffs[k] * static_cast<double>(n - k);
    const int size = 2 * n - 1;
    MatrixXc s = MatrixXc::Zero(size, size);
    for (int r = 0; r < n - 1; ++r)
        for (int k = 0; k <= n; ++k) s(r, r + k) = coeffs[k];
    for (int r = 0; r < n; ++r)
        for (int k = 0; k < n; ++k) s(n - 1 + r, r + k) = deriv[k];
    return s;
}

struct Residuals {
    DispersionEval d;
    double norm = 0.0;
};

Residuals residuals(const ModelParams& p, Complex z, Sheet sheet)
{
    Residuals r;
    r.d = dispersion(p, z, sheet);
    r.norm = std::hypot(std::abs(r.d.f), std::abs(r.d.df));
    return r;
}

} // namespace

void certify(EpCertificate& cert)
{
    const auto d = dispersion(cert.kappa_star, cert.z0, cert.sheet);
    cert.f_residual = std::abs(d.f);
    cert.df_residual = std::abs(d.df);
    const auto eval = eff_ham(cert.kappa_star, cert.z0, cert.sheet, 1);
    VectorXc right, left;
    try {
        std::tie(right, left) = eigvec_p(eval.heff, cert.z0);
    } catch (const Error& e) {
        if (e.code() != ErrorCode::KernelDimensionError) throw;
        throw Error(ErrorCode::DiabolicPoint, std::string("coalescence with a degenerate kernel: ") + e.what());
    }
    const Complex norm = full_norm(cert.kappa_star, {cert.z0, cert.sheet}, right, left);
    cert.selforth_residual = std::abs(norm) / (right.norm() * left.norm());
}

EpCertificate ep_closed_form_model1(double alpha)
{
    if (!(alpha > 0.0)) throw Error(ErrorCode::InvalidArgument, "ep_closed_form_model1: alpha must be positive");
    const double q = std::cbrt(std::pow(std::numbers::pi * alpha * alpha / 4.0, 2.0));
    EpCertificate cert;
    cert.kappa_star = ModelParams::one_level(-3.0 * q - alpha * alpha, alpha);
    cert.free_param = FreeParam::EpsA;
    cert.z0 = Complex(-q, 0.0);
    cert.sheet = Sheet::Second;
    certify(cert);
    return cert;
}

EpCertificate ep_find(const ModelParams& params0, FreeParam free_param, Complex z_init, Sheet sheet,
                      const EpTolerances& tol, int max_iter)
{
    validate(params0, free_param);
    if (z_init == Complex(0.0)) throw Error(ErrorCode::ZeroEnergy, "ep_find: z_init = 0");

    Complex z = z_init;
    double kappa = get_param(params0, free_param);
    Residuals cur = residuals(params0, z, sheet);
    int it = 0;
    for (; it < max_iter; ++it) {
        const ModelParams p = with_param(params0, free_param, kappa);
        const auto pd = dispersion_param_derivs(p, free_param, z, sheet);
        const Complex i(0.0, 1.0);

        Eigen::Matrix<double, 4, 3> jac;
        jac << cur.d.df.real(), (i * cur.d.df).real(), pd.f_kappa.real(),
               cur.d.df.imag(), (i * cur.d.df).imag(), pd.f_kappa.imag(),
               cur.d.d2f.real(), (i * cur.d.d2f).real(), pd.df_kappa.real(),
               cur.d.d2f.imag(), (i * cur.d.d2f).imag(), pd.df_kappa.imag();
        Eigen::Vector4d res(cur.d.f.real(), cur.d.f.imag(), cur.d.df.real(), cur.d.df.imag());
        Eigen::JacobiSVD<Eigen::Matrix<double, 4, 3>> svd(jac, Eigen::ComputeFullU | Eigen::ComputeFullV);
        svd.setThreshold(1e-13);
        const Eigen::Vector3d step = -svd.solve(res);

        double lambda = 1.0;
        bool accepted = false;
        Complex z_new;
        double kappa_new = 0.0;
        Residuals trial;
        for (int half = 0; half < 30; ++half, lambda *= 0.5) {
            z_new = z + lambda * Complex(step(0), step(1));
            kappa_new = kappa + lambda * step(2);
            if (z_new == Complex(0.0)) continue;
            trial = residuals(with_param(params0, free_param, kappa_new), z_new, sheet);
            if (std::isfinite(trial.norm) && trial.norm <= cur.norm) {
                accepted = true;
                break;
            }
        }
        if (!accepted) break;
        const double move = std::abs(z_new - z) + std::abs(kappa_new - kappa);
        z = z_new;
        kappa = kappa_new;
        cur = trial;
        const bool small = std::abs(cur.d.f) <= 1e-3 * tol.f && std::abs(cur.d.df) <= 1e-3 * tol.df;
        if (small || move <= 1e-16 * (1.0 + std::abs(z) + std::abs(kappa))) {
            ++it;
            break;
        }
    }

    EpCertificate cert;
    cert.kappa_star = with_param(params0, free_param, kappa);
    cert.free_param = free_param;
    cert.z0 = z;
    cert.sheet = sheet;
    cert.iterations = it;
    const auto d = dispersion(cert.kappa_star, z, sheet);
    cert.f_residual = std::abs(d.f);
    cert.df_residual = std::abs(d.df);
    if (cert.f_residual > tol.f || cert.df_residual > tol.df)
        throw Error(ErrorCode::NonConvergence, "ep_find: double-root system not solved (|F| = " +
                                                   std::to_string(cert.f_residual) + ", |F_z| = " +
                                                   std::to_string(cert.df_residual) + ")");
    certify(cert);
    if (cert.selforth_residual > tol.selforth)
        throw Error(ErrorCode::DiabolicPoint, "ep_find: degenerate eigenvalue is not self-orthogonal");
    return cert;
}

double relative_discriminant(const std::vector<Complex>& coeffs)
{
    const MatrixXc s = sylvester(coeffs);
    double bound = 1.0;
    for (Eigen::Index r = 0; r < s.rows(); ++r) bound *= s.row(r).norm();
    return std::abs(s.determinant()) / bound;
}

double signed_discriminant(const std::vector<Complex>& coeffs) { return sylvester(coeffs).determinant().real(); }

std::vector<EpSeed> ep_seed_scan(const ModelParams& params, FreeParam free_param, double lo, double hi, int steps)
{
    validate(params, free_param);
    if (steps < 2 || !(hi > lo)) throw Error(ErrorCode::InvalidArgument, "ep_seed_scan: need steps >= 2 and hi > lo");
    auto disc_at = [&](double k) { return signed_discriminant(char_poly(with_param(params, free_param, k)).coeffs); };

    std::vector<EpSeed> seeds;
    double k_prev = lo;
    double d_prev = disc_at(lo);
    for (int i = 1; i < steps; ++i) {
        const double k = lo + (hi - lo) * i / (steps - 1);
        const double d = disc_at(k);
        if ((d_prev < 0.0) != (d < 0.0) || d == 0.0) {
            double a = k_prev, b = k;
            const bool neg_a = d_prev < 0.0;
            for (int it = 0; it < 200 && b - a > 1e-15 * (1.0 + std::abs(a)); ++it) {
                const double m = 0.5 * (a + b);
                if ((disc_at(m) < 0.0) == neg_a) a = m;
                else b = m;
            }
            const double kappa = 0.5 * (a + b);
            const ModelParams p = with_param(params, free_param, kappa);
            auto roots = poly_roots(char_poly(p).coeffs, 1e-10);
            std::erase(roots, Complex(0.0));
            if (roots.size() >= 2) {
                std::size_t bi = 0, bj = 1;
                for (std::size_t x = 0; x < roots.size(); ++x)
                    for (std::size_t y = x + 1; y < roots.size(); ++y)
                        if (std::abs(roots[x] - roots[y]) < std::abs(roots[bi] - roots[bj])) {
                            bi = x;
                            bj = y;
                        }
                const Complex zmid = 0.5 * (roots[bi] + roots[bj]);
                const double r1 = std::abs(residual_nonlinear(p, zmid, Sheet::First));
                const double r2 = std::abs(residual_nonlinear(p, zmid, Sheet::Second));
                seeds.push_back({kappa, zmid, r1 <= r2 ? Sheet::First : Sheet::Second});
            }
        }
        k_prev = k;
        d_prev = d;
    }
    return seeds;
}

std::vector<EpCertificate> ep_search(const ModelParams& params, FreeParam free_param, double lo, double hi,
                                     int steps, const EpTolerances& tol)
{
    std::vector<EpCertificate> found;
    std::string last_error = "no discriminant sign change in range";
    for (const auto& seed : ep_seed_scan(params, free_param, lo, hi, steps)) {
        try {
            auto cert = ep_find(with_param(params, free_param, seed.kappa), free_param, seed.z, seed.sheet, tol);
            const bool dup = std::any_of(found.begin(), found.end(), [&](const EpCertificate& c) {
                return c.sheet == cert.sheet && std::abs(c.z0 - cert.z0) < 1e-9 &&
                       std::abs(get_param(c.kappa_star, free_param) - get_param(cert.kappa_star, free_param)) < 1e-9;
            });
            if (!dup) found.push_back(cert);
        } catch (const Error& e) {
            last_error = e.what();
        }
    }
    if (found.empty()) throw Error(ErrorCode::NonConvergence, "ep_search: no certified EP (" + last_error + ")");
    return found;
}

ExtraneousPartner extraneous_partner(const ModelParams& params_at_ep, Complex z0, Sheet sheet,
                                     double degeneracy_tol)
{
    if (params_at_ep.dim() < 2) throw Error(ErrorCode::InvalidArgument, "extraneous_partner: needs N >= 2");
    const MatrixXc heff = eff_ham(params_at_ep, z0, sheet, 0).heff;
    Eigen::ComplexEigenSolver<MatrixXc> es(heff, false);
    Complex far = es.eigenvalues()(0);
    for (Eigen::Index i = 1; i < es.eigenvalues().size(); ++i)
        if (std::abs(es.eigenvalues()(i) - z0) > std::abs(far - z0)) far = es.eigenvalues()(i);
    if (std::abs(far - z0) <= degeneracy_tol * std::max(1.0, std::abs(z0)))
        throw Error(ErrorCode::AccidentalDegeneracy, "extraneous_partner: z0 is a multiple eigenvalue of H_eff(z0)");
    auto [right, left] = eigvec_p(heff, far);
    return {far, right, left};
}

Complex puiseux_sqrt(double eps)
{
    return eps >= 0.0 ? Complex(std::sqrt(eps), 0.0) : Complex(0.0, std::sqrt(-eps));
}

Complex puiseux_z1(const EpCertificate& ep)
{
    const auto d = dispersion(ep.kappa_star, ep.z0, ep.sheet);
    const auto pd = dispersion_param_derivs(ep.kappa_star, ep.free_param, ep.z0, ep.sheet);
    if (d.d2f == Complex(0.0)) throw Error(ErrorCode::DerivativeVanished, "puiseux_z1: F_zz vanishes at the EP");
    return sqrt_sheet(-2.0 * pd.f_kappa / d.d2f, Sheet::First);
}

std::pair<Eigenpair, Eigenpair> coalescing_pair(const EpCertificate& ep, double eps)
{
    if (eps == 0.0) throw Error(ErrorCode::InvalidArgument, "coalescing_pair: eps = 0 is the EP itself");
    const Complex shift = puiseux_sqrt(eps) * puiseux_z1(ep);
    return nearest_pair(ep, eps, ep.z0 + shift, ep.z0 - shift);
}

std::pair<Eigenpair, Eigenpair> nearest_pair(const EpCertificate& ep, double eps, Complex want_plus,
                                             Complex want_minus)
{
    const ModelParams p = with_param(ep.kappa_star, ep.free_param, get_param(ep.kappa_star, ep.free_param) + eps);
    auto spectrum = discrete_spectrum(p);
    std::erase_if(spectrum, [&](const Eigenpair& e) { return e.sheet != ep.sheet; });
    if (spectrum.size() < 2) throw Error(ErrorCode::LabelAmbiguity, "nearest_pair: fewer than two roots on the EP sheet");
    auto nearest = [&](Complex target) {
        return static_cast<std::size_t>(std::min_element(spectrum.begin(), spectrum.end(),
                                                         [&](const Eigenpair& a, const Eigenpair& b) {
                                                             return std::abs(a.z - target) < std::abs(b.z - target);
                                                         }) -
                                        spectrum.begin());
    };
    const std::size_t ip = nearest(want_plus);
    const std::size_t im = nearest(want_minus);
    const double split = std::abs(want_plus - want_minus);
    if (ip == im || std::abs(spectrum[ip].z - want_plus) > 0.5 * split ||
        std::abs(spectrum[im].z - want_minus) > 0.5 * split)
        throw Error(ErrorCode::LabelAmbiguity, "nearest_pair: cannot assign the +/- branches at this eps");
    return {spectrum[ip], spectrum[im]};
}

} // namespace epj
