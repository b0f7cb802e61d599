#include "epj/spectrum.hpp"

#include <algorithm>
#include <cmath>
#include <iterator>
#include <ranges>
#include <limits>

#include <Eigen/Eigenvalues>
#include <Eigen/QR>
#include <Eigen/SVD>

#include "epj/core_numerics.hpp"

namespace epj {

namespace {

void gauge_largest_entry(VectorXc& v)
{
    const double top = v.cwiseAbs().maxCoeff();
    Eigen::Index k = 0;
    while (std::abs(v(k)) < (1.0 - 1e-12) * top) ++k;
    v /= v(k);
    v(k) = 1.0;
}

bool sheet_order(const Eigenpair& a, const Eigenpair& b)
{
    if (a.sheet != b.sheet) return a.sheet < b.sheet;
    if (a.z.real() != b.z.real()) return a.z.real() < b.z.real();
    return a.z.imag() < b.z.imag();
}

// a few Newton steps on det[H_eff(z) - z], each kept only if it lowers the residual
Complex polish_root(const ModelParams& params, Complex z, Sheet sheet)
{
    auto d = dispersion(params, z, sheet);
    // linear convergence near a close pair needs more than a few steps
    for (int it = 0; it < 80; ++it) {
        if (d.df == Complex(0.0)) break;
        const Complex step = d.f / d.df;
        const Complex trial = z - step;
        if (trial == Complex(0.0)) break;
        const auto dt = dispersion(params, trial, sheet);
        if (!(std::abs(dt.f) < std::abs(d.f))) break;
        z = trial;
        d = dt;
        if (std::abs(step) <= 4.0 * std::numeric_limits<double>::epsilon() * std::abs(z)) break;
    }
    return z;
}

// Divides a polynomial (highest degree first) by (z - root), dropping the
// remainder.
std::vector<Complex> deflate(const std::vector<Complex>& coeffs, Complex root)
{
    std::vector<Complex> q(coeffs.size() - 1);
    Complex acc{0.0};
    for (std::size_t k = 0; k + 1 < coeffs.size(); ++k) {
        acc = acc * root + coeffs[k];
        q[k] = acc;
    }
    return q;
}

struct DarkState {
    double z;
    Eigen::VectorXd u;
};

// Eigenvectors of the bare Hamiltonian orthogonal to the coupling: they never
// feel the continuum, solve both sheets and enter the cleared polynomial
// squared, so they are split off before root finding.
std::vector<DarkState> dark_states(const ModelParams& params)
{
    const Eigen::MatrixXd h0 = bare_hamiltonian(params).real();
    const Eigen::VectorXd v = coupling(params);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(h0);
    const auto& lam = es.eigenvalues();
    const double scale = std::max(1.0, lam.cwiseAbs().maxCoeff());
    const double vnorm = std::max(v.norm(), std::numeric_limits<double>::min());
    std::vector<DarkState> out;
    for (Eigen::Index i = 0; i < lam.size();) {
        Eigen::Index j = i + 1;
        while (j < lam.size() && lam(j) - lam(i) <= 1e-12 * scale) ++j;
        const Eigen::MatrixXd basis = es.eigenvectors().middleCols(i, j - i);
        const Eigen::VectorXd w = basis.transpose() * v;
        const double z = lam.segment(i, j - i).mean();
        if (w.norm() <= 1e-14 * vnorm || v.norm() == 0.0) {
            for (Eigen::Index k = 0; k < basis.cols(); ++k) out.push_back({z, basis.col(k)});
        } else if (basis.cols() > 1) {
            // complement of w inside the degenerate eigenspace
            Eigen::HouseholderQR<Eigen::MatrixXd> qr(w);
            const Eigen::MatrixXd q = qr.householderQ();
            for (Eigen::Index k = 1; k < q.cols(); ++k) out.push_back({z, basis * q.col(k)});
        }
        i = j;
    }
    return out;
}

} // namespace

std::pair<VectorXc, VectorXc> eigvec_p(const MatrixXc& heff_at_z, Complex z, double kernel_tol)
{
    const auto n = heff_at_z.rows();
    const MatrixXc a = heff_at_z - z * MatrixXc::Identity(n, n);
    Eigen::JacobiSVD<MatrixXc> svd(a, Eigen::ComputeFullU | Eigen::ComputeFullV);
    const auto& sv = svd.singularValues();
    const double scale = std::max({heff_at_z.norm(), std::abs(z), std::numeric_limits<double>::min()});
    Eigen::Index kernel_dim = 0;
    for (Eigen::Index i = 0; i < n; ++i)
        if (sv(i) <= kernel_tol * scale) ++kernel_dim;
    if (kernel_dim != 1)
        throw Error(ErrorCode::KernelDimensionError,
                    "eigvec_p: numerical kernel dimension is " + std::to_string(kernel_dim));

    VectorXc right = svd.matrixV().col(n - 1);
    // u^H a = s v^H, so conj(u) is annihilated by a from the left
    VectorXc left = svd.matrixU().col(n - 1).conjugate();
    gauge_largest_entry(right);
    gauge_largest_entry(left);
    return {right, left};
}

Complex full_norm(const ModelParams& params, SpectralNode z, const VectorXc& right, const VectorXc& left)
{
    const auto eval = eff_ham(params, z.z, z.sheet, 1);
    const auto n = right.size();
    return bilinear(left, (MatrixXc::Identity(n, n) - eval.dsigma[0]) * right);
}

Eigenpair make_eigenpair(const ModelParams& params, Complex z, Sheet sheet)
{
    const auto eval = eff_ham(params, z, sheet, 1);
    auto [right, left] = eigvec_p(eval.heff, z);
    Eigenpair out;
    out.z = z;
    out.sheet = sheet;
    out.right_p = right;
    out.left_p = left;
    out.full_norm = full_norm(params, {z, sheet}, right, left);
    return out;
}

std::vector<Eigenpair> discrete_spectrum(const ModelParams& params, const SpectrumOptions& opts)
{
    validate(params);
    std::vector<Eigenpair> out;
    auto coeffs = char_poly(params).coeffs;
    const auto dark = dark_states(params);
    for (const auto& d : dark) {
        coeffs = deflate(deflate(coeffs, d.z), d.z);
        if (d.z == 0.0) continue; // the branch point is not an eigenvalue
        Eigenpair ep;
        ep.z = d.z;
        ep.sheet = Sheet::First;
        ep.right_p = d.u.cast<Complex>();
        gauge_largest_entry(ep.right_p);
        ep.left_p = ep.right_p;
        ep.full_norm = full_norm(params, {ep.z, ep.sheet}, ep.right_p, ep.left_p);
        ep.near_degenerate = std::count_if(dark.begin(), dark.end(), [&](const DarkState& o) { return o.z == d.z; }) > 1;
        out.push_back(std::move(ep));
    }
    const std::size_t dark_pairs = out.size();

    std::vector<Complex> roots;
    try {
        if (coeffs.size() > 1) roots = poly_roots(coeffs, opts.poly_tol);
    } catch (const Error& e) {
        throw Error(ErrorCode::RootFindingFailed, e.what());
    }
    // z = 0 is the branch point; after deflation it may carry rounding noise
    std::erase_if(roots, [](Complex z) { return std::abs(z) <= 1e-13; });

    for (const auto& group : root_clusters(roots, opts.cluster_tol)) {
        Complex mean{0.0};
        for (auto i : group) mean += roots[i];
        mean /= static_cast<double>(group.size());
        const bool both_sheets = std::abs(residual_nonlinear(params, mean, Sheet::First)) <= opts.residual_tol &&
                                 std::abs(residual_nonlinear(params, mean, Sheet::Second)) <= opts.residual_tol;

        // the cleared polynomial is 4z F_first(z) F_second(z): a root valid on
        // both sheets therefore appears twice
        std::vector<Complex> candidates;
        if (both_sheets) {
            // each copy of a duplicated root carries a square-root error, so
            // pair every root with its nearest twin and use the pair mean
            std::vector<std::size_t> left(group.begin(), group.end());
            while (!left.empty()) {
                const Complex a = roots[left.front()];
                left.erase(left.begin());
                if (left.empty()) {
                    candidates.push_back(a);
                    break;
                }
                const auto twin = std::min_element(left.begin(), left.end(), [&](std::size_t i, std::size_t j) {
                    return std::abs(roots[i] - a) < std::abs(roots[j] - a);
                });
                candidates.push_back(0.5 * (a + roots[*twin]));
                left.erase(twin);
            }
        } else {
            for (auto i : group) candidates.push_back(roots[i]);
        }
        const std::size_t keep = candidates.size();
        std::vector<Eigenpair> members;
        for (std::size_t k = 0; k < keep; ++k) {
            Complex z = candidates[k];
            const double r1 = std::abs(residual_nonlinear(params, z, Sheet::First));
            const double r2 = std::abs(residual_nonlinear(params, z, Sheet::Second));
            Sheet sheet = (both_sheets || r1 <= r2) ? Sheet::First : Sheet::Second;
            if (keep == 1 || both_sheets) z = polish_root(params, z, sheet);
            if (std::abs(residual_nonlinear(params, z, sheet)) > opts.residual_tol)
                throw Error(ErrorCode::RootFindingFailed, "discrete_spectrum: polynomial root solves neither sheet");
            Eigenpair ep;
            try {
                ep = make_eigenpair(params, z, sheet);
            } catch (const Error& e) {
                throw Error(ErrorCode::RootFindingFailed, e.what());
            }
            members.push_back(std::move(ep));
        }
        for (auto& m : members) {
            const auto same_sheet = std::count_if(members.begin(), members.end(),
                                                  [&](const Eigenpair& o) { return o.sheet == m.sheet; });
            m.near_degenerate = same_sheet > 1;
            out.push_back(std::move(m));
        }
    }
    // separately polished copies of a root that also solves the other sheet
    // (dark states are exact and may be genuinely degenerate, keep them all)
    std::vector<Eigenpair> unique(std::make_move_iterator(out.begin()),
                                  std::make_move_iterator(out.begin() + static_cast<std::ptrdiff_t>(dark_pairs)));
    for (auto& e : std::ranges::subrange(out.begin() + static_cast<std::ptrdiff_t>(dark_pairs), out.end())) {
        const bool seen = std::any_of(unique.begin(), unique.end(), [&](const Eigenpair& u) {
            return u.sheet == e.sheet && std::abs(u.z - e.z) <= 1e-10 * std::max(1.0, std::abs(e.z));
        });
        if (!seen) unique.push_back(std::move(e));
    }
    std::sort(unique.begin(), unique.end(), sheet_order);
    return unique;
}

Complex overlap_full(const ModelParams& params, const Eigenpair& j, const Eigenpair& l)
{
    return inner(params, j.bra(), l.ket());
}

std::vector<ScanRow> scan_point(const ModelParams& params, FreeParam free_param, double value)
{
    const ModelParams p = with_param(params, free_param, value);
    const auto spectrum = discrete_spectrum(p);
    std::vector<ScanRow> rows;
    const double nan = std::numeric_limits<double>::quiet_NaN();
    for (std::size_t k = 0; k < spectrum.size(); ++k) {
        const auto& ep = spectrum[k];
        rows.push_back({value, "g" + std::to_string(k), ep.sheet, ep.z, ep.full_norm, false});
    }
    if (p.dim() < 2) return rows;
    for (std::size_t k = 0; k < spectrum.size(); ++k) {
        const auto& ep = spectrum[k];
        const MatrixXc heff = eff_ham(p, ep.z, ep.sheet, 0).heff;
        Eigen::ComplexEigenSolver<MatrixXc> es(heff, false);
        std::vector<Complex> values(es.eigenvalues().data(), es.eigenvalues().data() + heff.rows());
        // the eigenvalue closest to z_k is z_k itself; the rest are extraneous
        const auto self = std::min_element(values.begin(), values.end(), [&](Complex a, Complex b) {
            return std::abs(a - ep.z) < std::abs(b - ep.z);
        });
        values.erase(self);
        for (const auto& x : values)
            rows.push_back({value, "x" + std::to_string(k), ep.sheet, x, Complex(nan, nan), true});
    }
    return rows;
}

} // namespace epj
