#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <functional>
#include <limits>
#include <numbers>
#include <span>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

#include "epj/types.hpp"

namespace epj {

template<typename T>
using CMatrix = Eigen::Matrix<std::complex<T>, Eigen::Dynamic, Eigen::Dynamic>;
template<typename T>
using CVector = Eigen::Matrix<std::complex<T>, Eigen::Dynamic, 1>;

/// Square root on a chosen Riemann sheet. The First sheet has its cut along
/// [0, +inf) with arg z in [0, 2pi), hence Im >= 0; Second = -First.
template<typename T>
std::complex<T> sqrt_sheet(std::complex<T> z, Sheet sheet)
{
    if (z == std::complex<T>(0)) return {0, 0};
    std::complex<T> r = std::sqrt(z);
    // principal root has arg in (-pi/2, pi/2]; fold it into [0, pi)
    if (r.imag() < 0 || (r.imag() == 0 && r.real() < 0)) r = -r;
    return sheet == Sheet::First ? r : -r;
}

/// Horner evaluation; coefficients ordered highest degree first.
template<typename T>
std::complex<T> poly_eval(std::span<const std::complex<T>> coeffs, std::complex<T> z)
{
    std::complex<T> acc{0};
    for (const auto& a : coeffs) acc = acc * z + a;
    return acc;
}

/// sum |a_k| |z|^k, the natural scale against which |p(z)| is judged.
template<typename T>
T poly_scale(std::span<const std::complex<T>> coeffs, std::complex<T> z)
{
    T acc = 0;
    const T r = std::abs(z);
    for (const auto& a : coeffs) acc = acc * r + std::abs(a);
    return acc;
}

namespace detail {

template<typename T>
void poly_eval_with_derivative(std::span<const std::complex<T>> coeffs, std::complex<T> z,
                               std::complex<T>& p, std::complex<T>& dp)
{
    p = 0;
    dp = 0;
    for (const auto& a : coeffs) {
        dp = dp * z + p;
        p = p * z + a;
    }
}

template<typename T>
bool roots_acceptable(std::span<const std::complex<T>> coeffs,
                      const std::vector<std::complex<T>>& roots, T tol)
{
    for (const auto& r : roots) {
        if (!std::isfinite(r.real()) || !std::isfinite(r.imag())) return false;
        if (std::abs(poly_eval(coeffs, r)) > tol * poly_scale(coeffs, r)) return false;
    }
    return true;
}

template<typename T>
std::vector<std::complex<T>> aberth(std::span<const std::complex<T>> coeffs, int max_iter)
{
    using C = std::complex<T>;
    const int n = static_cast<int>(coeffs.size()) - 1;
    const C lead = coeffs[0];

    // Fujiwara bound on the root moduli
    T bound = 0;
    for (int k = 1; k <= n; ++k) {
        T v = std::pow(std::abs(coeffs[k] / lead), T(1) / T(k));
        if (k == n) v = std::pow(std::abs(coeffs[k] / (T(2) * lead)), T(1) / T(k));
        bound = std::max(bound, v);
    }
    bound = 2 * bound;
    const C center = -coeffs[1] / (T(n) * lead);
    const T radius = std::max(bound / 2, std::numeric_limits<T>::min() * 1e10);

    std::vector<C> z(n);
    for (int k = 0; k < n; ++k) {
        const T angle = 2 * std::numbers::pi_v<T> * T(k) / T(n) + T(0.4);
        z[k] = center + radius * C(std::cos(angle), std::sin(angle));
    }

    const T eps = std::numeric_limits<T>::epsilon();
    for (int it = 0; it < max_iter; ++it) {
        bool moved = false;
        for (int k = 0; k < n; ++k) {
            C p, dp;
            poly_eval_with_derivative(coeffs, z[k], p, dp);
            if (p == C(0)) continue;
            const C ratio = p / dp;
            C sum{0};
            for (int j = 0; j < n; ++j)
                if (j != k) sum += T(1) / (z[k] - z[j]);
            const C w = ratio / (T(1) - ratio * sum);
            if (!std::isfinite(w.real()) || !std::isfinite(w.imag())) continue;
            z[k] -= w;
            if (std::abs(w) > 4 * eps * std::max(std::abs(z[k]), T(1e-300))) moved = true;
        }
        if (!moved) break;
    }
    return z;
}

template<typename T>
std::vector<std::complex<T>> companion_roots(std::span<const std::complex<T>> coeffs)
{
    const int n = static_cast<int>(coeffs.size()) - 1;
    CMatrix<T> comp = CMatrix<T>::Zero(n, n);
    for (int k = 0; k < n; ++k) comp(0, k) = -coeffs[k + 1] / coeffs[0];
    for (int k = 1; k < n; ++k) comp(k, k - 1) = 1;
    Eigen::ComplexEigenSolver<CMatrix<T>> solver(comp, false);
    std::vector<std::complex<T>> out(n);
    for (int k = 0; k < n; ++k) out[k] = solver.eigenvalues()(k);
    return out;
}

template<typename T>
void newton_polish(std::span<const std::complex<T>> coeffs, std::vector<std::complex<T>>& roots)
{
    for (auto& r : roots) {
        for (int step = 0; step < 4; ++step) {
            std::complex<T> p, dp;
            poly_eval_with_derivative(coeffs, r, p, dp);
            if (dp == std::complex<T>(0)) break;
            const std::complex<T> candidate = r - p / dp;
            if (std::abs(poly_eval(coeffs, candidate)) < std::abs(p))
                r = candidate;
            else
                break;
        }
    }
}

} // namespace detail

/// All roots (with multiplicity) of the polynomial with the given
/// coefficients, highest degree first. Aberth iteration, companion-matrix
/// fallback, then Newton polish. Double roots come back as two nearby values.
template<typename T>
std::vector<std::complex<T>> poly_roots(std::span<const std::complex<T>> coeffs, T tol)
{
    using C = std::complex<T>;
    if (coeffs.empty() || coeffs[0] == C(0))
        throw Error(ErrorCode::InvalidArgument, "poly_roots: leading coefficient must be nonzero");
    const int n = static_cast<int>(coeffs.size()) - 1;
    if (n > 16) throw Error(ErrorCode::InvalidArgument, "poly_roots: degree above 16");
    if (n == 0) return {};

    // peel off exact zero roots; they are reported exactly
    std::vector<C> work(coeffs.begin(), coeffs.end());
    int zeros = 0;
    while (work.size() > 1 && work.back() == C(0)) {
        work.pop_back();
        ++zeros;
    }
    std::span<const C> reduced(work);

    std::vector<C> roots;
    if (reduced.size() > 1) {
        roots = detail::aberth<T>(reduced, 500);
        if (!detail::roots_acceptable<T>(reduced, roots, tol)) roots = detail::companion_roots<T>(reduced);
        detail::newton_polish<T>(reduced, roots);
        if (!detail::roots_acceptable<T>(reduced, roots, tol))
            throw Error(ErrorCode::NonConvergence, "poly_roots: residual above tolerance");
    }
    roots.insert(roots.end(), zeros, C(0));
    return roots;
}

template<typename T>
std::vector<std::complex<T>> poly_roots(const std::vector<std::complex<T>>& coeffs, T tol)
{
    return poly_roots<T>(std::span<const std::complex<T>>(coeffs), tol);
}

/// Groups of root indices lying within rel_tol * scale of each other, where
/// scale = max(1, max |root|). Singletons are included. Roots are not merged.
template<typename T>
std::vector<std::vector<std::size_t>> root_clusters(const std::vector<std::complex<T>>& roots,
                                                    T rel_tol = T(1e-6))
{
    T scale = 1;
    for (const auto& r : roots) scale = std::max(scale, std::abs(r));
    std::vector<int> owner(roots.size(), -1);
    std::vector<std::vector<std::size_t>> groups;
    for (std::size_t i = 0; i < roots.size(); ++i) {
        if (owner[i] >= 0) continue;
        owner[i] = static_cast<int>(groups.size());
        groups.push_back({i});
        for (std::size_t k = 0; k < groups.back().size(); ++k) {
            const auto a = groups.back()[k];
            for (std::size_t j = 0; j < roots.size(); ++j) {
                if (owner[j] >= 0) continue;
                if (std::abs(roots[a] - roots[j]) <= rel_tol * scale) {
                    owner[j] = owner[i];
                    groups.back().push_back(j);
                }
            }
        }
    }
    return groups;
}

template<typename T>
struct NewtonResult {
    std::complex<T> root;
    int iterations = 0;
    T residual = 0;
};

/// Newton iteration for f(z) = 0. Throws DerivativeVanished when the
/// derivative is exactly zero or the iteration settles into the linear
/// convergence characteristic of a multiple root.
template<typename T>
NewtonResult<T> newton_complex(const std::function<std::complex<T>(std::complex<T>)>& f,
                               const std::function<std::complex<T>(std::complex<T>)>& df,
                               std::complex<T> z_init, T tol, int max_iter)
{
    using C = std::complex<T>;
    C z = z_init;
    C fz = f(z);
    T prev_step = -1;
    int linear_run = 0;
    for (int it = 0; it <= max_iter; ++it) {
        if (std::abs(fz) <= tol) return {z, it, std::abs(fz)};
        if (it == max_iter) break;
        const C d = df(z);
        if (d == C(0) || !std::isfinite(std::abs(d)))
            throw Error(ErrorCode::DerivativeVanished, "newton_complex: f'(z) = 0");
        const C step = fz / d;
        const T s = std::abs(step);
        if (prev_step > 0) {
            const T ratio = s / prev_step;
            linear_run = (ratio > T(0.3) && ratio < T(0.7)) ? linear_run + 1 : 0;
            if (linear_run >= 4)
                throw Error(ErrorCode::DerivativeVanished,
                            "newton_complex: linear convergence, multiple root suspected");
        }
        prev_step = s;
        z -= step;
        fz = f(z);
    }
    throw Error(ErrorCode::NonConvergence, "newton_complex: iteration limit reached");
}

template<typename T>
struct EigenTriple {
    std::complex<T> value;
    CVector<T> right;
    CVector<T> left; ///< stored as a column; left.transpose() * m == value * left.transpose()
};

/// Eigen-decomposition of a small (dim <= 4) complex matrix with left and
/// right vectors. Right vectors are unit-norm with their largest entry real
/// positive; left vectors are the rows of the inverse eigenvector matrix, so
/// left_i . right_j = delta_ij. Sorted by (Re, Im).
template<typename T>
std::vector<EigenTriple<T>> eig_small(const CMatrix<T>& m, T cond_limit = T(1e10))
{
    const auto n = m.rows();
    if (n != m.cols() || n < 1 || n > 4)
        throw Error(ErrorCode::InvalidArgument, "eig_small: square matrix of dim 1..4 required");

    Eigen::ComplexEigenSolver<CMatrix<T>> solver(m, true);
    if (solver.info() != Eigen::Success) throw Error(ErrorCode::NonConvergence, "eig_small: eigensolver failed");
    CMatrix<T> v = solver.eigenvectors();
    for (Eigen::Index j = 0; j < n; ++j) {
        Eigen::Index k;
        v.col(j).cwiseAbs().maxCoeff(&k);
        const std::complex<T> phase = v(k, j) / std::abs(v(k, j));
        v.col(j) /= phase;
        v.col(j).normalize();
    }

    Eigen::JacobiSVD<CMatrix<T>> svd(v);
    const auto& sv = svd.singularValues();
    if (sv(n - 1) * cond_limit < sv(0))
        throw Error(ErrorCode::DefectiveMatrix, "eig_small: eigenvectors are (nearly) linearly dependent");

    const CMatrix<T> vinv = v.inverse();
    std::vector<EigenTriple<T>> out;
    out.reserve(n);
    for (Eigen::Index j = 0; j < n; ++j)
        out.push_back({solver.eigenvalues()(j), v.col(j), vinv.row(j).transpose()});
    std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) {
        if (a.value.real() != b.value.real()) return a.value.real() < b.value.real();
        return a.value.imag() < b.value.imag();
    });
    return out;
}

/// Solves (m - z0) x = rhs on the complement of the one-dimensional kernel
/// spanned by kernel_right, with the gauge kernel_left . x = 0.
template<typename T>
CVector<T> restricted_inverse_apply(const CMatrix<T>& m, std::complex<T> z0, const CVector<T>& kernel_right,
                                    const CVector<T>& kernel_left, const CVector<T>& rhs,
                                    T tol = T(1e-8))
{
    const auto n = m.rows();
    if (kernel_right.size() != n || kernel_left.size() != n || rhs.size() != n)
        throw Error(ErrorCode::InvalidArgument, "restricted_inverse_apply: dimension mismatch");

    const T rhs_norm = rhs.norm();
    if (rhs_norm == T(0)) return CVector<T>::Zero(n);
    const std::complex<T> overlap = bilinear(kernel_left, rhs);
    if (std::abs(overlap) > tol * kernel_left.norm() * rhs_norm)
        throw Error(ErrorCode::NotSolvable, "restricted_inverse_apply: rhs has a component along the kernel");

    // bordered system [[m - z0, kr], [kl^T, 0]] [x; mu] = [rhs; 0]
    CMatrix<T> bordered = CMatrix<T>::Zero(n + 1, n + 1);
    bordered.topLeftCorner(n, n) = m - z0 * CMatrix<T>::Identity(n, n);
    bordered.topRightCorner(n, 1) = kernel_right;
    bordered.bottomLeftCorner(1, n) = kernel_left.transpose();
    CVector<T> b = CVector<T>::Zero(n + 1);
    b.head(n) = rhs;

    Eigen::FullPivLU<CMatrix<T>> lu(bordered);
    if (!lu.isInvertible())
        throw Error(ErrorCode::NotSolvable, "restricted_inverse_apply: kernel vectors do not border the operator");
    const CVector<T> sol = lu.solve(b);
    return sol.head(n);
}

} // namespace epj
