#include "epj/models.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "epj/core_numerics.hpp"

namespace epj {

namespace {

constexpr double kPi = std::numbers::pi;
const Complex kI{0.0, 1.0};

void require_nonzero(Complex z)
{
    if (z == Complex(0.0)) throw Error(ErrorCode::ZeroEnergy, "z = 0 is the branch point of sigma(z)");
}

// k-th Taylor coefficient of z^{-1/2} about c, i.e. binom(-1/2, k) c^{-k} c^{-1/2}
Complex inv_sqrt_taylor(Complex inv_sqrt_c, Complex c, int k)
{
    Complex coef = inv_sqrt_c;
    for (int j = 0; j < k; ++j) coef *= (-0.5 - j) / ((j + 1.0) * c);
    return coef;
}

Complex inv_sqrt(Complex z, Sheet sheet) { return 1.0 / sqrt_sheet(z, sheet); }

Complex inv_sqrt_dd_taylor(std::span<const SpectralNode> nodes)
{
    const int n = static_cast<int>(nodes.size()) - 1;
    Complex c{0.0};
    for (const auto& x : nodes) c += x.z;
    c /= static_cast<double>(nodes.size());
    const Complex g_c = inv_sqrt(c, nodes[0].sheet);

    constexpr int kMaxTerms = 240;
    // complete homogeneous symmetric polynomials h_m(y_0..y_n), y = x - c,
    // and the same polynomials of |y|, which bound |h_m| (h_m itself can
    // vanish for many m when the nodes are placed symmetrically about c)
    std::vector<Complex> h(kMaxTerms + 1, Complex(0.0));
    std::vector<double> bound(kMaxTerms + 1, 0.0);
    h[0] = 1.0;
    bound[0] = 1.0;
    for (const auto& x : nodes) {
        const Complex y = x.z - c;
        for (int m = 1; m <= kMaxTerms; ++m) {
            h[m] += y * h[m - 1];
            bound[m] += std::abs(y) * bound[m - 1];
        }
    }

    Complex sum{0.0};
    Complex coef = inv_sqrt_taylor(g_c, c, n);
    for (int m = 0; m <= kMaxTerms; ++m) {
        sum += coef * h[m];
        if (m > 4 && std::abs(coef) * bound[m] <= 1e-19 * std::abs(sum)) break;
        const int k = n + m;
        coef *= (-0.5 - k) / ((k + 1.0) * c);
    }
    return sum;
}

Complex inv_sqrt_dd_recursive(std::span<const SpectralNode> nodes)
{
    const auto& first = nodes.front();
    const auto& last = nodes.back();
    if (first == last) {
        // all equal (nodes are grouped): g^{(n)}(x) / n!
        const int n = static_cast<int>(nodes.size()) - 1;
        return inv_sqrt_taylor(inv_sqrt(first.z, first.sheet), first.z, n);
    }
    const Complex upper = inv_sqrt_dd_recursive(nodes.subspan(1));
    const Complex lower = inv_sqrt_dd_recursive(nodes.first(nodes.size() - 1));
    return (upper - lower) / (last.z - first.z);
}

double distance_to_cut(Complex c) { return c.real() >= 0.0 ? std::abs(c.imag()) : std::abs(c); }

// divided difference of z^{-1/2} over the node multiset
Complex inv_sqrt_divided_difference(std::span<const SpectralNode> nodes)
{
    std::vector<SpectralNode> sorted(nodes.begin(), nodes.end());
    std::sort(sorted.begin(), sorted.end(), [](const SpectralNode& a, const SpectralNode& b) {
        if (a.sheet != b.sheet) return a.sheet < b.sheet;
        if (a.z.real() != b.z.real()) return a.z.real() < b.z.real();
        return a.z.imag() < b.z.imag();
    });

    const bool single_sheet = std::all_of(sorted.begin(), sorted.end(),
                                          [&](const SpectralNode& x) { return x.sheet == sorted[0].sheet; });
    const bool all_equal = sorted.front() == sorted.back();
    if (single_sheet && !all_equal) {
        Complex c{0.0};
        for (const auto& x : sorted) c += x.z;
        c /= static_cast<double>(sorted.size());
        double radius = 0.0;
        for (const auto& x : sorted) radius = std::max(radius, std::abs(x.z - c));
        if (radius <= 0.5 * distance_to_cut(c)) return inv_sqrt_dd_taylor(sorted);
    }
    return inv_sqrt_dd_recursive(sorted);
}

// det of m with the listed columns replaced by the same columns of the given matrices
Complex det_replaced(const MatrixXc& m, std::initializer_list<std::pair<Eigen::Index, const MatrixXc*>> cols)
{
    MatrixXc work = m;
    for (const auto& [j, src] : cols) work.col(j) = src->col(j);
    return work.determinant();
}

// d det / dt = sum_j det(m; j <- a_j)
Complex det_first(const MatrixXc& m, const MatrixXc& a)
{
    Complex acc{0.0};
    for (Eigen::Index j = 0; j < m.cols(); ++j) acc += det_replaced(m, {{j, &a}});
    return acc;
}

// d^2 det / (ds dt) with a = dm/ds, b = dm/dt, ab = d^2 m / (ds dt)
Complex det_second(const MatrixXc& m, const MatrixXc& a, const MatrixXc& b, const MatrixXc& ab)
{
    Complex acc = det_first(m, ab);
    for (Eigen::Index j = 0; j < m.cols(); ++j)
        for (Eigen::Index k = 0; k < m.cols(); ++k)
            if (j != k) acc += det_replaced(m, {{j, &a}, {k, &b}});
    return acc;
}

} // namespace

const char* to_string(ModelKind kind) { return kind == ModelKind::OneLevel ? "one" : "two"; }

const char* to_string(FreeParam p)
{
    switch (p) {
    case FreeParam::EpsA: return "eps_a";
    case FreeParam::EpsB: return "eps_b";
    case FreeParam::AlphaA: return "alpha_a";
    case FreeParam::AlphaB: return "alpha_b";
    }
    return "?";
}

FreeParam parse_free_param(std::string_view name)
{
    if (name == "eps_a") return FreeParam::EpsA;
    if (name == "eps_b") return FreeParam::EpsB;
    if (name == "alpha_a" || name == "alpha") return FreeParam::AlphaA;
    if (name == "alpha_b") return FreeParam::AlphaB;
    throw Error(ErrorCode::InvalidArgument, "unknown model parameter '" + std::string(name) + "'");
}

double get_param(const ModelParams& params, FreeParam p)
{
    switch (p) {
    case FreeParam::EpsA: return params.eps_a;
    case FreeParam::EpsB: return params.eps_b;
    case FreeParam::AlphaA: return params.alpha_a;
    case FreeParam::AlphaB: return params.alpha_b;
    }
    return 0.0;
}

ModelParams with_param(ModelParams params, FreeParam p, double value)
{
    switch (p) {
    case FreeParam::EpsA: params.eps_a = value; break;
    case FreeParam::EpsB: params.eps_b = value; break;
    case FreeParam::AlphaA: params.alpha_a = value; break;
    case FreeParam::AlphaB: params.alpha_b = value; break;
    }
    return params;
}

void validate(const ModelParams& params)
{
    if (!(params.alpha_a >= 0.0) || !(params.alpha_b >= 0.0))
        throw Error(ErrorCode::InvalidArgument, "couplings must be non-negative");
    if (!std::isfinite(params.eps_a) || !std::isfinite(params.eps_b))
        throw Error(ErrorCode::InvalidArgument, "energies must be finite");
}

void validate(const ModelParams& params, FreeParam p)
{
    validate(params);
    if (params.kind == ModelKind::OneLevel && (p == FreeParam::EpsB || p == FreeParam::AlphaB))
        throw Error(ErrorCode::InvalidArgument, std::string("one-level model has no parameter ") + to_string(p));
}

Eigen::VectorXd coupling(const ModelParams& params)
{
    if (params.kind == ModelKind::OneLevel) return Eigen::VectorXd::Constant(1, params.alpha_a);
    Eigen::VectorXd v(2);
    v << params.alpha_a, params.alpha_b;
    return v;
}

MatrixXc bare_hamiltonian(const ModelParams& params)
{
    if (params.kind == ModelKind::OneLevel) return MatrixXc::Constant(1, 1, params.eps_a);
    MatrixXc h = MatrixXc::Zero(2, 2);
    h(0, 0) = params.eps_a;
    h(1, 1) = params.eps_b;
    return h;
}

Complex sigma_scalar(Complex z, Sheet sheet, int order)
{
    require_nonzero(z);
    if (order < 0 || order > 3) throw Error(ErrorCode::InvalidArgument, "sigma_scalar: order must be 0..3");
    const Complex g = inv_sqrt(z, sheet);
    if (order == 0) return 1.0 - kI * (kPi / 2.0) * g;
    // g^{(k)} = k! binom(-1/2, k) z^{-k} g
    Complex gk = g;
    for (int j = 0; j < order; ++j) gk *= (-0.5 - j) / z;
    return -kI * (kPi / 2.0) * gk;
}

Complex sigma_divided_difference(std::span<const SpectralNode> nodes)
{
    if (nodes.empty()) throw Error(ErrorCode::InvalidArgument, "sigma_divided_difference: no nodes");
    for (const auto& x : nodes) require_nonzero(x.z);
    const Complex g_dd = inv_sqrt_divided_difference(nodes);
    const Complex constant = nodes.size() == 1 ? Complex(1.0) : Complex(0.0);
    return constant - kI * (kPi / 2.0) * g_dd;
}

MatrixXc self_energy_divided_difference(const ModelParams& params, std::span<const SpectralNode> nodes)
{
    const Eigen::VectorXd v = coupling(params);
    const MatrixXc vvt = (v * v.transpose()).cast<Complex>();
    return vvt * sigma_divided_difference(nodes);
}

EffHamEval eff_ham(const ModelParams& params, Complex z, Sheet sheet, int max_order)
{
    require_nonzero(z);
    if (max_order < 0 || max_order > 3) throw Error(ErrorCode::InvalidArgument, "eff_ham: max_order must be 0..3");
    const Eigen::VectorXd v = coupling(params);
    const MatrixXc vvt = (v * v.transpose()).cast<Complex>();

    EffHamEval out;
    out.z = z;
    out.sheet = sheet;
    out.sigma = vvt * sigma_scalar(z, sheet, 0);
    for (int k = 1; k <= max_order; ++k) out.dsigma[k - 1] = vvt * sigma_scalar(z, sheet, k);
    out.heff = bare_hamiltonian(params) + out.sigma;
    return out;
}

namespace {

std::vector<Complex> poly_mul(const std::vector<Complex>& a, const std::vector<Complex>& b)
{
    std::vector<Complex> out(a.size() + b.size() - 1, Complex(0.0));
    for (std::size_t i = 0; i < a.size(); ++i)
        for (std::size_t j = 0; j < b.size(); ++j) out[i + j] += a[i] * b[j];
    return out;
}

std::vector<Complex> poly_add(std::vector<Complex> a, std::vector<Complex> b)
{
    if (a.size() < b.size()) std::swap(a, b);
    const std::size_t shift = a.size() - b.size();
    for (std::size_t j = 0; j < b.size(); ++j) a[shift + j] += b[j];
    return a;
}

std::vector<Complex> poly_scaled(std::vector<Complex> a, double s)
{
    for (auto& x : a) x *= s;
    return a;
}

} // namespace

CharPoly char_poly(const ModelParams& params)
{
    const std::vector<Complex> z = {1.0, 0.0};
    if (params.kind == ModelKind::OneLevel) {
        const double a2 = params.alpha_a * params.alpha_a;
        const std::vector<Complex> shifted = {1.0, -(params.eps_a + a2)};
        const auto cubic = poly_mul(z, poly_mul(shifted, shifted));
        return {poly_add(cubic, {kPi * kPi * a2 * a2 / 4.0})};
    }
    const double a2 = params.alpha_a * params.alpha_a;
    const double b2 = params.alpha_b * params.alpha_b;
    const std::vector<Complex> la = {1.0, -(params.eps_a + a2)};
    const std::vector<Complex> lb = {1.0, -(params.eps_b + b2)};
    const auto inner = poly_add(poly_mul(la, lb), {-a2 * b2});
    const std::vector<Complex> lin = {a2 + b2, -(b2 * params.eps_a + a2 * params.eps_b)};
    const auto first = poly_scaled(poly_mul(z, poly_mul(inner, inner)), 4.0);
    const auto second = poly_scaled(poly_mul(lin, lin), kPi * kPi);
    return {poly_add(first, second)};
}

Complex residual_nonlinear(const ModelParams& params, Complex z, Sheet sheet)
{
    const auto eval = eff_ham(params, z, sheet, 0);
    const auto n = eval.heff.rows();
    return (eval.heff - z * MatrixXc::Identity(n, n)).determinant();
}

DispersionEval dispersion(const ModelParams& params, Complex z, Sheet sheet)
{
    const auto eval = eff_ham(params, z, sheet, 2);
    const auto n = eval.heff.rows();
    const MatrixXc id = MatrixXc::Identity(n, n);
    const MatrixXc m = eval.heff - z * id;
    const MatrixXc dm = eval.dsigma[0] - id;
    const MatrixXc& d2m = eval.dsigma[1];
    return {m.determinant(), det_first(m, dm), det_second(m, dm, dm, d2m)};
}

DispersionParamEval dispersion_param_derivs(const ModelParams& params, FreeParam p, Complex z, Sheet sheet)
{
    validate(params, p);
    const auto eval = eff_ham(params, z, sheet, 1);
    const auto n = eval.heff.rows();
    const MatrixXc id = MatrixXc::Identity(n, n);
    const MatrixXc m = eval.heff - z * id;
    const MatrixXc dm = eval.dsigma[0] - id;

    // dM/dkappa and d^2 M/(dz dkappa)
    MatrixXc m_k = MatrixXc::Zero(n, n);
    MatrixXc dm_k = MatrixXc::Zero(n, n);
    const Eigen::VectorXd v = coupling(params);
    auto coupling_direction = [&](Eigen::Index idx) {
        Eigen::VectorXd e = Eigen::VectorXd::Zero(n);
        e(idx) = 1.0;
        return MatrixXc((e * v.transpose() + v * e.transpose()).cast<Complex>());
    };
    switch (p) {
    case FreeParam::EpsA: m_k(0, 0) = 1.0; break;
    case FreeParam::EpsB: m_k(1, 1) = 1.0; break;
    case FreeParam::AlphaA:
    case FreeParam::AlphaB: {
        const MatrixXc dvv = coupling_direction(p == FreeParam::AlphaA ? 0 : 1);
        m_k = dvv * sigma_scalar(z, sheet, 0);
        dm_k = dvv * sigma_scalar(z, sheet, 1);
        break;
    }
    }
    return {det_first(m, m_k), det_second(m, dm, m_k, dm_k)};
}

} // namespace epj
