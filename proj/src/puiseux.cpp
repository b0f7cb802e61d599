#include "epj/puiseux.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>

#include "epj/core_numerics.hpp"
#include "epj/format.hpp"

namespace epj {

namespace {

BifurcationSample to_sample(double eps, const std::pair<Eigenpair, Eigenpair>& pr)
{
    return {eps, pr.first, pr.second};
}

BifurcationSample track(const EpCertificate& ep, const BifurcationSample& prev, double target, int depth,
                        int max_halvings)
{
    const double ratio = std::sqrt(target / prev.eps);
    const Complex want_plus = ep.z0 + (prev.plus.z - ep.z0) * ratio;
    const Complex want_minus = ep.z0 + (prev.minus.z - ep.z0) * ratio;
    try {
        return to_sample(target, nearest_pair(ep, target, want_plus, want_minus));
    } catch (const Error& e) {
        if (e.code() != ErrorCode::LabelAmbiguity || depth >= max_halvings) throw;
    }
    const double mid = std::copysign(std::sqrt(std::abs(prev.eps) * std::abs(target)), target);
    const auto halfway = track(ep, prev, mid, depth + 1, max_halvings);
    return track(ep, halfway, target, depth + 1, max_halvings);
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

// value at h = 0 of the polynomial through (h_k, v_k)
template<typename T>
T neville_at_zero(const std::vector<Complex>& h, std::vector<T> v)
{
    const std::size_t n = h.size();
    for (std::size_t m = 1; m < n; ++m)
        for (std::size_t i = 0; i + m < n; ++i)
            v[i] = (h[i + m] * v[i] - h[i] * v[i + 1]) / (h[i + m] - h[i]);
    return v[0];
}

Eigen::Index largest_entry(const VectorXc& v)
{
    Eigen::Index r = 0;
    v.cwiseAbs().maxCoeff(&r);
    return r;
}

} // namespace

std::vector<BifurcationSample> scan_bifurcation(const EpCertificate& ep, const std::vector<double>& eps_list,
                                                int max_halvings)
{
    std::vector<std::size_t> order(eps_list.size());
    for (std::size_t i = 0; i < order.size(); ++i) {
        if (eps_list[i] == 0.0 || !std::isfinite(eps_list[i]))
            throw Error(ErrorCode::InvalidArgument, "scan_bifurcation: eps must be finite and nonzero");
        order[i] = i;
    }
    std::sort(order.begin(), order.end(),
              [&](std::size_t a, std::size_t b) { return std::abs(eps_list[a]) < std::abs(eps_list[b]); });

    std::vector<BifurcationSample> out(eps_list.size());
    for (const double sign : {1.0, -1.0}) {
        const BifurcationSample* prev = nullptr;
        for (std::size_t i : order) {
            const double eps = eps_list[i];
            if (std::copysign(1.0, eps) != sign) continue;
            out[i] = prev ? track(ep, *prev, eps, 0, max_halvings) : to_sample(eps, coalescing_pair(ep, eps));
            prev = &out[i];
        }
    }
    return out;
}

PuiseuxFit fit_puiseux(const std::vector<EigenvalueSample>& samples, const PuiseuxFitOptions& opts)
{
    if (samples.size() < 4) throw Error(ErrorCode::InvalidArgument, "fit_puiseux: at least four samples required");
    double lo = std::abs(samples.front().eps), hi = lo;
    for (const auto& s : samples) {
        if (s.eps == 0.0) throw Error(ErrorCode::InvalidArgument, "fit_puiseux: eps = 0 is the EP itself");
        lo = std::min(lo, std::abs(s.eps));
        hi = std::max(hi, std::abs(s.eps));
    }
    if (hi < 99.999 * lo) throw Error(ErrorCode::InvalidArgument, "fit_puiseux: samples must span two decades");

    std::vector<const EigenvalueSample*> window;
    for (const auto& s : samples)
        if (std::abs(s.eps) <= opts.max_fit_eps) window.push_back(&s);
    if (window.size() < 2) {
        window.clear();
        for (const auto& s : samples) window.push_back(&s);
        std::sort(window.begin(), window.end(),
                  [](const auto* a, const auto* b) { return std::abs(a->eps) < std::abs(b->eps); });
        window.resize(2);
    }

    const auto rows = static_cast<Eigen::Index>(2 * window.size());
    Eigen::MatrixXcd a(rows, 3);
    Eigen::VectorXcd b(rows);
    PuiseuxFit fit;
    fit.eps_min = std::abs(window.front()->eps);
    fit.eps_max = fit.eps_min;
    for (std::size_t k = 0; k < window.size(); ++k) {
        const auto& s = *window[k];
        const Complex h = puiseux_sqrt(s.eps);
        const auto i = static_cast<Eigen::Index>(2 * k);
        a.row(i) << 1.0, h, s.eps;
        a.row(i + 1) << 1.0, -h, s.eps;
        b(i) = s.z_plus;
        b(i + 1) = s.z_minus;
        fit.eps_min = std::min(fit.eps_min, std::abs(s.eps));
        fit.eps_max = std::max(fit.eps_max, std::abs(s.eps));
    }
    // columns differ by orders of magnitude; equilibrate before the solve
    const Eigen::Vector3d scale = a.colwise().norm().transpose();
    const Eigen::VectorXcd x = (a * scale.cwiseInverse().asDiagonal()).colPivHouseholderQr().solve(b);
    fit.z0 = x(0) / scale(0);
    fit.z1 = x(1) / scale(1);
    fit.z2 = x(2) / scale(2);
    fit.samples_used = static_cast<int>(window.size());

    const Eigen::VectorXcd fitted = a * Eigen::Vector3cd(fit.z0, fit.z1, fit.z2);
    for (Eigen::Index i = 0; i < rows; ++i)
        fit.residual = std::max(fit.residual, std::abs(fitted(i) - b(i)) / std::max(std::abs(b(i)), 1e-300));

    std::vector<double> xs, ys;
    for (const auto& s : samples) {
        xs.push_back(std::abs(s.eps));
        ys.push_back(std::abs(s.z_plus - s.z_minus));
    }
    fit.slope = loglog_slope(xs, ys);

    if (fit.residual > opts.max_residual)
        throw PoorFitError("fit_puiseux: residual " + format_double(fit.residual) + " exceeds tolerance", fit);
    if (std::abs(fit.slope - 0.5) > opts.max_slope_error)
        throw PoorFitError("fit_puiseux: slope " + format_double(fit.slope) + " is not a half power", fit);
    return fit;
}

PuiseuxFit fit_puiseux(const std::vector<BifurcationSample>& samples, const PuiseuxFitOptions& opts)
{
    std::vector<EigenvalueSample> bare;
    bare.reserve(samples.size());
    for (const auto& s : samples) bare.push_back({s.eps, s.plus.z, s.minus.z});
    return fit_puiseux(bare, opts);
}

double vector_puiseux_slope(const std::vector<BifurcationSample>& samples)
{
    if (samples.size() < 2) throw Error(ErrorCode::InvalidArgument, "vector_puiseux_slope: at least two samples required");
    const auto smallest = std::min_element(samples.begin(), samples.end(), [](const auto& a, const auto& b) {
        return std::abs(a.eps) < std::abs(b.eps);
    });
    const Eigen::Index r = largest_entry(smallest->plus.right_p);
    std::vector<double> xs, ys;
    for (const auto& s : samples) {
        const VectorXc diff = s.plus.right_p / s.plus.right_p(r) - s.minus.right_p / s.minus.right_p(r);
        xs.push_back(std::abs(s.eps));
        ys.push_back(diff.norm());
        if (!(ys.back() > 0.0))
            throw Error(ErrorCode::InvalidArgument, "vector_puiseux_slope: eigenvectors coincide (one-level model?)");
    }
    return loglog_slope(xs, ys);
}

DifferenceQuotientResult difference_quotient_pseudovector(const EpCertificate& ep, const std::vector<double>& eps_list,
                                                          Complex c, double max_change)
{
    if (c == Complex(0.0)) throw Error(ErrorCode::InvalidArgument, "difference_quotient_pseudovector: c must be nonzero");
    if (eps_list.size() < 3)
        throw Error(ErrorCode::InvalidArgument, "difference_quotient_pseudovector: three eps values required");
    auto samples = scan_bifurcation(ep, eps_list);
    std::sort(samples.begin(), samples.end(),
              [](const auto& a, const auto& b) { return std::abs(a.eps) < std::abs(b.eps); });
    samples.resize(3);
    const Eigen::Index r = largest_entry(samples.front().plus.right_p);
    const double kappa0 = get_param(ep.kappa_star, ep.free_param);

    std::vector<Complex> h;
    std::vector<VectorXc> quotient, mean;
    std::vector<Complex> y_even, y_odd;
    for (const auto& s : samples) {
        const ModelParams p = with_param(ep.kappa_star, ep.free_param, kappa0 + s.eps);
        const VectorXc rp = s.plus.right_p / s.plus.right_p(r);
        const VectorXc rm = s.minus.right_p / s.minus.right_p(r);
        const VectorXc lp = s.plus.left_p / s.plus.left_p(r);
        const VectorXc lm = s.minus.left_p / s.minus.left_p(r);
        const Complex np = full_norm(p, s.plus.node(), rp, lp);
        const Complex nm = full_norm(p, s.minus.node(), rm, lm);
        const Complex d = s.minus.z - s.plus.z;
        const Complex y_minus = nm * c / d;
        const Complex y_plus = -np * c / d;

        h.push_back(puiseux_sqrt(s.eps));
        quotient.push_back((rp - rm) / (s.plus.z - s.minus.z));
        mean.push_back((rp + rm) / 2.0);
        y_even.push_back((y_minus + y_plus) / 2.0);
        y_odd.push_back((y_minus - y_plus) / (2.0 * d));
    }

    auto both_orders = [&](const auto& values) {
        using T = std::decay_t<decltype(values[0])>;
        const std::vector<Complex> h2(h.begin(), h.begin() + 2);
        const std::vector<T> v2(values.begin(), values.begin() + 2);
        return std::pair{neville_at_zero(h, values), neville_at_zero(h2, v2)};
    };
    const auto [q2, q1] = both_orders(quotient);
    const auto [m2, m1] = both_orders(mean);
    const auto [e2, e1] = both_orders(y_even);
    const auto [o2, o1] = both_orders(y_odd);

    DifferenceQuotientResult res;
    const Complex lambda = sqrt_sheet(1.0 / e2, Sheet::First);
    res.n2 = o2 / e2;
    res.phi0_p = lambda * m2;
    res.psphi0_p = lambda * c * q2 - c * res.n2 * res.phi0_p;
    res.extrapolation_change = std::max({(q2 - q1).norm() / std::max(q2.norm(), m2.norm()),
                                         (m2 - m1).norm() / m2.norm(), std::abs(e2 - e1) / std::abs(e2),
                                         std::abs(o2 - o1) / std::max(std::abs(o2), 1.0)});
    if (!(res.extrapolation_change <= max_change))
        throw Error(ErrorCode::NonConvergence, "difference_quotient_pseudovector: Richardson extrapolation did not settle");
    return res;
}

double perturbation_overlap(const EpCertificate& ep, double step)
{
    const double kappa0 = get_param(ep.kappa_star, ep.free_param);
    const auto at = [&](double k) {
        return eff_ham(with_param(ep.kappa_star, ep.free_param, k), ep.z0, ep.sheet, 0).heff;
    };
    const MatrixXc dh = (at(kappa0 + step) - at(kappa0 - step)) / (2.0 * step);
    const auto [right, left] = eigvec_p(eff_ham(ep.kappa_star, ep.z0, ep.sheet, 0).heff, ep.z0);
    return std::abs(bilinear(left, dh * right)) / (left.norm() * right.norm());
}

void write_bifurcation_csv(std::ostream& os, const std::vector<BifurcationSample>& samples)
{
    os << "eps,re_z_plus,im_z_plus,re_z_minus,im_z_minus,abs_split\n";
    for (const auto& s : samples) {
        os << format_double(s.eps) << ',' << format_double(s.plus.z.real()) << ',' << format_double(s.plus.z.imag())
           << ',' << format_double(s.minus.z.real()) << ',' << format_double(s.minus.z.imag()) << ','
           << format_double(std::abs(s.plus.z - s.minus.z)) << '\n';
    }
}

} // namespace epj
