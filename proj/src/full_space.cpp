#include "epj/full_space.hpp"

namespace epj {

FullState& FullState::operator+=(const FullState& other)
{
    if (p.size() == 0) p = VectorXc::Zero(other.p.size());
    p += other.p;
    q.insert(q.end(), other.q.begin(), other.q.end());
    return *this;
}

FullState& FullState::operator*=(Complex s)
{
    p *= s;
    for (auto& t : q) t.coeff *= s;
    return *this;
}

FullState operator+(FullState a, const FullState& b) { return a += b; }

FullState operator-(FullState a, const FullState& b) { return a += Complex(-1.0) * b; }

FullState operator*(Complex s, FullState a) { return a *= s; }

FullState eigen_state(const VectorXc& p, SpectralNode z) { return {p, {{p, {z}}}}; }

FullState jordan_pseudo_state(const VectorXc& p1, const VectorXc& p0, Complex c, SpectralNode z0)
{
    return {p1, {{p1, {z0}}, {-c * p0, {z0, z0}}}};
}

MatrixXc resolvent_string(const ModelParams& params, const std::vector<SpectralNode>& nodes)
{
    const double sign = nodes.size() % 2 == 1 ? 1.0 : -1.0;
    return sign * self_energy_divided_difference(params, nodes);
}

namespace {

std::vector<SpectralNode> joined(const std::vector<SpectralNode>& a, const std::vector<SpectralNode>& b)
{
    std::vector<SpectralNode> out = a;
    out.insert(out.end(), b.begin(), b.end());
    return out;
}

} // namespace

Complex inner(const ModelParams& params, const FullBra& bra, const FullKet& ket)
{
    Complex acc = bilinear(bra.p, ket.p);
    for (const auto& b : bra.q)
        for (const auto& a : ket.q) acc += bilinear(b.coeff, resolvent_string(params, joined(b.nodes, a.nodes)) * a.coeff);
    return acc;
}

Complex h_element(const ModelParams& params, const FullBra& bra, const FullKet& ket)
{
    Complex acc = bilinear(bra.p, bare_hamiltonian(params) * ket.p);
    for (const auto& a : ket.q) acc += bilinear(bra.p, resolvent_string(params, a.nodes) * a.coeff);
    for (const auto& b : bra.q) acc += bilinear(b.coeff, resolvent_string(params, b.nodes) * ket.p);
    for (const auto& b : bra.q) {
        for (const auto& a : ket.q) {
            // R(M) QHQ R(a) R(N') = a R(M) R(a) R(N') - R(M) R(N')
            const SpectralNode head = a.nodes.front();
            std::vector<SpectralNode> rest(a.nodes.begin() + 1, a.nodes.end());
            const MatrixXc full = resolvent_string(params, joined(b.nodes, a.nodes));
            const MatrixXc reduced = resolvent_string(params, joined(b.nodes, rest));
            acc += bilinear(b.coeff, (head.z * full - reduced) * a.coeff);
        }
    }
    return acc;
}

} // namespace epj
