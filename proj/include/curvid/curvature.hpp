#pragma once

/// \file
/// Levi-Civita connection and curvature of a metric at a point.
///
/// Conventions: R(X,Y)Z = [∇_X, ∇_Y]Z − ∇_[X,Y]Z, R(∂_i,∂_j)∂_k = R_ijk^l ∂_l,
/// R_ijkl = g(R(∂_i,∂_j)∂_k, ∂_l) and ρ_jk = R_ijk^i. With these, the unit
/// round 4-sphere has τ = 12, |R|² = 24, |ρ|² = 36 and Ř = 6g.

#include <algorithm>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "curvid/errors.hpp"
#include "curvid/metric.hpp"

namespace curvid {

// ---------------------------------------------------------------------------
// Jet-level building blocks. K is the order of the metric jet.
// ---------------------------------------------------------------------------

/// g^{-1} as a jet, degree by degree: with B = g^{-1}, B_0 = g0^{-1} and
/// B_d = −B_0 Σ_{e=1..d} g_e B_{d−e}, where subscripts are homogeneous parts.
template <int K>
TensorArray<Jet<K>> inverse_jet(const TensorArray<Jet<K>>& g)
{
    const int n = g.dim();
    const Tensor g0 = values(g);
    if (is_degenerate(g0)) throw DegenerateMetricError("singular metric at point");
    const Tensor G0 = inverse(g0);
    TensorArray<Jet<K>> B(n, 2);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) B(i, j) = Jet<K>(G0(i, j));
    if constexpr (K > 0) {
        const auto& rp = detail::raising_pairs<K>;
        std::array<std::array<double, Jet<K>::size>, 16> S{};
        for (int d = 1; d <= K; ++d) {
            // S_aj = Σ_b (g_ab B_bj) restricted to output degree d
            for (int a = 0; a < n; ++a)
                for (int j = 0; j < n; ++j) {
                    auto& s = S[a * n + j];
                    s.fill(0.0);
                    for (int b = 0; b < n; ++b) {
                        const auto& x = g(a, b).coeffs();
                        const auto& y = B(b, j).coeffs();
                        for (int t = 0; t < rp.count[d]; ++t) {
                            const auto& p = rp.terms[d][t];
                            s[p.out] += x[p.lhs] * y[p.rhs];
                        }
                    }
                }
            const int lo = detail::monomial_count(d - 1), hi = detail::monomial_count(d);
            for (int i = 0; i < n; ++i)
                for (int j = 0; j < n; ++j) {
                    Jet<K>& out = B(i, j);
                    for (int c = lo; c < hi; ++c) {
                        double v = 0.0;
                        for (int a = 0; a < n; ++a) v -= G0(i, a) * S[a * n + j][c];
                        out.coeff(c) = v;
                    }
                }
        }
    }
    return B;
}

/// Γ^k_ij = ½ g^{ka}(∂_i g_aj + ∂_j g_ia − ∂_a g_ij), stored as (k, i, j).
template <int K>
TensorArray<Jet<K - 1>> christoffel_jet(const TensorArray<Jet<K>>& g, const TensorArray<Jet<K>>& ginv)
{
    static_assert(K >= 1);
    const int n = g.dim();
    TensorArray<Jet<K - 1>> dg(n, 3);  // (m, i, j) = ∂_m g_ij
    for (int m = 0; m < n; ++m)
        for (int i = 0; i < n; ++i)
            for (int j = i; j < n; ++j) {
                dg(m, i, j) = g(i, j).derivative(m);
                dg(m, j, i) = dg(m, i, j);
            }
    TensorArray<Jet<K - 1>> lower(n, 3);  // (a, i, j) = Γ_{a ij}
    for (int a = 0; a < n; ++a)
        for (int i = 0; i < n; ++i)
            for (int j = i; j < n; ++j) {
                lower(a, i, j) = 0.5 * (dg(i, a, j) + dg(j, i, a) - dg(a, i, j));
                lower(a, j, i) = lower(a, i, j);
            }
    const auto gi = truncate<K - 1>(ginv);
    TensorArray<Jet<K - 1>> gamma(n, 3);
    for (int k = 0; k < n; ++k)
        for (int i = 0; i < n; ++i)
            for (int j = i; j < n; ++j) {
                Jet<K - 1> s;
                for (int a = 0; a < n; ++a) s.add_product(gi(k, a), lower(a, i, j));
                gamma(k, i, j) = s;
                gamma(k, j, i) = s;
            }
    return gamma;
}

/// R_ijk^l = ∂_iΓ^l_jk − ∂_jΓ^l_ik + Γ^l_im Γ^m_jk − Γ^l_jm Γ^m_ik, stored as (i, j, k, l).
template <int KG>
TensorArray<Jet<KG - 1>> riemann_jet(const TensorArray<Jet<KG>>& gamma)
{
    static_assert(KG >= 1);
    const int n = gamma.dim();
    const auto G = truncate<KG - 1>(gamma);
    TensorArray<Jet<KG - 1>> R(n, 4);
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j)
            for (int k = 0; k < n; ++k)
                for (int l = 0; l < n; ++l) {
                    Jet<KG - 1> s = gamma(l, j, k).derivative(i) - gamma(l, i, k).derivative(j);
                    for (int m = 0; m < n; ++m) {
                        s.add_product(G(l, i, m), G(m, j, k));
                        s.add_product(-G(l, j, m), G(m, i, k));
                    }
                    R(i, j, k, l) = s;
                    R(j, i, k, l) = -s;
                }
    return R;
}

/// Lower the last index: R_ijkl = R_ijk^m g_ml.
template <class J, class JG>
TensorArray<J> lower_last(const TensorArray<J>& Rup, const TensorArray<JG>& g)
{
    const int n = Rup.dim();
    TensorArray<J> R(n, 4);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            for (int k = 0; k < n; ++k)
                for (int l = 0; l < n; ++l) {
                    J s{};
                    for (int m = 0; m < n; ++m) s += Rup(i, j, k, m) * g(m, l);
                    R(i, j, k, l) = s;
                }
    return R;
}

/// ∇T with the derivative slot first: (∇T)_{m I} = ∂_m T_I + Christoffel
/// corrections, one per slot (+Γ for contravariant, −Γ for covariant).
template <int K>
TensorArray<Jet<K - 1>> covariant_derivative_jet(const TensorArray<Jet<K>>& T, std::span<const Variance> slots,
                                                 const TensorArray<Jet<K - 1>>& gamma)
{
    static_assert(K >= 1);
    const int n = T.dim();
    const int r = T.rank();
    const auto Tt = truncate<K - 1>(T);
    TensorArray<Jet<K - 1>> out(n, r + 1);
    for (std::size_t flat = 0; flat < T.size(); ++flat) {
        const auto idx = T.unflatten(flat);
        for (int m = 0; m < n; ++m) {
            Jet<K - 1> s = T.at_flat(flat).derivative(m);
            for (int slot = 0; slot < r; ++slot) {
                auto moved = idx;
                for (int a = 0; a < n; ++a) {
                    moved[slot] = a;
                    const auto& Ta = Tt.at_flat(Tt.flatten(moved));
                    if (slots[slot] == Variance::contravariant) s.add_product(gamma(idx[slot], m, a), Ta);
                    else s.add_product(-gamma(a, m, idx[slot]), Ta);
                }
            }
            std::array<int, 8> oidx{};
            oidx[0] = m;
            for (int s2 = 0; s2 < r; ++s2) oidx[s2 + 1] = idx[s2];
            out.at_flat(out.flatten(oidx)) = s;
        }
    }
    return out;
}

/// Metric, inverse, connection and curvature jets from a metric jet of order K.
template <int K>
struct CurvatureJets {
    TensorArray<Jet<K>> g, ginv;
    TensorArray<Jet<K - 1>> gamma;
    TensorArray<Jet<K - 2>> riemann_up;  // R_ijk^l
};

template <int K>
CurvatureJets<K> curvature_jets(const TensorArray<Jet<K>>& g)
{
    static_assert(K >= 2);
    CurvatureJets<K> c;
    c.g = g;
    c.ginv = inverse_jet<K>(g);
    c.gamma = christoffel_jet<K>(c.g, c.ginv);
    c.riemann_up = riemann_jet<K - 1>(c.gamma);
    return c;
}

/// ρ_jk = R_ijk^i.
template <class J>
TensorArray<J> ricci_from_up(const TensorArray<J>& Rup)
{
    const int n = Rup.dim();
    TensorArray<J> rho(n, 2);
    for (int j = 0; j < n; ++j)
        for (int k = 0; k < n; ++k) {
            J s{};
            for (int i = 0; i < n; ++i) s += Rup(i, j, k, i);
            rho(j, k) = s;
        }
    return rho;
}

// ---------------------------------------------------------------------------
// Point data
// ---------------------------------------------------------------------------

struct ChristoffelSymbols {
    Tensor gamma;                  // (k, i, j) = Γ^k_ij
    std::optional<Tensor> dgamma;  // (m, k, i, j) = ∂_m Γ^k_ij, when order >= 2
};

/// Christoffel symbols from a metric jet of order >= 1.
inline ChristoffelSymbols christoffel(const MetricJet& mj)
{
    if (mj.order < 1) throw OrderError("Christoffel symbols need a metric jet of order >= 1");
    const auto ginv = inverse_jet<4>(mj.g);
    const auto gamma = christoffel_jet<4>(mj.g, ginv);
    ChristoffelSymbols out{values(gamma), std::nullopt};
    if (mj.order >= 2) {
        const int n = mj.g.dim();
        Tensor d(n, 4);
        for (int m = 0; m < n; ++m)
            for (std::size_t f = 0; f < gamma.size(); ++f) d.at_flat(m * gamma.size() + f) = gamma.at_flat(f).gradient(m);
        out.dgamma = d;
    }
    return out;
}

struct CurvaturePack {
    int dim = 0;
    Signature signature;
    Tensor g, g_inv;
    Tensor gamma;       // (k, i, j)
    Tensor dgamma;      // (m, k, i, j)
    Tensor riemann;     // R_ijkl
    Tensor riemann_up;  // R_ijk^l
    Tensor ricci;       // ρ_ij
    double tau = 0.0;
    double norm_R2 = 0.0;
    double norm_rho2 = 0.0;
    Tensor r_check;    // Ř_ij = R_abci R^abc_j
    Tensor rho_check;  // ρ̌_ij = ρ_ia ρ^a_j
    Tensor L_rho;      // (Lρ)_ij = 2 R_iabj ρ^ab
};

namespace detail {

/// Raise slot `slot` with the (symmetric) inverse metric.
inline Tensor raise(const Tensor& t, const Tensor& ginv, int slot) { return contract_slot(t, ginv, slot); }

}  // namespace detail

/// Fill ρ, τ, norms, Ř, ρ̌ and Lρ from g, g^{-1} and R_ijkl.
inline void fill_invariants(CurvaturePack& p)
{
    const int n = p.dim;
    const Tensor& R = p.riemann;
    const Tensor& gi = p.g_inv;
    p.ricci = Tensor(n, 2, 0.0);
    for (int j = 0; j < n; ++j)
        for (int k = 0; k < n; ++k) {
            double s = 0.0;
            for (int i = 0; i < n; ++i)
                for (int l = 0; l < n; ++l) s += gi(l, i) * R(i, j, k, l);
            p.ricci(j, k) = s;
        }
    p.tau = 0.0;
    for (int j = 0; j < n; ++j)
        for (int k = 0; k < n; ++k) p.tau += gi(j, k) * p.ricci(j, k);

    // R^{abc}_j, then R^{abcd}
    Tensor up3 = detail::raise(detail::raise(detail::raise(R, gi, 0), gi, 1), gi, 2);
    Tensor up4 = detail::raise(up3, gi, 3);
    p.norm_R2 = 0.0;
    for (std::size_t f = 0; f < R.size(); ++f) p.norm_R2 += R.at_flat(f) * up4.at_flat(f);

    const Tensor rho_up = detail::raise(detail::raise(p.ricci, gi, 0), gi, 1);
    p.norm_rho2 = 0.0;
    for (std::size_t f = 0; f < p.ricci.size(); ++f) p.norm_rho2 += p.ricci.at_flat(f) * rho_up.at_flat(f);

    p.r_check = Tensor(n, 2, 0.0);
    p.rho_check = Tensor(n, 2, 0.0);
    p.L_rho = Tensor(n, 2, 0.0);
    const Tensor rho_mixed = detail::raise(p.ricci, gi, 0);  // ρ^a_j
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            double rc = 0.0, lr = 0.0, rr = 0.0;
            for (int a = 0; a < n; ++a) {
                rr += p.ricci(i, a) * rho_mixed(a, j);
                for (int b = 0; b < n; ++b) {
                    lr += R(i, a, b, j) * rho_up(a, b);
                    for (int c = 0; c < n; ++c) rc += R(a, b, c, i) * up3(a, b, c, j);
                }
            }
            p.r_check(i, j) = rc;
            p.rho_check(i, j) = rr;
            p.L_rho(i, j) = 2.0 * lr;
        }
}

/// Pack for an algebraic curvature tensor R_ijkl given against a metric g,
/// with no connection data (Γ and ∂Γ left zero).
inline CurvaturePack algebraic_pack(const Tensor& g, const Tensor& riemann, Signature signature = {})
{
    CurvaturePack p;
    p.dim = g.dim();
    p.signature = signature.empty() ? Signature(p.dim, 1) : std::move(signature);
    p.g = g;
    p.g_inv = inverse(g);
    p.gamma = Tensor(p.dim, 3, 0.0);
    p.dgamma = Tensor(p.dim, 4, 0.0);
    p.riemann = riemann;
    p.riemann_up = Tensor(p.dim, 4, 0.0);
    for (int i = 0; i < p.dim; ++i)
        for (int j = 0; j < p.dim; ++j)
            for (int k = 0; k < p.dim; ++k)
                for (int l = 0; l < p.dim; ++l) {
                    double s = 0.0;
                    for (int m = 0; m < p.dim; ++m) s += riemann(i, j, k, m) * p.g_inv(m, l);
                    p.riemann_up(i, j, k, l) = s;
                }
    fill_invariants(p);
    return p;
}

template <int K>
CurvaturePack pack_from_jets(const CurvatureJets<K>& c, const Signature& signature)
{
    CurvaturePack p;
    p.dim = c.g.dim();
    p.signature = signature;
    p.g = values(c.g);
    p.g_inv = values(c.ginv);
    p.gamma = values(c.gamma);
    const int n = p.dim;
    p.dgamma = Tensor(n, 4);
    for (int m = 0; m < n; ++m)
        for (std::size_t f = 0; f < c.gamma.size(); ++f)
            p.dgamma.at_flat(m * c.gamma.size() + f) = c.gamma.at_flat(f).gradient(m);
    p.riemann_up = values(c.riemann_up);
    p.riemann = lower_last(p.riemann_up, p.g);
    fill_invariants(p);
    return p;
}

/// Curvature data of `metric` at `point` from an exact order-2 metric jet.
inline CurvaturePack curvature_pack(const MetricField& metric, const Point& point)
{
    return pack_from_jets(curvature_jets<2>(metric.jet<2>(point)), metric.signature());
}

// ---------------------------------------------------------------------------
// Covariant derivatives of fields
// ---------------------------------------------------------------------------

/// ∇T (repeat = 1) or ∇∇T (repeat = 2), derivative slots first.
inline Tensor covariant_derivative(const TensorFieldJet& field, const MetricField& metric, const Point& point,
                                   int repeat)
{
    if (field.dim() != metric.dim()) throw DimensionError("field and metric dimensions differ");
    const auto& slots = field.slots();
    if (repeat == 1) {
        const auto g = metric.jet<1>(point);
        const auto gamma = christoffel_jet<1>(g, inverse_jet<1>(g));
        return values(covariant_derivative_jet<1>(field.jet<1>(point), slots, gamma));
    }
    if (repeat == 2) {
        const auto g = metric.jet<2>(point);
        const auto gamma = christoffel_jet<2>(g, inverse_jet<2>(g));
        const auto d1 = covariant_derivative_jet<2>(field.jet<2>(point), slots, gamma);
        std::vector<Variance> slots1{Variance::covariant};
        slots1.insert(slots1.end(), slots.begin(), slots.end());
        return values(covariant_derivative_jet<1>(d1, slots1, truncate<0>(gamma)));
    }
    throw OrderError("covariant_derivative supports repeat = 1 or 2");
}

/// Δf = g^{ab} ∇_a ∇_b f.
inline double laplacian(const TensorFieldJet& scalar, const MetricField& metric, const Point& point)
{
    if (scalar.rank() != 0) throw DimensionError("laplacian expects a scalar field");
    const Tensor hess = covariant_derivative(scalar, metric, point, 2);
    const Tensor gi = inverse(metric.at(point));
    double s = 0.0;
    for (int a = 0; a < metric.dim(); ++a)
        for (int b = 0; b < metric.dim(); ++b) s += gi(a, b) * hess(a, b);
    return s;
}

/// The metric itself as a covariant 2-tensor field.
inline TensorFieldJet metric_as_field(const MetricField& metric)
{
    return TensorFieldJet(metric.components(), {Variance::covariant, Variance::covariant});
}

// ---------------------------------------------------------------------------
// Symmetry report
// ---------------------------------------------------------------------------

struct SymmetryReport {
    double antisym_first = 0.0;   // R_ijkl + R_jikl
    double antisym_second = 0.0;  // R_ijkl + R_ijlk
    double pair = 0.0;            // R_ijkl − R_klij
    double bianchi = 0.0;         // R_ijkl + R_jkil + R_kijl
    double scale = 0.0;           // max |R_ijkl|
    double tolerance = 0.0;
    bool pass = false;

    double worst() const { return std::max({antisym_first, antisym_second, pair, bianchi}); }
};

/// Relative tolerance when scale > 1e-6, absolute floor 1e-12 otherwise.
inline bool within_tolerance(double violation, double scale, double rel_tol)
{
    if (scale > 1e-6) return violation <= rel_tol * scale;
    return violation <= 1e-12;
}

inline SymmetryReport check_riemann_symmetries(const CurvaturePack& p, double rel_tol = 1e-10)
{
    SymmetryReport r;
    r.tolerance = rel_tol;
    const int n = p.dim;
    const Tensor& R = p.riemann;
    r.scale = max_abs(R);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            for (int k = 0; k < n; ++k)
                for (int l = 0; l < n; ++l) {
                    r.antisym_first = std::max(r.antisym_first, std::abs(R(i, j, k, l) + R(j, i, k, l)));
                    r.antisym_second = std::max(r.antisym_second, std::abs(R(i, j, k, l) + R(i, j, l, k)));
                    r.pair = std::max(r.pair, std::abs(R(i, j, k, l) - R(k, l, i, j)));
                    r.bianchi = std::max(r.bianchi, std::abs(R(i, j, k, l) + R(j, k, i, l) + R(k, i, j, l)));
                }
    r.pass = within_tolerance(r.worst(), r.scale, rel_tol);
    return r;
}

}  // namespace curvid
