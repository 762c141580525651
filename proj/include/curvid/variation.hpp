#pragma once

/// \file
/// Linear metric deformations g(t) = g + t h: analytic first variations at
/// t = 0, central-difference oracles, and differentiated integral identities.

#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include "curvid/catalog.hpp"
#include "curvid/curvature.hpp"
#include "curvid/errors.hpp"
#include "curvid/identities.hpp"
#include "curvid/linalg.hpp"
#include "curvid/quadrature.hpp"

namespace curvid {

/// Symmetric covariant 2-tensor field h driving g + t h.
struct DeformationField {
    std::string name;
    TensorFieldJet h;

    int dim() const { return h.dim(); }
    template <int K>
    TensorArray<Jet<K>> jet(const Point& p) const
    {
        return h.jet<K>(p);
    }
    Tensor at(const Point& p) const { return values(h.jet<0>(p)); }
};

namespace detail {

struct ConstantComponents {
    Tensor c;
    template <class T>
    void operator()(const std::array<T, 4>&, TensorArray<T>& out) const
    {
        for (std::size_t i = 0; i < out.size(); ++i) out.at_flat(i) = T(c.at_flat(i));
    }
};

struct ConformalComponents {
    JetField g, f;
    template <class T>
    void operator()(const std::array<T, 4>& x, TensorArray<T>& out) const
    {
        constexpr int K = T::order;
        const auto gv = g.evaluate<K>(x);
        const auto fv = f.evaluate<K>(x);
        for (std::size_t i = 0; i < out.size(); ++i) out.at_flat(i) = fv.at_flat(0) * gv.at_flat(i);
    }
};

}  // namespace detail

inline DeformationField make_deformation(std::string name, JetField components)
{
    if (components.rank() != 2) throw DimensionError("deformation fields are rank-2");
    return {std::move(name), TensorFieldJet(std::move(components), {Variance::covariant, Variance::covariant})};
}

inline DeformationField constant_deformation(const Tensor& h)
{
    return make_deformation("constant", JetField(h.dim(), 2, detail::ConstantComponents{h}));
}

inline DeformationField zero_deformation(int dim) { return constant_deformation(Tensor(dim, 2, 0.0)); }

/// Random combination of cos/sin of x_k and x_k ± x_l, 2π-periodic in every
/// coordinate; every component is bounded by `amplitude`.
inline DeformationField periodic_deformation(int dim, std::uint64_t seed, double amplitude = 1.0)
{
    return make_deformation("periodic", JetField(dim, 2, detail::make_basis_field(detail::BasisMatrixField::Kind::trig, dim,
                                                                                 seed, amplitude,
                                                                                 std::vector<double>(dim, 0.0))));
}

/// Random polynomial of degree <= 3, bounded by `amplitude` on the unit box.
inline DeformationField polynomial_deformation(int dim, std::uint64_t seed, double amplitude = 1.0)
{
    return make_deformation("polynomial", JetField(dim, 2, detail::make_basis_field(detail::BasisMatrixField::Kind::poly,
                                                                                   dim, seed, amplitude,
                                                                                   std::vector<double>(dim, 0.0))));
}

/// h = f g for a scalar field f (rank-0 JetField).
inline DeformationField conformal_deformation(const MetricField& metric, const JetField& f)
{
    if (f.rank() != 0) throw DimensionError("conformal factor must be a scalar field");
    return make_deformation("conformal", JetField(metric.dim(), 2, detail::ConformalComponents{metric.components(), f}));
}

/// Throws DegenerateMetricError unless g + t h keeps the signature of g for
/// t ∈ {−t_max, t_max} at `samples` random chart points; returns the smallest
/// |eigenvalue| seen.
inline double certify_deformation(const MetricField& metric, const DeformationField& h, double t_max, int samples = 100,
                                  std::uint64_t seed = 0)
{
    std::mt19937_64 rng(seed);
    double worst = std::numeric_limits<double>::infinity();
    for (int s = 0; s < samples; ++s) {
        const Point p = metric.domain().sample(rng);
        const Tensor g = metric.at(p), hv = h.at(p);
        for (double t : {-t_max, t_max}) {
            const Tensor gt = g + t * hv;
            if (is_degenerate(gt) || negative_inertia(gt) != negative_count(metric.signature()))
                throw DegenerateMetricError("g + t h leaves the non-degenerate region at |t| = " + std::to_string(t_max));
            const auto ev = Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(to_eigen(gt)).eigenvalues();
            worst = std::min(worst, ev.cwiseAbs().minCoeff());
        }
    }
    return worst;
}

// ---------------------------------------------------------------------------
// Pointwise first variations
// ---------------------------------------------------------------------------

/// −h^{ij} = −g^{ia} g^{jb} h_ab.
inline Tensor inverse_metric_derivative(const Tensor& g, const Tensor& h)
{
    if (is_degenerate(g)) throw DegenerateMetricError("inverse_metric_derivative: singular metric");
    const Tensor gi = inverse(g);
    return -1.0 * matmul(matmul(gi, h), gi);
}

/// ½ g^{ij} h_ij, the rate of dv_{g(t)} / dv_g. Riemannian metrics only.
inline double volume_element_derivative(const Tensor& g, const Tensor& h, const Signature& signature = {})
{
    if (negative_count(signature) > 0 || !is_positive_definite(g))
        throw DomainError("volume_element_derivative is defined for Riemannian metrics only");
    const Tensor gi = inverse(g);
    double s = 0.0;
    for (int i = 0; i < g.dim(); ++i)
        for (int j = 0; j < g.dim(); ++j) s += gi(i, j) * h(i, j);
    return 0.5 * s;
}

/// Point data needed by the variation formulas.
struct VariationPoint {
    int dim = 0;
    int order = 0;  // min(metric order, h order)
    Tensor g, ginv, h;
    Tensor riemann_up;  // R_ijk^l (order >= 2)
    Tensor ricci;       // ρ_ij (order >= 2)
    double tau = 0.0;
    Tensor dh;   // (m, i, j) = ∇_m h_ij
    Tensor ddh;  // (n, m, i, j) = ∇_n ∇_m h_ij (order >= 2)
};

namespace detail {

template <int K>
VariationPoint variation_point_jets(const TensorArray<Jet<K>>& g, const TensorArray<Jet<K>>& h)
{
    static_assert(K >= 1 && K <= 2);
    VariationPoint v;
    v.dim = g.dim();
    v.order = K;
    const auto ginv = inverse_jet<K>(g);
    const auto gamma = christoffel_jet<K>(g, ginv);
    v.g = values(g);
    v.ginv = values(ginv);
    v.h = values(h);
    static const std::vector<Variance> cov2{Variance::covariant, Variance::covariant};
    static const std::vector<Variance> cov3{Variance::covariant, Variance::covariant, Variance::covariant};
    const auto dh = covariant_derivative_jet<K>(h, cov2, gamma);
    v.dh = values(dh);
    if constexpr (K >= 2) {
        const auto Rup = riemann_jet<K - 1>(gamma);
        v.riemann_up = values(Rup);
        v.ricci = ricci_from_up(v.riemann_up);
        for (int j = 0; j < v.dim; ++j)
            for (int k = 0; k < v.dim; ++k) v.tau += v.ginv(j, k) * v.ricci(j, k);
        v.ddh = values(covariant_derivative_jet<K - 1>(dh, cov3, truncate<K - 2>(gamma)));
    }
    return v;
}

template <int K>
TensorArray<Jet<K>> jets_of(const MetricJet& m)
{
    return truncate<K>(m.g);
}

}  // namespace detail

inline VariationPoint variation_point(const MetricJet& g, const MetricJet& h)
{
    const int order = std::min(g.order, h.order);
    if (order < 1) throw OrderError("variation formulas need jets of order >= 1");
    if (g.g.dim() != h.g.dim()) throw DimensionError("metric and deformation dimensions differ");
    if (order == 1) return detail::variation_point_jets<1>(detail::jets_of<1>(g), detail::jets_of<1>(h));
    return detail::variation_point_jets<2>(detail::jets_of<2>(g), detail::jets_of<2>(h));
}

inline VariationPoint variation_point(const MetricField& metric, const DeformationField& h, const Point& p)
{
    if (metric.dim() != h.dim()) throw DimensionError("metric and deformation dimensions differ");
    return detail::variation_point_jets<2>(metric.jet<2>(p), h.jet<2>(p));
}

/// Γ̇^k_ij = ½ g^{ka}(∇_i h_aj + ∇_j h_ia − ∇_a h_ij), stored (k, i, j).
inline Tensor christoffel_derivative(const VariationPoint& v)
{
    const int n = v.dim;
    Tensor out(n, 3, 0.0);
    for (int k = 0; k < n; ++k)
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) {
                double s = 0.0;
                for (int a = 0; a < n; ++a) s += v.ginv(k, a) * (v.dh(i, a, j) + v.dh(j, i, a) - v.dh(a, i, j));
                out(k, i, j) = 0.5 * s;
            }
    return out;
}

namespace detail {

inline void require_second_order(const VariationPoint& v)
{
    if (v.order < 2) throw OrderError("curvature variations need jets of order >= 2");
}

/// h_a^l = h_ab g^{bl}.
inline Tensor mixed_h(const VariationPoint& v) { return contract_slot(v.h, v.ginv, 1); }

}  // namespace detail

/// Ṙ_ijk^l = ½(−R_ijk^a h_a^l + R_ija^l h_k^a + ∇_i∇_k h_j^l − ∇_j∇_k h_i^l
///             − ∇_i∇^l h_jk + ∇_j∇^l h_ik), stored (i, j, k, l).
inline Tensor riemann_derivative(const VariationPoint& v)
{
    detail::require_second_order(v);
    const int n = v.dim;
    const Tensor hm = detail::mixed_h(v);              // h_a^l
    const Tensor Hl = contract_slot(v.ddh, v.ginv, 3);  // ∇_n∇_m h_i^l
    const Tensor Hd = contract_slot(v.ddh, v.ginv, 1);  // ∇_n∇^l h_ij, stored (n, l, i, j)
    const Tensor& R = v.riemann_up;
    Tensor out(n, 4, 0.0);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            for (int k = 0; k < n; ++k)
                for (int l = 0; l < n; ++l) {
                    double s = Hl(i, k, j, l) - Hl(j, k, i, l) - Hd(i, l, j, k) + Hd(j, l, i, k);
                    for (int a = 0; a < n; ++a) s += -R(i, j, k, a) * hm(a, l) + R(i, j, a, l) * hm(k, a);
                    out(i, j, k, l) = 0.5 * s;
                }
    return out;
}

/// ρ̇_ij = ½(−R_aij^b h_b^a + ρ_ia h_j^a + ∇_a∇_j h_i^a − ∇_i∇_j h_a^a
///          − ∇^a∇_a h_ij + ∇_i∇_a h_j^a).
inline Tensor ricci_derivative(const VariationPoint& v)
{
    detail::require_second_order(v);
    const int n = v.dim;
    const Tensor hm = detail::mixed_h(v);
    const Tensor& R = v.riemann_up;
    const Tensor& H = v.ddh;
    Tensor out(n, 2, 0.0);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            double s = 0.0;
            for (int a = 0; a < n; ++a) {
                s += v.ricci(i, a) * hm(j, a);
                for (int b = 0; b < n; ++b) {
                    const double gab = v.ginv(a, b);
                    s += -R(a, i, j, b) * hm(b, a);
                    s += gab * (H(a, j, i, b) - H(i, j, a, b) - H(a, b, i, j) + H(i, a, j, b));
                }
            }
            out(i, j) = 0.5 * s;
        }
    return out;
}

/// τ̇ = −ρ_ij h^ij + ∇^i∇^j h_ij − ∇^i∇_i h_j^j.
inline double scalar_derivative(const VariationPoint& v)
{
    detail::require_second_order(v);
    const int n = v.dim;
    const Tensor hu = contract_slot(contract_slot(v.h, v.ginv, 0), v.ginv, 1);
    double s = 0.0;
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            s -= v.ricci(i, j) * hu(i, j);
            for (int p = 0; p < n; ++p)
                for (int q = 0; q < n; ++q) {
                    s += v.ginv(i, p) * v.ginv(j, q) * v.ddh(p, q, i, j);
                    s -= v.ginv(i, p) * v.ginv(j, q) * v.ddh(p, i, j, q);
                }
        }
    return s;
}

// ---------------------------------------------------------------------------
// Finite-difference oracle
// ---------------------------------------------------------------------------

enum class VariationQuantity { inverse_metric, volume_factor, christoffel, riemann, ricci, scalar };

inline const char* quantity_name(VariationQuantity q)
{
    switch (q) {
    case VariationQuantity::inverse_metric: return "inverse_metric";
    case VariationQuantity::volume_factor: return "volume_factor";
    case VariationQuantity::christoffel: return "christoffel";
    case VariationQuantity::riemann: return "riemann";
    case VariationQuantity::ricci: return "ricci";
    case VariationQuantity::scalar: return "scalar";
    }
    return "?";
}

namespace detail {

inline Tensor scalar_tensor(int dim, double v) { return Tensor(dim, 0, v); }

/// The quantity on g + t h at the point, from order-2 jets of g and h.
inline Tensor quantity_at(VariationQuantity q, const TensorArray<Jet<2>>& g, const TensorArray<Jet<2>>& h, double t)
{
    TensorArray<Jet<2>> gt(g.dim(), 2);
    for (std::size_t f = 0; f < g.size(); ++f) gt.at_flat(f) = g.at_flat(f) + t * h.at_flat(f);
    const int n = g.dim();
    switch (q) {
    case VariationQuantity::inverse_metric: return inverse(values(gt));
    case VariationQuantity::volume_factor:
        return scalar_tensor(n, std::sqrt(determinant(values(gt)) / determinant(values(g))));
    case VariationQuantity::christoffel: {
        const auto g1 = truncate<1>(gt);
        return values(christoffel_jet<1>(g1, inverse_jet<1>(g1)));
    }
    default: break;
    }
    const auto c = curvature_jets<2>(gt);
    const Tensor Rup = values(c.riemann_up);
    if (q == VariationQuantity::riemann) return Rup;
    const Tensor rho = ricci_from_up(Rup);
    if (q == VariationQuantity::ricci) return rho;
    const Tensor gi = values(c.ginv);
    double tau = 0.0;
    for (std::size_t f = 0; f < rho.size(); ++f) tau += gi.at_flat(f) * rho.at_flat(f);
    return scalar_tensor(n, tau);
}

}  // namespace detail

inline Tensor analytic_variation(VariationQuantity q, const VariationPoint& v, const Signature& signature = {})
{
    switch (q) {
    case VariationQuantity::inverse_metric: return inverse_metric_derivative(v.g, v.h);
    case VariationQuantity::volume_factor:
        return detail::scalar_tensor(v.dim, volume_element_derivative(v.g, v.h, signature));
    case VariationQuantity::christoffel: return christoffel_derivative(v);
    case VariationQuantity::riemann: return riemann_derivative(v);
    case VariationQuantity::ricci: return ricci_derivative(v);
    case VariationQuantity::scalar: return detail::scalar_tensor(v.dim, scalar_derivative(v));
    }
    throw ConfigError("unknown variation quantity");
}

/// Order estimate from errors at consecutive steps: log(e1/e2)/log(s1/s2).
/// A pair whose finer error is at or below that step's floor is exact to
/// roundoff and is skipped; +inf when every pair is skipped.
inline double convergence_order(const std::vector<double>& steps, const std::vector<double>& errors,
                                const std::vector<double>& floors)
{
    double order = std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k + 1 < errors.size(); ++k) {
        if (errors[k + 1] <= floors[k + 1]) continue;
        order = std::min(order, std::log(errors[k] / errors[k + 1]) / std::log(steps[k] / steps[k + 1]));
    }
    return order;
}

inline double convergence_order(const std::vector<double>& steps, const std::vector<double>& errors, double floor)
{
    return convergence_order(steps, errors, std::vector<double>(errors.size(), floor));
}

/// Roundoff level of a central difference at step s of a quantity of size `magnitude`.
inline double roundoff_floor(double magnitude, double step)
{
    return 100.0 * std::numeric_limits<double>::epsilon() * magnitude / step;
}

inline const std::vector<double> kDefaultSteps{1.6e-2, 8e-3, 4e-3, 2e-3, 1e-3};

struct FdEstimate {
    std::vector<double> steps;
    std::vector<Tensor> estimates;  // (f(+Δt) − f(−Δt)) / 2Δt per step
    double magnitude = 0.0;         // max |f(±Δt)| over all steps
    double self_order = 0.0;        // from differences of successive estimates
};

/// Central differences of `q` on g + t h at `p` for each step.
inline FdEstimate fd_oracle(VariationQuantity q, const MetricField& metric, const DeformationField& h, const Point& p,
                            const std::vector<double>& steps = kDefaultSteps)
{
    if (steps.empty()) throw ConfigError("fd_oracle needs at least one step");
    if (q == VariationQuantity::volume_factor && !metric.riemannian())
        throw DomainError("volume_element_derivative is defined for Riemannian metrics only");
    const auto g = metric.jet<2>(p);
    const auto hj = h.jet<2>(p);
    FdEstimate est;
    est.steps = steps;
    for (double s : steps) {
        Tensor plus = detail::quantity_at(q, g, hj, s);
        const Tensor minus = detail::quantity_at(q, g, hj, -s);
        est.magnitude = std::max({est.magnitude, max_abs(plus), max_abs(minus)});
        est.estimates.push_back((1.0 / (2.0 * s)) * (plus - minus));
    }
    std::vector<double> diffs;
    for (std::size_t k = 0; k + 1 < est.estimates.size(); ++k)
        diffs.push_back(max_abs(est.estimates[k] - est.estimates[k + 1]));
    std::vector<double> mid(steps.begin(), steps.end() - (steps.empty() ? 0 : 1));
    double scale = 1.0;
    for (const auto& e : est.estimates) scale = std::max(scale, max_abs(e));
    std::vector<double> floors;
    for (std::size_t k = 0; k < diffs.size(); ++k)
        floors.push_back(std::max(1e-12 * scale, roundoff_floor(est.magnitude, steps[k + 1])));
    est.self_order = diffs.size() >= 2 ? convergence_order(mid, diffs, floors) : 0.0;
    return est;
}

struct FdComparison {
    VariationQuantity quantity{};
    Tensor analytic;
    FdEstimate fd;
    std::vector<double> errors;  // max |fd − analytic| per step
    double scale = 1.0;          // max(1, max |analytic|)
    double order = 0.0;          // from errors against the analytic value
    double final_error = 0.0;    // error at the last step
};

/// `jet_order` is the order of the metric and h jets fed to the analytic side.
inline FdComparison fd_compare(VariationQuantity q, const MetricField& metric, const DeformationField& h, const Point& p,
                               const std::vector<double>& steps = kDefaultSteps, int jet_order = 2)
{
    FdComparison c;
    c.quantity = q;
    const VariationPoint v = variation_point(evaluate_metric_jet(metric, p, jet_order), MetricJet{jet_order, h.jet<4>(p)});
    c.analytic = analytic_variation(q, v, metric.signature());
    c.fd = fd_oracle(q, metric, h, p, steps);
    c.scale = std::max(1.0, max_abs(c.analytic));
    for (const auto& e : c.fd.estimates) c.errors.push_back(max_abs(e - c.analytic));
    std::vector<double> floors;
    for (double s : steps) floors.push_back(std::max(1e-10 * c.scale, roundoff_floor(c.fd.magnitude, s)));
    c.order = convergence_order(steps, c.errors, floors);
    c.final_error = c.errors.back();
    return c;
}

// ---------------------------------------------------------------------------
// Integral identities
// ---------------------------------------------------------------------------

enum class IntegralSelector { scalar_2d, curv_norm, ricci_norm, tau_sq, gauss_bonnet_total };

inline constexpr std::array<IntegralSelector, 5> kIntegralSelectors{
    IntegralSelector::scalar_2d, IntegralSelector::curv_norm, IntegralSelector::ricci_norm, IntegralSelector::tau_sq,
    IntegralSelector::gauss_bonnet_total};

inline const char* selector_name(IntegralSelector s)
{
    switch (s) {
    case IntegralSelector::scalar_2d: return "scalar_2d";
    case IntegralSelector::curv_norm: return "curv_norm";
    case IntegralSelector::ricci_norm: return "ricci_norm";
    case IntegralSelector::tau_sq: return "tau_sq";
    case IntegralSelector::gauss_bonnet_total: return "gauss_bonnet_total";
    }
    return "?";
}

struct IntegralVariationOptions {
    int nodes = 24;     // per axis, fixed (no refinement)
    double dt = 1e-3;
    double rel_tol = 1e-3;
    double abs_tol = 1e-6;
};

struct IntegralVariationResult {
    IntegralSelector selector{};
    double lhs = 0.0;         // central difference of ∫ q(t) dv_{g(t)} at Δt
    double lhs_half = 0.0;    // same at Δt/2
    double lhs_double = 0.0;  // same at 2Δt
    double fd_order = 0.0;    // Richardson order from the three estimates
    double rhs = 0.0;         // quadrature of the first-variation integrand
    double diff = 0.0;        // |lhs − rhs|
    double tolerance = 0.0;   // max(abs_tol, rel_tol |lhs|)
    bool pass = false;
    std::size_t nodes = 0;
};

namespace detail {

inline double selector_quantity(IntegralSelector s, const CurvaturePack& p)
{
    switch (s) {
    case IntegralSelector::scalar_2d: return p.tau;
    case IntegralSelector::curv_norm: return p.norm_R2;
    case IntegralSelector::ricci_norm: return p.norm_rho2;
    case IntegralSelector::tau_sq: return p.tau * p.tau;
    case IntegralSelector::gauss_bonnet_total: return p.norm_R2 - 4.0 * p.norm_rho2 + p.tau * p.tau;
    }
    return 0.0;
}

/// First-variation integrands E^{ij} h_ij (without dv) for every selector,
/// from an order-4 metric jet and the value of h.
inline std::array<double, 5> variation_integrands(const TensorArray<Jet<4>>& g4, const Tensor& h,
                                                  const Signature& signature)
{
    const int n = g4.dim();
    const auto c = curvature_jets<4>(g4);
    const CurvaturePack p = pack_from_jets(c, signature);
    const Tensor& gi = p.g_inv;

    // ρ and τ as order-2 jets, then ∇∇ρ and ∇∇τ.
    const auto rho = ricci_from_up(c.riemann_up);
    const auto gi2 = truncate<2>(c.ginv);
    TensorArray<Jet<2>> tau(n, 0);
    for (int j = 0; j < n; ++j)
        for (int k = 0; k < n; ++k) tau.at_flat(0).add_product(gi2(j, k), rho(j, k));
    static const std::vector<Variance> cov0{};
    static const std::vector<Variance> cov1{Variance::covariant};
    static const std::vector<Variance> cov2{Variance::covariant, Variance::covariant};
    static const std::vector<Variance> cov3{Variance::covariant, Variance::covariant, Variance::covariant};
    const auto gamma1 = truncate<1>(c.gamma);
    const auto gamma0 = truncate<0>(c.gamma);
    const Tensor ddrho = values(covariant_derivative_jet<1>(covariant_derivative_jet<2>(rho, cov2, gamma1), cov3, gamma0));
    const Tensor ddtau = values(covariant_derivative_jet<1>(covariant_derivative_jet<2>(tau, cov0, gamma1), cov1, gamma0));

    auto up2 = [&](const Tensor& t) { return contract_slot(contract_slot(t, gi, 0), gi, 1); };
    Tensor lap_rho(n, 2, 0.0);
    double lap_tau = 0.0;
    for (int a = 0; a < n; ++a)
        for (int b = 0; b < n; ++b) {
            lap_tau += gi(a, b) * ddtau(a, b);
            for (int i = 0; i < n; ++i)
                for (int j = 0; j < n; ++j) lap_rho(i, j) += gi(a, b) * ddrho(a, b, i, j);
        }
    const Tensor lap_rho_up = up2(lap_rho);      // ∇^a∇_a ρ^ij
    const Tensor hess_tau_up = up2(ddtau);       // ∇^j∇^i τ
    const Tensor rcheck_up = up2(p.r_check);     // R^abci R_abc^j
    const Tensor rhocheck_up = up2(p.rho_check); // ρ^i_a ρ^ja
    const Tensor rhoR_up = up2(0.5 * p.L_rho);   // ρ^ab R^i_ab^j
    const Tensor rho_up = up2(p.ricci);
    const Tensor res_up = n == 4 ? up2(identity_residual(p).residual) : Tensor(n, 2, 0.0);

    std::array<double, 5> out{};
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            const double hij = h(i, j);
            if (hij == 0.0) continue;
            const double g = gi(i, j);
            out[0] += (-rho_up(i, j) + 0.5 * p.tau * g) * hij;
            out[1] += (-(2.0 * rcheck_up(i, j) + 4.0 * lap_rho_up(i, j) - 2.0 * hess_tau_up(i, j) -
                         4.0 * rhocheck_up(i, j) + 4.0 * rhoR_up(i, j)) +
                       0.5 * p.norm_R2 * g) *
                      hij;
            out[2] += (-2.0 * rhoR_up(i, j) - 0.5 * lap_tau * g - lap_rho_up(i, j) + hess_tau_up(i, j) +
                       0.5 * p.norm_rho2 * g) *
                      hij;
            out[3] += (-2.0 * p.tau * rho_up(i, j) + 2.0 * hess_tau_up(i, j) - 2.0 * lap_tau * g +
                       0.5 * p.tau * p.tau * g) *
                      hij;
            out[4] += -2.0 * res_up(i, j) * hij;
        }
    return out;
}

}  // namespace detail

/// All five integral identities on one grid pass. The base must be a closed
/// single-chart model (periodic torus charts) so Green's theorem applies.
inline std::vector<IntegralVariationResult> integral_variation_all(const CatalogEntry& base, const DeformationField& h,
                                                                   const IntegralVariationOptions& opt = {})
{
    if (!base.closed) throw DomainError("integral_variation_check needs a closed base manifold");
    const MetricField& metric = base.metric;
    if (h.dim() != metric.dim()) throw DimensionError("metric and deformation dimensions differ");
    if (!(opt.dt > 0.0)) throw ConfigError("dt must be positive");
    const int n = metric.dim();
    const ChartGrid grid = make_grid(metric.domain(), opt.nodes);
    const double steps[3] = {2.0 * opt.dt, opt.dt, 0.5 * opt.dt};
    const int neg = negative_count(metric.signature());

    // Slots: [0..5) rhs, then for each selector and step: I(+s) − I(−s).
    constexpr std::size_t kSlots = 5 + 5 * 3;
    const auto sums = reduce_grid<kSlots>(grid, [&](const Point& p, double w) {
        std::array<double, kSlots> acc{};
        const auto g4 = metric.jet<4>(p);
        const auto h2 = h.jet<2>(p);
        const Tensor hv = values(h2);
        const double density = std::sqrt(std::abs(determinant(values(g4))));
        const auto e = detail::variation_integrands(g4, hv, metric.signature());
        for (int k = 0; k < 5; ++k) acc[k] = w * density * e[k];
        const auto g2 = truncate<2>(g4);
        for (int si = 0; si < 3; ++si)
            for (double sign : {1.0, -1.0}) {
                const double t = sign * steps[si];
                TensorArray<Jet<2>> gt(n, 2);
                for (std::size_t f = 0; f < gt.size(); ++f) gt.at_flat(f) = g2.at_flat(f) + t * h2.at_flat(f);
                const Tensor gv = values(gt);
                if (negative_inertia(gv) != neg)
                    throw DegenerateMetricError("g + t h leaves the non-degenerate region on the quadrature grid");
                const CurvaturePack pk = pack_from_jets(curvature_jets<2>(gt), metric.signature());
                const double dens = std::sqrt(std::abs(determinant(gv)));
                for (int k = 0; k < 5; ++k)
                    acc[5 + 3 * k + si] += sign * w * dens * detail::selector_quantity(kIntegralSelectors[k], pk);
            }
        return acc;
    });

    std::vector<IntegralVariationResult> out;
    for (int k = 0; k < 5; ++k) {
        IntegralVariationResult r;
        r.selector = kIntegralSelectors[k];
        r.rhs = sums[k];
        r.lhs_double = sums[5 + 3 * k + 0] / (2.0 * steps[0]);
        r.lhs = sums[5 + 3 * k + 1] / (2.0 * steps[1]);
        r.lhs_half = sums[5 + 3 * k + 2] / (2.0 * steps[2]);
        const double d1 = std::abs(r.lhs_double - r.lhs), d2 = std::abs(r.lhs - r.lhs_half);
        r.fd_order = (d1 > 0.0 && d2 > 0.0) ? std::log2(d1 / d2) : std::numeric_limits<double>::infinity();
        r.diff = std::abs(r.lhs - r.rhs);
        r.tolerance = std::max(opt.abs_tol, opt.rel_tol * std::abs(r.lhs));
        r.pass = r.diff <= r.tolerance;
        r.nodes = grid.size();
        out.push_back(r);
    }
    return out;
}

inline IntegralVariationResult integral_variation_check(IntegralSelector which, const CatalogEntry& base,
                                                        const DeformationField& h,
                                                        const IntegralVariationOptions& opt = {})
{
    if (which == IntegralSelector::gauss_bonnet_total && base.metric.dim() != 4)
        throw DimensionError("gauss_bonnet_total needs dim = 4");
    for (const auto& r : integral_variation_all(base, h, opt))
        if (r.selector == which) return r;
    throw ConfigError("unknown integral selector");
}

}  // namespace curvid
