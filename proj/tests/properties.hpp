#pragma once

// Randomized property suites shared by the unit tests and the acceptance run.

#include <cmath>
#include <random>
#include <sstream>
#include <string>

#include "curvid/catalog.hpp"
#include "curvid/curvature.hpp"
#include "curvid/frames.hpp"
#include "curvid/identities.hpp"
#include "curvid/variation.hpp"
#include "support.hpp"

namespace curvid::test_support {

struct PropertyOutcome {
    std::string name;
    int cases = 0;
    int failures = 0;
    double worst = 0.0;  // largest relative violation seen
    std::string first_failure;

    bool pass() const { return cases > 0 && failures == 0; }

    void record(bool ok, double violation, const std::string& what)
    {
        ++cases;
        worst = std::max(worst, violation);
        if (!ok && failures++ == 0) first_failure = what;
    }
};

/// A random metric from the randomized catalog families.
inline CatalogEntry random_metric(std::mt19937_64& rng, int dim = 4)
{
    std::uniform_int_distribution<int> family(0, dim == 4 ? 3 : 1), seed(1, 1000);
    std::uniform_real_distribution<double> amp(-1.0, 1.0);
    const double d = dim, s = seed(rng);
    switch (family(rng)) {
    case 0: return catalog_metric("polynomial_random", {{{"seed", s}, {"dim", d}, {"eps", 0.2 / d}}, ""});
    case 1: return catalog_metric("conformal_flat", {{{"amp", amp(rng)}, {"dim", d}}, ""});
    case 2: return catalog_metric("minkowski_perturbed", {{{"seed", s}}, ""});
    default: return catalog_metric("torus_perturbed", {{{"seed", s}, {"eps", 0.2}}, ""});
    }
}

inline std::string describe(const CatalogEntry& e, const Point& p)
{
    std::ostringstream os;
    os.precision(17);
    os << e.metric.name() << " seed=" << e.params.get("seed", 0) << " at (" << p[0] << ", " << p[1] << ", " << p[2]
       << ", " << p[3] << ")";
    return os.str();
}

struct VariationTriple {
    CatalogEntry entry;
    Point point{};
    DeformationField h;
};

/// Random (metric, point, h). h is periodic on charts with a periodic axis and
/// polynomial or periodic otherwise; its amplitude is a fifth of the smallest
/// |eigenvalue| of g at the point.
inline VariationTriple random_triple(std::mt19937_64& rng)
{
    VariationTriple t{random_metric(rng, 4)};
    t.point = central(t.entry.metric.domain()).sample(rng);
    const auto ev = Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(to_eigen(t.entry.metric.at(t.point))).eigenvalues();
    const double amp = 0.2 * ev.cwiseAbs().minCoeff();
    bool periodic = false;
    for (int a = 0; a < 4; ++a) periodic = periodic || t.entry.metric.domain().periodic[a];
    const std::uint64_t s = rng();
    t.h = (!periodic && s % 2) ? polynomial_deformation(4, s, amp) : periodic_deformation(4, s, amp);
    return t;
}

/// Riemann symmetries, first Bianchi identity and ∇g = 0 on random metrics in dimensions 2 to 4.
inline PropertyOutcome riemann_properties(std::uint64_t seed, int cases)
{
    PropertyOutcome out{"riemann-symmetries"};
    std::mt19937_64 rng(seed);
    for (int k = 0; k < cases; ++k) {
        const int dim = 2 + k % 3;
        const CatalogEntry e = random_metric(rng, dim);
        const Point p = e.metric.domain().sample(rng);
        const CurvaturePack pk = curvature_pack(e.metric, p);
        const SymmetryReport s = check_riemann_symmetries(pk, 1e-10);
        out.record(s.pass, s.scale > 1e-6 ? s.worst() / s.scale : s.worst(), "symmetry " + describe(e, p));

        const auto j = e.metric.jet<1>(p);
        double dg = 1.0;
        for (std::size_t f = 0; f < j.size(); ++f)
            for (int a = 0; a < dim; ++a) dg = std::max(dg, std::abs(j.at_flat(f).gradient(a)));
        const double compat = max_abs(covariant_derivative(metric_as_field(e.metric), e.metric, p, 1)) / dg;
        out.record(compat <= 1e-10, compat, "compatibility " + describe(e, p));
    }
    return out;
}

/// g^ij times the main residual vanishes for every algebraic curvature tensor.
inline PropertyOutcome trace_properties(std::uint64_t seed, int cases)
{
    PropertyOutcome out{"identity-trace"};
    std::mt19937_64 rng(seed);
    for (int k = 0; k < cases; ++k) {
        Signature sig(4, 1);
        Tensor g = random_spd(rng, 4, 0.3);
        if (k % 3 == 2) {
            g = diagonal({-1, 1, 1, 1}) + random_symmetric(rng, 4, 0.05);
            sig[0] = -1;
        }
        const CurvaturePack pk = algebraic_pack(g, random_algebraic_curvature(rng, 4, 1 + k % 8), sig);
        const double scale = std::max({1.0, std::abs(pk.norm_R2), pk.tau * pk.tau});
        const double v = std::abs(identity_trace_check(pk)) / scale;
        out.record(v <= 1e-11, v, "algebraic tensor " + std::to_string(k));
    }
    return out;
}

/// The main residual computed in coordinates and in a (randomly rotated)
/// orthonormal frame agree as tensors; scalar invariants agree.
inline PropertyOutcome frame_properties(std::uint64_t seed, int cases)
{
    PropertyOutcome out{"frame-independence"};
    std::mt19937_64 rng(seed);
    for (int k = 0; k < cases; ++k) {
        const CatalogEntry e = random_metric(rng, 4);
        const Point p = central(e.metric.domain()).sample(rng);
        const CurvaturePack pk = curvature_pack(e.metric, p);
        const FrameRotation f = orthonormal_frame(pk.g, pk.signature);
        Tensor basis = f.frame;
        Tensor eta(4, 2, 0.0);
        for (int a = 0; a < 4; ++a) eta(a, a) = f.eta[a];
        if (e.metric.riemannian()) basis = matmul(f.frame, detail::to_tensor(detail::haar_rotation(rng)));
        const CurvaturePack framed = algebraic_pack(eta, transform_all(pk.riemann, basis), f.eta);
        const IdentityReport rc = identity_residual(pk), rf = identity_residual(framed);
        const double scale = std::max(1.0, rf.scale);
        const double tensor_gap = max_abs(transform_all(rc.residual, basis) - rf.residual) / scale;
        const double inv_gap =
            std::max({std::abs(framed.tau - pk.tau), std::abs(framed.norm_R2 - pk.norm_R2),
                      std::abs(framed.norm_rho2 - pk.norm_rho2)}) /
            std::max({1.0, std::abs(pk.norm_R2), std::abs(pk.norm_rho2), pk.tau * pk.tau});
        const double v = std::max({tensor_gap, inv_gap, rf.relative});
        out.record(v <= 1e-9, v, describe(e, p));
    }
    return out;
}

/// analytic_variation(q, a h1 + b h2) = a analytic_variation(q, h1) + b analytic_variation(q, h2).
inline PropertyOutcome linearity_properties(std::uint64_t seed, int cases)
{
    constexpr VariationQuantity quantities[] = {VariationQuantity::inverse_metric, VariationQuantity::volume_factor,
                                                VariationQuantity::christoffel,    VariationQuantity::riemann,
                                                VariationQuantity::ricci,          VariationQuantity::scalar};
    PropertyOutcome out{"h-linearity"};
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> coef(-2.0, 2.0);
    for (int k = 0; k < cases; ++k) {
        const CatalogEntry e = random_metric(rng, 4);
        const Point p = central(e.metric.domain()).sample(rng);
        const auto h1 = periodic_deformation(4, rng(), 0.5), h2 = polynomial_deformation(4, rng(), 0.5);
        const double a = coef(rng), b = coef(rng);
        const auto j1 = h1.jet<4>(p), j2 = h2.jet<4>(p);
        TensorArray<Jet<4>> js(4, 2);
        for (std::size_t f = 0; f < js.size(); ++f) js.at_flat(f) = a * j1.at_flat(f) + b * j2.at_flat(f);
        const MetricJet g = evaluate_metric_jet(e.metric, p, 2);
        const auto v1 = variation_point(g, MetricJet{2, j1});
        const auto v2 = variation_point(g, MetricJet{2, j2});
        const auto vs = variation_point(g, MetricJet{2, js});
        double worst = 0.0;
        for (VariationQuantity q : quantities) {
            if (q == VariationQuantity::volume_factor && !e.metric.riemannian()) continue;
            const Signature& sig = e.metric.signature();
            const Tensor lhs = analytic_variation(q, vs, sig);
            const Tensor rhs = a * analytic_variation(q, v1, sig) + b * analytic_variation(q, v2, sig);
            worst = std::max(worst, max_abs(lhs - rhs) / std::max(1.0, max_abs(lhs)));
        }
        out.record(worst <= 1e-11, worst, describe(e, p));
    }
    return out;
}

}  // namespace curvid::test_support
