#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "curvid/catalog.hpp"
#include "curvid/curvature.hpp"
#include "curvid/frames.hpp"
#include "curvid/identities.hpp"
#include "support.hpp"

using namespace curvid;
namespace ts = curvid::test_support;

namespace {

constexpr double pi = std::numbers::pi;

MetricField conformal_exp_metric()
{
    auto comp = [](const auto& x, auto& out) {
        using T = std::decay_t<decltype(x[0])>;
        using std::exp;
        for (std::size_t f = 0; f < out.size(); ++f) out.at_flat(f) = T(0.0);
        const T e = exp(2.0 * x[0]);
        for (int i = 0; i < 4; ++i) out(i, i) = e;
    };
    return MetricField("conformal_exp", detail::box(4, -1, 1), Signature(4, 1), JetField(4, 2, comp));
}

}  // namespace

TEST(Christoffel, FlatVanishes)
{
    const auto e = catalog_metric("flat4");
    const auto c = christoffel(evaluate_metric_jet(e.metric, {0.5, 1.0, 1.5, 2.0}, 2));
    EXPECT_EQ(max_abs(c.gamma), 0.0);
    ASSERT_TRUE(c.dgamma.has_value());
    EXPECT_EQ(max_abs(*c.dgamma), 0.0);
}

TEST(Christoffel, ConformalClosedForm)
{
    // Γ^k_ij = δ_i^k φ_j + δ_j^k φ_i − δ_ij φ^k with φ = x⁰.
    const auto m = conformal_exp_metric();
    const auto c = christoffel(evaluate_metric_jet(m, {0.3, 0.1, -0.2, 0.4}, 1));
    EXPECT_FALSE(c.dgamma.has_value());
    for (int k = 0; k < 4; ++k)
        for (int i = 0; i < 4; ++i)
            for (int j = 0; j < 4; ++j) {
                const double want = (i == k) * (j == 0) + (j == k) * (i == 0) - (i == j) * (k == 0);
                EXPECT_NEAR(c.gamma(k, i, j), want, 1e-14) << k << i << j;
            }
    EXPECT_NEAR(c.gamma(0, 0, 0), 1.0, 1e-14);
    EXPECT_NEAR(c.gamma(1, 0, 1), 1.0, 1e-14);
    EXPECT_NEAR(c.gamma(0, 1, 1), -1.0, 1e-14);
}

TEST(Christoffel, HypersphericalClosedForm)
{
    const auto e = catalog_metric("sphere4");
    const Point p{0.7, 1.9, 2.4, 5.0};
    const auto c = christoffel(evaluate_metric_jet(e.metric, p, 1));
    const double s0 = std::sin(p[0]), c0 = std::cos(p[0]), s1 = std::sin(p[1]), c1 = std::cos(p[1]);
    const double s2 = std::sin(p[2]), c2 = std::cos(p[2]);
    Tensor want(4, 3, 0.0);
    auto set = [&](int k, int i, int j, double v) { want(k, i, j) = want(k, j, i) = v; };
    set(1, 0, 1, c0 / s0);
    set(2, 0, 2, c0 / s0);
    set(3, 0, 3, c0 / s0);
    set(2, 1, 2, c1 / s1);
    set(3, 1, 3, c1 / s1);
    set(3, 2, 3, c2 / s2);
    set(0, 1, 1, -s0 * c0);
    set(0, 2, 2, -s0 * c0 * s1 * s1);
    set(0, 3, 3, -s0 * c0 * s1 * s1 * s2 * s2);
    set(1, 2, 2, -s1 * c1);
    set(1, 3, 3, -s1 * c1 * s2 * s2);
    set(2, 3, 3, -s2 * c2);
    EXPECT_LT(max_abs(c.gamma - want), 1e-14);
}

TEST(Christoffel, OrderZeroRejected)
{
    const auto e = catalog_metric("flat4");
    EXPECT_THROW(christoffel(evaluate_metric_jet(e.metric, {0, 0, 0, 0}, 0)), OrderError);
}

TEST(CurvaturePack, FlatIsZero)
{
    const auto pk = curvature_pack(catalog_metric("flat4").metric, {1, 2, 3, 4});
    EXPECT_EQ(max_abs(pk.riemann), 0.0);
    EXPECT_EQ(max_abs(pk.ricci), 0.0);
    EXPECT_EQ(pk.tau, 0.0);
    EXPECT_EQ(pk.norm_R2, 0.0);
    EXPECT_EQ(max_abs(pk.r_check), 0.0);
}

TEST(CurvaturePack, UnitSphereValues)
{
    const auto e = catalog_metric("sphere4", {{{"r", 1.0}}, ""});
    std::mt19937_64 rng(2);
    ChartDomain d = e.metric.domain();
    for (int a = 0; a < 3; ++a) {
        d.lo[a] = 0.6;
        d.hi[a] = pi - 0.6;
    }
    for (int k = 0; k < 10; ++k) {
        const auto pk = curvature_pack(e.metric, d.sample(rng));
        EXPECT_NEAR(pk.tau, 12.0, 1e-12);
        EXPECT_NEAR(pk.norm_R2, 24.0, 1e-12);
        EXPECT_NEAR(pk.norm_rho2, 36.0, 1e-12);
        // Ř = 6 g, ρ = 3 g: in an orthonormal frame Ř = 6δ.
        const auto fr = orthonormal_frame(pk.g, pk.signature);
        EXPECT_LT(max_abs(transform_all(pk.r_check, fr.frame) - 6.0 * identity_matrix(4)), 1e-11);
        EXPECT_LT(max_abs(pk.ricci - 3.0 * pk.g), 1e-12);
        // R_ijkl = g_il g_jk − g_ik g_jl.
        for (int i = 0; i < 4; ++i)
            for (int j = 0; j < 4; ++j)
                for (int l = 0; l < 4; ++l)
                    for (int m = 0; m < 4; ++m)
                        EXPECT_NEAR(pk.riemann(i, j, l, m), pk.g(i, m) * pk.g(j, l) - pk.g(i, l) * pk.g(j, m), 1e-12);
    }
}

TEST(CurvaturePack, RadiusScaling)
{
    const auto e = catalog_metric("sphere4", {{{"r", 2.0}}, ""});
    const auto pk = curvature_pack(e.metric, {1.0, 1.2, 1.4, 0.3});
    EXPECT_NEAR(pk.tau, 3.0, 1e-12);
    EXPECT_NEAR(pk.norm_R2, 24.0 / 16.0, 1e-12);
}

TEST(CurvaturePack, SurfaceProductInProductFrame)
{
    const auto e = catalog_metric("s2xh2", {{{"c", 1.0}}, ""});
    const auto pk = curvature_pack(e.metric, {1.1, 0.5, 0.8, 2.0});
    const auto fc = frame_curvature(pk);
    EXPECT_LT(max_abs(fc.ricci - ts::diagonal({1, 1, -1, -1})), 1e-12);
    EXPECT_NEAR(pk.tau, 0.0, 1e-12);
    EXPECT_NEAR(pk.norm_R2, 8.0, 1e-12);
    EXPECT_NEAR(pk.norm_rho2, 4.0, 1e-12);
}

TEST(CovariantDerivative, ConstantFieldOnFlatMetric)
{
    const auto e = catalog_metric("flat4");
    const Tensor c = ts::diagonal({1.0, 2.0, 3.0, 4.0});
    const auto h = TensorFieldJet::covariant(4, 2, [c](const auto& x, auto& out) {
        using T = std::decay_t<decltype(x[0])>;
        for (std::size_t f = 0; f < out.size(); ++f) out.at_flat(f) = T(c.at_flat(f));
    });
    EXPECT_EQ(max_abs(covariant_derivative(h, e.metric, {1, 1, 1, 1}, 1)), 0.0);
    EXPECT_EQ(max_abs(covariant_derivative(h, e.metric, {1, 1, 1, 1}, 2)), 0.0);
}

TEST(CovariantDerivative, EuclideanLaplacian)
{
    const auto e = catalog_metric("flat4");
    const auto f = TensorFieldJet::covariant(4, 0, [](const auto& x, auto& out) { out.at_flat(0) = x[0] * x[0]; });
    EXPECT_DOUBLE_EQ(laplacian(f, e.metric, {0.3, 1.0, 2.0, 3.0}), 2.0);
}

TEST(CovariantDerivative, SphereLaplacianOfHeightFunction)
{
    // z = cos x⁰ restricted to the unit S⁴ is a first eigenfunction: Δz = −4z.
    const auto e = catalog_metric("sphere4");
    const auto f = TensorFieldJet::covariant(4, 0, [](const auto& x, auto& out) {
        using std::cos;
        out.at_flat(0) = cos(x[0]);
    });
    const Point p{0.9, 1.3, 2.0, 0.2};
    EXPECT_NEAR(laplacian(f, e.metric, p), -4.0 * std::cos(p[0]), 1e-12);
}

TEST(CovariantDerivative, MetricIsParallel)
{
    for (const std::string name : {"sphere4", "polynomial_random", "conformal_flat", "minkowski_perturbed", "s2xh2"}) {
        const auto e = catalog_metric(name);
        const auto g = metric_as_field(e.metric);
        std::mt19937_64 rng(4);
        for (int k = 0; k < 10; ++k) {
            const Point p = e.metric.domain().sample(rng);
            double dg = 0.0;
            const auto j = e.metric.jet<1>(p);
            for (std::size_t f = 0; f < j.size(); ++f)
                for (int a = 0; a < 4; ++a) dg = std::max(dg, std::abs(j.at_flat(f).gradient(a)));
            EXPECT_LE(max_abs(covariant_derivative(g, e.metric, p, 1)), 1e-10 * std::max(dg, 1.0)) << name;
        }
    }
}

TEST(CovariantDerivative, RejectsBadRepeat)
{
    const auto e = catalog_metric("flat4");
    const auto f = TensorFieldJet::covariant(4, 0, [](const auto& x, auto& out) { out.at_flat(0) = x[0]; });
    EXPECT_THROW(covariant_derivative(f, e.metric, {0, 0, 0, 0}, 3), OrderError);
}

TEST(Symmetries, FlatAndSphere)
{
    const auto flat = check_riemann_symmetries(curvature_pack(catalog_metric("flat4").metric, {1, 2, 3, 4}));
    EXPECT_EQ(flat.worst(), 0.0);
    EXPECT_TRUE(flat.pass);
    const auto sph = check_riemann_symmetries(curvature_pack(catalog_metric("sphere4").metric, {1.0, 2.0, 1.5, 3.0}));
    EXPECT_LE(sph.worst(), 1e-12);
    EXPECT_TRUE(sph.pass);
}

TEST(Symmetries, RandomPolynomialMetric)
{
    for (int seed = 1; seed <= 5; ++seed) {
        const auto e = catalog_metric("polynomial_random", {{{"seed", double(seed)}}, ""});
        std::mt19937_64 rng(seed);
        for (int k = 0; k < 20; ++k) {
            const auto r = check_riemann_symmetries(curvature_pack(e.metric, e.metric.domain().sample(rng)));
            EXPECT_LE(r.worst(), 1e-10 * r.scale);
            EXPECT_TRUE(r.pass);
        }
    }
}

TEST(Symmetries, DetectsBrokenTensor)
{
    auto pk = curvature_pack(catalog_metric("sphere4").metric, {1.0, 2.0, 1.5, 3.0});
    pk.riemann(0, 1, 0, 1) += 1e-3;
    EXPECT_FALSE(check_riemann_symmetries(pk).pass);
}

TEST(Contractions, TracesMatchScalars)
{
    for (const std::string name : {"polynomial_random", "conformal_flat", "minkowski_perturbed", "torus_perturbed"}) {
        const auto e = catalog_metric(name);
        std::mt19937_64 rng(9);
        for (int k = 0; k < 20; ++k) {
            const auto pk = curvature_pack(e.metric, e.metric.domain().sample(rng));
            double tr_rho = 0, tr_rcheck = 0, tr_rhocheck = 0;
            for (int i = 0; i < 4; ++i)
                for (int j = 0; j < 4; ++j) {
                    tr_rho += pk.g_inv(i, j) * pk.ricci(i, j);
                    tr_rcheck += pk.g_inv(i, j) * pk.r_check(i, j);
                    tr_rhocheck += pk.g_inv(i, j) * pk.rho_check(i, j);
                }
            EXPECT_NEAR(tr_rho, pk.tau, 1e-12 * std::max(1.0, std::abs(pk.tau))) << name;
            EXPECT_NEAR(tr_rcheck, pk.norm_R2, 1e-12 * std::max(1.0, std::abs(pk.norm_R2))) << name;
            EXPECT_NEAR(tr_rhocheck, pk.norm_rho2, 1e-12 * std::max(1.0, std::abs(pk.norm_rho2))) << name;
        }
    }
}

TEST(Contractions, TwoDimensionalMetricsAreEinstein)
{
    for (const std::string name : {"polynomial_random", "torus_perturbed", "conformal_flat"}) {
        const auto e = catalog_metric(name, {{{"dim", 2.0}}, ""});
        std::mt19937_64 rng(6);
        for (int k = 0; k < 20; ++k) {
            const auto pk = curvature_pack(e.metric, e.metric.domain().sample(rng));
            EXPECT_TRUE(einstein_residual(pk).pass) << name;
        }
    }
}

TEST(Contractions, LorentzianSymmetriesHold)
{
    for (int seed = 1; seed <= 3; ++seed) {
        const auto e = catalog_metric("minkowski_perturbed", {{{"seed", double(seed)}}, ""});
        std::mt19937_64 rng(seed);
        for (int k = 0; k < 20; ++k) {
            const auto pk = curvature_pack(e.metric, e.metric.domain().sample(rng));
            EXPECT_TRUE(check_riemann_symmetries(pk).pass);
        }
    }
}

TEST(InverseJet, MatchesFiniteDifferences)
{
    const auto e = catalog_metric("polynomial_random", {{{"seed", 2.0}, {"eps", 0.2}}, ""});
    const Point p{0.3, -0.4, 0.5, 0.1};
    const auto gi = inverse_jet<2>(e.metric.jet<2>(p));
    const double h = 1e-4;
    for (int a = 0; a < 4; ++a) {
        Point pp = p, pm = p;
        pp[a] += h;
        pm[a] -= h;
        const Tensor fd = (1.0 / (2 * h)) * (inverse(e.metric.at(pp)) - inverse(e.metric.at(pm)));
        for (int i = 0; i < 4; ++i)
            for (int j = 0; j < 4; ++j) EXPECT_NEAR(gi(i, j).gradient(a), fd(i, j), 1e-7);
    }
    const Tensor g0 = inverse(e.metric.at(p));
    EXPECT_LT(max_abs(values(gi) - g0), 1e-14);
}
