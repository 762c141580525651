#include <gtest/gtest.h>

#include <cmath>
#include <cstdlib>
#include <numbers>

#include "curvid/catalog.hpp"
#include "curvid/quadrature.hpp"

using namespace curvid;

namespace {

constexpr double pi = std::numbers::pi;

double one(const MetricField&, const Point&) { return 1.0; }

class ThreadEnv {
public:
    explicit ThreadEnv(const char* v)
    {
        if (const char* old = std::getenv("CURVID_THREADS")) saved_ = old;
        ::setenv("CURVID_THREADS", v, 1);
    }
    ~ThreadEnv()
    {
        if (saved_.empty())
            ::unsetenv("CURVID_THREADS");
        else
            ::setenv("CURVID_THREADS", saved_.c_str(), 1);
    }

private:
    std::string saved_;
};

}  // namespace

TEST(GaussLegendre, IntegratesPolynomialsExactly)
{
    for (int n : {1, 2, 3, 5, 8, 13, 24}) {
        const auto r = gauss_legendre(n, -0.5, 2.0);
        double wsum = 0.0;
        for (double w : r.weights) wsum += w;
        EXPECT_NEAR(wsum, 2.5, 1e-14) << n;
        for (int deg = 0; deg <= 2 * n - 1; ++deg) {
            double s = 0.0;
            for (int i = 0; i < n; ++i) s += r.weights[i] * std::pow(r.nodes[i], deg);
            const double exact = (std::pow(2.0, deg + 1) - std::pow(-0.5, deg + 1)) / (deg + 1);
            EXPECT_NEAR(s, exact, 1e-13 * std::max(1.0, std::abs(exact))) << n << " " << deg;
        }
        for (int i = 0; i + 1 < n; ++i) EXPECT_LT(r.nodes[i], r.nodes[i + 1]);
    }
    EXPECT_THROW(gauss_legendre(0, 0, 1), ConfigError);
}

TEST(Trapezoid, IntegratesTrigonometricPolynomialsExactly)
{
    const auto r = trapezoid(8, 0.0, 2 * pi);
    EXPECT_TRUE(r.periodic);
    for (int k = 0; k < 8; ++k) {
        double c = 0.0, s = 0.0;
        for (int i = 0; i < 8; ++i) {
            c += r.weights[i] * std::cos(k * r.nodes[i]);
            s += r.weights[i] * std::sin(k * r.nodes[i]);
        }
        EXPECT_NEAR(c, k == 0 ? 2 * pi : 0.0, 1e-13) << k;
        EXPECT_NEAR(s, 0.0, 1e-13) << k;
    }
}

TEST(Volume, FlatTorus)
{
    const auto e = catalog_metric("flat4");
    EXPECT_NEAR(integrate_level(make_atlas(e), one, 4), std::pow(2 * pi, 4), 1e-9);
}

TEST(Volume, RoundSphere)
{
    for (double r : {1.0, 1.7}) {
        const auto e = catalog_metric("sphere4", {{{"r", r}}, ""});
        const auto q = integrate_scalar(make_atlas(e), one, {12, 96, 1e-10, 0.0});
        EXPECT_NEAR(q.value, *e.reference.volume, 1e-6 * *e.reference.volume) << r;
        EXPECT_EQ(q.history.size(), q.levels.size());
        EXPECT_EQ(q.levels.front(), 6);
    }
}

TEST(Volume, CosineSquaredAveragesToHalf)
{
    const auto e = catalog_metric("flat4");
    const double v = integrate_level(make_atlas(e), [](const MetricField&, const Point& p) {
        return std::cos(p[0] + 2 * p[3]) * std::cos(p[0] + 2 * p[3]);
    }, 8);
    EXPECT_NEAR(v / std::pow(2 * pi, 4), 0.5, 1e-13);
}

TEST(Euler, FlatTorusIsZero)
{
    const auto r = euler_characteristic(catalog_metric("flat4"), {4, 16});
    EXPECT_EQ(r.chi, 0.0);
    EXPECT_EQ(r.quadrature.nodes_per_axis, 4);
}

TEST(Euler, SurfaceProductAndSphereAtSmallGrids)
{
    const auto pp = euler_characteristic(catalog_metric("s2xs2", {{{"c1", 0.5}, {"c2", 2.0}}, ""}), {8, 64});
    EXPECT_NEAR(pp.chi, 4.0, 1e-3);
    const auto sp = euler_characteristic(catalog_metric("sphere4", {{{"r", 2.0}}, ""}), {8, 64});
    EXPECT_NEAR(sp.chi, 2.0, 1e-3);
}

TEST(Euler, ResultDoesNotDependOnThreadCount)
{
    const auto e = catalog_metric("torus_perturbed", {{{"seed", 2.0}}, ""});
    double a, b, c;
    {
        ThreadEnv env("1");
        EXPECT_EQ(worker_count(), 1u);
        a = integrate_level(make_atlas(e), [](const MetricField& m, const Point& p) {
            return gauss_bonnet_integrand(curvature_pack(m, p));
        }, 6);
    }
    {
        ThreadEnv env("3");
        EXPECT_EQ(worker_count(), 3u);
        b = integrate_level(make_atlas(e), [](const MetricField& m, const Point& p) {
            return gauss_bonnet_integrand(curvature_pack(m, p));
        }, 6);
    }
    {
        ThreadEnv env("7");
        c = integrate_level(make_atlas(e), [](const MetricField& m, const Point& p) {
            return gauss_bonnet_integrand(curvature_pack(m, p));
        }, 6);
    }
    EXPECT_EQ(a, b);
    EXPECT_EQ(a, c);
}

TEST(Euler, WorkerErrorsPropagate)
{
    ThreadEnv env("2");
    const auto e = catalog_metric("flat4");
    EXPECT_THROW(integrate_level(make_atlas(e), [](const MetricField&, const Point& p) -> double {
        if (p[0] > 3.0) throw DomainError("boom");
        return 1.0;
    }, 4), DomainError);
}

TEST(Euler, Errors)
{
    EXPECT_THROW(euler_characteristic(catalog_metric("hyperbolic4")), DomainError);
    EXPECT_THROW(euler_characteristic(catalog_metric("polynomial_random")), DomainError);
    Atlas lorentz{{{catalog_metric("minkowski_perturbed").metric, {}}}, true};
    EXPECT_THROW(euler_characteristic(lorentz), DomainError);
    Atlas torus3{{{catalog_metric("torus_perturbed", {{{"dim", 3.0}}, ""}).metric, {}}}, true};
    EXPECT_THROW(euler_characteristic(torus3), DimensionError);
    EXPECT_THROW(integrate_scalar(Atlas{}, one), ConfigError);
    EXPECT_THROW(integrate_scalar(make_atlas(catalog_metric("flat4")), one, {8, 4}), ConfigError);
}

TEST(Euler, BudgetExceeded)
{
    const auto e = catalog_metric("flat4");
    const ScalarField rough = [](const MetricField&, const Point& p) { return p[0] * p[0]; };
    EXPECT_THROW(integrate_scalar(make_atlas(e), rough, {4, 8, 1e-12, 0.0}), QuadratureError);
}
