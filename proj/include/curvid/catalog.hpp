#pragma once

/// \file
/// Closed-form metrics used throughout the verification suites.
///
/// Every entry is a single coordinate chart. Coordinate-singular loci (poles of
/// spherical charts) are excluded by shrinking the chart box by kPoleMargin.

#include <cmath>
#include <cstdint>
#include <map>
#include <numbers>
#include <optional>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "curvid/errors.hpp"
#include "curvid/metric.hpp"

namespace curvid {

inline constexpr double kPoleMargin = 1e-3;

struct CatalogParams {
    std::map<std::string, double> values;
    std::string inner;  // inner 3D entry for product_3d_x_line

    double get(const std::string& key, double fallback) const
    {
        auto it = values.find(key);
        return it == values.end() ? fallback : it->second;
    }
    bool has(const std::string& key) const { return values.count(key) != 0; }
};

/// Known closed-form values; constant over the chart when present.
struct ReferenceValues {
    std::optional<double> tau;
    std::optional<double> norm_R2;
    std::optional<double> norm_rho2;
    std::optional<double> euler;
    std::optional<double> volume;
};

struct CatalogEntry {
    std::string name;
    CatalogParams params;
    MetricField metric;
    ReferenceValues reference;
    bool closed = false;    // compact chart covering the manifold up to measure zero
    bool einstein = false;  // rho = (tau / n) g everywhere
    bool weakly_einstein = false;  // Ř = (|R|² / n) g everywhere
};

namespace detail {

/// Symmetric matrix field sum_b coeff[ij][b] * basis_b(x), where the basis is a
/// fixed list of scalar functions. Coefficients of each component have unit
/// l1-norm so every component is bounded by 1 wherever the basis is.
struct BasisMatrixField {
    enum class Kind { trig, poly };
    Kind kind = Kind::trig;
    int dim = 4;
    int basis_size = 0;
    std::vector<std::array<int, 4>> poly_exps;
    std::vector<double> coeffs;  // [component (i<=j)][basis]
    std::vector<double> base;    // diagonal offset per axis (+1, -1 or 0)
    double eps = 0.0;

    template <class T>
    std::vector<T> basis(const std::array<T, 4>& x) const
    {
        std::vector<T> b;
        b.reserve(basis_size);
        if (kind == Kind::trig) {
            for (int k = 0; k < dim; ++k) {
                b.push_back(cos(x[k]));
                b.push_back(sin(x[k]));
            }
            for (int k = 0; k < dim; ++k)
                for (int l = k + 1; l < dim; ++l) {
                    const T s = x[k] + x[l];
                    const T d = x[k] - x[l];
                    b.push_back(cos(s));
                    b.push_back(sin(s));
                    b.push_back(cos(d));
                    b.push_back(sin(d));
                }
        } else {
            std::array<std::array<T, 4>, 4> pw;
            for (int k = 0; k < dim; ++k) {
                pw[k][0] = T(1.0);
                for (int e = 1; e < 4; ++e) pw[k][e] = pw[k][e - 1] * x[k];
            }
            for (const auto& e : poly_exps) {
                T m(1.0);
                for (int k = 0; k < dim; ++k)
                    if (e[k] > 0) m = m * pw[k][e[k]];
                b.push_back(m);
            }
        }
        return b;
    }

    template <class T>
    void operator()(const std::array<T, 4>& x, TensorArray<T>& out) const
    {
        const auto b = basis(x);
        int comp = 0;
        for (int i = 0; i < dim; ++i)
            for (int j = i; j < dim; ++j, ++comp) {
                T s(i == j ? base[i] : 0.0);
                const double* c = &coeffs[static_cast<std::size_t>(comp) * basis_size];
                for (int n = 0; n < basis_size; ++n)
                    if (c[n] != 0.0) s.add_scaled(b[n], eps * c[n]);
                out(i, j) = s;
                out(j, i) = s;
            }
    }
};

inline BasisMatrixField make_basis_field(BasisMatrixField::Kind kind, int dim, std::uint64_t seed, double eps,
                                         std::vector<double> base)
{
    BasisMatrixField f;
    f.kind = kind;
    f.dim = dim;
    f.eps = eps;
    f.base = std::move(base);
    if (kind == BasisMatrixField::Kind::trig) {
        f.basis_size = 2 * dim + 4 * (dim * (dim - 1) / 2);
    } else {
        for (int total = 0; total <= 3; ++total)
            for (int a = 0; a <= 3; ++a)
                for (int b = 0; b <= 3; ++b)
                    for (int c = 0; c <= 3; ++c)
                        for (int d = 0; d <= 3; ++d) {
                            const std::array<int, 4> e{a, b, c, d};
                            bool ok = a + b + c + d == total;
                            for (int k = dim; k < 4; ++k) ok = ok && e[k] == 0;
                            if (ok) f.poly_exps.push_back(e);
                        }
        f.basis_size = static_cast<int>(f.poly_exps.size());
    }
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    const int comps = dim * (dim + 1) / 2;
    f.coeffs.resize(static_cast<std::size_t>(comps) * f.basis_size);
    for (int c = 0; c < comps; ++c) {
        double l1 = 0.0;
        for (int n = 0; n < f.basis_size; ++n) {
            const double v = u(rng);
            f.coeffs[static_cast<std::size_t>(c) * f.basis_size + n] = v;
            l1 += std::abs(v);
        }
        for (int n = 0; n < f.basis_size; ++n) f.coeffs[static_cast<std::size_t>(c) * f.basis_size + n] /= l1;
    }
    return f;
}

struct DiagonalSphere4 {
    double r2;
    template <class T>
    void operator()(const std::array<T, 4>& x, TensorArray<T>& g) const
    {
        const T s1 = sin(x[0]), s2 = sin(x[1]), s3 = sin(x[2]);
        const T a = s1 * s1;
        const T b = a * (s2 * s2);
        g(0, 0) = T(r2);
        g(1, 1) = r2 * a;
        g(2, 2) = r2 * b;
        g(3, 3) = r2 * (b * (s3 * s3));
    }
};

struct UpperHalfSpace4 {
    double c;
    template <class T>
    void operator()(const std::array<T, 4>& x, TensorArray<T>& g) const
    {
        const T f = reciprocal(c * (x[3] * x[3]));
        for (int i = 0; i < 4; ++i) g(i, i) = f;
    }
};

// Product of two constant-curvature surfaces in geodesic polar form:
// (1/|c|)(dr^2 + sn_c(r)^2 dphi^2) with sn = sin for c > 0 and sinh for c < 0.
struct SurfaceProduct {
    double c1, c2;
    template <class T>
    void operator()(const std::array<T, 4>& x, TensorArray<T>& g) const
    {
        auto block = [&](int off, double c) {
            const T s = c > 0 ? sin(x[off]) : sinh(x[off]);
            const double k = 1.0 / std::abs(c);
            g(off, off) = T(k);
            g(off + 1, off + 1) = k * (s * s);
        };
        block(0, c1);
        block(2, c2);
    }
};

struct ConstantCurvature3 {
    double c;
    template <class T>
    void operator()(const std::array<T, 4>& x, TensorArray<T>& g) const
    {
        const T q = x[0] * x[0] + x[1] * x[1] + x[2] * x[2];
        const T d = 1.0 + (0.25 * c) * q;
        const T f = reciprocal(d * d);
        for (int i = 0; i < 3; ++i) g(i, i) = f;
    }
};

struct ConformalFlat {
    int dim;
    double amp;
    template <class T>
    void operator()(const std::array<T, 4>& x, TensorArray<T>& g) const
    {
        T phi(0.0);
        for (int k = 0; k < dim; ++k) phi += sin(x[k] + 0.5 * k) * cos(x[(k + 1) % dim] - 0.3 * k);
        const T f = exp(2.0 * amp * phi);
        for (int i = 0; i < dim; ++i) g(i, i) = f;
    }
};

struct FlatMetric {
    std::vector<int> diag;
    template <class T>
    void operator()(const std::array<T, 4>&, TensorArray<T>& g) const
    {
        for (std::size_t i = 0; i < diag.size(); ++i) g(i, i) = T(static_cast<double>(diag[i]));
    }
};

struct LineProduct {
    JetField inner;
    template <class T>
    void operator()(const std::array<T, 4>& x, TensorArray<T>& g) const
    {
        const auto h = inner.evaluate<T::order>(x);
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j) g(i, j) = h(i, j);
        g(3, 3) = T(1.0);
    }
};

inline void require_keys(const std::string& name, const CatalogParams& p, std::set<std::string> allowed)
{
    for (const auto& [k, v] : p.values)
        if (!allowed.count(k)) throw ConfigError("catalog entry '" + name + "' does not take parameter '" + k + "'");
}

inline std::uint64_t seed_param(const CatalogParams& p, double fallback)
{
    const double s = p.get("seed", fallback);
    if (s < 0 || s != std::floor(s)) throw ConfigError("seed must be a non-negative integer");
    return static_cast<std::uint64_t>(s);
}

inline int dim_param(const std::string& name, const CatalogParams& p, int fallback, int lo, int hi)
{
    const double d = p.get("dim", fallback);
    if (d != std::floor(d) || d < lo || d > hi)
        throw ConfigError("catalog entry '" + name + "' requires dim in [" + std::to_string(lo) + ", " +
                          std::to_string(hi) + "]");
    return static_cast<int>(d);
}

inline ChartDomain box(int dim, double lo, double hi)
{
    ChartDomain d;
    d.dim = dim;
    for (int i = 0; i < dim; ++i) {
        d.lo[i] = lo;
        d.hi[i] = hi;
    }
    return d;
}

inline ChartDomain torus_domain(int dim)
{
    ChartDomain d = box(dim, 0.0, 2.0 * std::numbers::pi);
    for (int i = 0; i < dim; ++i) d.periodic[i] = true;
    return d;
}

/// Sample the metric at 100 points and reject it if the declared signature fails anywhere.
inline void certify_by_sampling(const MetricField& m, std::uint64_t seed = 0x5eed)
{
    std::mt19937_64 rng(seed);
    for (int n = 0; n < 100; ++n) check_signature(m, m.domain().sample(rng));
}

}  // namespace detail

inline std::vector<std::string> catalog_names()
{
    return {"flat4",          "torus_perturbed",   "sphere4",          "hyperbolic4",
            "s2xs2",          "s2xh2",             "product_3d_x_line", "constcurv3",
            "polynomial_random", "conformal_flat", "minkowski_perturbed"};
}

inline CatalogEntry catalog_metric(const std::string& name, const CatalogParams& params = {})
{
    using namespace detail;
    constexpr double pi = std::numbers::pi;
    CatalogEntry e;
    e.name = name;
    e.params = params;
    auto riemannian = [](int dim) { return Signature(dim, 1); };

    if (name == "flat4") {
        require_keys(name, params, {});
        e.metric = MetricField(name, torus_domain(4), riemannian(4), JetField(4, 2, FlatMetric{{1, 1, 1, 1}}));
        e.reference = {0.0, 0.0, 0.0, 0.0, std::pow(2.0 * pi, 4)};
        e.closed = true;
        e.einstein = true;
    } else if (name == "torus_perturbed") {
        require_keys(name, params, {"seed", "eps", "dim"});
        const int dim = dim_param(name, params, 4, 2, 4);
        const double eps = params.get("eps", 0.05);
        if (!(eps >= 0.0 && eps < 1.0 / dim))
            throw ConfigError("torus_perturbed: eps must lie in [0, 1/dim) to keep the metric positive definite");
        auto f = make_basis_field(BasisMatrixField::Kind::trig, dim, seed_param(params, 1), eps,
                                  std::vector<double>(dim, 1.0));
        e.metric = MetricField(name, torus_domain(dim), riemannian(dim), JetField(dim, 2, std::move(f)));
        if (dim == 4) e.reference.euler = 0.0;
        e.closed = true;
    } else if (name == "sphere4") {
        require_keys(name, params, {"r"});
        const double r = params.get("r", 1.0);
        if (!(r > 0.0)) throw ConfigError("sphere4: radius r must be positive");
        ChartDomain d = box(4, kPoleMargin, pi - kPoleMargin);
        d.lo[3] = 0.0;
        d.hi[3] = 2.0 * pi;
        d.periodic[3] = true;
        e.metric = MetricField(name, d, riemannian(4), JetField(4, 2, DiagonalSphere4{r * r}));
        const double c = 1.0 / (r * r);
        e.reference = {12.0 * c, 24.0 * c * c, 36.0 * c * c, 2.0, 8.0 * pi * pi / 3.0 * std::pow(r, 4)};
        e.closed = true;
        e.einstein = true;
    } else if (name == "hyperbolic4") {
        require_keys(name, params, {"c"});
        const double c = params.get("c", 1.0);
        if (!(c > 0.0)) throw ConfigError("hyperbolic4: c must be positive (sectional curvature is -c)");
        ChartDomain d = box(4, -1.0, 1.0);
        d.lo[3] = 0.5;
        d.hi[3] = 2.0;
        e.metric = MetricField(name, d, riemannian(4), JetField(4, 2, UpperHalfSpace4{c}));
        e.reference = {-12.0 * c, 24.0 * c * c, 36.0 * c * c, std::nullopt, std::nullopt};
        e.einstein = true;
    } else if (name == "s2xs2") {
        require_keys(name, params, {"c1", "c2"});
        const double c1 = params.get("c1", 1.0), c2 = params.get("c2", 1.0);
        if (!(c1 > 0.0 && c2 > 0.0)) throw ConfigError("s2xs2: curvatures c1, c2 must be positive");
        ChartDomain d = box(4, kPoleMargin, pi - kPoleMargin);
        for (int a : {1, 3}) {
            d.lo[a] = 0.0;
            d.hi[a] = 2.0 * pi;
            d.periodic[a] = true;
        }
        e.metric = MetricField(name, d, riemannian(4), JetField(4, 2, SurfaceProduct{c1, c2}));
        e.reference = {2.0 * (c1 + c2), 4.0 * (c1 * c1 + c2 * c2), 2.0 * (c1 * c1 + c2 * c2), 4.0,
                       16.0 * pi * pi / (c1 * c2)};
        e.closed = true;
        e.einstein = c1 == c2;
    } else if (name == "s2xh2") {
        require_keys(name, params, {"c"});
        const double c = params.get("c", 1.0);
        if (!(c > 0.0)) throw ConfigError("s2xh2: c must be positive");
        ChartDomain d = box(4, kPoleMargin, pi - kPoleMargin);
        d.hi[2] = 2.0;
        for (int a : {1, 3}) {
            d.lo[a] = 0.0;
            d.hi[a] = 2.0 * pi;
            d.periodic[a] = true;
        }
        e.metric = MetricField(name, d, riemannian(4), JetField(4, 2, SurfaceProduct{c, -c}));
        e.reference = {0.0, 8.0 * c * c, 4.0 * c * c, std::nullopt, std::nullopt};
        e.weakly_einstein = true;
    } else if (name == "constcurv3") {
        require_keys(name, params, {"c"});
        const double c = params.get("c", 1.0);
        if (!(c > -4.0 / 3.0)) throw ConfigError("constcurv3: c must exceed -4/3 on the unit chart box");
        e.metric = MetricField(name, box(3, -1.0, 1.0), riemannian(3), JetField(3, 2, ConstantCurvature3{c}));
        e.reference = {6.0 * c, 12.0 * c * c, 12.0 * c * c, std::nullopt, std::nullopt};
        e.einstein = true;
    } else if (name == "polynomial_random" || name == "minkowski_perturbed") {
        const bool lorentz = name == "minkowski_perturbed";
        require_keys(name, params, lorentz ? std::set<std::string>{"seed", "eps"}
                                           : std::set<std::string>{"seed", "eps", "dim"});
        const int dim = lorentz ? 4 : dim_param(name, params, 4, 2, 4);
        const double eps = params.get("eps", 0.05);
        if (!(eps >= 0.0 && eps < 1.0 / dim))
            throw ConfigError(name + ": eps must lie in [0, 1/dim) to keep the metric non-degenerate");
        std::vector<double> base(dim, 1.0);
        Signature sig(dim, 1);
        if (lorentz) {
            base[0] = -1.0;
            sig[0] = -1;
        }
        auto f = make_basis_field(BasisMatrixField::Kind::poly, dim, seed_param(params, 1), eps, base);
        e.metric = MetricField(name, box(dim, -1.0, 1.0), sig, JetField(dim, 2, std::move(f)));
    } else if (name == "conformal_flat") {
        require_keys(name, params, {"amp", "dim"});
        const int dim = dim_param(name, params, 4, 2, 4);
        const double amp = params.get("amp", 0.3);
        if (!(std::abs(amp) <= 2.0)) throw ConfigError("conformal_flat: |amp| must not exceed 2");
        e.metric = MetricField(name, box(dim, -1.0, 1.0), riemannian(dim), JetField(dim, 2, ConformalFlat{dim, amp}));
    } else if (name == "product_3d_x_line") {
        const std::string inner_name = params.inner.empty() ? "constcurv3" : params.inner;
        if (inner_name == name) throw ConfigError("product_3d_x_line cannot wrap itself");
        CatalogParams inner_params = params;
        inner_params.inner.clear();
        if (inner_name == "polynomial_random" || inner_name == "conformal_flat") inner_params.values["dim"] = 3;
        const CatalogEntry inner = catalog_metric(inner_name, inner_params);
        if (inner.metric.dim() != 3 || !inner.metric.riemannian())
            throw ConfigError("product_3d_x_line requires a Riemannian 3-dimensional inner entry");
        ChartDomain d = inner.metric.domain();
        d.dim = 4;
        d.lo[3] = -1.0;
        d.hi[3] = 1.0;
        d.periodic[3] = false;
        e.metric = MetricField(name + "(" + inner_name + ")", d, riemannian(4),
                               JetField(4, 2, LineProduct{inner.metric.components()}));
        e.reference.tau = inner.reference.tau;
        e.reference.norm_R2 = inner.reference.norm_R2;
        e.reference.norm_rho2 = inner.reference.norm_rho2;
        e.params.inner = inner_name;
    } else {
        throw ConfigError("unknown catalog metric '" + name + "'");
    }
    e.weakly_einstein = e.weakly_einstein || (e.einstein && e.metric.dim() >= 3);
    detail::certify_by_sampling(e.metric);
    return e;
}

}  // namespace curvid
