#pragma once

/// \file
/// Product quadrature on single-chart compact models and Euler numbers from
/// the Gauss–Bonnet integrand.

#include <atomic>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <functional>
#include <mutex>
#include <numbers>
#include <string>
#include <thread>
#include <vector>

#include "curvid/catalog.hpp"
#include "curvid/curvature.hpp"
#include "curvid/errors.hpp"
#include "curvid/identities.hpp"

namespace curvid {

struct AxisRule {
    std::vector<double> nodes;
    std::vector<double> weights;
    bool periodic = false;
};

/// n-point Gauss–Legendre rule on [lo, hi] (Newton iteration on P_n).
inline AxisRule gauss_legendre(int n, double lo, double hi)
{
    if (n < 1) throw ConfigError("quadrature needs at least one node per axis");
    AxisRule r;
    r.nodes.resize(n);
    r.weights.resize(n);
    const double mid = 0.5 * (lo + hi), half = 0.5 * (hi - lo);
    for (int i = 0; i < (n + 1) / 2; ++i) {
        double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
        double dp = 0.0;
        for (int it = 0; it < 100; ++it) {
            double p0 = 1.0, p1 = x;
            for (int k = 2; k <= n; ++k) {
                const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
                p0 = p1;
                p1 = p2;
            }
            if (n == 1) p0 = 1.0;
            dp = n * (x * p1 - p0) / (x * x - 1.0);
            const double dx = p1 / dp;
            x -= dx;
            if (std::abs(dx) < 1e-16) break;
        }
        const double w = 2.0 / ((1.0 - x * x) * dp * dp);
        r.nodes[i] = mid - half * x;
        r.nodes[n - 1 - i] = mid + half * x;
        r.weights[i] = r.weights[n - 1 - i] = half * w;
    }
    return r;
}

/// n equally spaced nodes with equal weights on the period [lo, hi).
inline AxisRule trapezoid(int n, double lo, double hi)
{
    if (n < 1) throw ConfigError("quadrature needs at least one node per axis");
    AxisRule r;
    r.periodic = true;
    const double h = (hi - lo) / n;
    for (int i = 0; i < n; ++i) {
        r.nodes.push_back(lo + (i + 0.5) * h);
        r.weights.push_back(h);
    }
    return r;
}

/// Tensor-product rule over a chart box.
struct ChartGrid {
    int dim = 0;
    std::vector<AxisRule> axes;

    std::size_t size() const
    {
        std::size_t n = 1;
        for (const auto& a : axes) n *= a.nodes.size();
        return n;
    }
    std::size_t slab_size() const { return axes.empty() ? 0 : size() / axes[0].nodes.size(); }

    /// Node `flat` (first axis slowest) and its product weight.
    Point node(std::size_t flat, double& weight) const
    {
        Point p{};
        weight = 1.0;
        for (int a = dim - 1; a >= 0; --a) {
            const std::size_t n = axes[a].nodes.size();
            const std::size_t i = flat % n;
            flat /= n;
            p[a] = axes[a].nodes[i];
            weight *= axes[a].weights[i];
        }
        return p;
    }
    double total_weight() const
    {
        double w = 1.0;
        for (const auto& a : axes) {
            double s = 0.0;
            for (double v : a.weights) s += v;
            w *= s;
        }
        return w;
    }
};

inline ChartGrid make_grid(const ChartDomain& d, int nodes_per_axis)
{
    ChartGrid g;
    g.dim = d.dim;
    for (int a = 0; a < d.dim; ++a)
        g.axes.push_back(d.periodic[a] ? trapezoid(nodes_per_axis, d.lo[a], d.hi[a])
                                       : gauss_legendre(nodes_per_axis, d.lo[a], d.hi[a]));
    return g;
}

/// A list of charts with coverage weights; the catalog needs one chart each.
struct Atlas {
    struct Chart {
        MetricField metric;
        std::function<double(const Point&)> coverage;  // empty means 1
    };
    std::vector<Chart> charts;
    bool closed = false;
};

inline Atlas make_atlas(const CatalogEntry& entry) { return Atlas{{{entry.metric, {}}}, entry.closed}; }

/// Worker count: CURVID_THREADS when set, otherwise the hardware concurrency.
inline unsigned worker_count()
{
    if (const char* env = std::getenv("CURVID_THREADS")) {
        const long v = std::strtol(env, nullptr, 10);
        if (v > 0) return static_cast<unsigned>(v);
    }
    return std::max(1u, std::thread::hardware_concurrency());
}

/// Σ over grid nodes of f(point, weight) -> std::array<double, N>. Each
/// first-axis slab is summed in node order and slabs are combined in order,
/// so the result does not depend on the number of workers.
template <std::size_t N, class F>
std::array<double, N> reduce_grid(const ChartGrid& grid, F&& f)
{
    const std::size_t slabs = grid.axes.empty() ? 0 : grid.axes[0].nodes.size();
    const std::size_t per = grid.slab_size();
    std::vector<std::array<double, N>> partial(slabs);
    std::atomic<std::size_t> next{0};
    std::exception_ptr error;
    std::mutex error_mutex;
    auto work = [&] {
        for (;;) {
            const std::size_t s = next.fetch_add(1);
            if (s >= slabs) return;
            try {
                std::array<double, N> acc{};
                for (std::size_t k = 0; k < per; ++k) {
                    double w = 0.0;
                    const Point p = grid.node(s * per + k, w);
                    const auto v = f(p, w);
                    for (std::size_t i = 0; i < N; ++i) acc[i] += v[i];
                }
                partial[s] = acc;
            } catch (...) {
                std::lock_guard<std::mutex> lock(error_mutex);
                if (!error) error = std::current_exception();
                next = slabs;
                return;
            }
        }
    };
    const unsigned workers = static_cast<unsigned>(std::min<std::size_t>(worker_count(), std::max<std::size_t>(slabs, 1)));
    if (workers <= 1) {
        work();
    } else {
        std::vector<std::thread> pool;
        for (unsigned t = 0; t < workers; ++t) pool.emplace_back(work);
        for (auto& t : pool) t.join();
    }
    if (error) std::rethrow_exception(error);
    std::array<double, N> total{};
    for (const auto& p : partial)
        for (std::size_t i = 0; i < N; ++i) total[i] += p[i];
    return total;
}

struct QuadratureOptions {
    int nodes = 24;        // per axis at the reference level
    int budget = 96;       // maximum nodes per axis
    double rel_tol = 1e-4;
    double abs_tol = 0.0;  // floor for integrals near zero
};

struct QuadratureResult {
    double value = 0.0;
    double previous = 0.0;           // estimate at the previous level
    int nodes_per_axis = 0;
    std::size_t total_nodes = 0;     // over all levels
    std::vector<double> history;     // estimate per level
    std::vector<int> levels;         // nodes per axis per level
};

/// Field evaluated at a chart point; the volume density is applied by the integrator.
using ScalarField = std::function<double(const MetricField&, const Point&)>;

/// Σ_charts Σ_nodes w · coverage · f · sqrt|det g| on one fixed grid level.
inline double integrate_level(const Atlas& atlas, const ScalarField& f, int nodes, std::size_t* count = nullptr)
{
    double total = 0.0;
    for (const auto& chart : atlas.charts) {
        const ChartGrid grid = make_grid(chart.metric.domain(), nodes);
        if (count) *count += grid.size();
        const auto s = reduce_grid<1>(grid, [&](const Point& p, double w) {
            const double cov = chart.coverage ? chart.coverage(p) : 1.0;
            if (cov == 0.0) return std::array<double, 1>{0.0};
            const double density = std::sqrt(std::abs(determinant(chart.metric.at(p))));
            return std::array<double, 1>{w * cov * density * f(chart.metric, p)};
        });
        total += s[0];
    }
    return total;
}

/// Levels nodes/2, nodes, 2·nodes, ... until successive estimates differ by
/// at most max(rel_tol·|I|, abs_tol). Throws QuadratureError past the budget.
inline QuadratureResult integrate_scalar(const Atlas& atlas, const ScalarField& f, const QuadratureOptions& opt = {})
{
    if (atlas.charts.empty()) throw ConfigError("empty atlas");
    if (opt.nodes < 2 || opt.budget < opt.nodes) throw ConfigError("invalid quadrature node counts");
    QuadratureResult r;
    int n = std::max(1, opt.nodes / 2);
    double prev = integrate_level(atlas, f, n, &r.total_nodes);
    r.history.push_back(prev);
    r.levels.push_back(n);
    n = opt.nodes;
    for (;;) {
        const double cur = integrate_level(atlas, f, n, &r.total_nodes);
        r.history.push_back(cur);
        r.levels.push_back(n);
        if (std::abs(cur - prev) <= std::max(opt.rel_tol * std::abs(cur), opt.abs_tol)) {
            r.value = cur;
            r.previous = prev;
            r.nodes_per_axis = n;
            return r;
        }
        if (2 * n > opt.budget)
            throw QuadratureError("quadrature did not converge within " + std::to_string(opt.budget) +
                                  " nodes per axis (last change " + std::to_string(std::abs(cur - prev)) + ")");
        prev = cur;
        n *= 2;
    }
}

struct EulerResult {
    double chi = 0.0;
    double integral = 0.0;  // ∫ (|R|² − 4|ρ|² + τ²) dv
    QuadratureResult quadrature;
};

/// χ = (1/32π²) ∫ (|R|² − 4|ρ|² + τ²) dv over a closed Riemannian 4-manifold.
/// abs_tol defaults to 32π² · 1e-5 so that χ ≈ 0 terminates.
inline EulerResult euler_characteristic(const Atlas& atlas, QuadratureOptions opt = {})
{
    if (!atlas.closed) throw DomainError("euler_characteristic needs a closed manifold");
    for (const auto& c : atlas.charts) {
        if (c.metric.dim() != 4) throw DimensionError("euler_characteristic needs dim = 4");
        if (!c.metric.riemannian()) throw DomainError("euler_characteristic needs a Riemannian metric");
    }
    const double norm = 32.0 * std::numbers::pi * std::numbers::pi;
    if (opt.abs_tol <= 0.0) opt.abs_tol = norm * 1e-5;
    EulerResult e;
    e.quadrature = integrate_scalar(
        atlas, [](const MetricField& m, const Point& p) { return gauss_bonnet_integrand(curvature_pack(m, p)); }, opt);
    e.integral = e.quadrature.value;
    e.chi = e.integral / norm;
    return e;
}

inline EulerResult euler_characteristic(const CatalogEntry& entry, const QuadratureOptions& opt = {})
{
    if (!entry.closed) throw DomainError("catalog entry '" + entry.name + "' is not a closed manifold chart");
    return euler_characteristic(make_atlas(entry), opt);
}

}  // namespace curvid
