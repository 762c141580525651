#pragma once

#include <cmath>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "curvid/errors.hpp"
#include "curvid/field.hpp"
#include "curvid/linalg.hpp"

namespace curvid {

inline constexpr double kDegenerateDeterminant = 1e-12;

/// |det g| relative to the product of row max-norms, so the test does not
/// depend on the scale of individual coordinates. Hadamard bounds it by
/// dim^(dim/2); diagonal matrices give 1.
inline double normalized_determinant(const Tensor& g)
{
    double scale = 1.0;
    for (int i = 0; i < g.dim(); ++i) {
        double row = 0.0;
        for (int j = 0; j < g.dim(); ++j) row = std::max(row, std::abs(g(i, j)));
        scale *= row;
    }
    if (scale == 0.0) return 0.0;
    return std::abs(determinant(g)) / scale;
}

inline bool is_degenerate(const Tensor& g) { return !(normalized_determinant(g) >= kDegenerateDeterminant); }

/// Box of valid coordinates. Coordinate-singular loci are already excluded
/// from the bounds; periodic axes wrap with period hi - lo.
struct ChartDomain {
    int dim = 4;
    Point lo{};
    Point hi{};
    std::array<bool, 4> periodic{};

    double period(int axis) const { return hi[axis] - lo[axis]; }

    bool contains(const Point& p) const
    {
        for (int i = 0; i < dim; ++i) {
            if (periodic[i]) continue;
            const double slack = 1e-12 * (1.0 + std::abs(hi[i] - lo[i]));
            if (!(p[i] >= lo[i] - slack && p[i] <= hi[i] + slack)) return false;
        }
        return true;
    }

    template <class Rng>
    Point sample(Rng& rng) const
    {
        Point p{};
        for (int i = 0; i < dim; ++i) {
            std::uniform_real_distribution<double> u(lo[i], hi[i]);
            p[i] = u(rng);
        }
        return p;
    }
};

/// +1/-1 per coordinate, e.g. {-1, 1, 1, 1} for Lorentzian signature.
using Signature = std::vector<int>;

inline int negative_count(const Signature& s)
{
    int n = 0;
    for (int v : s) n += (v < 0);
    return n;
}

class MetricField {
public:
    MetricField() = default;
    MetricField(std::string name, ChartDomain domain, Signature signature, JetField components)
        : name_(std::move(name)), domain_(domain), signature_(std::move(signature)), components_(std::move(components))
    {
        if (components_.rank() != 2 || components_.dim() != domain_.dim ||
            static_cast<int>(signature_.size()) != domain_.dim)
            throw ConfigError("metric '" + name_ + "': inconsistent dimension, rank or signature");
    }

    const std::string& name() const { return name_; }
    int dim() const { return domain_.dim; }
    const ChartDomain& domain() const { return domain_; }
    const Signature& signature() const { return signature_; }
    bool riemannian() const { return negative_count(signature_) == 0; }
    const JetField& components() const { return components_; }

    /// g_ij with all partial derivatives to order K. Throws on points outside
    /// the domain and on degenerate g (normalized |det g| < 1e-12).
    template <int K>
    TensorArray<Jet<K>> jet(const Point& p) const
    {
        check_point(p);
        auto g = components_.jet<K>(p);
        if (is_degenerate(values(g)))
            throw DegenerateMetricError("metric '" + name_ + "' is degenerate at the requested point");
        return g;
    }

    Tensor at(const Point& p) const { return values(jet<0>(p)); }

    void check_point(const Point& p) const
    {
        if (!domain_.contains(p)) throw DomainError("point lies outside the chart domain of '" + name_ + "'");
    }

private:
    std::string name_;
    ChartDomain domain_;
    Signature signature_;
    JetField components_;
};

/// Metric components together with their partial derivatives up to `order`.
struct MetricJet {
    int order = 0;
    TensorArray<Jet<4>> g;  // coefficients above `order` are zero

    double partial(int i, int j, std::initializer_list<int> axes) const { return g(i, j).partial(axes); }
};

inline MetricJet evaluate_metric_jet(const MetricField& metric, const Point& p, int order)
{
    if (order < 0 || order > kMaxJetOrder)
        throw OrderError("jet order " + std::to_string(order) + " outside the supported range [0, 4]");
    auto full = metric.jet<4>(p);
    MetricJet out{order, TensorArray<Jet<4>>(full.dim(), 2)};
    const auto& tab = detail::jet_tables<4>;
    for (std::size_t n = 0; n < full.size(); ++n) {
        Jet<4> j;
        for (int c = 0; c < Jet<4>::size; ++c)
            if (tab.degree[c] <= order) j.coeff(c) = full.at_flat(n).coeff(c);
        out.g.at_flat(n) = j;
    }
    return out;
}

/// Throws DegenerateMetricError when the inertia of g(p) disagrees with the
/// declared signature (or, for Riemannian metrics, g(p) is not positive definite).
inline void check_signature(const MetricField& metric, const Point& p)
{
    const Tensor g = metric.at(p);
    if (metric.riemannian()) {
        if (!is_positive_definite(g))
            throw DegenerateMetricError("metric '" + metric.name() + "' is not positive definite at a sampled point");
        return;
    }
    if (negative_inertia(g) != negative_count(metric.signature()))
        throw DegenerateMetricError("metric '" + metric.name() + "' does not match its declared signature");
}

namespace detail {

struct DeformedComponents {
    JetField g, h;
    double t;
    template <class T>
    void operator()(const std::array<T, 4>& x, TensorArray<T>& out) const
    {
        constexpr int K = T::order;
        const auto a = g.evaluate<K>(x);
        const auto b = h.evaluate<K>(x);
        for (std::size_t i = 0; i < out.size(); ++i) out.at_flat(i) = a.at_flat(i) + t * b.at_flat(i);
    }
};

}  // namespace detail

/// g + t h as a metric field on the same chart.
inline MetricField deformed_metric(const MetricField& base, const JetField& h, double t)
{
    return MetricField(base.name() + "+t*h", base.domain(), base.signature(),
                       JetField(base.dim(), 2, detail::DeformedComponents{base.components(), h, t}));
}

}  // namespace curvid
