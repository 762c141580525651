#pragma once

/// \file
/// Truncated multivariate Taylor arithmetic in four variables.
///
/// A Jet<K> stores the Taylor coefficients c_a = (d^a f)/a! of a scalar
/// function at a point for every multi-index |a| <= K. Arithmetic is exact
/// truncated composition, so derivatives of closed-form expressions carry no
/// discretisation error.

#include <array>
#include <cmath>
#include <cstdint>
#include <initializer_list>
#include <stdexcept>

namespace curvid {

inline constexpr int kJetVars = 4;
inline constexpr int kMaxJetOrder = 4;

namespace detail {

constexpr int binomial(int n, int k)
{
    if (k < 0 || k > n) return 0;
    long r = 1;
    for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
    return static_cast<int>(r);
}

/// Number of monomials of total degree <= order in kJetVars variables.
constexpr int monomial_count(int order) { return order < 0 ? 0 : binomial(order + kJetVars, kJetVars); }

/// Number of (a, b) monomial pairs with |a| + |b| <= order.
constexpr int product_pair_count(int order) { return binomial(order + 2 * kJetVars, 2 * kJetVars); }

using Exponent = std::array<std::uint8_t, kJetVars>;

struct ProductTerm {
    std::uint16_t lhs;
    std::uint16_t rhs;
    std::uint16_t out;
};

struct ShiftTerm {
    std::uint16_t src;  // index of a + e_axis in the higher-order jet
    double factor;      // a_axis + 1
};

// Graded ordering: all monomials of degree d precede those of degree d + 1,
// and the order within a degree does not depend on K. A Jet<K2> with K2 < K is
// therefore a prefix of a Jet<K>.
template <int K>
struct JetTables {
    static constexpr int kSize = monomial_count(K);
    static constexpr int kPairs = product_pair_count(K);
    static constexpr int kLower = monomial_count(K - 1);

    std::array<Exponent, kSize> exps{};
    std::array<int, kSize> degree{};
    std::array<double, kSize> factorial{};  // a! = prod a_i!
    std::array<ProductTerm, kPairs> pairs{};
    std::array<std::array<ShiftTerm, (kLower > 0 ? kLower : 1)>, kJetVars> shift{};
};

template <int K>
constexpr int find_exponent(const JetTables<K>& t, const Exponent& e)
{
    for (int i = 0; i < JetTables<K>::kSize; ++i)
        if (t.exps[i] == e) return i;
    return -1;
}

template <int K>
constexpr JetTables<K> make_jet_tables()
{
    JetTables<K> t{};
    int n = 0;
    for (int d = 0; d <= K; ++d) {
        for (int a = d; a >= 0; --a)
            for (int b = d - a; b >= 0; --b)
                for (int c = d - a - b; c >= 0; --c) {
                    const int e = d - a - b - c;
                    t.exps[n] = {static_cast<std::uint8_t>(a), static_cast<std::uint8_t>(b),
                                 static_cast<std::uint8_t>(c), static_cast<std::uint8_t>(e)};
                    t.degree[n] = d;
                    double f = 1.0;
                    for (int v : {a, b, c, e})
                        for (int k = 2; k <= v; ++k) f *= k;
                    t.factorial[n] = f;
                    ++n;
                }
    }
    int p = 0;
    for (int i = 0; i < JetTables<K>::kSize; ++i)
        for (int j = 0; j < JetTables<K>::kSize; ++j) {
            if (t.degree[i] + t.degree[j] > K) continue;
            Exponent s{};
            for (int v = 0; v < kJetVars; ++v) s[v] = static_cast<std::uint8_t>(t.exps[i][v] + t.exps[j][v]);
            t.pairs[p++] = {static_cast<std::uint16_t>(i), static_cast<std::uint16_t>(j),
                            static_cast<std::uint16_t>(find_exponent(t, s))};
        }
    if constexpr (K >= 1) {
        for (int axis = 0; axis < kJetVars; ++axis)
            for (int i = 0; i < JetTables<K>::kLower; ++i) {
                Exponent s = t.exps[i];
                const double factor = s[axis] + 1.0;
                s[axis] = static_cast<std::uint8_t>(s[axis] + 1);
                t.shift[axis][i] = {static_cast<std::uint16_t>(find_exponent(t, s)), factor};
            }
    }
    return t;
}

template <int K>
inline constexpr JetTables<K> jet_tables = make_jet_tables<K>();

/// Product terms whose left factor has degree >= 1, grouped by output degree.
template <int K>
struct RaisingPairs {
    std::array<std::array<ProductTerm, product_pair_count(K)>, K + 1> terms{};
    std::array<int, K + 1> count{};
};

template <int K>
constexpr RaisingPairs<K> make_raising_pairs()
{
    RaisingPairs<K> r{};
    const auto& t = jet_tables<K>;
    for (const auto& p : t.pairs) {
        if (t.degree[p.lhs] == 0) continue;
        const int d = t.degree[p.out];
        r.terms[d][r.count[d]++] = p;
    }
    return r;
}

template <int K>
inline constexpr RaisingPairs<K> raising_pairs = make_raising_pairs<K>();

}  // namespace detail

template <int K>
class Jet {
    static_assert(K >= 0 && K <= kMaxJetOrder, "jet order must lie in [0, 4]");

public:
    static constexpr int order = K;
    static constexpr int size = detail::monomial_count(K);

    constexpr Jet() = default;
    constexpr Jet(double value) { c_[0] = value; }  // NOLINT: implicit constants are intended

    /// The coordinate function x^axis expanded at `value`.
    static Jet variable(double value, int axis)
    {
        Jet j(value);
        if constexpr (K >= 1) j.c_[1 + axis] = 1.0;
        return j;
    }

    double value() const { return c_[0]; }
    double coeff(int index) const { return c_[index]; }
    double& coeff(int index) { return c_[index]; }
    const std::array<double, size>& coeffs() const { return c_; }

    /// Mixed partial derivative along the listed axes, e.g. {0, 0} for d^2/dx0^2.
    double partial(std::initializer_list<int> axes) const
    {
        if (static_cast<int>(axes.size()) > K) throw std::out_of_range("partial derivative above jet order");
        detail::Exponent e{};
        for (int a : axes) e[a] = static_cast<std::uint8_t>(e[a] + 1);
        const auto& t = detail::jet_tables<K>;
        const int i = detail::find_exponent(t, e);
        return c_[i] * t.factorial[i];
    }

    double gradient(int axis) const
    {
        if constexpr (K >= 1) return c_[1 + axis];
        else return 0.0;
    }

    template <int K2>
    Jet<K2> truncate() const
    {
        static_assert(K2 <= K);
        Jet<K2> r;
        for (int i = 0; i < Jet<K2>::size; ++i) r.coeff(i) = c_[i];
        return r;
    }

    /// Partial derivative along `axis`, one order lower.
    Jet<(K > 0 ? K - 1 : 0)> derivative(int axis) const
    {
        static_assert(K >= 1, "cannot differentiate an order-0 jet");
        Jet<K - 1> r;
        const auto& sh = detail::jet_tables<K>.shift[axis];
        for (int i = 0; i < Jet<K - 1>::size; ++i) r.coeff(i) = sh[i].factor * c_[sh[i].src];
        return r;
    }

    Jet& operator+=(const Jet& o)
    {
        for (int i = 0; i < size; ++i) c_[i] += o.c_[i];
        return *this;
    }
    Jet& operator-=(const Jet& o)
    {
        for (int i = 0; i < size; ++i) c_[i] -= o.c_[i];
        return *this;
    }
    Jet& operator*=(double s)
    {
        for (auto& v : c_) v *= s;
        return *this;
    }
    Jet& operator+=(double s)
    {
        c_[0] += s;
        return *this;
    }
    Jet& operator*=(const Jet& o) { return *this = *this * o; }

    /// this += a * b without a temporary.
    void add_product(const Jet& a, const Jet& b)
    {
        if constexpr (K == 0) {
            c_[0] += a.c_[0] * b.c_[0];
        } else {
            for (const auto& p : detail::jet_tables<K>.pairs) c_[p.out] += a.c_[p.lhs] * b.c_[p.rhs];
        }
    }

    /// this += s * a.
    void add_scaled(const Jet& a, double s)
    {
        for (int i = 0; i < size; ++i) c_[i] += s * a.c_[i];
    }

    friend Jet operator*(const Jet& a, const Jet& b)
    {
        Jet r;
        r.add_product(a, b);
        return r;
    }
    friend Jet operator+(Jet a, const Jet& b) { return a += b; }
    friend Jet operator-(Jet a, const Jet& b) { return a -= b; }
    friend Jet operator-(Jet a)
    {
        for (auto& v : a.c_) v = -v;
        return a;
    }
    friend Jet operator*(Jet a, double s) { return a *= s; }
    friend Jet operator*(double s, Jet a) { return a *= s; }
    friend Jet operator/(Jet a, double s) { return a *= 1.0 / s; }
    friend Jet operator+(Jet a, double s) { return a += s; }
    friend Jet operator+(double s, Jet a) { return a += s; }
    friend Jet operator-(Jet a, double s) { return a += -s; }
    friend Jet operator-(double s, const Jet& a) { return -a + s; }
    friend Jet operator/(const Jet& a, const Jet& b) { return a * reciprocal(b); }
    friend Jet operator/(double s, const Jet& b) { return s * reciprocal(b); }

    /// f(u) given the derivatives f(u0), f'(u0), ..., f^(K)(u0).
    friend Jet compose(const Jet& u, const std::array<double, K + 1>& derivs)
    {
        if constexpr (K >= 2) {
            bool affine = true;
            for (int i = 1 + kJetVars; i < size && affine; ++i) affine = u.c_[i] == 0.0;
            if (affine) return compose_affine(u, derivs);
        }
        Jet v = u;
        v.c_[0] = 0.0;
        double inv_fact = 1.0;
        std::array<double, K + 1> taylor{};
        for (int n = 0; n <= K; ++n) {
            if (n > 0) inv_fact /= n;
            taylor[n] = derivs[n] * inv_fact;
        }
        Jet r(taylor[K]);
        for (int n = K - 1; n >= 0; --n) {
            r = r * v;
            r.c_[0] += taylor[n];
        }
        return r;
    }

    /// f(u0 + a·dx): c_α = f^(|α|)(u0) a^α / α!.
    friend Jet compose_affine(const Jet& u, const std::array<double, K + 1>& derivs)
    {
        const auto& t = detail::jet_tables<K>;
        Jet r;
        r.c_[0] = derivs[0];
        for (int i = 1; i < size; ++i) {
            double m = derivs[t.degree[i]] / t.factorial[i];
            for (int v = 0; v < kJetVars && m != 0.0; ++v)
                for (int e = 0; e < t.exps[i][v]; ++e) m *= u.c_[1 + v];
            r.c_[i] = m;
        }
        return r;
    }

    friend Jet reciprocal(const Jet& u)
    {
        std::array<double, K + 1> d{};
        const double x = u.value();
        double p = 1.0 / x;
        for (int n = 0; n <= K; ++n) {
            d[n] = p;
            p *= -(n + 1) / x;
        }
        return compose(u, d);
    }
    friend Jet pow(const Jet& u, double e)
    {
        std::array<double, K + 1> d{};
        const double x = u.value();
        double coef = 1.0;
        for (int n = 0; n <= K; ++n) {
            d[n] = coef * std::pow(x, e - n);
            coef *= (e - n);
        }
        return compose(u, d);
    }
    friend Jet sqrt(const Jet& u) { return pow(u, 0.5); }
    friend Jet exp(const Jet& u)
    {
        std::array<double, K + 1> d{};
        d.fill(std::exp(u.value()));
        return compose(u, d);
    }
    friend Jet log(const Jet& u)
    {
        std::array<double, K + 1> d{};
        const double x = u.value();
        d[0] = std::log(x);
        double p = 1.0 / x;
        for (int n = 1; n <= K; ++n) {
            d[n] = p;
            p *= -n / x;
        }
        return compose(u, d);
    }
    friend Jet sin(const Jet& u)
    {
        std::array<double, K + 1> d{};
        const double s = std::sin(u.value()), c = std::cos(u.value());
        const double cyc[4] = {s, c, -s, -c};
        for (int n = 0; n <= K; ++n) d[n] = cyc[n % 4];
        return compose(u, d);
    }
    friend Jet cos(const Jet& u)
    {
        std::array<double, K + 1> d{};
        const double s = std::sin(u.value()), c = std::cos(u.value());
        const double cyc[4] = {c, -s, -c, s};
        for (int n = 0; n <= K; ++n) d[n] = cyc[n % 4];
        return compose(u, d);
    }
    friend Jet sinh(const Jet& u)
    {
        std::array<double, K + 1> d{};
        const double s = std::sinh(u.value()), c = std::cosh(u.value());
        for (int n = 0; n <= K; ++n) d[n] = (n % 2 == 0) ? s : c;
        return compose(u, d);
    }
    friend Jet cosh(const Jet& u)
    {
        std::array<double, K + 1> d{};
        const double s = std::sinh(u.value()), c = std::cosh(u.value());
        for (int n = 0; n <= K; ++n) d[n] = (n % 2 == 0) ? c : s;
        return compose(u, d);
    }

private:
    std::array<double, size> c_{};
};

template <class T>
struct is_jet : std::false_type {};
template <int K>
struct is_jet<Jet<K>> : std::true_type {};

/// Value part of a jet or plain scalar.
inline double value_of(double x) { return x; }
template <int K>
double value_of(const Jet<K>& x)
{
    return x.value();
}

}  // namespace curvid
