#pragma once

#include <array>
#include <cassert>
#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <type_traits>
#include <vector>

namespace curvid {

/// Coordinate point; only the first `dim` entries are meaningful.
using Point = std::array<double, 4>;

/// Dense component array of a rank-r tensor in dimension dim <= 4, stored
/// row-major with the first index slowest.
template <class T>
class TensorArray {
public:
    TensorArray() = default;
    TensorArray(int dim, int rank) : dim_(dim), rank_(rank), data_(count(dim, rank)) {}
    TensorArray(int dim, int rank, const T& fill) : dim_(dim), rank_(rank), data_(count(dim, rank), fill) {}

    int dim() const { return dim_; }
    int rank() const { return rank_; }
    std::size_t size() const { return data_.size(); }

    template <class... I>
    T& operator()(I... idx)
    {
        return data_[offset(idx...)];
    }
    template <class... I>
    const T& operator()(I... idx) const
    {
        return data_[offset(idx...)];
    }

    T& at_flat(std::size_t i) { return data_[i]; }
    const T& at_flat(std::size_t i) const { return data_[i]; }
    std::vector<T>& data() { return data_; }
    const std::vector<T>& data() const { return data_; }

    /// Decompose a flat offset into its multi-index.
    std::array<int, 8> unflatten(std::size_t flat) const
    {
        std::array<int, 8> idx{};
        for (int s = rank_ - 1; s >= 0; --s) {
            idx[s] = static_cast<int>(flat % dim_);
            flat /= dim_;
        }
        return idx;
    }
    std::size_t flatten(const std::array<int, 8>& idx) const
    {
        std::size_t f = 0;
        for (int s = 0; s < rank_; ++s) f = f * dim_ + idx[s];
        return f;
    }

    static std::size_t count(int dim, int rank)
    {
        std::size_t n = 1;
        for (int i = 0; i < rank; ++i) n *= static_cast<std::size_t>(dim);
        return n;
    }

private:
    template <class... I>
    std::size_t offset(I... idx) const
    {
        assert(static_cast<int>(sizeof...(I)) == rank_);
        std::size_t f = 0;
        ((f = f * dim_ + static_cast<std::size_t>(idx)), ...);
        return f;
    }

    int dim_ = 0;
    int rank_ = 0;
    std::vector<T> data_;
};

using Tensor = TensorArray<double>;

inline double max_abs(const Tensor& t)
{
    double m = 0.0;
    for (double v : t.data()) m = std::max(m, std::abs(v));
    return m;
}

inline Tensor operator-(const Tensor& a, const Tensor& b)
{
    Tensor r = a;
    for (std::size_t i = 0; i < r.size(); ++i) r.at_flat(i) -= b.at_flat(i);
    return r;
}

inline Tensor operator+(const Tensor& a, const Tensor& b)
{
    Tensor r = a;
    for (std::size_t i = 0; i < r.size(); ++i) r.at_flat(i) += b.at_flat(i);
    return r;
}

inline Tensor operator*(double s, const Tensor& a)
{
    Tensor r = a;
    for (auto& v : r.data()) v *= s;
    return r;
}

/// Value components of a jet-valued tensor.
template <class J>
Tensor values(const TensorArray<J>& t)
{
    Tensor r(t.dim(), t.rank());
    for (std::size_t i = 0; i < t.size(); ++i) r.at_flat(i) = t.at_flat(i).value();
    return r;
}

/// Truncate every component of a jet-valued tensor to a lower order.
template <int K2, class J>
auto truncate(const TensorArray<J>& t)
{
    using Out = decltype(t.at_flat(0).template truncate<K2>());
    TensorArray<Out> r(t.dim(), t.rank());
    for (std::size_t i = 0; i < t.size(); ++i) r.at_flat(i) = t.at_flat(i).template truncate<K2>();
    return r;
}

/// Matrix product of two rank-2 arrays.
template <class T>
TensorArray<T> matmul(const TensorArray<T>& a, const TensorArray<T>& b)
{
    const int n = a.dim();
    TensorArray<T> r(n, 2);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            T s{};
            for (int k = 0; k < n; ++k) {
                if constexpr (std::is_arithmetic_v<T>) s += a(i, k) * b(k, j);
                else s.add_product(a(i, k), b(k, j));
            }
            r(i, j) = s;
        }
    return r;
}

/// out[.., b, ..] = Σ_a M(a, b) t[.., a, ..] on slot `slot`.
inline Tensor contract_slot(const Tensor& t, const Tensor& M, int slot)
{
    const int n = t.dim();
    Tensor out(n, t.rank(), 0.0);
    std::size_t stride = 1;
    for (int s = t.rank() - 1; s > slot; --s) stride *= static_cast<std::size_t>(n);
    const std::size_t block = stride * static_cast<std::size_t>(n);
    const double* src = t.data().data();
    double* dst = out.data().data();
    for (std::size_t outer = 0; outer < t.size(); outer += block)
        for (int b = 0; b < n; ++b)
            for (int a = 0; a < n; ++a) {
                const double w = M(a, b);
                if (w == 0.0) continue;
                const double* s = src + outer + a * stride;
                double* d = dst + outer + b * stride;
                for (std::size_t inner = 0; inner < stride; ++inner) d[inner] += w * s[inner];
            }
    return out;
}

/// Components in a new basis: every slot contracted with M (columns are the new basis vectors).
inline Tensor transform_all(Tensor t, const Tensor& M)
{
    for (int s = 0; s < t.rank(); ++s) t = contract_slot(t, M, s);
    return t;
}

inline Tensor identity_matrix(int n)
{
    Tensor r(n, 2, 0.0);
    for (int i = 0; i < n; ++i) r(i, i) = 1.0;
    return r;
}

inline Tensor transpose(const Tensor& a)
{
    Tensor r(a.dim(), 2);
    for (int i = 0; i < a.dim(); ++i)
        for (int j = 0; j < a.dim(); ++j) r(i, j) = a(j, i);
    return r;
}

}  // namespace curvid
