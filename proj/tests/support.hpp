#pragma once

// Shared helpers for the test suites.

#include <cmath>
#include <random>

#include "curvid/metric.hpp"
#include "curvid/tensor.hpp"

namespace curvid::test_support {

inline Tensor random_symmetric(std::mt19937_64& rng, int n, double amp = 1.0)
{
    std::uniform_real_distribution<double> u(-amp, amp);
    Tensor a(n, 2);
    for (int i = 0; i < n; ++i)
        for (int j = i; j < n; ++j) a(i, j) = a(j, i) = u(rng);
    return a;
}

/// (A ⊙ B)_ijkl = A_il B_jk + A_jk B_il − A_ik B_jl − A_jl B_ik.
inline Tensor kulkarni_nomizu(const Tensor& A, const Tensor& B)
{
    const int n = A.dim();
    Tensor R(n, 4, 0.0);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            for (int k = 0; k < n; ++k)
                for (int l = 0; l < n; ++l)
                    R(i, j, k, l) = A(i, l) * B(j, k) + A(j, k) * B(i, l) - A(i, k) * B(j, l) - A(j, l) * B(i, k);
    return R;
}

/// Sum of Kulkarni–Nomizu products of random symmetric pairs; these span the
/// space of algebraic curvature tensors.
inline Tensor random_algebraic_curvature(std::mt19937_64& rng, int n, int terms = 6)
{
    Tensor R(n, 4, 0.0);
    for (int t = 0; t < terms; ++t) R = R + kulkarni_nomizu(random_symmetric(rng, n), random_symmetric(rng, n));
    return R;
}

/// Random positive definite matrix I + amp·S with S symmetric, |S| ≤ 1 entrywise.
inline Tensor random_spd(std::mt19937_64& rng, int n, double amp = 0.2)
{
    Tensor g = random_symmetric(rng, n, amp);
    for (int i = 0; i < n; ++i) g(i, i) += 1.0;
    return g;
}

inline Tensor diagonal(std::initializer_list<double> d)
{
    const int n = static_cast<int>(d.size());
    Tensor g(n, 2, 0.0);
    int i = 0;
    for (double v : d) {
        g(i, i) = v;
        ++i;
    }
    return g;
}

/// Middle half of every bounded axis; periodic axes are kept whole.
inline ChartDomain central(ChartDomain d)
{
    for (int a = 0; a < d.dim; ++a) {
        if (d.periodic[a]) continue;
        const double mid = 0.5 * (d.lo[a] + d.hi[a]), q = 0.25 * (d.hi[a] - d.lo[a]);
        d.lo[a] = mid - q;
        d.hi[a] = mid + q;
    }
    return d;
}

}  // namespace curvid::test_support
