#pragma once

/// \file
/// Pointwise curvature identities and diagnostics on a CurvaturePack.

#include <algorithm>
#include <cmath>
#include <string>

#include "curvid/curvature.hpp"
#include "curvid/errors.hpp"

namespace curvid {

inline constexpr double kIdentityTolerance = 1e-9;

struct IdentityReport {
    Tensor residual;
    double max_abs = 0.0;
    double scale = 0.0;     // max-abs over the individual terms
    double relative = 0.0;  // max_abs / scale (0 when scale vanishes)
    double norm = 0.0;      // sqrt(|residual_ij residual^ij|), frame independent
    double tolerance = kIdentityTolerance;
    bool pass = false;
};

namespace detail {

inline void require_dim(const CurvaturePack& p, int lo, int hi, const char* what)
{
    if (p.dim < lo || p.dim > hi)
        throw DimensionError(std::string(what) + ": unsupported dimension " + std::to_string(p.dim));
}

/// |T_ij T^ij| for a symmetric 2-tensor.
inline double tensor_norm2(const Tensor& t, const Tensor& ginv)
{
    const Tensor up = contract_slot(contract_slot(t, ginv, 0), ginv, 1);
    double s = 0.0;
    for (std::size_t f = 0; f < t.size(); ++f) s += t.at_flat(f) * up.at_flat(f);
    return s;
}

inline IdentityReport finish(Tensor residual, double scale, const Tensor& ginv, double tol)
{
    IdentityReport r;
    r.max_abs = max_abs(residual);
    r.scale = scale;
    r.relative = scale > 0.0 ? r.max_abs / scale : 0.0;
    r.norm = std::sqrt(std::abs(tensor_norm2(residual, ginv)));
    r.tolerance = tol;
    r.pass = within_tolerance(r.max_abs, scale, tol);
    r.residual = std::move(residual);
    return r;
}

}  // namespace detail

inline double gauss_bonnet_integrand(const CurvaturePack& p)
{
    detail::require_dim(p, 4, 4, "gauss_bonnet_integrand");
    return p.norm_R2 - 4.0 * p.norm_rho2 + p.tau * p.tau;
}

/// Ř − 2ρ̌ − Lρ + τρ − ¼(|R|² − 4|ρ|² + τ²) g.
inline IdentityReport identity_residual(const CurvaturePack& p, double tol = kIdentityTolerance)
{
    detail::require_dim(p, 4, 4, "identity_residual");
    const double q = 0.25 * (p.norm_R2 - 4.0 * p.norm_rho2 + p.tau * p.tau);
    Tensor res(4, 2);
    double scale = 0.0;
    for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j) {
            const double terms[5] = {p.r_check(i, j), -2.0 * p.rho_check(i, j), -p.L_rho(i, j), p.tau * p.ricci(i, j),
                                     -q * p.g(i, j)};
            double s = 0.0;
            for (double t : terms) {
                s += t;
                scale = std::max(scale, std::abs(t));
            }
            res(i, j) = s;
        }
    return detail::finish(std::move(res), scale, p.g_inv, tol);
}

/// g^{ij} times the main residual; vanishes for any algebraic curvature tensor.
inline double identity_trace_check(const CurvaturePack& p)
{
    const auto r = identity_residual(p);
    double s = 0.0;
    for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j) s += p.g_inv(i, j) * r.residual(i, j);
    return s;
}

/// Ř − (|R|²/n) g.
inline IdentityReport weakly_einstein_residual(const CurvaturePack& p, double tol = kIdentityTolerance)
{
    detail::require_dim(p, 3, 4, "weakly_einstein_residual");
    const double k = p.norm_R2 / p.dim;
    Tensor res = p.r_check - k * p.g;
    const double scale = std::max(max_abs(p.r_check), std::abs(k) * max_abs(p.g));
    return detail::finish(std::move(res), scale, p.g_inv, tol);
}

/// ρ − (τ/n) g.
inline IdentityReport einstein_residual(const CurvaturePack& p, double tol = kIdentityTolerance)
{
    detail::require_dim(p, 2, 4, "einstein_residual");
    const double k = p.tau / p.dim;
    Tensor res = p.ricci - k * p.g;
    const double scale = std::max(max_abs(p.ricci), std::abs(k) * max_abs(p.g));
    return detail::finish(std::move(res), scale, p.g_inv, tol);
}

/// 3D curvature rebuilt from Ricci and scalar curvature (coordinate form):
/// ρ_ad g_bc − ρ_ac g_bd + g_ad ρ_bc − g_ac ρ_bd − (τ/2)(g_ad g_bc − g_ac g_bd).
inline Tensor three_dim_reconstruct(const Tensor& ricci, double tau, const Tensor& g)
{
    if (g.dim() != 3 || ricci.dim() != 3) throw DimensionError("three_dim_reconstruct needs dim = 3");
    Tensor R(3, 4);
    for (int a = 0; a < 3; ++a)
        for (int b = 0; b < 3; ++b)
            for (int c = 0; c < 3; ++c)
                for (int d = 0; d < 3; ++d)
                    R(a, b, c, d) = ricci(a, d) * g(b, c) - ricci(a, c) * g(b, d) + g(a, d) * ricci(b, c) -
                                    g(a, c) * ricci(b, d) - 0.5 * tau * (g(a, d) * g(b, c) - g(a, c) * g(b, d));
    return R;
}

struct ThreeDimReport {
    double defect_max = 0.0;     // max |R − reconstruction|
    double defect_sum_sq = 0.0;  // |R − reconstruction|², orthonormal sum of squares
    double value = 0.0;          // ¼|R|² − |ρ|² + ¼τ²
    double scale = 0.0;          // max(|R|², max |R_abcd|)
    double tolerance = kIdentityTolerance;
    bool pass = false;
};

/// Compare a 3D pack against its reconstruction.
inline ThreeDimReport three_dim_check(const CurvaturePack& p, double tol = kIdentityTolerance)
{
    detail::require_dim(p, 3, 3, "three_dim_check");
    ThreeDimReport r;
    const Tensor D = p.riemann - three_dim_reconstruct(p.ricci, p.tau, p.g);
    const Tensor up = transform_all(D, p.g_inv);
    for (std::size_t f = 0; f < D.size(); ++f) r.defect_sum_sq += D.at_flat(f) * up.at_flat(f);
    r.defect_max = max_abs(D);
    r.value = 0.25 * p.norm_R2 - p.norm_rho2 + 0.25 * p.tau * p.tau;
    r.scale = std::max(std::abs(p.norm_R2), max_abs(p.riemann));
    r.tolerance = tol;
    r.pass = within_tolerance(r.defect_max, max_abs(p.riemann), tol) && within_tolerance(std::abs(r.value), r.scale, tol) &&
             within_tolerance(std::abs(r.defect_sum_sq - 4.0 * r.value), r.scale, tol);
    return r;
}

/// The leading 3×3 block of a 4D pack as a 3D algebraic pack.
inline CurvaturePack restrict_pack3(const CurvaturePack& p)
{
    Tensor g(3, 2), R(3, 4);
    for (int a = 0; a < 3; ++a)
        for (int b = 0; b < 3; ++b) {
            g(a, b) = p.g(a, b);
            for (int c = 0; c < 3; ++c)
                for (int d = 0; d < 3; ++d) R(a, b, c, d) = p.riemann(a, b, c, d);
        }
    return algebraic_pack(g, R, Signature(p.signature.begin(), p.signature.begin() + 3));
}

struct ThreeDimNormReport {
    double value = 0.0;          // ¼|R'|² − |ρ'|² + ¼τ'² of the 3D factor
    double from_residual = 0.0;  // −(main residual)_44 of the 4D product
    ThreeDimReport factor;       // reconstruction data of the 3D factor
    double scale = 0.0;
    double tolerance = kIdentityTolerance;
    bool pass = false;
};

/// For a 4D pack of M' × R: the 3D norm identity, read both from the factor and
/// from the (4,4) slot of the main residual. Throws if the pack is not a
/// product with a unit flat last factor.
inline ThreeDimNormReport three_dim_norm_identity(const CurvaturePack& p, double tol = kIdentityTolerance)
{
    detail::require_dim(p, 4, 4, "three_dim_norm_identity");
    const double scale = std::max(1.0, max_abs(p.riemann));
    bool product = std::abs(p.g(3, 3) - 1.0) <= 1e-12;
    for (int a = 0; a < 3; ++a) product = product && std::abs(p.g(a, 3)) <= 1e-12;
    for (std::size_t f = 0; f < p.riemann.size() && product; ++f) {
        const auto idx = p.riemann.unflatten(f);
        if (idx[0] == 3 || idx[1] == 3 || idx[2] == 3 || idx[3] == 3)
            product = std::abs(p.riemann.at_flat(f)) <= 1e-12 * scale;
    }
    if (!product) throw DimensionError("three_dim_norm_identity expects a product with a unit flat line");

    ThreeDimNormReport r;
    r.factor = three_dim_check(restrict_pack3(p), tol);
    r.value = r.factor.value;
    r.from_residual = -identity_residual(p).residual(3, 3);
    r.scale = r.factor.scale;
    r.tolerance = tol;
    r.pass = r.factor.pass && within_tolerance(std::abs(r.from_residual - r.value), r.scale, tol);
    return r;
}

}  // namespace curvid
