#pragma once

/// \file
/// Orthonormal frames, Chern-basis search over SO(4) and the Chern-frame
/// component expansions of the four-dimensional identity.
///
/// Frame components use 0-based indices; the Chern conditions read
/// R_0102 = R_0103 = R_0112 = R_0113 = R_0203 = R_0212 = 0.

#include <Eigen/Dense>
#include <unsupported/Eigen/MatrixFunctions>

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "curvid/curvature.hpp"
#include "curvid/errors.hpp"
#include "curvid/identities.hpp"

namespace curvid {

struct FrameRotation {
    Tensor frame;       // frame(i, a) = i-th coordinate component of e_a
    Signature eta;      // e_a · e_a = eta[a]
    double defect = 0;  // max |eᵀ g e − η|
};

/// Signature-aware Gram-Schmidt on the coordinate basis, in order.
inline FrameRotation orthonormal_frame(const Tensor& g, const Signature& signature)
{
    const int n = g.dim();
    if (static_cast<int>(signature.size()) != n) throw DimensionError("signature length differs from metric dimension");
    if (is_degenerate(g)) throw DegenerateMetricError("orthonormal_frame: degenerate metric");
    const double scale = max_abs(g);
    auto dot = [&](const std::vector<double>& u, const std::vector<double>& v) {
        double s = 0.0;
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) s += u[i] * g(i, j) * v[j];
        return s;
    };
    std::vector<std::vector<double>> e;
    FrameRotation out;
    for (int k = 0; k < n; ++k) {
        std::vector<double> v(n, 0.0);
        v[k] = 1.0;
        for (int pass = 0; pass < 2; ++pass)
            for (int a = 0; a < k; ++a) {
                const double c = dot(v, e[a]) * out.eta[a];
                for (int i = 0; i < n; ++i) v[i] -= c * e[a][i];
            }
        const double nn = dot(v, v);
        if (std::abs(nn) <= 1e-12 * scale) throw DegenerateMetricError("orthonormal_frame: null vector encountered");
        const double inv = 1.0 / std::sqrt(std::abs(nn));
        for (auto& x : v) x *= inv;
        e.push_back(v);
        out.eta.push_back(nn > 0 ? 1 : -1);
    }
    if (negative_count(out.eta) != negative_count(signature))
        throw DegenerateMetricError("orthonormal_frame: inertia does not match the declared signature");
    out.frame = Tensor(n, 2);
    for (int i = 0; i < n; ++i)
        for (int a = 0; a < n; ++a) out.frame(i, a) = e[a][i];
    const Tensor G = transform_all(g, out.frame);
    for (int a = 0; a < n; ++a)
        for (int b = 0; b < n; ++b) out.defect = std::max(out.defect, std::abs(G(a, b) - (a == b ? out.eta[a] : 0)));
    return out;
}

/// Curvature data in an orthonormal frame.
struct FrameCurvature {
    Signature eta;
    Tensor riemann;  // R_abcd
    Tensor ricci;    // ρ_ab
    double tau = 0.0;
};

inline FrameCurvature frame_curvature(const CurvaturePack& p, const FrameRotation& f)
{
    return {f.eta, transform_all(p.riemann, f.frame), transform_all(p.ricci, f.frame), p.tau};
}

inline FrameCurvature frame_curvature(const CurvaturePack& p)
{
    return frame_curvature(p, orthonormal_frame(p.g, p.signature));
}

/// Σ_c R_cabc for Riemannian frame components.
inline Tensor frame_ricci(const Tensor& R)
{
    const int n = R.dim();
    Tensor rho(n, 2, 0.0);
    for (int a = 0; a < n; ++a)
        for (int b = 0; b < n; ++b)
            for (int c = 0; c < n; ++c) rho(a, b) += R(c, a, b, c);
    return rho;
}

inline double orthogonality_defect(const Tensor& Q)
{
    const Tensor QtQ = matmul(transpose(Q), Q);
    return max_abs(QtQ - identity_matrix(Q.dim()));
}

/// R'_ijkl = Q_ai Q_bj Q_ck Q_dl R_abcd.
inline Tensor rotate_curvature(const Tensor& R, const Tensor& Q)
{
    if (orthogonality_defect(Q) > 1e-12) throw DomainError("rotate_curvature: Q is not orthogonal");
    return transform_all(R, Q);
}

inline constexpr std::array<std::array<int, 4>, 6> kChernComponents{{
    {0, 1, 0, 2}, {0, 1, 0, 3}, {0, 1, 1, 2}, {0, 1, 1, 3}, {0, 2, 0, 3}, {0, 2, 1, 2},
}};

inline double chern_objective(const Tensor& R)
{
    if (R.dim() != 4 || R.rank() != 4) throw DimensionError("chern_objective needs 4D frame components");
    double s = 0.0;
    for (const auto& c : kChernComponents) s += R(c[0], c[1], c[2], c[3]) * R(c[0], c[1], c[2], c[3]);
    return s;
}

inline double frame_norm2(const Tensor& R)
{
    double s = 0.0;
    for (double v : R.data()) s += v * v;
    return s;
}

struct ChernSearchOptions {
    int restarts = 32;
    int iterations = 500;
    std::uint64_t seed = 0;
    double tolerance = 1e-16;  // success when objective <= tolerance (|R|² + 1)²
};

struct ChernSearchResult {
    Tensor Q;               // columns: the Chern basis in the input frame
    Tensor rotated;         // R in the returned basis
    double objective = 0;   // chern_objective(rotated)
    double threshold = 0;   // 1e-16 (|R|² + 1)²
    bool success = false;
    int restart = -1;       // index of the chosen restart
    int successes = 0;      // restarts that met the threshold
};

namespace detail {

using Mat4 = Eigen::Matrix4d;
using Vec6 = Eigen::Matrix<double, 6, 1>;
using Mat6 = Eigen::Matrix<double, 6, 6>;

inline constexpr std::array<std::array<int, 2>, 6> kGenerators{{{0, 1}, {0, 2}, {0, 3}, {1, 2}, {1, 3}, {2, 3}}};

inline Mat4 skew(const Vec6& t)
{
    Mat4 A = Mat4::Zero();
    for (int p = 0; p < 6; ++p) {
        A(kGenerators[p][0], kGenerators[p][1]) = t[p];
        A(kGenerators[p][1], kGenerators[p][0]) = -t[p];
    }
    return A;
}

inline Tensor to_tensor(const Mat4& m)
{
    Tensor t(4, 2);
    for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j) t(i, j) = m(i, j);
    return t;
}

inline Vec6 chern_residuals(const Tensor& S)
{
    Vec6 r;
    for (int p = 0; p < 6; ++p) {
        const auto& c = kChernComponents[p];
        r[p] = S(c[0], c[1], c[2], c[3]);
    }
    return r;
}

// d/dθ_p of the Chern components of rotate(S, exp(A(θ))) at θ = 0, where
// δS_ijkl = A_ai S_ajkl + A_bj S_ibkl + A_ck S_ijcl + A_dl S_ijkd.
inline Mat6 chern_jacobian(const Tensor& S)
{
    Mat6 J;
    for (int p = 0; p < 6; ++p) {
        const int u = kGenerators[p][0], v = kGenerators[p][1];
        // A_uv = 1, A_vu = −1: Σ_a A_ai X_a = (i == v ? X_u : 0) − (i == u ? X_v : 0)
        auto col = [&](int i, auto&& get) {
            double s = 0.0;
            if (i == v) s += get(u);
            if (i == u) s -= get(v);
            return s;
        };
        for (int r = 0; r < 6; ++r) {
            const auto& c = kChernComponents[r];
            const int i = c[0], j = c[1], k = c[2], l = c[3];
            J(r, p) = col(i, [&](int a) { return S(a, j, k, l); }) + col(j, [&](int b) { return S(i, b, k, l); }) +
                      col(k, [&](int cc) { return S(i, j, cc, l); }) + col(l, [&](int d) { return S(i, j, k, d); });
        }
    }
    return J;
}

inline Mat4 haar_rotation(std::mt19937_64& rng)
{
    std::normal_distribution<double> n01(0.0, 1.0);
    Mat4 X;
    for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j) X(i, j) = n01(rng);
    Eigen::HouseholderQR<Mat4> qr(X);
    Mat4 Q = qr.householderQ();
    const Mat4 Rm = qr.matrixQR().triangularView<Eigen::Upper>();
    for (int j = 0; j < 4; ++j)
        if (Rm(j, j) < 0) Q.col(j) *= -1.0;
    if (Q.determinant() < 0) Q.col(0) *= -1.0;
    return Q;
}

struct LocalResult {
    Mat4 Q;
    Tensor S;
    double f;
};

/// Levenberg–Marquardt on Q ← Q exp(A(θ)), run until no further decrease.
inline LocalResult chern_descent(const Tensor& R, Mat4 Q, int iterations)
{
    Tensor S = transform_all(R, to_tensor(Q));
    Vec6 r = chern_residuals(S);
    double f = r.squaredNorm();
    double lambda = 1e-3;
    for (int it = 0; it < iterations && f > 0.0; ++it) {
        const Mat6 J = chern_jacobian(S);
        const Mat6 A = J.transpose() * J;
        const Vec6 grad = J.transpose() * r;
        const double floor = 1e-15 * std::max(A.diagonal().maxCoeff(), 1e-300);
        bool accepted = false;
        while (lambda < 1e16) {
            Mat6 M = A;
            for (int d = 0; d < 6; ++d) M(d, d) += lambda * std::max(A(d, d), floor);
            const Vec6 step = M.ldlt().solve(-grad);
            const Mat4 Qn = Q * skew(step).exp();
            const Tensor Sn = transform_all(R, to_tensor(Qn));
            const Vec6 rn = chern_residuals(Sn);
            const double fn = rn.squaredNorm();
            if (fn < f) {
                Q = Qn;
                S = Sn;
                r = rn;
                f = fn;
                lambda = std::max(lambda * 0.1, 1e-12);
                accepted = true;
                break;
            }
            lambda *= 10.0;
        }
        if (!accepted) break;
    }
    return {Q, S, f};
}

}  // namespace detail

/// Multi-start local minimization of chern_objective over SO(4). Restart 0
/// starts at the identity; the rest at Haar-random rotations drawn from `seed`.
/// Among restarts meeting the threshold, the one closest to the identity in
/// Frobenius norm is returned (earliest on ties).
inline ChernSearchResult chern_basis_search(const Tensor& R, const ChernSearchOptions& opt = {})
{
    if (R.dim() != 4 || R.rank() != 4) throw DimensionError("chern_basis_search needs 4D frame components");
    const double n2 = frame_norm2(R);
    ChernSearchResult best;
    best.threshold = opt.tolerance * (n2 + 1.0) * (n2 + 1.0);
    std::mt19937_64 rng(opt.seed);
    double best_dist = 0.0;
    double fallback_f = -1.0;
    ChernSearchResult fallback = best;
    for (int k = 0; k < std::max(opt.restarts, 1); ++k) {
        const detail::Mat4 Q0 = k == 0 ? detail::Mat4::Identity() : detail::haar_rotation(rng);
        const auto loc = detail::chern_descent(R, Q0, opt.iterations);
        const double dist = (loc.Q - detail::Mat4::Identity()).norm();
        if (loc.f <= best.threshold) {
            ++best.successes;
            if (!best.success || dist < best_dist) {
                best.success = true;
                best_dist = dist;
                best.Q = detail::to_tensor(loc.Q);
                best.rotated = loc.S;
                best.objective = loc.f;
                best.restart = k;
            }
            if (dist == 0.0) break;
        } else if (fallback_f < 0 || loc.f < fallback_f) {
            fallback_f = loc.f;
            fallback.Q = detail::to_tensor(loc.Q);
            fallback.rotated = loc.S;
            fallback.objective = loc.f;
            fallback.restart = k;
        }
    }
    if (!best.success) {
        fallback.successes = 0;
        return fallback;
    }
    return best;
}

// ---------------------------------------------------------------------------
// Singer–Thorpe normal form
// ---------------------------------------------------------------------------

struct SingerThorpeReport {
    double einstein = 0.0;  // max |ρ − (τ/4) δ|
    double chern = 0.0;     // sqrt(chern_objective)
    double mixed = 0.0;     // max |R_abac| over three distinct indices
    double pairing = 0.0;   // max of |R_0101 − R_2323|, |R_0202 − R_1313|, |R_0303 − R_1212|
    double scale = 0.0;
    double tolerance = kIdentityTolerance;
    bool pass = false;
};

/// Block-diagonal Singer–Thorpe form: Einstein, every component with exactly
/// three distinct indices zero, and paired sectional curvatures equal.
inline SingerThorpeReport singer_thorpe_check(const Tensor& R, const Tensor& ricci, double tau,
                                              double tol = kIdentityTolerance)
{
    if (R.dim() != 4) throw DimensionError("singer_thorpe_check needs 4D frame components");
    SingerThorpeReport s;
    s.tolerance = tol;
    s.scale = max_abs(R);
    for (int a = 0; a < 4; ++a)
        for (int b = 0; b < 4; ++b) s.einstein = std::max(s.einstein, std::abs(ricci(a, b) - (a == b ? tau / 4 : 0.0)));
    s.chern = std::sqrt(chern_objective(R));
    for (int a = 0; a < 4; ++a)
        for (int b = 0; b < 4; ++b)
            for (int c = 0; c < 4; ++c) {
                if (b == a || c == a || c == b) continue;
                s.mixed = std::max(s.mixed, std::abs(R(a, b, a, c)));
            }
    s.pairing = std::max({std::abs(R(0, 1, 0, 1) - R(2, 3, 2, 3)), std::abs(R(0, 2, 0, 2) - R(1, 3, 1, 3)),
                          std::abs(R(0, 3, 0, 3) - R(1, 2, 1, 2))});
    s.pass = within_tolerance(std::max({s.einstein, s.chern, s.mixed, s.pairing}), s.scale, tol);
    return s;
}

// ---------------------------------------------------------------------------
// Chern-frame expansions
// ---------------------------------------------------------------------------

struct ExpansionResidual {
    std::string name;
    double residual = 0.0;  // max |lhs − rhs| over the group's equalities
    bool pass = false;
};

struct ChernExpansionReport {
    bool chern_frame = false;  // sqrt(objective) <= 1e-12 max|R|
    double chern_defect = 0.0;
    double scale = 0.0;  // |R|²
    double tolerance = kIdentityTolerance;
    std::vector<ExpansionResidual> groups;
    bool pass = false;
};

/// Evaluates both sides of every displayed component expansion in a Chern
/// frame (Riemannian, 0-based indices) and reports ten residual groups.
inline ChernExpansionReport chern_expansion_check(const Tensor& R, const Tensor& rho, double tau,
                                                  double tol = kIdentityTolerance)
{
    if (R.dim() != 4) throw DimensionError("chern_expansion_check needs 4D frame components");
    ChernExpansionReport rep;
    rep.tolerance = tol;
    rep.chern_defect = std::sqrt(chern_objective(R));
    rep.chern_frame = rep.chern_defect <= 1e-12 * std::max(max_abs(R), 1e-300) || rep.chern_defect == 0.0;

    auto r = [&](int a, int b, int c, int d) { return R(a - 1, b - 1, c - 1, d - 1); };
    auto p = [&](int a, int b) { return rho(a - 1, b - 1); };
    auto sq = [](double x) { return x * x; };
    const double N2 = frame_norm2(R);
    double P2 = 0.0;
    for (double v : rho.data()) P2 += v * v;
    rep.scale = N2;

    auto row = [&](int i) {
        double s = 0.0;
        for (int a = 0; a < 4; ++a)
            for (int b = 0; b < 4; ++b)
                for (int c = 0; c < 4; ++c) s += sq(R(a, b, c, i - 1));
        return s;
    };
    auto rowdot = [&](int i, int j) {
        double s = 0.0;
        for (int a = 0; a < 4; ++a)
            for (int b = 0; b < 4; ++b)
                for (int c = 0; c < 4; ++c) s += R(a, b, c, i - 1) * R(a, b, c, j - 1);
        return s;
    };
    auto rho_dot = [&](int i, int j) {
        double s = 0.0;
        for (int a = 0; a < 4; ++a) s += rho(i - 1, a) * rho(j - 1, a);
        return s;
    };
    auto rho_R = [&](int i, int j) {
        double s = 0.0;
        for (int a = 0; a < 4; ++a)
            for (int b = 0; b < 4; ++b) s += rho(a, b) * R(i - 1, a, b, j - 1);
        return s;
    };
    const double a = r(1, 2, 1, 2), b = r(1, 3, 1, 3), c = r(1, 4, 1, 4);
    const double d = r(2, 3, 2, 3), e = r(2, 4, 2, 4), f = r(3, 4, 3, 4);
    const double X = sq(r(1, 2, 3, 4)) + sq(r(1, 3, 2, 4)) + sq(r(1, 4, 2, 3));
    const double off = sq(p(1, 2)) + sq(p(1, 3)) + sq(p(1, 4)) + sq(p(2, 3)) + sq(p(2, 4)) + sq(p(3, 4));

    auto add = [&](const std::string& name, std::initializer_list<double> diffs) {
        double m = 0.0;
        for (double v : diffs) m = std::max(m, std::abs(v));
        rep.groups.push_back({name, m, false});
    };

    add("row_norm_1", {row(1) - 2 * (sq(a) + sq(b) + sq(c) + X + sq(p(1, 2)) + sq(p(1, 3)) + sq(p(1, 4)))});
    add("row_norms_2_3_4",
        {row(2) - 2 * (sq(a) + sq(d) + sq(e) + X + sq(p(1, 2)) + sq(p(2, 3)) + sq(p(2, 4)) + 2 * sq(p(3, 4))),
         row(3) - 2 * (sq(b) + sq(d) + sq(f) + X + sq(p(1, 3)) + 2 * sq(p(1, 4)) + sq(p(2, 3)) + 2 * sq(p(2, 4)) +
                       sq(p(3, 4))),
         row(4) - 2 * (sq(c) + sq(e) + sq(f) + X + 2 * sq(p(1, 2)) + 2 * sq(p(1, 3)) + sq(p(1, 4)) +
                       2 * sq(p(2, 3)) + sq(p(2, 4)) + sq(p(3, 4)))});
    add("curvature_norm",
        {N2 - 4 * (sq(a) + sq(b) + sq(c) + sq(d) + sq(e) + sq(f) + 2 * X + 2 * off)});
    add("ricci_expansions",
        {rho_dot(1, 1) - (sq(a) + sq(b) + sq(c) + 2 * a * b + 2 * b * c + 2 * a * c + sq(p(1, 2)) + sq(p(1, 3)) +
                          sq(p(1, 4))),
         rho_R(1, 1) - (sq(a) + sq(b) + sq(c) + a * d + a * e + b * d + b * f + c * e + c * f),
         tau * p(1, 1) - 2 * (sq(a) + sq(b) + sq(c) + 2 * a * b + 2 * b * c + 2 * a * c + a * d + a * e + a * f +
                              b * d + b * e + b * f + c * d + c * e + c * f),
         sq(p(1, 1)) + sq(p(2, 2)) + sq(p(3, 3)) + sq(p(4, 4)) + 2 * off - P2,
         P2 - 2 * (sq(a) + sq(b) + sq(c) + sq(d) + sq(e) + sq(f) + a * b + b * c + a * c + a * d + d * e + a * e +
                   b * d + d * f + b * f + c * e + e * f + c * f + off),
         tau * tau - 4 * (sq(a) + sq(b) + sq(c) + sq(d) + sq(e) + sq(f) + 2 * a * b + 2 * a * c + 2 * a * d +
                          2 * a * e + 2 * a * f + 2 * b * c + 2 * b * d + 2 * b * e + 2 * b * f + 2 * e * f +
                          2 * c * d + 2 * c * e + 2 * c * f + 2 * d * e + 2 * d * f)});
    auto diag = [&](int i) {
        return row(i) - 2 * rho_dot(i, i) - 2 * rho_R(i, i) + tau * p(i, i) - 0.25 * N2 + P2 - 0.25 * tau * tau;
    };
    add("diagonal_identity_1", {diag(1)});
    add("diagonal_identities_2_3_4", {diag(2), diag(3), diag(4)});
    const double lhs12 = rowdot(1, 2);
    add("offdiag_expansions_12",
        {lhs12 - 2 * (r(1, 4, 1, 4) * r(1, 4, 2, 4) + r(1, 4, 2, 3) * r(2, 3, 2, 4) + r(1, 3, 2, 4) * r(2, 3, 2, 4) +
                      r(1, 4, 2, 4) * r(2, 4, 2, 4) + r(1, 3, 3, 4) * r(2, 3, 3, 4) + r(1, 4, 3, 4) * r(2, 4, 3, 4)),
         lhs12 - 2 * (-p(1, 2) * c - p(3, 4) * r(1, 4, 2, 3) - p(3, 4) * r(1, 3, 2, 4) - p(1, 2) * e +
                      p(1, 4) * p(2, 4) + p(1, 3) * p(2, 3)),
         rho_dot(1, 2) - (p(1, 1) * p(2, 1) + p(1, 2) * p(2, 2) + p(1, 3) * p(2, 3) + p(1, 4) * p(2, 4)),
         rho_dot(1, 2) - (-p(1, 2) * (2 * a + b + c + d + e) + p(1, 3) * p(2, 3) + p(1, 4) * p(2, 4)),
         rho_R(1, 2) - (p(1, 2) * a - p(3, 4) * (r(1, 3, 2, 4) + r(1, 4, 2, 3)) + p(4, 4) * p(1, 2)),
         rho_R(1, 2) - (p(1, 2) * (a - c - e - f) - p(3, 4) * (r(1, 3, 2, 4) + r(1, 4, 2, 3))),
         tau * p(1, 2) + 2 * p(1, 2) * (a + b + c + d + e + f)});
    auto offd = [&](int i, int j) { return rowdot(i, j) - 2 * rho_dot(i, j) - 2 * rho_R(i, j) + tau * p(i, j); };
    add("offdiag_identity_12", {offd(1, 2)});
    add("offdiag_identities_13_14", {offd(1, 3), offd(1, 4)});
    add("offdiag_identities_23_24_34", {offd(2, 3), offd(2, 4), offd(3, 4)});

    rep.pass = rep.chern_frame;
    for (auto& g : rep.groups) {
        g.pass = within_tolerance(g.residual, N2, tol);
        rep.pass = rep.pass && g.pass;
    }
    return rep;
}

}  // namespace curvid
