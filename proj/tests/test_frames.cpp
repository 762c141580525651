#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "curvid/catalog.hpp"
#include "curvid/curvature.hpp"
#include "curvid/frames.hpp"
#include "curvid/identities.hpp"
#include "support.hpp"

using namespace curvid;
namespace ts = curvid::test_support;

namespace {

Tensor haar(std::mt19937_64& rng) { return detail::to_tensor(detail::haar_rotation(rng)); }

/// Random Einstein algebraic tensor on δ: Weyl part of a random tensor plus k·(δ ⊙ δ).
Tensor random_einstein(std::mt19937_64& rng, double k)
{
    const Tensor g = identity_matrix(4);
    const Tensor R = ts::random_algebraic_curvature(rng, 4);
    const auto pk = algebraic_pack(g, R);
    const Tensor rho0 = pk.ricci - (pk.tau / 4.0) * g;
    const Tensor W = R - 0.5 * ts::kulkarni_nomizu(rho0, g) - (pk.tau / 24.0) * ts::kulkarni_nomizu(g, g);
    return W + k * ts::kulkarni_nomizu(g, g);
}

}  // namespace

TEST(OrthonormalFrame, DiagonalMetric)
{
    const auto f = orthonormal_frame(ts::diagonal({4, 1, 1, 1}), Signature(4, 1));
    EXPECT_LT(max_abs(f.frame - ts::diagonal({0.5, 1, 1, 1})), 1e-15);
    EXPECT_EQ(f.eta, Signature(4, 1));
    EXPECT_EQ(f.defect, 0.0);
}

TEST(OrthonormalFrame, LorentzianMetric)
{
    const auto f = orthonormal_frame(ts::diagonal({-1, 1, 1, 1}), {-1, 1, 1, 1});
    EXPECT_EQ(f.eta, (Signature{-1, 1, 1, 1}));
    EXPECT_LT(max_abs(f.frame - identity_matrix(4)), 1e-15);
}

TEST(OrthonormalFrame, RandomMetricsAreOrthonormalized)
{
    std::mt19937_64 rng(1);
    for (int k = 0; k < 50; ++k) {
        const Tensor g = ts::random_spd(rng, 4, 0.3);
        const auto f = orthonormal_frame(g, Signature(4, 1));
        EXPECT_LT(f.defect, 1e-13);
        EXPECT_LT(max_abs(transform_all(g, f.frame) - identity_matrix(4)), 1e-13);
    }
}

TEST(OrthonormalFrame, Errors)
{
    EXPECT_THROW(orthonormal_frame(ts::diagonal({1, 1, 1, 0}), Signature(4, 1)), DegenerateMetricError);
    EXPECT_THROW(orthonormal_frame(ts::diagonal({-1, 1, 1, 1}), Signature(4, 1)), DegenerateMetricError);
    EXPECT_THROW(orthonormal_frame(ts::diagonal({1, 1, 1}), Signature(4, 1)), DimensionError);
}

TEST(RotateCurvature, PreservesNormAndRicciSpectrum)
{
    std::mt19937_64 rng(2);
    for (int k = 0; k < 30; ++k) {
        const Tensor R = ts::random_algebraic_curvature(rng, 4);
        const Tensor Q = haar(rng);
        EXPECT_LT(orthogonality_defect(Q), 1e-14);
        const Tensor S = rotate_curvature(R, Q);
        EXPECT_NEAR(frame_norm2(S), frame_norm2(R), 1e-11 * frame_norm2(R));
        EXPECT_LT(max_abs(frame_ricci(S) - transform_all(frame_ricci(R), Q)), 1e-12 * max_abs(R));
        EXPECT_LT(max_abs(rotate_curvature(S, transpose(Q)) - R), 1e-12 * max_abs(R));
    }
}

TEST(RotateCurvature, RejectsNonOrthogonal)
{
    Tensor Q = identity_matrix(4);
    Q(0, 1) = 0.1;
    EXPECT_THROW(rotate_curvature(ts::kulkarni_nomizu(Q, Q), Q), DomainError);
}

TEST(ChernObjective, Examples)
{
    const Tensor g = identity_matrix(4);
    EXPECT_EQ(chern_objective(0.5 * ts::kulkarni_nomizu(g, g)), 0.0);
    Tensor R(4, 4, 0.0);
    // R_0102 with its symmetric partners.
    R(0, 1, 0, 2) = R(1, 0, 2, 0) = R(0, 2, 0, 1) = R(2, 0, 1, 0) = 3.0;
    R(1, 0, 0, 2) = R(0, 1, 2, 0) = R(0, 2, 1, 0) = R(2, 0, 0, 1) = -3.0;
    EXPECT_EQ(chern_objective(R), 9.0);
    EXPECT_THROW(chern_objective(Tensor(3, 4, 0.0)), DimensionError);
}

TEST(ChernSearch, IdentityIsChosenWhenAlreadyAChernFrame)
{
    const auto e = catalog_metric("s2xs2", {{{"c1", 1.0}, {"c2", 2.0}}, ""});
    const auto fc = frame_curvature(curvature_pack(e.metric, {1.0, 2.0, 1.3, 0.4}));
    const auto r = chern_basis_search(fc.riemann);
    EXPECT_TRUE(r.success);
    EXPECT_EQ(r.restart, 0);
    EXPECT_LT(max_abs(r.Q - identity_matrix(4)), 1e-15);
}

TEST(ChernSearch, FindsBasisForRandomTensors)
{
    std::mt19937_64 rng(3);
    for (int k = 0; k < 30; ++k) {
        const Tensor R = ts::random_algebraic_curvature(rng, 4);
        const auto r = chern_basis_search(R, {32, 500, static_cast<std::uint64_t>(k)});
        ASSERT_TRUE(r.success) << k << " objective " << r.objective;
        EXPECT_LE(r.objective, r.threshold);
        const double n2 = frame_norm2(R);
        EXPECT_DOUBLE_EQ(r.threshold, 1e-16 * (n2 + 1) * (n2 + 1));
        EXPECT_LT(orthogonality_defect(r.Q), 1e-12);
        EXPECT_LT(max_abs(r.rotated - rotate_curvature(R, r.Q)), 1e-10 * max_abs(R));
    }
}

TEST(ChernSearch, IsDeterministicPerSeed)
{
    std::mt19937_64 rng(4);
    const Tensor R = ts::random_algebraic_curvature(rng, 4);
    const auto a = chern_basis_search(R, {8, 300, 17});
    const auto b = chern_basis_search(R, {8, 300, 17});
    EXPECT_EQ(a.restart, b.restart);
    EXPECT_EQ(a.objective, b.objective);
    EXPECT_EQ(max_abs(a.Q - b.Q), 0.0);
}

TEST(ChernSearch, InvariantUnderPermutedInput)
{
    // Relabelling the frame changes the objective but not whether a basis exists.
    std::mt19937_64 rng(5);
    const Tensor R = ts::random_algebraic_curvature(rng, 4);
    Tensor P(4, 2, 0.0);
    P(0, 2) = P(1, 0) = P(2, 3) = P(3, 1) = 1.0;
    const Tensor S = rotate_curvature(R, P);
    EXPECT_NEAR(frame_norm2(S), frame_norm2(R), 1e-12 * frame_norm2(R));
    EXPECT_TRUE(chern_basis_search(R).success);
    EXPECT_TRUE(chern_basis_search(S).success);
}

TEST(SingerThorpe, ConstantCurvatureAndSymmetricProduct)
{
    const Tensor g = identity_matrix(4);
    const Tensor R = 0.5 * ts::kulkarni_nomizu(g, g);
    const auto pk = algebraic_pack(g, R);
    EXPECT_TRUE(singer_thorpe_check(R, pk.ricci, pk.tau).pass);

    const auto e = catalog_metric("s2xs2");
    const auto fc = frame_curvature(curvature_pack(e.metric, {1.0, 2.0, 1.3, 0.4}));
    const auto r = chern_basis_search(fc.riemann);
    ASSERT_TRUE(r.success);
    EXPECT_TRUE(singer_thorpe_check(r.rotated, transform_all(fc.ricci, r.Q), fc.tau).pass);
}

TEST(SingerThorpe, RandomEinsteinTensors)
{
    std::mt19937_64 rng(6);
    for (int k = 0; k < 20; ++k) {
        const Tensor R = random_einstein(rng, 0.3 * (k % 5 - 2));
        const auto pk = algebraic_pack(identity_matrix(4), R);
        ASSERT_TRUE(einstein_residual(pk).pass);
        const auto r = chern_basis_search(R, {32, 500, static_cast<std::uint64_t>(k)});
        ASSERT_TRUE(r.success) << k;
        const auto st = singer_thorpe_check(r.rotated, transform_all(pk.ricci, r.Q), pk.tau);
        EXPECT_TRUE(st.pass) << k << " mixed " << st.mixed << " pairing " << st.pairing;
    }
}

TEST(SingerThorpe, NonEinsteinFails)
{
    const auto e = catalog_metric("s2xh2");
    const auto fc = frame_curvature(curvature_pack(e.metric, {1.0, 2.0, 1.0, 0.4}));
    const auto r = chern_basis_search(fc.riemann);
    ASSERT_TRUE(r.success);
    const auto st = singer_thorpe_check(r.rotated, transform_all(fc.ricci, r.Q), fc.tau);
    EXPECT_FALSE(st.pass);
    EXPECT_NEAR(st.einstein, 1.0, 1e-12);
}

TEST(ChernExpansion, SphereAndFlat)
{
    const Tensor g = identity_matrix(4);
    const Tensor R = 0.5 * ts::kulkarni_nomizu(g, g);
    const auto pk = algebraic_pack(g, R);
    const auto rep = chern_expansion_check(R, pk.ricci, pk.tau);
    EXPECT_TRUE(rep.pass);
    EXPECT_NEAR(rep.scale, 24.0, 1e-12);
    EXPECT_EQ(rep.groups.size(), 10u);

    const Tensor Z(4, 4, 0.0);
    const auto flat = chern_expansion_check(Z, Tensor(4, 2, 0.0), 0.0);
    EXPECT_TRUE(flat.pass);
    for (const auto& grp : flat.groups) EXPECT_EQ(grp.residual, 0.0) << grp.name;
}

TEST(ChernExpansion, HoldsInSearchedFramesOfRandomTensors)
{
    std::mt19937_64 rng(7);
    for (int k = 0; k < 30; ++k) {
        const Tensor R = ts::random_algebraic_curvature(rng, 4);
        const auto r = chern_basis_search(R, {32, 500, static_cast<std::uint64_t>(k)});
        ASSERT_TRUE(r.success);
        const auto rep = chern_expansion_check(r.rotated, frame_ricci(r.rotated), algebraic_pack(identity_matrix(4), R).tau);
        EXPECT_TRUE(rep.chern_frame);
        for (const auto& grp : rep.groups) EXPECT_LE(grp.residual, 1e-9 * rep.scale) << k << " " << grp.name;
        EXPECT_TRUE(rep.pass);
    }
}

TEST(ChernExpansion, RejectsNonChernFrame)
{
    std::mt19937_64 rng(8);
    const Tensor R = ts::random_algebraic_curvature(rng, 4);
    const auto rep = chern_expansion_check(R, frame_ricci(R), 0.0);
    EXPECT_FALSE(rep.chern_frame);
    EXPECT_FALSE(rep.pass);
}

TEST(FrameIndependence, ResidualTransformsAsATensor)
{
    for (const std::string name : {"polynomial_random", "conformal_flat", "s2xh2", "minkowski_perturbed"}) {
        const auto e = catalog_metric(name);
        std::mt19937_64 rng(9);
        for (int k = 0; k < 10; ++k) {
            const auto pk = curvature_pack(e.metric, ts::central(e.metric.domain()).sample(rng));
            const auto f = orthonormal_frame(pk.g, pk.signature);
            Tensor eta(4, 2, 0.0);
            for (int a = 0; a < 4; ++a) eta(a, a) = f.eta[a];
            const auto in_frame = algebraic_pack(eta, transform_all(pk.riemann, f.frame), f.eta);
            const auto coord = identity_residual(pk);
            const auto framed = identity_residual(in_frame);
            EXPECT_LE(framed.relative, 1e-9) << name;
            EXPECT_NEAR(framed.norm, coord.norm, 1e-9 * std::max(1.0, framed.scale)) << name;
            EXPECT_NEAR(in_frame.norm_R2, pk.norm_R2, 1e-9 * std::max(1.0, std::abs(pk.norm_R2))) << name;
            EXPECT_NEAR(in_frame.tau, pk.tau, 1e-9 * std::max(1.0, std::abs(pk.tau))) << name;
        }
    }
}
