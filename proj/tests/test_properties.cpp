#include <gtest/gtest.h>

#include "properties.hpp"

namespace ts = curvid::test_support;

namespace {

void expect_green(const ts::PropertyOutcome& o)
{
    EXPECT_TRUE(o.pass()) << o.name << ": " << o.failures << "/" << o.cases << " failed, first: " << o.first_failure
                          << ", worst " << o.worst;
}

}  // namespace

class PropertySeeds : public ::testing::TestWithParam<std::uint64_t> {};

TEST_P(PropertySeeds, RiemannSymmetriesBianchiAndCompatibility) { expect_green(ts::riemann_properties(GetParam(), 60)); }

TEST_P(PropertySeeds, TraceOfResidualOnAlgebraicTensors) { expect_green(ts::trace_properties(GetParam(), 300)); }

TEST_P(PropertySeeds, ResidualIsFrameIndependent) { expect_green(ts::frame_properties(GetParam(), 60)); }

TEST_P(PropertySeeds, VariationsAreLinearInH) { expect_green(ts::linearity_properties(GetParam(), 40)); }

INSTANTIATE_TEST_SUITE_P(Seeds, PropertySeeds, ::testing::Values(1u, 2u, 3u));

TEST(PropertyOutcome, CountsFailures)
{
    ts::PropertyOutcome o{"x"};
    EXPECT_FALSE(o.pass());
    o.record(true, 0.1, "a");
    EXPECT_TRUE(o.pass());
    o.record(false, 0.5, "b");
    o.record(false, 0.2, "c");
    EXPECT_FALSE(o.pass());
    EXPECT_EQ(o.failures, 2);
    EXPECT_EQ(o.first_failure, "b");
    EXPECT_EQ(o.worst, 0.5);
}
