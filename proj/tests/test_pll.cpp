#include <gtest/gtest.h>

#include "marsft/pll.hpp"

using namespace marsft;

TEST(OpenLoopGain, DefaultsAtOneHz) {
    const auto g = pll::open_loop_gain(pll::PllParams{}, kTwoPi);
    EXPECT_NEAR(g.real(), -1.2158e4, 1.0);
    EXPECT_NEAR(g.imag(), -244.46, 0.01);
}

TEST(OpenLoopGain, HighFrequencyIsProportionalPath) {
    // |G| -> K_P K_PFD K_VCO / w once the integrator has rolled off
    const pll::PllParams p;
    const double w = 1e7;
    EXPECT_NEAR(std::abs(pll::open_loop_gain(p, w)), 800 * 0.06 * 32 / w, 1e-3 * 800 * 0.06 * 32 / w);
}

TEST(OpenLoopGain, LowFrequencyDiverges) {
    const pll::PllParams p;
    EXPECT_GT(std::abs(pll::open_loop_gain(p, 1e-3)), 1e11);
    EXPECT_THROW(pll::open_loop_gain(p, 0.0), ModelError);
    EXPECT_THROW(pll::open_loop_gain(p, -1.0), ModelError);
}

TEST(OpenLoopGain, OpenParamsGiveZero) {
    const auto open = pll::PllParams{}.with_gain_scale(0.0);
    EXPECT_TRUE(open.is_open());
    EXPECT_EQ(pll::open_loop_gain(open, 1.0), pll::cplx(0.0, 0.0));
}

TEST(PllParams, Validation) {
    pll::PllParams p;
    p.k_vco = 0.0;
    EXPECT_THROW(p.check(), ModelError);
    p = {};
    p.k_p = -1.0;
    EXPECT_THROW(p.check(), ModelError);
    EXPECT_NO_THROW(pll::PllParams{}.check());
}

TEST(OpenLoopGain, ConstantPhaseForSinglePaths) {
    pll::PllParams prop;
    prop.k_i = 0.0;
    pll::PllParams integ;
    integ.k_p = 0.0;
    for (double w : {1e-3, 1.0, 1e3, 1e6}) {
        EXPECT_NEAR(std::arg(pll::open_loop_gain(prop, w)), -kPi / 2, 1e-9);
        EXPECT_NEAR(std::abs(std::arg(pll::open_loop_gain(integ, w))), kPi, 1e-9);
    }
    EXPECT_NEAR(std::abs(pll::open_loop_gain(prop, 2.0)) * 2.0, std::abs(pll::open_loop_gain(prop, 1.0)), 1e-12);
}

TEST(OpenLoopGain, MagnitudeDecreasing) {
    for (const auto& p : {pll::PllParams{}, pll::PllParams{1.0, 1e6, 0.1, 10.0}, pll::PllParams{1e4, 1.0, 1.0, 1.0}}) {
        double prev = std::abs(pll::open_loop_gain(p, 1e-4));
        for (double w = 2e-4; w < 1e7; w *= 1.3) {
            const double m = std::abs(pll::open_loop_gain(p, w));
            EXPECT_LT(m, prev);
            prev = m;
        }
    }
}
