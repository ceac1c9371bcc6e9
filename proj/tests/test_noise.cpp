#include <gtest/gtest.h>

#include <cmath>
#include <numeric>

#include "marsft/fft.hpp"
#include "marsft/noise.hpp"

using namespace marsft;

TEST(FiberPsd, OneKmAtOneHz) {
    const double wr = kTwoPi * 2e9;
    const double s = noise::fiber_psd(noise::PowerLawCoeffs::fiber_defaults(), 1.0, wr, 1.0);
    EXPECT_NEAR(s, wr * wr * 6.3005e-33, 1e-25);
    EXPECT_NEAR(s, 9.95e-13, 0.01e-13);
}

TEST(FiberPsd, LinearInLength) {
    const auto h = noise::PowerLawCoeffs::fiber_defaults();
    const double wr = kTwoPi * 2e9;
    for (double f : {1e-3, 1.0, 1e3})
        EXPECT_DOUBLE_EQ(noise::fiber_psd(h, 100.0, wr, f), 100.0 * noise::fiber_psd(h, 1.0, wr, f));
    EXPECT_EQ(noise::fiber_psd(h, 0.0, wr, 1.0), 0.0);
}

TEST(FiberPsd, RejectsBadInputs) {
    const auto h = noise::PowerLawCoeffs::fiber_defaults();
    EXPECT_THROW(noise::fiber_psd(h, 1.0, 1.0, 0.0), ModelError);
    EXPECT_THROW(noise::fiber_psd(h, -1.0, 1.0, 1.0), ModelError);
    noise::PowerLawCoeffs bad{-1.0, 0, 0, 0};
    EXPECT_THROW(bad.check(), ModelError);
}

TEST(Floor, DbcConversion) {
    noise::NoiseFloorSpec spec;
    spec.white_ssb_dbc = -100.0;
    EXPECT_NEAR(noise::floor_psd(spec, 3.0), 2e-10, 1e-24);
    EXPECT_NEAR(sphi_to_ssb_dbc(2e-10), -100.0, 1e-12);
    EXPECT_EQ(noise::floor_psd(noise::NoiseFloorSpec{}, 1.0), 0.0);
    EXPECT_EQ(noise::ase_detector_psd(noise::NoiseFloorSpec::disabled()), 0.0);
    // -78 dBc/Hz quoted, -30 dB onto the detector
    EXPECT_NEAR(noise::ase_detector_psd(noise::NoiseFloorSpec{}), 2.0 * std::pow(10.0, -10.8), 1e-25);
}

namespace {

double mean_ratio(const SpectralDensity& est, const std::function<double(double)>& target, double f0, double f1) {
    double acc = 0.0;
    int n = 0;
    for (std::size_t i = 0; i < est.size(); ++i) {
        if (est.freqs[i] < f0 || est.freqs[i] > f1) continue;
        acc += est.values[i] / target(est.freqs[i]);
        ++n;
    }
    return acc / n;
}

}  // namespace

TEST(Synthesis, WhiteLevelMatchesTarget) {
    const double s0 = 3e-6, fs = 1000.0;
    auto target = [&](double) { return s0; };
    const auto x = noise::synthesize_series(target, {fs, 1 << 18, 7, 0.0});
    const auto est = fft::welch_psd(x, fs, 1024);
    EXPECT_NEAR(mean_ratio(est, target, 10.0, 490.0), 1.0, 0.03);
    // Parseval: variance = S0 fs / 2
    const double var = std::inner_product(x.begin(), x.end(), x.begin(), 0.0) / x.size();
    EXPECT_NEAR(var / (s0 * fs / 2.0), 1.0, 0.02);
}

TEST(Synthesis, PowerLawSlopes) {
    const double fs = 100.0;
    for (double alpha : {-1.0, -2.0, -3.0}) {
        auto target = [&](double f) { return 1e-4 * std::pow(f, alpha); };
        const auto x = noise::synthesize_series(target, {fs, 1 << 20, 11, 0.0});
        const auto est = fft::welch_psd(x, fs, 1 << 12);
        EXPECT_NEAR(mean_ratio(est, target, 0.5, 5.0), 1.0, 0.1) << "alpha " << alpha;
    }
}

TEST(Synthesis, Deterministic) {
    auto target = [](double f) { return 1e-3 / f; };
    const auto a = noise::synthesize_series(target, {50.0, 4096, 42, 0.0});
    const auto b = noise::synthesize_series(target, {50.0, 4096, 42, 0.0});
    const auto c = noise::synthesize_series(target, {50.0, 4096, 43, 0.0});
    EXPECT_EQ(a, b);
    EXPECT_NE(a, c);
}

TEST(Synthesis, ZeroTargetGivesZeros) {
    const auto x = noise::synthesize_series([](double) { return 0.0; }, {10.0, 64, 1, 0.0});
    ASSERT_EQ(x.size(), 64u);
    for (double v : x) EXPECT_EQ(v, 0.0);
}

TEST(Synthesis, RejectsTooShortOrUnresolved) {
    auto target = [](double) { return 1.0; };
    EXPECT_THROW(noise::synthesize_series(target, {10.0, 16, 1, 0.0}), ModelError);
    EXPECT_THROW(noise::synthesize_series(target, {10.0, 100, 1, 0.0}), ModelError);
    // resolution 10/64 Hz cannot represent 0.01 Hz
    EXPECT_THROW(noise::synthesize_series(target, {10.0, 64, 1, 0.01}), ModelError);
    EXPECT_NO_THROW(noise::synthesize_series(target, {10.0, 1024, 1, 0.01}));
}

TEST(FiberPsd, LinearInEachCoefficient) {
    const double wr = kTwoPi * 2e9;
    const noise::PowerLawCoeffs parts[] = {{1e-34, 0, 0, 0}, {0, 2e-34, 0, 0}, {0, 0, 6e-33, 0}, {0, 0, 0, 5e-37}};
    for (double f : {1e-3, 0.5, 20.0, 3e4}) {
        double sum = 0.0;
        for (const auto& h : parts) {
            sum += noise::fiber_psd(h, 3.0, wr, f);
            const noise::PowerLawCoeffs tripled{3 * h.h_m3, 3 * h.h_m2, 3 * h.h_m1, 3 * h.h_0};
            EXPECT_NEAR(noise::fiber_psd(tripled, 3.0, wr, f) / noise::fiber_psd(h, 3.0, wr, f), 3.0, 3e-12);
        }
        EXPECT_NEAR(sum / noise::fiber_psd(noise::PowerLawCoeffs::fiber_defaults(), 3.0, wr, f), 1.0, 1e-12);
    }
}

TEST(Synthesis, CentralDecadesWithinOneAndAHalfDb) {
    const double fs = 1000.0;
    const std::size_t n = 1 << 20, seg = n / 32;
    auto target = [](double f) { return 1e-6 / f + 1e-9; };
    const auto x = noise::synthesize_series(target, {fs, n, 5, 0.0});
    ASSERT_GE(fft::welch_segment_count(n, seg), 16u);
    const auto est = fft::welch_psd(x, fs, seg);
    // resolvable band fs/seg .. fs/2; central two decades around its geometric centre
    const double lo = fs / seg, hi = fs / 2;
    const double mid = std::sqrt(lo * hi);
    // third-octave bands; single bins scatter by ~0.6 dB at this averaging depth
    int bands = 0;
    for (double b0 = mid / 10; b0 < mid * 10; b0 *= std::pow(2.0, 1.0 / 3.0)) {
        const double b1 = b0 * std::pow(2.0, 1.0 / 3.0);
        const double r = mean_ratio(est, target, b0, b1);
        EXPECT_LT(std::abs(10 * std::log10(r)), 1.5) << b0;
        ++bands;
    }
    EXPECT_GT(bands, 15);
}

TEST(Synthesis, RandomWalkSlope) {
    const double fs = 1000.0;
    auto target = [](double f) { return 1e-4 / (f * f); };
    const auto x = noise::synthesize_series(target, {fs, 1 << 20, 21, 0.0});
    const auto est = fft::welch_psd(x, fs, 1 << 14);
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    int m = 0;
    for (std::size_t i = 0; i < est.size(); ++i) {
        if (est.freqs[i] < 1.0 || est.freqs[i] > 100.0) continue;
        const double lx = std::log10(est.freqs[i]), ly = std::log10(est.values[i]);
        sx += lx, sy += ly, sxx += lx * lx, sxy += lx * ly, ++m;
    }
    const double slope = (m * sxy - sx * sy) / (m * sxx - sx * sx);
    EXPECT_NEAR(slope, -2.0, 0.2);
}

TEST(Synthesis, ParsevalForFlicker) {
    const double fs = 1000.0;
    const std::size_t n = 1 << 20;
    auto target = [](double f) { return 1e-6 / f; };
    const auto x = noise::synthesize_series(target, {fs, n, 8, 0.0});
    double mean = 0.0;
    for (double v : x) mean += v;
    mean /= n;
    double var = 0.0;
    for (double v : x) var += (v - mean) * (v - mean);
    var /= n;
    // integral of the synthesized band, fs/n .. fs/2
    const double expect = 1e-6 * std::log((fs / 2) / (fs / n));
    EXPECT_NEAR(var / expect, 1.0, 0.05);
}
