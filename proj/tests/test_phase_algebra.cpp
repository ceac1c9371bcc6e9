#include <gtest/gtest.h>

#include <random>

#include "marsft/phase_algebra.hpp"

using namespace marsft;
using namespace marsft::phase_algebra;

TEST(StaticLocks, SingleStation) {
    const std::vector<double> p{0.7, 0.3};
    const auto s = solve_static_locks(1.0, p);
    ASSERT_EQ(s.stations(), 1u);
    EXPECT_NEAR(s.phi_c[0], 0.2, 1e-15);
    EXPECT_NEAR(recovered_output_phase(s, RemoteSite{}), 1.0, 1e-15);
}

TEST(StaticLocks, NoiselessChainSitsAtHalfPhase) {
    const std::vector<double> p(8, 0.0);
    const auto s = solve_static_locks(0.9, p);
    for (double c : s.phi_c) EXPECT_EQ(c, 0.45);
    EXPECT_EQ(recovered_output_phase(s, RemoteSite{}), 0.9);
    for (std::size_t k = 1; k <= s.stations(); ++k) EXPECT_EQ(recovered_output_phase(s, Station{k}), 0.9);
}

TEST(StaticLocks, InteriorIdentitiesHold) {
    std::mt19937_64 rng(17);
    std::uniform_real_distribution<double> u(-3.0, 3.0);
    std::vector<double> p(6);
    for (double& v : p) v = u(rng);
    const auto s = solve_static_locks(u(rng), p);
    EXPECT_LT(lock_identity_violation(s), 1e-12);
}

TEST(StaticLocks, RandomizedRecovery) {
    std::mt19937_64 rng(2024);
    std::uniform_int_distribution<std::size_t> n_dist(1, 32);
    std::uniform_real_distribution<double> u(-kPi, kPi);
    double worst = 0.0;
    for (int trial = 0; trial < 10000; ++trial) {
        const std::size_t n = n_dist(rng);
        std::vector<double> p(n + 1);
        for (double& v : p) v = u(rng);
        const double r = u(rng);
        const auto s = solve_static_locks(r, p);
        worst = std::max(worst, std::abs(recovered_output_phase(s, RemoteSite{}) - r));
        for (std::size_t k = 1; k <= n; ++k) worst = std::max(worst, std::abs(recovered_output_phase(s, Station{k}) - r));
        worst = std::max(worst, lock_identity_violation(s));
    }
    EXPECT_LT(worst, 1e-12);
}

TEST(StaticLocks, Errors) {
    const std::vector<double> one{0.1};
    EXPECT_THROW(solve_static_locks(0.0, one), ModelError);
    const std::vector<double> p{0.1, 0.2, 0.3};
    const auto s = solve_static_locks(0.0, p);
    EXPECT_THROW(recovered_output_phase(s, Station{0}), ModelError);
    EXPECT_THROW(recovered_output_phase(s, Station{3}), ModelError);
}

TEST(LockedFrequencies, AllAtHalfTheStandard) {
    const double wr = kTwoPi * 2e9;
    for (std::size_t n : {1u, 2u, 7u, 29u}) {
        const auto w = locked_frequencies(wr, n);
        ASSERT_EQ(w.size(), n);
        for (std::size_t k = 0; k < n; ++k) EXPECT_DOUBLE_EQ(w[k], wr / 2.0);
        for (std::size_t k = 0; k + 1 < n; ++k) EXPECT_DOUBLE_EQ(w[k] + w[k + 1], wr);
    }
}
