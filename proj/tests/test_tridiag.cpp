#include <gtest/gtest.h>

#include <Eigen/Dense>
#include <random>

#include "marsft/tridiag.hpp"

using namespace marsft;
using cplx = std::complex<double>;

TEST(Thomas, MatchesDenseSolve) {
    std::mt19937 rng(5);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    for (std::size_t n : {1u, 2u, 3u, 17u, 64u}) {
        Tridiagonal<cplx> a(n);
        Eigen::MatrixXcd dense = Eigen::MatrixXcd::Zero(n, n);
        for (std::size_t i = 0; i < n; ++i) {
            a.diag[i] = cplx(4.0 + u(rng), u(rng));
            dense(i, i) = a.diag[i];
            if (i > 0) {
                a.lower[i] = cplx(u(rng), u(rng));
                dense(i, i - 1) = a.lower[i];
            }
            if (i + 1 < n) {
                a.upper[i] = cplx(u(rng), u(rng));
                dense(i, i + 1) = a.upper[i];
            }
        }
        std::vector<cplx> b(n);
        Eigen::VectorXcd be(n);
        for (std::size_t i = 0; i < n; ++i) be(i) = b[i] = cplx(u(rng), u(rng));

        const Eigen::VectorXcd xe = dense.partialPivLu().solve(be);
        ThomasFactor<cplx> lu(a);
        lu.solve(b);
        for (std::size_t i = 0; i < n; ++i) EXPECT_LT(std::abs(b[i] - xe(i)), 1e-12) << "n=" << n << " i=" << i;

        const auto ax = a.apply(b);
        for (std::size_t i = 0; i < n; ++i) EXPECT_LT(std::abs(ax[i] - be(i)), 1e-12);
    }
}

TEST(Thomas, SingularPivotThrows) {
    Tridiagonal<double> a(2);
    a.diag = {1.0, 1.0};
    a.upper = {1.0, 0.0};
    a.lower = {0.0, 1.0};
    EXPECT_THROW(ThomasFactor<double>{a}, SingularSystem);
    Tridiagonal<double> z(1);
    EXPECT_THROW(ThomasFactor<double>{z}, SingularSystem);
    EXPECT_THROW(ThomasFactor<double>{Tridiagonal<double>(0)}, SingularSystem);
}

TEST(Thomas, ReusedFactorAcrossRightHandSides) {
    Tridiagonal<double> a(3);
    a.diag = {2.0, 2.0, 2.0};
    a.lower = {0.0, -1.0, -1.0};
    a.upper = {-1.0, -1.0, 0.0};
    ThomasFactor<double> lu(a);
    std::vector<double> b1{1.0, 0.0, 1.0}, b2{0.0, 2.0, 0.0};
    lu.solve(b1);
    lu.solve(b2);
    for (double v : b1) EXPECT_NEAR(v, 1.0, 1e-15);
    EXPECT_NEAR(b2[1], 2.0, 1e-15);
    EXPECT_NEAR(b2[0], 1.0, 1e-15);
}
