#include <gtest/gtest.h>

#include "softran/lp.hpp"

using namespace softran;

TEST(Simplex, TwoVariableMinimum) {
    // min x + y  s.t.  x + 2y >= 4,  3x + y >= 6
    Eigen::MatrixXd A(2, 2);
    A << -1, -2, -3, -1;
    const Eigen::VectorXd b = Eigen::Vector2d(-4, -6);
    const Eigen::VectorXd c = Eigen::Vector2d(1, 1);
    const auto r = lp::minimize(A, b, c);
    ASSERT_EQ(r.status, lp::Status::optimal);
    EXPECT_NEAR(r.x[0], 1.6, 1e-9);
    EXPECT_NEAR(r.x[1], 1.2, 1e-9);
    EXPECT_NEAR(r.value, 2.8, 1e-9);
}

TEST(Simplex, ZeroIsOptimalWhenFeasible) {
    Eigen::MatrixXd A(1, 3);
    A << 1, 1, 1;
    const auto r = lp::minimize(A, Eigen::VectorXd::Constant(1, 5.0), Eigen::VectorXd::Ones(3));
    ASSERT_EQ(r.status, lp::Status::optimal);
    EXPECT_EQ(r.value, 0.0);
}

TEST(Simplex, DetectsInfeasibility) {
    // x <= 1 and x >= 2
    Eigen::MatrixXd A(2, 1);
    A << 1, -1;
    const auto r = lp::minimize(A, Eigen::Vector2d(1, -2), Eigen::VectorXd::Ones(1));
    EXPECT_EQ(r.status, lp::Status::infeasible);
}

TEST(Simplex, DetectsUnboundedness) {
    Eigen::MatrixXd A(1, 2);
    A << 1, -1;
    const auto r = lp::minimize(A, Eigen::VectorXd::Constant(1, 1.0), Eigen::Vector2d(0, -1));
    EXPECT_EQ(r.status, lp::Status::unbounded);
}

TEST(Simplex, DegenerateRowsTerminate) {
    // repeated constraints through the same vertex
    Eigen::MatrixXd A(4, 2);
    A << -1, -1, -1, -1, -2, -2, 1, 0;
    const auto r = lp::minimize(A, Eigen::Vector4d(-1, -1, -2, 0), Eigen::Vector2d(2, 1));
    ASSERT_EQ(r.status, lp::Status::optimal);
    EXPECT_NEAR(r.value, 1.0, 1e-12);
    EXPECT_NEAR(r.x[1], 1.0, 1e-12);
}
