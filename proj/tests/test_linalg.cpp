#include <gtest/gtest.h>

#include <random>

#include "wavest/linalg.hpp"

using namespace wavest;

namespace {

CompressedMatrix from_dense(const Eigen::MatrixXd& d) { return d.sparseView(); }

} // namespace

TEST(SolveSpd, SmallCases) {
    const Vector b = Vector::LinSpaced(5, 1.0, 5.0);
    CompressedMatrix id(5, 5);
    id.setIdentity();
    EXPECT_LE((solve_spd(id, b) - b).norm(), 1e-15);

    Eigen::Matrix2d a;
    a << 2, 1, 1, 2;
    const Vector x = solve_spd(from_dense(a), Vector::Constant(2, 3.0));
    EXPECT_NEAR(x[0], 1.0, 1e-14);
    EXPECT_NEAR(x[1], 1.0, 1e-14);
}

TEST(SolveSpd, RandomProbes) {
    for (unsigned seed = 0; seed < 20; ++seed) {
        std::mt19937 rng(seed);
        std::normal_distribution<double> g;
        Eigen::MatrixXd bmat(50, 50);
        for (int i = 0; i < 50; ++i) {
            for (int j = 0; j < 50; ++j) bmat(i, j) = g(rng);
        }
        const Eigen::MatrixXd a = bmat.transpose() * bmat + Eigen::MatrixXd::Identity(50, 50);
        Vector b(50);
        for (auto& v : b) v = g(rng);
        const auto sa = from_dense(a);
        EXPECT_LE(relative_residual(sa, solve_spd(sa, b), b), 1e-12);
    }
}

TEST(SolveSpd, RejectsIndefinite) {
    Eigen::Matrix2d a;
    a << 1, 0, 0, -1;
    EXPECT_THROW(solve_spd(from_dense(a), Vector::Ones(2)), SolverFailure);
}

TEST(SolveGeneral, Permutations) {
    Eigen::Matrix2d a;
    a << 0, 1, 1, 0;
    const Vector x = solve_general(from_dense(a), Vector::LinSpaced(2, 1.0, 2.0));
    EXPECT_DOUBLE_EQ(x[0], 2.0);
    EXPECT_DOUBLE_EQ(x[1], 1.0);

    std::vector<int> perm{3, 0, 4, 1, 2};
    Triplets t;
    for (int i = 0; i < 5; ++i) t.emplace_back(i, perm[i], 1.0);
    CompressedMatrix p(5, 5);
    p.setFromTriplets(t.begin(), t.end());
    const Vector b = Vector::LinSpaced(5, 1.0, 5.0);
    const Vector y = solve_general(p, b);
    for (int i = 0; i < 5; ++i) EXPECT_DOUBLE_EQ(y[perm[i]], b[i]);
}

TEST(SolveGeneral, RandomProbesRecoverKnownSolution) {
    for (unsigned seed = 0; seed < 20; ++seed) {
        std::mt19937 rng(100 + seed);
        std::normal_distribution<double> g;
        std::uniform_int_distribution<int> col(0, 79);
        Triplets t;
        for (int i = 0; i < 80; ++i) {
            t.emplace_back(i, i, 10.0 + std::abs(g(rng)));
            for (int k = 0; k < 4; ++k) t.emplace_back(i, col(rng), g(rng));
        }
        CompressedMatrix a(80, 80);
        a.setFromTriplets(t.begin(), t.end());
        Vector x(80);
        for (auto& v : x) v = g(rng);
        const Vector b = a * x;
        const Vector y = solve_general(a, b);
        EXPECT_LE(relative_residual(a, y, b), 1e-11);
        EXPECT_LE((y - x).norm(), 1e-9 * x.norm());
    }
}

TEST(SolveGeneral, Errors) {
    CompressedMatrix rect(2, 3);
    EXPECT_THROW(solve_general(rect, Vector::Ones(2)), InvalidArgument);
    Eigen::Matrix2d s;
    s << 1, 2, 2, 4;
    EXPECT_THROW(solve_general(from_dense(s), Vector::Ones(2)), SolverFailure);
}

TEST(ExtractBlock, PicksEntries) {
    Eigen::Matrix3d d;
    d << 1, 2, 3, 4, 5, 6, 7, 8, 9;
    const auto blk = extract_block(from_dense(d), {2, 0}, {1, 2});
    EXPECT_EQ(Eigen::MatrixXd(blk), (Eigen::Matrix2d() << 8, 9, 2, 3).finished());
}
