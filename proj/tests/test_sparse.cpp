#include <gtest/gtest.h>

#include <vector>

#include <Eigen/SparseCore>

#include "shapeopt/errors.hpp"
#include "shapeopt/sparse.hpp"

using namespace shapeopt;

namespace {

// 1-D Laplacian stencil [-1 2 -1] on n points.
SparseMatrix laplacian_1d(int n) {
    std::vector<Eigen::Triplet<double>> t;
    for (int i = 0; i < n; ++i) {
        t.emplace_back(i, i, 2.0);
        if (i > 0) t.emplace_back(i, i - 1, -1.0);
        if (i + 1 < n) t.emplace_back(i, i + 1, -1.0);
    }
    SparseMatrix a(n, n);
    a.setFromTriplets(t.begin(), t.end());
    return a;
}

}  // namespace

TEST(ConstrainedSpdSolver, DiscreteParabola) {
    // -u'' = 2 on a grid with h = 1: exact discrete solution u_i = i (n-1-i) with u = 0 at both ends.
    const int n = 11;
    std::vector<char> fixed(n, 0);
    fixed.front() = fixed.back() = 1;
    const ConstrainedSpdSolver solver(laplacian_1d(n), fixed);
    EXPECT_EQ(solver.free_size(), n - 2);
    const Eigen::VectorXd x = solver.solve(Eigen::VectorXd::Constant(n, 2.0));
    for (int i = 0; i < n; ++i) {
        EXPECT_NEAR(x[i], static_cast<double>(i * (n - 1 - i)), 1e-10);
    }
}

TEST(ConstrainedSpdSolver, NonzeroConstrainedValuesGiveLinearProfile) {
    const int n = 9;
    std::vector<char> fixed(n, 0);
    fixed.front() = fixed.back() = 1;
    const ConstrainedSpdSolver solver(laplacian_1d(n), fixed);
    Eigen::VectorXd values = Eigen::VectorXd::Zero(n);
    values[0] = 1.0;
    values[n - 1] = 3.0;
    const Eigen::VectorXd x = solver.solve(Eigen::VectorXd::Zero(n), values);
    for (int i = 0; i < n; ++i) {
        EXPECT_NEAR(x[i], 1.0 + 2.0 * i / (n - 1), 1e-12);
    }
}

TEST(ConstrainedSpdSolver, UnconstrainedLaplacianIsSingular) {
    std::vector<char> none(6, 0);
    // The pure Neumann stencil [1 -1; -1 2 -1; ...; -1 1] has the constants in its kernel.
    SparseMatrix a = laplacian_1d(6);
    a.coeffRef(0, 0) = 1.0;
    a.coeffRef(5, 5) = 1.0;
    EXPECT_THROW(ConstrainedSpdSolver(a, none), SolverError);
}

TEST(ConstrainedSpdSolver, IndefiniteMatrixRejected) {
    SparseMatrix a = laplacian_1d(4);
    a.coeffRef(1, 1) = -3.0;
    std::vector<char> none(4, 0);
    EXPECT_THROW(ConstrainedSpdSolver(a, none), SolverError);
}
