#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

#include <Eigen/Geometry>

#include "shapeopt/errors.hpp"
#include "shapeopt/fem.hpp"
#include "shapeopt/verify.hpp"

using namespace shapeopt;
using std::numbers::pi;

namespace {

NodalField nodal(const TriMesh& mesh, auto&& fn) {
    NodalField f = NodalField::zeros(mesh);
    for (std::size_t v = 0; v < mesh.num_vertices(); ++v) {
        f.values[static_cast<Eigen::Index>(v)] = fn(mesh.vertex(static_cast<int>(v)));
    }
    return f;
}

}  // namespace

TEST(ElementStiffness, ReferenceTriangle) {
    const Eigen::Matrix3d k = element_stiffness({0, 0}, {1, 0}, {0, 1});
    Eigen::Matrix3d expected;
    expected << 1.0, -0.5, -0.5,
               -0.5, 0.5, 0.0,
               -0.5, 0.0, 0.5;
    EXPECT_LT((k - expected).cwiseAbs().maxCoeff(), 1e-15);
}

TEST(ElementStiffness, RowSumsVanishAndInvariantUnderRigidMotion) {
    const Vec2 a(0.1, 0.2), b(0.7, 0.25), c(0.3, 0.9);
    const Eigen::Matrix3d k = element_stiffness(a, b, c);
    EXPECT_LT((k * Eigen::Vector3d::Ones()).cwiseAbs().maxCoeff(), 1e-14);
    EXPECT_LT((k - k.transpose()).cwiseAbs().maxCoeff(), 1e-15);
    const Eigen::Rotation2Dd rot(0.7);
    const Vec2 shift(3.0, -1.0);
    const Eigen::Matrix3d moved = element_stiffness(rot * a + shift, rot * b + shift, rot * c + shift);
    EXPECT_LT((k - moved).cwiseAbs().maxCoeff(), 1e-13);
}

TEST(ElementStiffness, DegenerateOrClockwiseThrows) {
    EXPECT_THROW((void)element_stiffness({0, 0}, {0, 1}, {1, 0}), InvertedElementError);
    EXPECT_THROW((void)element_stiffness({0, 0}, {1, 1}, {2, 2}), InvertedElementError);
}

TEST(Assembly, MassAndLoadTotals) {
    const TriMesh m = refine_uniform(build_template(7));
    const SparseMatrix mass = assemble_mass(m);
    const Eigen::VectorXd ones = Eigen::VectorXd::Ones(mass.rows());
    EXPECT_NEAR(ones.dot(mass * ones), 1.0, 1e-13);
    const Eigen::VectorXd load = assemble_load_piecewise(m, 1000.0, 1.0);
    EXPECT_NEAR(load.sum(), 0.5 * 1000.0 + 0.5 * 1.0, 1e-10);
    const SparseMatrix k = assemble_stiffness(m);
    EXPECT_LT((k * ones).cwiseAbs().maxCoeff(), 1e-11);
}

TEST(Assembly, StiffnessEnergyOfLinearField) {
    // a(u, u) = |grad u|^2 * area for u = 2x - 3y.
    const TriMesh m = build_template(6);
    const NodalField u = nodal(m, [](const Vec2& x) { return 2.0 * x.x() - 3.0 * x.y(); });
    EXPECT_NEAR(u.values.dot(assemble_stiffness(m) * u.values), 13.0, 1e-11);
}

TEST(Dirichlet, EmptyConstrainedSetRejected) {
    const TriMesh m = build_template(4);
    SparseSpdSystem sys{assemble_stiffness(m), Eigen::VectorXd::Ones(static_cast<Eigen::Index>(m.num_vertices())),
                        std::vector<char>(m.num_vertices(), 0), m.tag()};
    EXPECT_THROW((void)solve_dirichlet(sys), SolverError);
}

TEST(State, TorsionProblemCenterValue) {
    // -Laplace(u) = 1 on the unit square: u(1/2, 1/2) = 0.07367135328...
    const TriMesh m = refine_uniform(refine_uniform(build_template(16)));
    const NodalField y = solve_state(m, 1.0, 1.0);
    const auto v = evaluate_field(m, y, std::vector<Vec2>{Vec2(0.5, 0.5)});
    EXPECT_NEAR(v[0], 0.0736713532814, 2e-4);
}

TEST(State, ZeroOnBoundaryAndNonNegative) {
    const TriMesh m = build_template(12);
    const NodalField y = solve_state(m, 1000.0, 1.0);
    for (int v : m.outer_boundary_nodes()) {
        EXPECT_EQ(y.values[v], 0.0);
    }
    EXPECT_GE(y.values.minCoeff(), 0.0);
    // Larger source on the left: the maximum sits in the left half.
    Eigen::Index arg = 0;
    y.values.maxCoeff(&arg);
    EXPECT_LT(m.vertex(static_cast<int>(arg)).x(), 0.5);
}

TEST(State, ManufacturedSolutionConvergesAtSecondOrder) {
    const auto r = manufactured_convergence({8, 16, 32});
    ASSERT_EQ(r.order.size(), 2u);
    for (double o : r.order) {
        EXPECT_NEAR(o, 2.0, 0.3);
    }
    EXPECT_LT(r.l2_error.back(), 2.5e-3);
}

TEST(Adjoint, VanishesForExactDataAndIsLinear) {
    const TriMesh m = build_template(10);
    const NodalField y = solve_state(m, 1000.0, 1.0);
    EXPECT_EQ(solve_adjoint(m, y, y).values.cwiseAbs().maxCoeff(), 0.0);

    const NodalField ybar = nodal(m, [](const Vec2& x) { return 10.0 * x.x() * (1 - x.x()) * x.y() * (1 - x.y()); });
    const NodalField p1 = solve_adjoint(m, y, ybar);
    NodalField y2 = y;
    y2.values = 2.0 * y.values - ybar.values;  // y2 - ybar = 2 (y - ybar)
    const NodalField p2 = solve_adjoint(m, y2, ybar);
    EXPECT_LT((p2.values - 2.0 * p1.values).cwiseAbs().maxCoeff(), 1e-10 * p1.values.cwiseAbs().maxCoeff());
}

TEST(Adjoint, SignOppositeToMisfit) {
    // -Laplace(p) = -(y - ybar) with y > ybar everywhere inside gives p <= 0.
    const TriMesh m = build_template(10);
    const NodalField y = solve_state(m, 1.0, 1.0);
    const NodalField ybar = NodalField::zeros(m);
    const NodalField p = solve_adjoint(m, y, ybar);
    EXPECT_LE(p.values.maxCoeff(), 0.0);
}

TEST(Fields, MeshMismatchDetected) {
    const TriMesh a = build_template(4);
    const TriMesh b = build_template(4);
    const NodalField fa = NodalField::zeros(a);
    EXPECT_THROW((void)l2_norm(b, fa), GeometryError);
    EXPECT_THROW((void)solve_adjoint(b, fa, fa), GeometryError);
}

TEST(Fields, EvaluateReproducesLinearFunctions) {
    const TriMesh m = refine_uniform(build_template(5));
    const NodalField f = nodal(m, [](const Vec2& x) { return 1.0 + 2.0 * x.x() - 0.5 * x.y(); });
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    std::vector<Vec2> pts;
    for (int k = 0; k < 100; ++k) pts.emplace_back(unif(rng), unif(rng));
    const auto vals = evaluate_field(m, f, pts);
    for (std::size_t k = 0; k < pts.size(); ++k) {
        EXPECT_NEAR(vals[k], 1.0 + 2.0 * pts[k].x() - 0.5 * pts[k].y(), 1e-13);
    }
    EXPECT_THROW((void)evaluate_field(m, f, std::vector<Vec2>{Vec2(2.0, 0.5)}), PointNotFoundError);
}

TEST(Fields, NormsAndMisfitAreExactForPolynomials) {
    const TriMesh m = build_template(6);
    const NodalField one = nodal(m, [](const Vec2&) { return 1.0; });
    EXPECT_NEAR(l2_norm(m, one), 1.0, 1e-14);
    // Exact for P1 data: int x^2 over the unit square = 1/3.
    const NodalField x = nodal(m, [](const Vec2& p) { return p.x(); });
    EXPECT_NEAR(l2_norm(m, x), std::sqrt(1.0 / 3.0), 1e-14);
    const NodalField zero = NodalField::zeros(m);
    EXPECT_NEAR(objective_misfit(m, x, zero), 1.0 / 6.0, 1e-14);
    EXPECT_EQ(objective_misfit(m, x, x), 0.0);
}
