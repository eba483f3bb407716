#pragma once

// P1 finite elements on TriMesh: assembly, homogeneous Dirichlet solves on
// the outer boundary, interpolation and L2 quadratics.

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "shapeopt/mesh.hpp"
#include "shapeopt/sparse.hpp"

namespace shapeopt {

/// Scalar P1 coefficient vector tagged with the mesh it lives on.
struct NodalField {
    Eigen::VectorXd values;
    std::uint64_t mesh_tag = 0;

    static NodalField zeros(const TriMesh& mesh) {
        return {Eigen::VectorXd::Zero(static_cast<Eigen::Index>(mesh.num_vertices())), mesh.tag()};
    }
};

/// Throws GeometryError if `field` was not produced on `mesh`.
void require_same_mesh(const TriMesh& mesh, const NodalField& field, const char* what);

/// Matrix, right-hand side and homogeneous Dirichlet set of one linear problem.
struct SparseSpdSystem {
    SparseMatrix matrix;
    Eigen::VectorXd rhs;
    std::vector<char> constrained;
    std::uint64_t mesh_tag = 0;
};

/// Element stiffness of the P1 Laplacian on one triangle (rows follow vertex order).
[[nodiscard]] Eigen::Matrix3d element_stiffness(const Vec2& p0, const Vec2& p1, const Vec2& p2);

[[nodiscard]] SparseMatrix assemble_stiffness(const TriMesh& mesh);
/// Consistent P1 mass matrix (exact quadrature).
[[nodiscard]] SparseMatrix assemble_mass(const TriMesh& mesh);
/// Load vector of a source that equals f1 on subdomain 1 and f2 on subdomain 2.
[[nodiscard]] Eigen::VectorXd assemble_load_piecewise(const TriMesh& mesh, double f1, double f2);
/// Load vector of a source given by its nodal values (mass matrix times values).
[[nodiscard]] Eigen::VectorXd assemble_load_nodal(const TriMesh& mesh, const Eigen::VectorXd& nodal_source);

/// Mask of outer boundary vertices, suitable for SparseSpdSystem::constrained.
[[nodiscard]] std::vector<char> outer_boundary_mask(const TriMesh& mesh);

[[nodiscard]] NodalField solve_dirichlet(const SparseSpdSystem& system);

/// -Laplace(y) = f with f piecewise constant, y = 0 on the outer boundary.
[[nodiscard]] NodalField solve_state(const TriMesh& mesh, double f1, double f2);

/// -Laplace(p) = -(y - ybar), p = 0 on the outer boundary.
[[nodiscard]] NodalField solve_adjoint(const TriMesh& mesh, const NodalField& y, const NodalField& ybar);

/// Piecewise-linear interpolation of `field` at arbitrary points.
[[nodiscard]] std::vector<double> evaluate_field(const TriMesh& mesh, const NodalField& field,
                                                 std::span<const Vec2> points);
[[nodiscard]] std::vector<double> evaluate_field(const PointLocator& locator, const NodalField& field,
                                                 std::span<const Vec2> points);

[[nodiscard]] double l2_norm(const TriMesh& mesh, const NodalField& field);
/// 0.5 * integral of (y - ybar)^2.
[[nodiscard]] double objective_misfit(const TriMesh& mesh, const NodalField& y, const NodalField& ybar);

}  // namespace shapeopt
