#include "shapeopt/fem.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "shapeopt/errors.hpp"

namespace shapeopt {

void require_same_mesh(const TriMesh& mesh, const NodalField& field, const char* what) {
    if (field.mesh_tag != mesh.tag() || static_cast<std::size_t>(field.values.size()) != mesh.num_vertices()) {
        throw GeometryError(std::string(what) + ": field does not belong to this mesh");
    }
}

Eigen::Matrix3d element_stiffness(const Vec2& p0, const Vec2& p1, const Vec2& p2) {
    // Rows of d: scaled basis gradients (b_i, c_i); K = d d^T / (4 area).
    Eigen::Matrix<double, 3, 2> d;
    d << p1.y() - p2.y(), p2.x() - p1.x(),
         p2.y() - p0.y(), p0.x() - p2.x(),
         p0.y() - p1.y(), p1.x() - p0.x();
    const double area2 = (p1 - p0).x() * (p2 - p0).y() - (p1 - p0).y() * (p2 - p0).x();
    if (!(area2 > 0.0)) {
        throw InvertedElementError(0, 0.5 * area2);
    }
    return d * d.transpose() / (2.0 * area2);
}

SparseMatrix assemble_stiffness(const TriMesh& mesh) {
    std::vector<Eigen::Triplet<double>> trips;
    trips.reserve(mesh.num_triangles() * 9);
    for (std::size_t t = 0; t < mesh.num_triangles(); ++t) {
        const auto& tri = mesh.triangle(t);
        Eigen::Matrix3d ke;
        try {
            ke = element_stiffness(mesh.vertex(tri[0]), mesh.vertex(tri[1]), mesh.vertex(tri[2]));
        } catch (const InvertedElementError& e) {
            throw InvertedElementError(t, e.area());
        }
        for (int a = 0; a < 3; ++a) {
            for (int b = 0; b < 3; ++b) {
                trips.emplace_back(tri[a], tri[b], ke(a, b));
            }
        }
    }
    const auto n = static_cast<Eigen::Index>(mesh.num_vertices());
    SparseMatrix k(n, n);
    k.setFromTriplets(trips.begin(), trips.end());
    return k;
}

SparseMatrix assemble_mass(const TriMesh& mesh) {
    std::vector<Eigen::Triplet<double>> trips;
    trips.reserve(mesh.num_triangles() * 9);
    for (std::size_t t = 0; t < mesh.num_triangles(); ++t) {
        const auto& tri = mesh.triangle(t);
        const double area = mesh.signed_area(t);
        for (int a = 0; a < 3; ++a) {
            for (int b = 0; b < 3; ++b) {
                trips.emplace_back(tri[a], tri[b], area / (a == b ? 6.0 : 12.0));
            }
        }
    }
    const auto n = static_cast<Eigen::Index>(mesh.num_vertices());
    SparseMatrix m(n, n);
    m.setFromTriplets(trips.begin(), trips.end());
    return m;
}

Eigen::VectorXd assemble_load_piecewise(const TriMesh& mesh, double f1, double f2) {
    Eigen::VectorXd b = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(mesh.num_vertices()));
    for (std::size_t t = 0; t < mesh.num_triangles(); ++t) {
        const double f = mesh.subdomain()[t] == 1 ? f1 : f2;
        const double share = f * mesh.signed_area(t) / 3.0;
        for (int v : mesh.triangle(t)) {
            b[v] += share;
        }
    }
    return b;
}

Eigen::VectorXd assemble_load_nodal(const TriMesh& mesh, const Eigen::VectorXd& nodal_source) {
    return assemble_mass(mesh) * nodal_source;
}

std::vector<char> outer_boundary_mask(const TriMesh& mesh) {
    std::vector<char> mask(mesh.num_vertices(), 0);
    for (int v : mesh.outer_boundary_nodes()) {
        mask[static_cast<std::size_t>(v)] = 1;
    }
    return mask;
}

NodalField solve_dirichlet(const SparseSpdSystem& system) {
    const bool any = std::any_of(system.constrained.begin(), system.constrained.end(), [](char c) { return c != 0; });
    if (!any) {
        throw SolverError("solve_dirichlet: constrained set is empty (pure Neumann problem is singular)");
    }
    const ConstrainedSpdSolver solver(system.matrix, system.constrained);
    return {solver.solve(system.rhs), system.mesh_tag};
}

NodalField solve_state(const TriMesh& mesh, double f1, double f2) {
    return solve_dirichlet({assemble_stiffness(mesh), assemble_load_piecewise(mesh, f1, f2), outer_boundary_mask(mesh),
                            mesh.tag()});
}

NodalField solve_adjoint(const TriMesh& mesh, const NodalField& y, const NodalField& ybar) {
    require_same_mesh(mesh, y, "solve_adjoint(y)");
    require_same_mesh(mesh, ybar, "solve_adjoint(ybar)");
    const Eigen::VectorXd rhs = -(assemble_mass(mesh) * (y.values - ybar.values));
    return solve_dirichlet({assemble_stiffness(mesh), rhs, outer_boundary_mask(mesh), mesh.tag()});
}

std::vector<double> evaluate_field(const PointLocator& locator, const NodalField& field,
                                   std::span<const Vec2> points) {
    const TriMesh& mesh = locator.mesh();
    require_same_mesh(mesh, field, "evaluate_field");
    std::vector<double> out;
    out.reserve(points.size());
    for (const auto& x : points) {
        const auto loc = locator.locate(x);
        const auto& tri = mesh.triangle(loc.triangle);
        double v = 0.0;
        for (int k = 0; k < 3; ++k) {
            v += loc.barycentric[static_cast<std::size_t>(k)] * field.values[tri[static_cast<std::size_t>(k)]];
        }
        out.push_back(v);
    }
    return out;
}

std::vector<double> evaluate_field(const TriMesh& mesh, const NodalField& field, std::span<const Vec2> points) {
    return evaluate_field(PointLocator(mesh), field, points);
}

namespace {
double mass_quadratic(const TriMesh& mesh, const Eigen::VectorXd& v) {
    double sum = 0.0;
    for (std::size_t t = 0; t < mesh.num_triangles(); ++t) {
        const auto& tri = mesh.triangle(t);
        const double a = v[tri[0]];
        const double b = v[tri[1]];
        const double c = v[tri[2]];
        sum += mesh.signed_area(t) / 6.0 * (a * a + b * b + c * c + a * b + b * c + c * a);
    }
    return sum;
}
}  // namespace

double l2_norm(const TriMesh& mesh, const NodalField& field) {
    require_same_mesh(mesh, field, "l2_norm");
    return std::sqrt(mass_quadratic(mesh, field.values));
}

double objective_misfit(const TriMesh& mesh, const NodalField& y, const NodalField& ybar) {
    require_same_mesh(mesh, y, "objective_misfit(y)");
    require_same_mesh(mesh, ybar, "objective_misfit(ybar)");
    return 0.5 * mass_quadratic(mesh, y.values - ybar.values);
}

}  // namespace shapeopt
