#pragma once

// Interface geometry and shape calculus on the interface polyline: normals,
// turning-angle curvature, arc-length weights, shape gradients (interface
// and volume forms), the normal-displacement retraction, and the distance
// to the straight solution line.

#include <span>
#include <vector>

#include <Eigen/Core>

#include "shapeopt/fem.hpp"
#include "shapeopt/mesh.hpp"

namespace shapeopt {

/// Discrete geometry of an interface polyline. Normals point out of
/// subdomain 1 (to the right of the direction of travel); curvature is
/// positive where the curve bends away from the normal.
struct InterfaceGeometry {
    std::vector<Vec2> points;
    std::vector<Vec2> normals;
    std::vector<Vec2> tangents;
    std::vector<double> curvature;
    std::vector<double> arc_weights;   // lumped arc length per node
    std::vector<double> edge_lengths;  // size() - 1 entries

    [[nodiscard]] std::size_t size() const noexcept { return points.size(); }
    [[nodiscard]] double length() const;
};

enum class FieldRole { Design, Gradient, Residual, Generic };

/// Scalar per interface node; endpoint values are pinned to zero.
struct InterfaceField {
    Eigen::VectorXd values;
    FieldRole role = FieldRole::Generic;

    static InterfaceField zeros(std::size_t n, FieldRole role = FieldRole::Generic) {
        return {Eigen::VectorXd::Zero(static_cast<Eigen::Index>(n)), role};
    }
};

[[nodiscard]] InterfaceGeometry compute_geometry(std::span<const Vec2> polyline);
[[nodiscard]] InterfaceGeometry compute_geometry(const TriMesh& mesh);

/// Lumped L2(interface) pairing: sum_i s_i a_i b_i.
[[nodiscard]] double inner_s(const InterfaceGeometry& g, const Eigen::VectorXd& a, const Eigen::VectorXd& b);
[[nodiscard]] double norm_s(const InterfaceGeometry& g, const Eigen::VectorXd& a);

/// Source jump f1 - f2 across the interface.
[[nodiscard]] constexpr double source_jump(double f1, double f2) noexcept { return f1 - f2; }

/// Nodal shape-gradient density g = -(f1 - f2) p + mu kappa, so that
/// dJ[V] = integral over the interface of g <V, n>.
[[nodiscard]] InterfaceField shape_gradient(const TriMesh& mesh, const InterfaceGeometry& geometry,
                                            const NodalField& p, double f1, double f2, double mu);

/// Volume form of the Lagrangian's shape derivative (misfit and PDE part,
/// no perimeter term) in the direction of a volume vector field V.
[[nodiscard]] double shape_gradient_domain(const TriMesh& mesh, const NodalField& y, const NodalField& p,
                                           const NodalField& ybar, double f1, double f2,
                                           const DeformationField& deformation);

/// J = 0.5 * ||y - ybar||^2 + mu * length(interface).
[[nodiscard]] double objective(const TriMesh& mesh, const NodalField& y, const NodalField& ybar,
                               const InterfaceGeometry& geometry, double mu);

/// Lumped arc-length discretization of -d^2/dtau^2 with pinned ends.
[[nodiscard]] InterfaceField tangential_laplacian_apply(const InterfaceGeometry& geometry, const InterfaceField& w);

/// Interface displacement step * w_i * n_i, one vector per interface node.
[[nodiscard]] std::vector<Vec2> normal_displacement(const InterfaceGeometry& geometry, const InterfaceField& w,
                                                    double step);

struct RetractResult {
    TriMesh mesh;
    double step = 0.0;   // step actually applied
    int halvings = 0;
};

/// Moves interface node i by step * w_i * n_i and the volume by linear
/// elasticity. On an invalid result the step is halved, at most 10 times.
[[nodiscard]] RetractResult retract(const TriMesh& mesh, const InterfaceField& w, const InterfaceGeometry& geometry,
                                    double step, const ElasticityParams& params = {});

/// Deforms `mesh` so that its interface nodes land on `targets`.
[[nodiscard]] TriMesh move_interface_to(const TriMesh& mesh, std::span<const Vec2> targets,
                                        const ElasticityParams& params = {});

struct SolutionDistance {
    double value = 0.0;
    bool graph = true;   // false: interface not a graph over y, arc-length fallback used
};

/// Integral over y in [0,1] of |x(y) - 0.5| along the interface polyline.
[[nodiscard]] SolutionDistance dist_to_solution(std::span<const Vec2> polyline);
[[nodiscard]] SolutionDistance dist_to_solution(const TriMesh& mesh);

/// Initial interface: cubic spline through (0.5,0), (0.4,0.3), (0.6,0.7), (0.5,1).
[[nodiscard]] Vec2 initial_curve_point(double t);
/// Curve point whose y coordinate equals `y` (the curve is a graph over y).
[[nodiscard]] Vec2 initial_curve_at_height(double y);
/// m samples with uniformly spaced y, endpoints exact.
[[nodiscard]] std::vector<Vec2> bspline_initial_interface(int m);

}  // namespace shapeopt
