#include "shapeopt/shape.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numeric>
#include <string>

#include "shapeopt/errors.hpp"

namespace shapeopt {

namespace {

double cross(const Vec2& a, const Vec2& b) { return a.x() * b.y() - a.y() * b.x(); }

// Right-hand normal of a direction: for travel upwards it points to +x.
Vec2 right_normal(const Vec2& t) { return {t.y(), -t.x()}; }

void require_interface_size(const InterfaceGeometry& g, const Eigen::VectorXd& v, const char* what) {
    if (static_cast<std::size_t>(v.size()) != g.size()) {
        throw GeometryError(std::string(what) + ": interface field size does not match geometry");
    }
}

}  // namespace

double InterfaceGeometry::length() const { return std::accumulate(edge_lengths.begin(), edge_lengths.end(), 0.0); }

InterfaceGeometry compute_geometry(std::span<const Vec2> polyline) {
    const std::size_t m = polyline.size();
    if (m < 2) {
        throw GeometryError("compute_geometry: need at least two points");
    }
    InterfaceGeometry g;
    g.points.assign(polyline.begin(), polyline.end());
    std::vector<Vec2> edge_dir(m - 1);
    g.edge_lengths.resize(m - 1);
    for (std::size_t e = 0; e + 1 < m; ++e) {
        const Vec2 d = polyline[e + 1] - polyline[e];
        const double len = d.norm();
        if (!(len > 0.0)) {
            throw GeometryError("compute_geometry: zero-length edge " + std::to_string(e));
        }
        g.edge_lengths[e] = len;
        edge_dir[e] = d / len;
    }

    g.normals.resize(m);
    g.tangents.resize(m);
    g.curvature.assign(m, 0.0);
    g.arc_weights.resize(m);
    for (std::size_t i = 0; i < m; ++i) {
        if (i == 0 || i + 1 == m) {
            const std::size_t e = i == 0 ? 0 : m - 2;
            g.tangents[i] = edge_dir[e];
            g.normals[i] = right_normal(edge_dir[e]);
            g.arc_weights[i] = 0.5 * g.edge_lengths[e];
            continue;
        }
        const Vec2& tin = edge_dir[i - 1];
        const Vec2& tout = edge_dir[i];
        const Vec2 sum = tin + tout;
        const double sn = sum.norm();
        if (!(sn > 1e-14)) {
            throw GeometryError("compute_geometry: polyline folds back on itself at node " + std::to_string(i));
        }
        g.tangents[i] = sum / sn;
        g.normals[i] = right_normal(g.tangents[i]);
        g.arc_weights[i] = 0.5 * (g.edge_lengths[i - 1] + g.edge_lengths[i]);
        // Signed turning angle, counter-clockwise positive.
        const double turn = std::atan2(cross(tin, tout), tin.dot(tout));
        g.curvature[i] = 2.0 * std::sin(0.5 * turn) / g.arc_weights[i];
    }
    return g;
}

InterfaceGeometry compute_geometry(const TriMesh& mesh) {
    const auto pts = mesh.interface_polyline();
    return compute_geometry(pts);
}

double inner_s(const InterfaceGeometry& g, const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
    require_interface_size(g, a, "inner_s");
    require_interface_size(g, b, "inner_s");
    double sum = 0.0;
    for (std::size_t i = 0; i < g.size(); ++i) {
        const auto k = static_cast<Eigen::Index>(i);
        sum += g.arc_weights[i] * a[k] * b[k];
    }
    return sum;
}

double norm_s(const InterfaceGeometry& g, const Eigen::VectorXd& a) { return std::sqrt(inner_s(g, a, a)); }

InterfaceField shape_gradient(const TriMesh& mesh, const InterfaceGeometry& geometry, const NodalField& p,
                              double f1, double f2, double mu) {
    require_same_mesh(mesh, p, "shape_gradient");
    const auto nodes = mesh.interface_nodes();
    if (nodes.size() != geometry.size()) {
        throw GeometryError("shape_gradient: geometry does not match the mesh interface");
    }
    const double jump = source_jump(f1, f2);
    auto g = InterfaceField::zeros(nodes.size(), FieldRole::Gradient);
    for (std::size_t i = 1; i + 1 < nodes.size(); ++i) {
        g.values[static_cast<Eigen::Index>(i)] = -jump * p.values[nodes[i]] + mu * geometry.curvature[i];
    }
    return g;
}

double shape_gradient_domain(const TriMesh& mesh, const NodalField& y, const NodalField& p, const NodalField& ybar,
                             double f1, double f2, const DeformationField& deformation) {
    require_same_mesh(mesh, y, "shape_gradient_domain(y)");
    require_same_mesh(mesh, p, "shape_gradient_domain(p)");
    require_same_mesh(mesh, ybar, "shape_gradient_domain(ybar)");
    if (deformation.displacement.size() != mesh.num_vertices()) {
        throw GeometryError("shape_gradient_domain: deformation size does not match mesh");
    }
    double total = 0.0;
    for (std::size_t t = 0; t < mesh.num_triangles(); ++t) {
        const auto& tri = mesh.triangle(t);
        const Vec2& p0 = mesh.vertex(tri[0]);
        const Vec2& p1 = mesh.vertex(tri[1]);
        const Vec2& p2 = mesh.vertex(tri[2]);
        const double area = mesh.signed_area(t);
        const std::array<Vec2, 3> grad{Vec2(p1.y() - p2.y(), p2.x() - p1.x()) / (2.0 * area),
                                       Vec2(p2.y() - p0.y(), p0.x() - p2.x()) / (2.0 * area),
                                       Vec2(p0.y() - p1.y(), p1.x() - p0.x()) / (2.0 * area)};
        Vec2 gy = Vec2::Zero();
        Vec2 gp = Vec2::Zero();
        Vec2 gybar = Vec2::Zero();
        Eigen::Matrix2d gv = Eigen::Matrix2d::Zero();  // (grad V)_{ij} = dV_i / dx_j
        std::array<double, 3> e{};
        std::array<Vec2, 3> v{};
        double p_sum = 0.0;
        for (int a = 0; a < 3; ++a) {
            const int n = tri[static_cast<std::size_t>(a)];
            gy += y.values[n] * grad[a];
            gp += p.values[n] * grad[a];
            gybar += ybar.values[n] * grad[a];
            v[a] = deformation.displacement[static_cast<std::size_t>(n)];
            gv += v[a] * grad[a].transpose();
            e[a] = y.values[n] - ybar.values[n];
            p_sum += p.values[n];
        }
        const double div_v = gv.trace();
        const double f = mesh.subdomain()[t] == 1 ? f1 : f2;
        const double misfit_sq = area / 6.0 * (e[0] * e[0] + e[1] * e[1] + e[2] * e[2] + e[0] * e[1] +
                                               e[1] * e[2] + e[2] * e[0]);
        // Exact P1 x P1 mass product of (y - ybar) and V.
        Vec2 e_v = Vec2::Zero();
        for (int a = 0; a < 3; ++a) {
            for (int b = 0; b < 3; ++b) {
                e_v += (a == b ? area / 6.0 : area / 12.0) * e[a] * v[b];
            }
        }
        total += -area * gy.dot((gv + gv.transpose()) * gp);
        total += div_v * (0.5 * misfit_sq + area * gy.dot(gp) - f * area * p_sum / 3.0);
        total += -gybar.dot(e_v);
    }
    return total;
}

double objective(const TriMesh& mesh, const NodalField& y, const NodalField& ybar, const InterfaceGeometry& geometry,
                 double mu) {
    const double perimeter = std::accumulate(geometry.arc_weights.begin(), geometry.arc_weights.end(), 0.0);
    return objective_misfit(mesh, y, ybar) + mu * perimeter;
}

InterfaceField tangential_laplacian_apply(const InterfaceGeometry& geometry, const InterfaceField& w) {
    const std::size_t m = geometry.size();
    if (m < 3) {
        throw GeometryError("tangential_laplacian_apply: need at least 3 interface nodes");
    }
    require_interface_size(geometry, w.values, "tangential_laplacian_apply");
    auto out = InterfaceField::zeros(m, w.role);
    const auto& e = geometry.edge_lengths;
    for (std::size_t i = 1; i + 1 < m; ++i) {
        const auto k = static_cast<Eigen::Index>(i);
        const double flux = (w.values[k] - w.values[k - 1]) / e[i - 1] + (w.values[k] - w.values[k + 1]) / e[i];
        out.values[k] = flux / geometry.arc_weights[i];
    }
    return out;
}

std::vector<Vec2> normal_displacement(const InterfaceGeometry& geometry, const InterfaceField& w, double step) {
    require_interface_size(geometry, w.values, "normal_displacement");
    std::vector<Vec2> d(geometry.size(), Vec2::Zero());
    for (std::size_t i = 1; i + 1 < geometry.size(); ++i) {
        d[i] = step * w.values[static_cast<Eigen::Index>(i)] * geometry.normals[i];
    }
    return d;
}

RetractResult retract(const TriMesh& mesh, const InterfaceField& w, const InterfaceGeometry& geometry, double step,
                      const ElasticityParams& params) {
    if (step == 0.0 || w.values.lpNorm<Eigen::Infinity>() == 0.0) {
        return {mesh, step, 0};
    }
    constexpr int max_halvings = 10;
    double s = step;
    for (int halvings = 0;; ++halvings) {
        try {
            const auto disp = normal_displacement(geometry, w, s);
            return {apply_deformation(mesh, solve_elastic_deformation(mesh, disp, params)), s, halvings};
        } catch (const MeshValidityError& e) {
            if (halvings == max_halvings) {
                throw MeshValidityError(std::string("retraction failed after ") + std::to_string(max_halvings) +
                                        " step halvings: " + e.what());
            }
            s *= 0.5;
        }
    }
}

TriMesh move_interface_to(const TriMesh& mesh, std::span<const Vec2> targets, const ElasticityParams& params) {
    const auto nodes = mesh.interface_nodes();
    if (targets.size() != nodes.size()) {
        throw GeometryError("move_interface_to: one target per interface node required");
    }
    std::vector<Vec2> disp(nodes.size());
    for (std::size_t i = 0; i < nodes.size(); ++i) {
        disp[i] = targets[i] - mesh.vertex(nodes[i]);
    }
    return apply_deformation(mesh, solve_elastic_deformation(mesh, disp, params));
}

namespace {

// Exact integral of |linear function| over a segment with end values a, b and length h.
double abs_linear_integral(double a, double b, double h) {
    if (a * b >= 0.0) {
        return 0.5 * h * (std::abs(a) + std::abs(b));
    }
    return 0.5 * h * (a * a + b * b) / (std::abs(a) + std::abs(b));
}

}  // namespace

SolutionDistance dist_to_solution(std::span<const Vec2> polyline) {
    SolutionDistance d;
    for (std::size_t i = 0; i + 1 < polyline.size(); ++i) {
        if (!(polyline[i + 1].y() > polyline[i].y())) {
            d.graph = false;
        }
    }
    for (std::size_t i = 0; i + 1 < polyline.size(); ++i) {
        const Vec2& a = polyline[i];
        const Vec2& b = polyline[i + 1];
        const double h = d.graph ? b.y() - a.y() : (b - a).norm();
        d.value += abs_linear_integral(a.x() - 0.5, b.x() - 0.5, h);
    }
    return d;
}

SolutionDistance dist_to_solution(const TriMesh& mesh) {
    const auto pts = mesh.interface_polyline();
    return dist_to_solution(pts);
}

namespace {

// Natural cubic spline through four points at t = 0, 1/3, 2/3, 1.
struct InitialSpline {
    std::array<Vec2, 4> p{Vec2(0.5, 0.0), Vec2(0.4, 0.3), Vec2(0.6, 0.7), Vec2(0.5, 1.0)};
    std::array<Vec2, 4> m{};  // second derivatives at the knots

    InitialSpline() {
        constexpr double h = 1.0 / 3.0;
        const Vec2 r1 = 6.0 / (h * h) * (p[2] - 2.0 * p[1] + p[0]);
        const Vec2 r2 = 6.0 / (h * h) * (p[3] - 2.0 * p[2] + p[1]);
        m[0] = Vec2::Zero();
        m[3] = Vec2::Zero();
        m[1] = (4.0 * r1 - r2) / 15.0;
        m[2] = (4.0 * r2 - r1) / 15.0;
    }

    [[nodiscard]] Vec2 eval(double t) const {
        constexpr double h = 1.0 / 3.0;
        const int k = std::clamp(static_cast<int>(t / h), 0, 2);
        const double a = (k + 1) * h - t;
        const double b = t - k * h;
        const auto& pk = p[static_cast<std::size_t>(k)];
        const auto& pk1 = p[static_cast<std::size_t>(k + 1)];
        const auto& mk = m[static_cast<std::size_t>(k)];
        const auto& mk1 = m[static_cast<std::size_t>(k + 1)];
        return mk * (a * a * a) / (6.0 * h) + mk1 * (b * b * b) / (6.0 * h) + (pk / h - mk * h / 6.0) * a +
               (pk1 / h - mk1 * h / 6.0) * b;
    }
};

const InitialSpline& initial_spline() {
    static const InitialSpline s;
    return s;
}

}  // namespace

Vec2 initial_curve_point(double t) {
    if (t <= 0.0) {
        return {0.5, 0.0};
    }
    if (t >= 1.0) {
        return {0.5, 1.0};
    }
    return initial_spline().eval(t);
}

Vec2 initial_curve_at_height(double y) {
    if (y <= 0.0) {
        return {0.5, 0.0};
    }
    if (y >= 1.0) {
        return {0.5, 1.0};
    }
    // y(t) is strictly increasing on [0,1].
    double lo = 0.0;
    double hi = 1.0;
    for (int it = 0; it < 200 && hi - lo > 1e-16; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (initial_spline().eval(mid).y() < y) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    return {initial_spline().eval(0.5 * (lo + hi)).x(), y};
}

std::vector<Vec2> bspline_initial_interface(int m) {
    if (m < 3) {
        throw GeometryError("bspline_initial_interface: need at least 3 samples");
    }
    std::vector<Vec2> pts;
    pts.reserve(static_cast<std::size_t>(m));
    for (int j = 0; j < m; ++j) {
        pts.push_back(initial_curve_at_height(static_cast<double>(j) / (m - 1)));
    }
    return pts;
}

}  // namespace shapeopt
