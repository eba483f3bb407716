#include "shapeopt/mesh.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <map>
#include <string>
#include <unordered_map>
#include <utility>

#include "shapeopt/errors.hpp"
#include "shapeopt/sparse.hpp"

namespace shapeopt {

namespace {

std::uint64_t next_tag() {
    static std::atomic<std::uint64_t> counter{1};
    return counter.fetch_add(1, std::memory_order_relaxed);
}

double cross(const Vec2& a, const Vec2& b) { return a.x() * b.y() - a.y() * b.x(); }

double orient(const Vec2& a, const Vec2& b, const Vec2& c) { return cross(b - a, c - a); }

std::uint64_t edge_key(int a, int b) {
    const auto lo = static_cast<std::uint64_t>(std::min(a, b));
    const auto hi = static_cast<std::uint64_t>(std::max(a, b));
    return (lo << 32) | hi;
}

bool segments_intersect(const Vec2& p1, const Vec2& p2, const Vec2& q1, const Vec2& q2) {
    const double d1 = orient(q1, q2, p1);
    const double d2 = orient(q1, q2, p2);
    const double d3 = orient(p1, p2, q1);
    const double d4 = orient(p1, p2, q2);
    return ((d1 > 0) != (d2 > 0)) && ((d3 > 0) != (d4 > 0)) && d1 != 0 && d2 != 0 && d3 != 0 && d4 != 0;
}

std::shared_ptr<const MeshTopology> make_topology(std::size_t num_vertices, std::vector<Triangle> triangles,
                                                  std::vector<int> subdomain, std::vector<int> outer_boundary,
                                                  std::vector<int> interface_nodes) {
    auto topo = std::make_shared<MeshTopology>();
    const auto nv = static_cast<int>(num_vertices);
    if (subdomain.size() != triangles.size()) {
        throw MeshValidityError("subdomain label count does not match triangle count");
    }
    for (std::size_t t = 0; t < triangles.size(); ++t) {
        for (int v : triangles[t]) {
            if (v < 0 || v >= nv) {
                throw MeshValidityError("triangle " + std::to_string(t) + " references invalid vertex");
            }
        }
        if (subdomain[t] != 1 && subdomain[t] != 2) {
            throw MeshValidityError("triangle " + std::to_string(t) + " has subdomain label outside {1,2}");
        }
    }
    if (interface_nodes.size() < 2) {
        throw MeshValidityError("interface needs at least two nodes");
    }

    std::sort(outer_boundary.begin(), outer_boundary.end());
    outer_boundary.erase(std::unique(outer_boundary.begin(), outer_boundary.end()), outer_boundary.end());
    topo->is_outer_boundary.assign(num_vertices, 0);
    for (int v : outer_boundary) {
        if (v < 0 || v >= nv) {
            throw MeshValidityError("outer boundary node out of range");
        }
        topo->is_outer_boundary[static_cast<std::size_t>(v)] = 1;
    }

    topo->interface_position.assign(num_vertices, -1);
    for (std::size_t k = 0; k < interface_nodes.size(); ++k) {
        const int v = interface_nodes[k];
        if (v < 0 || v >= nv || topo->interface_position[static_cast<std::size_t>(v)] >= 0) {
            throw MeshValidityError("interface node list invalid or repeated at position " + std::to_string(k));
        }
        topo->interface_position[static_cast<std::size_t>(v)] = static_cast<int>(k);
    }

    // Directed half-edges -> owning triangle. A CCW triangle traversing a->b lies left of a->b.
    std::unordered_map<std::uint64_t, int> directed;
    directed.reserve(triangles.size() * 3);
    auto dkey = [](int a, int b) { return (static_cast<std::uint64_t>(a) << 32) | static_cast<std::uint32_t>(b); };
    for (std::size_t t = 0; t < triangles.size(); ++t) {
        const auto& tri = triangles[t];
        for (int k = 0; k < 3; ++k) {
            const auto [it, inserted] = directed.emplace(dkey(tri[k], tri[(k + 1) % 3]), static_cast<int>(t));
            if (!inserted) {
                throw MeshValidityError("non-manifold or inconsistently oriented edge in triangle " +
                                        std::to_string(t));
            }
        }
    }
    for (std::size_t k = 0; k + 1 < interface_nodes.size(); ++k) {
        const int a = interface_nodes[k];
        const int b = interface_nodes[k + 1];
        const auto left = directed.find(dkey(a, b));
        const auto right = directed.find(dkey(b, a));
        if (left == directed.end() || right == directed.end()) {
            throw MeshValidityError("interface edge " + std::to_string(k) + " is not an interior mesh edge");
        }
        if (subdomain[static_cast<std::size_t>(left->second)] != 1 ||
            subdomain[static_cast<std::size_t>(right->second)] != 2) {
            throw MeshValidityError("interface edge " + std::to_string(k) +
                                    " does not separate subdomain 1 (left) from subdomain 2 (right)");
        }
        topo->interface_edges.push_back({a, b});
    }

    topo->triangles = std::move(triangles);
    topo->subdomain = std::move(subdomain);
    topo->outer_boundary_nodes = std::move(outer_boundary);
    topo->interface_nodes = std::move(interface_nodes);
    return topo;
}

}  // namespace

TriMesh::TriMesh(std::vector<Vec2> vertices, std::vector<Triangle> triangles, std::vector<int> subdomain,
                 std::vector<int> outer_boundary_nodes, std::vector<int> interface_nodes)
    : topo_(make_topology(vertices.size(), std::move(triangles), std::move(subdomain),
                          std::move(outer_boundary_nodes), std::move(interface_nodes))),
      vertices_(std::move(vertices)),
      tag_(next_tag()) {
    validate_geometry();
}

TriMesh::TriMesh(std::shared_ptr<const MeshTopology> topo, std::vector<Vec2> vertices)
    : topo_(std::move(topo)), vertices_(std::move(vertices)), tag_(next_tag()) {
    validate_geometry();
}

TriMesh TriMesh::with_vertices(std::vector<Vec2> vertices) const {
    if (vertices.size() != vertices_.size()) {
        throw MeshValidityError("with_vertices: vertex count changed");
    }
    return TriMesh(topo_, std::move(vertices));
}

double TriMesh::signed_area(std::size_t t) const {
    const auto& tri = topo_->triangles[t];
    return 0.5 * orient(vertex(tri[0]), vertex(tri[1]), vertex(tri[2]));
}

double TriMesh::total_area() const {
    double sum = 0.0;
    for (std::size_t t = 0; t < num_triangles(); ++t) {
        sum += signed_area(t);
    }
    return sum;
}

double TriMesh::min_signed_area() const {
    double m = std::numeric_limits<double>::infinity();
    for (std::size_t t = 0; t < num_triangles(); ++t) {
        m = std::min(m, signed_area(t));
    }
    return m;
}

std::vector<Vec2> TriMesh::interface_polyline() const {
    std::vector<Vec2> pts;
    pts.reserve(topo_->interface_nodes.size());
    for (int v : topo_->interface_nodes) {
        pts.push_back(vertex(v));
    }
    return pts;
}

void TriMesh::validate_geometry() const {
    for (std::size_t t = 0; t < num_triangles(); ++t) {
        const double a = signed_area(t);
        if (!(a > 0.0)) {
            throw InvertedElementError(t, a);
        }
    }
    const auto& nodes = topo_->interface_nodes;
    if (vertex(nodes.front()) != Vec2(0.5, 0.0) || vertex(nodes.back()) != Vec2(0.5, 1.0)) {
        throw MeshValidityError("interface endpoints must be exactly (0.5,0) and (0.5,1)");
    }
    for (std::size_t k = 1; k + 1 < nodes.size(); ++k) {
        const double x = vertex(nodes[k]).x();
        if (!(x > 0.0 && x < 1.0)) {
            throw MeshValidityError("interface node " + std::to_string(k) + " left the open unit interval in x");
        }
    }
    const auto pts = interface_polyline();
    for (std::size_t i = 0; i + 1 < pts.size(); ++i) {
        for (std::size_t j = i + 2; j + 1 < pts.size(); ++j) {
            if (segments_intersect(pts[i], pts[i + 1], pts[j], pts[j + 1])) {
                throw MeshValidityError("interface polyline self-intersects (segments " + std::to_string(i) +
                                        " and " + std::to_string(j) + ")");
            }
        }
    }
}

TriMesh build_template(int n) {
    if (n < 2) {
        throw MeshValidityError("build_template: need n >= 2, got " + std::to_string(n));
    }
    const int left = n / 2;
    const int right = n - left;
    const int np = n + 1;
    auto xcoord = [&](int i) {
        if (i <= left) {
            return 0.5 * static_cast<double>(i) / left;
        }
        return 0.5 + 0.5 * static_cast<double>(i - left) / right;
    };
    auto vid = [np](int i, int j) { return j * np + i; };

    std::vector<Vec2> vertices;
    vertices.reserve(static_cast<std::size_t>(np * np));
    std::vector<int> boundary;
    for (int j = 0; j < np; ++j) {
        for (int i = 0; i < np; ++i) {
            // Exact endpoints: j/n at j == n is exactly 1.
            vertices.emplace_back(xcoord(i), static_cast<double>(j) / n);
            if (i == 0 || j == 0 || i == n || j == n) {
                boundary.push_back(vid(i, j));
            }
        }
    }

    std::vector<Triangle> tris;
    std::vector<int> labels;
    tris.reserve(static_cast<std::size_t>(2 * n * n));
    labels.reserve(static_cast<std::size_t>(2 * n * n));
    for (int j = 0; j < n; ++j) {
        for (int i = 0; i < n; ++i) {
            const int v00 = vid(i, j);
            const int v10 = vid(i + 1, j);
            const int v01 = vid(i, j + 1);
            const int v11 = vid(i + 1, j + 1);
            if ((i + j) % 2 == 0) {
                tris.push_back({v00, v10, v11});
                tris.push_back({v00, v11, v01});
            } else {
                tris.push_back({v00, v10, v01});
                tris.push_back({v10, v11, v01});
            }
            const int label = i < left ? 1 : 2;
            labels.push_back(label);
            labels.push_back(label);
        }
    }

    std::vector<int> iface;
    iface.reserve(static_cast<std::size_t>(np));
    for (int j = 0; j < np; ++j) {
        iface.push_back(vid(left, j));
    }
    return TriMesh(std::move(vertices), std::move(tris), std::move(labels), std::move(boundary), std::move(iface));
}

TriMesh refine_uniform(const TriMesh& mesh) {
    std::vector<Vec2> vertices(mesh.vertices().begin(), mesh.vertices().end());
    std::unordered_map<std::uint64_t, int> midpoint;
    std::unordered_map<std::uint64_t, int> edge_count;
    midpoint.reserve(mesh.num_triangles() * 2);
    edge_count.reserve(mesh.num_triangles() * 2);

    auto mid = [&](int a, int b) {
        const auto key = edge_key(a, b);
        const auto it = midpoint.find(key);
        if (it != midpoint.end()) {
            return it->second;
        }
        const int id = static_cast<int>(vertices.size());
        vertices.push_back(0.5 * (mesh.vertex(a) + mesh.vertex(b)));
        midpoint.emplace(key, id);
        return id;
    };

    std::vector<Triangle> tris;
    std::vector<int> labels;
    tris.reserve(mesh.num_triangles() * 4);
    labels.reserve(mesh.num_triangles() * 4);
    for (std::size_t t = 0; t < mesh.num_triangles(); ++t) {
        const auto [a, b, c] = mesh.triangle(t);
        const int ab = mid(a, b);
        const int bc = mid(b, c);
        const int ca = mid(c, a);
        ++edge_count[edge_key(a, b)];
        ++edge_count[edge_key(b, c)];
        ++edge_count[edge_key(c, a)];
        tris.push_back({a, ab, ca});
        tris.push_back({ab, b, bc});
        tris.push_back({ca, bc, c});
        tris.push_back({ab, bc, ca});
        const int label = mesh.subdomain()[t];
        labels.insert(labels.end(), 4, label);
    }

    std::vector<int> boundary(mesh.outer_boundary_nodes().begin(), mesh.outer_boundary_nodes().end());
    for (std::size_t t = 0; t < mesh.num_triangles(); ++t) {
        const auto& tri = mesh.triangle(t);
        for (int k = 0; k < 3; ++k) {
            const int a = tri[k];
            const int b = tri[(k + 1) % 3];
            if (edge_count[edge_key(a, b)] == 1) {
                boundary.push_back(midpoint.at(edge_key(a, b)));
            }
        }
    }

    std::vector<int> iface;
    const auto old_iface = mesh.interface_nodes();
    iface.reserve(old_iface.size() * 2);
    for (std::size_t k = 0; k < old_iface.size(); ++k) {
        iface.push_back(old_iface[k]);
        if (k + 1 < old_iface.size()) {
            iface.push_back(midpoint.at(edge_key(old_iface[k], old_iface[k + 1])));
        }
    }
    return TriMesh(std::move(vertices), std::move(tris), std::move(labels), std::move(boundary), std::move(iface));
}

DeformationField solve_elastic_deformation(const TriMesh& mesh, std::span<const Vec2> interface_displacement,
                                           const ElasticityParams& params) {
    const auto iface = mesh.interface_nodes();
    if (interface_displacement.size() != iface.size()) {
        throw GeometryError("elastic deformation: expected one displacement per interface node");
    }
    if (interface_displacement.front().norm() != 0.0 || interface_displacement.back().norm() != 0.0) {
        throw GeometryError("elastic deformation: interface endpoints are pinned and must not move");
    }
    const auto nv = static_cast<Eigen::Index>(mesh.num_vertices());
    const Eigen::Index ndof = 2 * nv;

    // Unknown (v, c) -> 2 v + c.
    std::vector<Eigen::Triplet<double>> trips;
    trips.reserve(mesh.num_triangles() * 36);
    for (std::size_t t = 0; t < mesh.num_triangles(); ++t) {
        const auto& tri = mesh.triangle(t);
        const Vec2& p0 = mesh.vertex(tri[0]);
        const Vec2& p1 = mesh.vertex(tri[1]);
        const Vec2& p2 = mesh.vertex(tri[2]);
        const double area = mesh.signed_area(t);
        // Gradients of the barycentric basis functions.
        std::array<Vec2, 3> g{Vec2(p1.y() - p2.y(), p2.x() - p1.x()), Vec2(p2.y() - p0.y(), p0.x() - p2.x()),
                              Vec2(p0.y() - p1.y(), p1.x() - p0.x())};
        for (auto& gi : g) {
            gi /= 2.0 * area;
        }
        for (int a = 0; a < 3; ++a) {
            for (int b = 0; b < 3; ++b) {
                const double gg = g[a].dot(g[b]);
                for (int i = 0; i < 2; ++i) {
                    for (int j = 0; j < 2; ++j) {
                        const double v = area * (params.mu * ((i == j ? gg : 0.0) + g[a][j] * g[b][i]) +
                                                 params.lambda * g[a][i] * g[b][j]);
                        trips.emplace_back(2 * tri[a] + i, 2 * tri[b] + j, v);
                    }
                }
            }
        }
    }
    SparseMatrix k(ndof, ndof);
    k.setFromTriplets(trips.begin(), trips.end());

    std::vector<char> constrained(static_cast<std::size_t>(ndof), 0);
    Eigen::VectorXd values = Eigen::VectorXd::Zero(ndof);
    for (int v : mesh.outer_boundary_nodes()) {
        constrained[2 * static_cast<std::size_t>(v)] = 1;
        constrained[2 * static_cast<std::size_t>(v) + 1] = 1;
    }
    for (std::size_t k2 = 0; k2 < iface.size(); ++k2) {
        const auto v = static_cast<std::size_t>(iface[k2]);
        constrained[2 * v] = 1;
        constrained[2 * v + 1] = 1;
        values[static_cast<Eigen::Index>(2 * v)] = interface_displacement[k2].x();
        values[static_cast<Eigen::Index>(2 * v + 1)] = interface_displacement[k2].y();
    }
    const ConstrainedSpdSolver solver(k, constrained);
    const Eigen::VectorXd u = solver.solve(Eigen::VectorXd::Zero(ndof), values);

    DeformationField d;
    d.displacement.resize(static_cast<std::size_t>(nv));
    for (Eigen::Index v = 0; v < nv; ++v) {
        d.displacement[static_cast<std::size_t>(v)] = Vec2(u[2 * v], u[2 * v + 1]);
    }
    return d;
}

TriMesh apply_deformation(const TriMesh& mesh, const DeformationField& d) {
    if (d.displacement.size() != mesh.num_vertices()) {
        throw GeometryError("apply_deformation: displacement size does not match vertex count");
    }
    std::vector<Vec2> moved(mesh.vertices().begin(), mesh.vertices().end());
    for (std::size_t v = 0; v < moved.size(); ++v) {
        if (mesh.is_outer_boundary(static_cast<int>(v))) {
            if (d.displacement[v].norm() != 0.0) {
                throw GeometryError("apply_deformation: displacement must vanish on the outer boundary");
            }
            continue;
        }
        moved[v] += d.displacement[v];
    }
    return mesh.with_vertices(std::move(moved));
}

PointLocator::PointLocator(TriMesh mesh) : mesh_(std::move(mesh)) {
    lo_ = Vec2::Constant(std::numeric_limits<double>::infinity());
    hi_ = -lo_;
    for (const auto& v : mesh_.vertices()) {
        lo_ = lo_.cwiseMin(v);
        hi_ = hi_.cwiseMax(v);
    }
    grid_ = std::max(1, static_cast<int>(std::sqrt(static_cast<double>(mesh_.num_triangles()) / 2.0)));
    buckets_.assign(static_cast<std::size_t>(grid_ * grid_), {});
    const Vec2 extent = hi_ - lo_;
    for (std::size_t t = 0; t < mesh_.num_triangles(); ++t) {
        const auto& tri = mesh_.triangle(t);
        Vec2 tlo = mesh_.vertex(tri[0]);
        Vec2 thi = tlo;
        for (int k = 1; k < 3; ++k) {
            tlo = tlo.cwiseMin(mesh_.vertex(tri[k]));
            thi = thi.cwiseMax(mesh_.vertex(tri[k]));
        }
        auto cell = [&](double v, double l, double e) {
            const int c = static_cast<int>(std::floor((v - l) / e * grid_));
            return std::clamp(c, 0, grid_ - 1);
        };
        const double pad = 1e-10;
        const int i0 = cell(tlo.x() - pad, lo_.x(), extent.x());
        const int i1 = cell(thi.x() + pad, lo_.x(), extent.x());
        const int j0 = cell(tlo.y() - pad, lo_.y(), extent.y());
        const int j1 = cell(thi.y() + pad, lo_.y(), extent.y());
        for (int j = j0; j <= j1; ++j) {
            for (int i = i0; i <= i1; ++i) {
                buckets_[static_cast<std::size_t>(j * grid_ + i)].push_back(static_cast<std::uint32_t>(t));
            }
        }
    }
}

std::size_t PointLocator::bucket_of(double x, double y) const {
    const Vec2 extent = hi_ - lo_;
    const int i = std::clamp(static_cast<int>(std::floor((x - lo_.x()) / extent.x() * grid_)), 0, grid_ - 1);
    const int j = std::clamp(static_cast<int>(std::floor((y - lo_.y()) / extent.y() * grid_)), 0, grid_ - 1);
    return static_cast<std::size_t>(j * grid_ + i);
}

std::array<double, 3> PointLocator::barycentric(std::size_t t, const Vec2& x) const {
    const auto& tri = mesh_.triangle(t);
    const Vec2& a = mesh_.vertex(tri[0]);
    const Vec2& b = mesh_.vertex(tri[1]);
    const Vec2& c = mesh_.vertex(tri[2]);
    const double det = cross(b - a, c - a);
    return {cross(b - x, c - x) / det, cross(c - x, a - x) / det, cross(a - x, b - x) / det};
}

PointLocation PointLocator::locate(const Vec2& x) const {
    constexpr double tol = 1e-12;
    for (std::uint32_t t : buckets_[bucket_of(x.x(), x.y())]) {
        const auto lam = barycentric(t, x);
        if (lam[0] >= -tol && lam[1] >= -tol && lam[2] >= -tol) {
            PointLocation loc{t, lam};
            double sum = 0.0;
            for (double& l : loc.barycentric) {
                l = std::clamp(l, 0.0, 1.0);
                sum += l;
            }
            if (sum != 1.0) {
                for (double& l : loc.barycentric) {
                    l /= sum;
                }
            }
            return loc;
        }
    }
    throw PointNotFoundError("point (" + std::to_string(x.x()) + ", " + std::to_string(x.y()) +
                             ") lies outside the mesh");
}

PointLocation locate_point(const TriMesh& mesh, const Vec2& x) { return PointLocator(mesh).locate(x); }

}  // namespace shapeopt
