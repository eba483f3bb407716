#pragma once

// Conforming triangulations of the unit square with an embedded interface
// polyline running from (0.5,0) to (0.5,1). Subdomain 1 lies left of the
// directed interface, subdomain 2 to the right.

#include <array>
#include <cstdint>
#include <memory>
#include <span>
#include <vector>

#include <Eigen/Core>

namespace shapeopt {

using Vec2 = Eigen::Vector2d;
using Triangle = std::array<int, 3>;

struct InterfaceEdge {
    int from = 0;
    int to = 0;
};

/// Connectivity shared by a mesh and all of its deformations.
struct MeshTopology {
    std::vector<Triangle> triangles;
    std::vector<int> subdomain;             // 1 or 2, per triangle
    std::vector<int> outer_boundary_nodes;  // sorted
    std::vector<char> is_outer_boundary;    // per vertex
    std::vector<int> interface_nodes;       // ordered from (0.5,0) to (0.5,1)
    std::vector<InterfaceEdge> interface_edges;
    std::vector<int> interface_position;    // vertex -> index in interface_nodes, or -1
};

/// Immutable triangle mesh. Every constructor validates the mesh invariants
/// (positive areas, interface topology, pinned interface endpoints, simple
/// interface polyline) and throws MeshValidityError on violation.
class TriMesh {
public:
    TriMesh(std::vector<Vec2> vertices, std::vector<Triangle> triangles, std::vector<int> subdomain,
            std::vector<int> outer_boundary_nodes, std::vector<int> interface_nodes);

    /// Same connectivity, new vertex positions. Re-validates geometry.
    [[nodiscard]] TriMesh with_vertices(std::vector<Vec2> vertices) const;

    [[nodiscard]] std::span<const Vec2> vertices() const noexcept { return vertices_; }
    [[nodiscard]] const Vec2& vertex(int i) const { return vertices_[static_cast<std::size_t>(i)]; }
    [[nodiscard]] std::span<const Triangle> triangles() const noexcept { return topo_->triangles; }
    [[nodiscard]] const Triangle& triangle(std::size_t t) const { return topo_->triangles[t]; }
    [[nodiscard]] std::span<const int> subdomain() const noexcept { return topo_->subdomain; }
    [[nodiscard]] std::span<const int> outer_boundary_nodes() const noexcept { return topo_->outer_boundary_nodes; }
    [[nodiscard]] bool is_outer_boundary(int v) const { return topo_->is_outer_boundary[static_cast<std::size_t>(v)] != 0; }
    [[nodiscard]] std::span<const int> interface_nodes() const noexcept { return topo_->interface_nodes; }
    [[nodiscard]] std::span<const InterfaceEdge> interface_edges() const noexcept { return topo_->interface_edges; }
    /// Position of vertex v along the interface, or -1 if v is not an interface node.
    [[nodiscard]] int interface_position(int v) const { return topo_->interface_position[static_cast<std::size_t>(v)]; }

    [[nodiscard]] std::size_t num_vertices() const noexcept { return vertices_.size(); }
    [[nodiscard]] std::size_t num_triangles() const noexcept { return topo_->triangles.size(); }

    [[nodiscard]] double signed_area(std::size_t t) const;
    [[nodiscard]] double total_area() const;
    [[nodiscard]] double min_signed_area() const;
    [[nodiscard]] std::vector<Vec2> interface_polyline() const;

    /// Unique per constructed mesh; fields carry it to detect mesh mix-ups.
    [[nodiscard]] std::uint64_t tag() const noexcept { return tag_; }
    [[nodiscard]] const std::shared_ptr<const MeshTopology>& topology() const noexcept { return topo_; }

private:
    TriMesh(std::shared_ptr<const MeshTopology> topo, std::vector<Vec2> vertices);
    void validate_geometry() const;

    std::shared_ptr<const MeshTopology> topo_;
    std::vector<Vec2> vertices_;
    std::uint64_t tag_;
};

/// Per-vertex displacement, zero on the outer boundary.
struct DeformationField {
    std::vector<Vec2> displacement;
};

/// Plane-strain Lame parameters for the mesh-moving elasticity problem.
struct ElasticityParams {
    double lambda = 0.0;
    double mu = 1.0;
};

/// Structured n x n grid of (0,1)^2 with alternating cell diagonals (2n^2
/// triangles) and a straight interface on x = 0.5. For odd n the columns
/// left and right of x = 0.5 get floor(n/2) and ceil(n/2) cells.
[[nodiscard]] TriMesh build_template(int n);

/// Red refinement: every triangle split into four, labels inherited, edge
/// midpoints inserted into the interface and outer boundary lists.
[[nodiscard]] TriMesh refine_uniform(const TriMesh& mesh);

/// Solves linear elasticity with the given interface displacement (one vector
/// per interface node) and zero displacement on the outer boundary.
[[nodiscard]] DeformationField solve_elastic_deformation(const TriMesh& mesh,
                                                         std::span<const Vec2> interface_displacement,
                                                         const ElasticityParams& params = {});

[[nodiscard]] TriMesh apply_deformation(const TriMesh& mesh, const DeformationField& d);

struct PointLocation {
    std::size_t triangle = 0;
    std::array<double, 3> barycentric{};
};

/// Bucket-grid point locator. Holds its own copy of the mesh.
class PointLocator {
public:
    explicit PointLocator(TriMesh mesh);

    /// Containing triangle with the lowest index; throws PointNotFoundError
    /// when x is farther than 1e-12 from the mesh.
    [[nodiscard]] PointLocation locate(const Vec2& x) const;
    [[nodiscard]] const TriMesh& mesh() const noexcept { return mesh_; }

private:
    [[nodiscard]] std::size_t bucket_of(double x, double y) const;
    [[nodiscard]] std::array<double, 3> barycentric(std::size_t t, const Vec2& x) const;

    TriMesh mesh_;
    Vec2 lo_;
    Vec2 hi_;
    int grid_ = 1;
    std::vector<std::vector<std::uint32_t>> buckets_;
};

[[nodiscard]] PointLocation locate_point(const TriMesh& mesh, const Vec2& x);

}  // namespace shapeopt
