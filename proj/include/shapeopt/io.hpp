#pragma once

#include <filesystem>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "shapeopt/driver.hpp"
#include "shapeopt/mesh.hpp"
#include "shapeopt/shape.hpp"

namespace shapeopt {

struct NamedField {
    std::string name;
    std::span<const double> values;  // one value per mesh vertex
};

/// Legacy ASCII VTK unstructured grid: triangles, CELL_DATA "subdomain",
/// one POINT_DATA scalar per field.
void write_vtk(std::ostream& os, const TriMesh& mesh, std::span<const NamedField> fields = {});
void write_vtk(const std::filesystem::path& path, const TriMesh& mesh, std::span<const NamedField> fields = {});

/// Columns y, x, nx, ny, kappa, value; one row per interface node.
void write_interface_csv(std::ostream& os, const InterfaceGeometry& geometry, std::span<const double> values);
void write_interface_csv(const std::filesystem::path& path, const InterfaceGeometry& geometry,
                         std::span<const double> values);

/// Columns level, iter, dist, J, grad_norm, cg_iters, alpha.
void write_trace_csv(std::ostream& os, std::span<const SqpTrace> traces);
void write_trace_csv(const std::filesystem::path& path, std::span<const SqpTrace> traces);

/// Iterations as rows and levels as columns, 7 significant digits.
[[nodiscard]] std::string format_dist_table(std::span<const SqpTrace> traces);

/// Writes every iterate of a run: VTK with y, p, ybar and the interface CSV
/// of the gradient density, named <prefix>_l<level>_it<iter>.
void write_iterate_snapshot(const std::filesystem::path& dir, const std::string& prefix, const IterateView& view);

}  // namespace shapeopt
