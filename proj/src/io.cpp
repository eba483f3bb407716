#include "shapeopt/io.hpp"

#include <fstream>
#include <iomanip>
#include <sstream>

#include "shapeopt/errors.hpp"

namespace shapeopt {

namespace {

std::ofstream open_out(const std::filesystem::path& path) {
    std::ofstream os(path);
    if (!os) {
        throw Error("cannot open " + path.string() + " for writing");
    }
    return os;
}

void finish(std::ofstream& os, const std::filesystem::path& path) {
    os.flush();
    if (!os) {
        throw Error("write failed: " + path.string());
    }
}

}  // namespace

void write_vtk(std::ostream& os, const TriMesh& mesh, std::span<const NamedField> fields) {
    const std::size_t nv = mesh.num_vertices();
    const std::size_t nt = mesh.num_triangles();
    for (const auto& f : fields) {
        if (f.values.size() != nv) {
            throw Error("write_vtk: field '" + f.name + "' has " + std::to_string(f.values.size()) +
                        " values, mesh has " + std::to_string(nv) + " vertices");
        }
    }
    os << "# vtk DataFile Version 3.0\n"
       << "interface mesh\n"
       << "ASCII\n"
       << "DATASET UNSTRUCTURED_GRID\n";
    os << std::setprecision(17);
    os << "POINTS " << nv << " double\n";
    for (const auto& v : mesh.vertices()) {
        os << v.x() << ' ' << v.y() << " 0\n";
    }
    os << "CELLS " << nt << ' ' << 4 * nt << '\n';
    for (const auto& t : mesh.triangles()) {
        os << "3 " << t[0] << ' ' << t[1] << ' ' << t[2] << '\n';
    }
    os << "CELL_TYPES " << nt << '\n';
    for (std::size_t t = 0; t < nt; ++t) {
        os << "5\n";
    }
    os << "CELL_DATA " << nt << '\n' << "SCALARS subdomain int 1\nLOOKUP_TABLE default\n";
    for (int s : mesh.subdomain()) {
        os << s << '\n';
    }
    if (!fields.empty()) {
        os << "POINT_DATA " << nv << '\n';
        for (const auto& f : fields) {
            os << "SCALARS " << f.name << " double 1\nLOOKUP_TABLE default\n";
            for (double x : f.values) {
                os << x << '\n';
            }
        }
    }
}

void write_vtk(const std::filesystem::path& path, const TriMesh& mesh, std::span<const NamedField> fields) {
    auto os = open_out(path);
    write_vtk(os, mesh, fields);
    finish(os, path);
}

void write_interface_csv(std::ostream& os, const InterfaceGeometry& geometry, std::span<const double> values) {
    if (values.size() != geometry.size()) {
        throw GeometryError("write_interface_csv: one value per interface node required");
    }
    os << "y,x,nx,ny,kappa,value\n" << std::setprecision(7);
    for (std::size_t i = 0; i < geometry.size(); ++i) {
        const auto& p = geometry.points[i];
        const auto& n = geometry.normals[i];
        // + 0.0 prints negative zero as 0.
        os << p.y() + 0.0 << ',' << p.x() + 0.0 << ',' << n.x() + 0.0 << ',' << n.y() + 0.0 << ','
           << geometry.curvature[i] + 0.0 << ',' << values[i] << '\n';
    }
}

void write_interface_csv(const std::filesystem::path& path, const InterfaceGeometry& geometry,
                         std::span<const double> values) {
    auto os = open_out(path);
    write_interface_csv(os, geometry, values);
    finish(os, path);
}

void write_trace_csv(std::ostream& os, std::span<const SqpTrace> traces) {
    os << "level,iter,dist,J,grad_norm,cg_iters,alpha\n" << std::setprecision(7);
    for (const auto& t : traces) {
        for (const auto& r : t.records) {
            os << r.level << ',' << r.iter << ',' << r.dist << ',' << r.objective << ',' << r.grad_norm << ','
               << r.cg_iters << ',' << r.alpha << '\n';
        }
    }
}

void write_trace_csv(const std::filesystem::path& path, std::span<const SqpTrace> traces) {
    auto os = open_out(path);
    write_trace_csv(os, traces);
    finish(os, path);
}

std::string format_dist_table(std::span<const SqpTrace> traces) {
    std::size_t rows = 0;
    for (const auto& t : traces) {
        rows = std::max(rows, t.records.size());
    }
    std::ostringstream os;
    os << std::setw(5) << "iter";
    for (const auto& t : traces) {
        os << std::setw(16) << ("level " + std::to_string(t.level));
    }
    os << '\n' << std::setprecision(7);
    for (std::size_t k = 0; k < rows; ++k) {
        os << std::setw(5) << k;
        for (const auto& t : traces) {
            if (k < t.records.size()) {
                os << std::setw(16) << t.records[k].dist;
            } else {
                os << std::setw(16) << (t.failed ? "failed" : "-");
            }
        }
        os << '\n';
    }
    if (rows == 0) {
        for (const auto& t : traces) {
            if (t.failed) {
                os << "level " << t.level << " failed: " << t.failure << '\n';
            }
        }
    }
    return os.str();
}

void write_iterate_snapshot(const std::filesystem::path& dir, const std::string& prefix, const IterateView& view) {
    const auto& ws = view.workspace;
    const std::string stem = prefix + "_l" + std::to_string(view.level) + "_it" + std::to_string(view.iter);
    const auto& y = ws.state().values;
    const auto& p = ws.adjoint().values;
    const auto& ybar = ws.data().values;
    const NamedField fields[] = {
        {"y", {y.data(), static_cast<std::size_t>(y.size())}},
        {"p", {p.data(), static_cast<std::size_t>(p.size())}},
        {"ybar", {ybar.data(), static_cast<std::size_t>(ybar.size())}},
    };
    write_vtk(dir / (stem + ".vtk"), ws.mesh(), fields);
    const auto g = ws.gradient();
    write_interface_csv(dir / (stem + "_gradient.csv"), ws.geometry(),
                        {g.values.data(), static_cast<std::size_t>(g.values.size())});
}

}  // namespace shapeopt
