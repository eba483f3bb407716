#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "shapeopt/driver.hpp"
#include "shapeopt/errors.hpp"
#include "shapeopt/io.hpp"

using namespace shapeopt;

namespace {

std::vector<std::string> lines_of(const std::string& text) {
    std::vector<std::string> out;
    std::istringstream is(text);
    for (std::string line; std::getline(is, line);) out.push_back(line);
    return out;
}

std::size_t index_of(const std::vector<std::string>& lines, const std::string& prefix) {
    for (std::size_t i = 0; i < lines.size(); ++i) {
        if (lines[i].rfind(prefix, 0) == 0) return i;
    }
    return lines.size();
}

SqpTrace fake_trace(int level, std::vector<double> dists) {
    SqpTrace t;
    t.level = level;
    for (std::size_t k = 0; k < dists.size(); ++k) {
        SqpRecord r;
        r.level = level;
        r.iter = static_cast<int>(k);
        r.dist = dists[k];
        r.objective = 10.0 + dists[k];
        r.cg_iters = 4;
        r.alpha = k + 1 < dists.size() ? 1.0 : 0.0;
        t.records.push_back(r);
    }
    return t;
}

}  // namespace

TEST(Vtk, StructureMatchesMesh) {
    const TriMesh m = build_template(3);
    std::vector<double> f(m.num_vertices(), 1.5);
    const NamedField fields[] = {{"y", f}};
    std::ostringstream os;
    write_vtk(os, m, fields);
    const auto lines = lines_of(os.str());
    EXPECT_EQ(lines[0], "# vtk DataFile Version 3.0");
    EXPECT_EQ(lines[3], "DATASET UNSTRUCTURED_GRID");
    const auto pts = index_of(lines, "POINTS ");
    ASSERT_LT(pts, lines.size());
    EXPECT_EQ(lines[pts], "POINTS 16 double");
    const auto cells = index_of(lines, "CELLS ");
    EXPECT_EQ(lines[cells], "CELLS 18 72");
    EXPECT_EQ(cells - pts - 1, 16u);
    const auto types = index_of(lines, "CELL_TYPES ");
    EXPECT_EQ(types - cells - 1, 18u);
    EXPECT_EQ(lines[types + 1], "5");
    EXPECT_LT(index_of(lines, "SCALARS subdomain int 1"), lines.size());
    const auto pd = index_of(lines, "POINT_DATA ");
    EXPECT_EQ(lines[pd], "POINT_DATA 16");
    EXPECT_EQ(lines[pd + 1], "SCALARS y double 1");
    EXPECT_EQ(lines[pd + 3], "1.5");
    EXPECT_EQ(lines.size(), pd + 3 + 16);
}

TEST(Vtk, FieldSizeMismatchRejected) {
    const TriMesh m = build_template(3);
    std::vector<double> f(5, 0.0);
    const NamedField fields[] = {{"bad", f}};
    std::ostringstream os;
    EXPECT_THROW(write_vtk(os, m, fields), Error);
}

TEST(Vtk, UnwritablePathReported) {
    const TriMesh m = build_template(2);
    EXPECT_THROW(write_vtk(std::filesystem::path("/nonexistent-dir/x.vtk"), m), Error);
}

TEST(InterfaceCsv, HeaderAndRows) {
    const TriMesh m = level_mesh(4, 1);
    const auto geo = compute_geometry(m);
    std::vector<double> v(geo.size(), 0.25);
    std::ostringstream os;
    write_interface_csv(os, geo, v);
    const auto lines = lines_of(os.str());
    ASSERT_EQ(lines.size(), geo.size() + 1);
    EXPECT_EQ(lines[0], "y,x,nx,ny,kappa,value");
    EXPECT_EQ(lines[1], "0,0.5,1,0,0,0.25");
    EXPECT_EQ(lines.back(), "1,0.5,1,0,0,0.25");
    std::vector<double> wrong(2, 0.0);
    EXPECT_THROW(write_interface_csv(os, geo, wrong), GeometryError);
}

TEST(TraceCsv, OneRowPerRecord) {
    const std::vector<SqpTrace> traces{fake_trace(1, {0.07, 0.004, 0.0004}), fake_trace(2, {0.07, 0.004})};
    std::ostringstream os;
    write_trace_csv(os, traces);
    const auto lines = lines_of(os.str());
    ASSERT_EQ(lines.size(), 6u);
    EXPECT_EQ(lines[0], "level,iter,dist,J,grad_norm,cg_iters,alpha");
    EXPECT_EQ(lines[1], "1,0,0.07,10.07,0,4,1");
    EXPECT_EQ(lines[5], "2,1,0.004,10.004,0,4,0");
}

TEST(DistTable, IterationsAsRowsLevelsAsColumns) {
    SqpTrace failed;
    failed.level = 3;
    failed.failed = true;
    failed.failure = "iteration 0: retraction failed";
    const std::vector<SqpTrace> traces{fake_trace(1, {0.0706, 0.0043, 0.00039}), fake_trace(2, {0.0706, 0.004}),
                                       failed};
    const auto lines = lines_of(format_dist_table(traces));
    ASSERT_EQ(lines.size(), 4u);
    EXPECT_NE(lines[0].find("level 1"), std::string::npos);
    EXPECT_NE(lines[0].find("level 3"), std::string::npos);
    std::istringstream row2(lines[3]);
    std::string iter, l1, l2, l3;
    row2 >> iter >> l1 >> l2 >> l3;
    EXPECT_EQ(iter, "2");
    EXPECT_EQ(l1, "0.00039");
    EXPECT_EQ(l2, "-");
    EXPECT_EQ(l3, "failed");
}

TEST(Snapshot, WritesVtkAndGradientCsv) {
    const auto dir = std::filesystem::temp_directory_path() / "shapeopt_io_snapshot";
    std::filesystem::remove_all(dir);
    std::filesystem::create_directories(dir);
    ExperimentConfig c;
    c.n = 6;
    c.max_sqp_iters = 1;
    SolveOptions o;
    o.on_iterate = [&](const IterateView& v) { write_iterate_snapshot(dir, "run", v); };
    (void)sqp_solve(c, o);
    for (const char* name : {"run_l1_it0.vtk", "run_l1_it1.vtk", "run_l1_it0_gradient.csv", "run_l1_it1_gradient.csv"}) {
        EXPECT_TRUE(std::filesystem::exists(dir / name)) << name;
    }
    std::ifstream vtk(dir / "run_l1_it0.vtk");
    std::stringstream ss;
    ss << vtk.rdbuf();
    for (const char* field : {"SCALARS y double", "SCALARS p double", "SCALARS ybar double"}) {
        EXPECT_NE(ss.str().find(field), std::string::npos) << field;
    }
    std::filesystem::remove_all(dir);
}
