#include <gtest/gtest.h>

#include <sys/wait.h>

#include <array>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

namespace fs = std::filesystem;

namespace {

struct Run {
    int code = -1;
    std::string out;
};

// Runs the CLI with stderr merged into stdout.
Run run(const std::string& args) {
    const std::string cmd = std::string(SHAPEOPT_CLI) + " " + args + " 2>&1";
    Run r;
    FILE* pipe = popen(cmd.c_str(), "r");
    if (pipe == nullptr) return r;
    std::array<char, 4096> buf{};
    while (fgets(buf.data(), static_cast<int>(buf.size()), pipe) != nullptr) r.out += buf.data();
    const int status = pclose(pipe);
    r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    return r;
}

std::vector<std::string> table_rows(const std::string& out) {
    std::vector<std::string> rows;
    std::istringstream is(out);
    bool in_table = false;
    for (std::string line; std::getline(is, line);) {
        if (line.rfind(" iter", 0) == 0 && line.find("level 1") != std::string::npos) {
            in_table = true;
            continue;
        }
        if (in_table) rows.push_back(line);
    }
    return rows;
}

class Cli : public ::testing::Test {
protected:
    void SetUp() override {
        dir = fs::temp_directory_path() /
              ("shapeopt_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
        fs::remove_all(dir);
        fs::create_directories(dir);
    }
    void TearDown() override { fs::remove_all(dir); }

    std::string write_config(const std::string& text) {
        const fs::path p = dir / "run.cfg";
        std::ofstream(p) << text;
        return p.string();
    }

    fs::path dir;
};

}  // namespace

TEST_F(Cli, MissingConfigIsConfigError) {
    const std::string path = (dir / "absent.cfg").string();
    const auto r = run("solve --config " + path + " --out " + (dir / "out").string());
    EXPECT_EQ(r.code, 1);
    EXPECT_NE(r.out.find(path), std::string::npos) << r.out;
}

TEST_F(Cli, InvalidValuesAreConfigErrors) {
    EXPECT_EQ(run("solve --alpha 2 --out " + (dir / "a").string()).code, 1);
    EXPECT_EQ(run("solve --level 9 --out " + (dir / "b").string()).code, 1);
    const auto r = run("solve --config " + write_config("mu = -1\n") + " --out " + (dir / "c").string());
    EXPECT_EQ(r.code, 1);
    EXPECT_NE(r.out.find("mu"), std::string::npos);
    EXPECT_EQ(run("frobnicate").code, 1);
}

TEST_F(Cli, SolvePrintsTableAndRefusesToOverwrite) {
    const std::string out = (dir / "solve").string();
    const auto r = run("solve --out " + out);
    ASSERT_EQ(r.code, 0) << r.out;
    EXPECT_EQ(table_rows(r.out).size(), 3u) << r.out;
    for (const char* f : {"manifest.txt", "run.log", "trace.csv", "sqp_l1_it0.vtk", "sqp_l1_it2_gradient.csv"}) {
        EXPECT_TRUE(fs::exists(fs::path(out) / f)) << f;
    }
    const auto again = run("solve --out " + out);
    EXPECT_EQ(again.code, 1);
    EXPECT_NE(again.out.find("--force"), std::string::npos);
    EXPECT_EQ(run("solve --force --out " + out).code, 0);
}

TEST_F(Cli, StudyPrintsOneColumnPerLevel) {
    const auto cfg = write_config("n = 16\nlevels = 3\n");
    const auto r = run("study --config " + cfg + " --out " + (dir / "study").string());
    ASSERT_EQ(r.code, 0) << r.out;
    const auto rows = table_rows(r.out);
    ASSERT_EQ(rows.size(), 3u) << r.out;
    for (const auto& row : rows) {
        std::istringstream is(row);
        std::vector<double> vals;
        int iter = -1;
        is >> iter;
        for (double v; is >> v;) vals.push_back(v);
        EXPECT_EQ(vals.size(), 3u) << row;
    }
}

TEST_F(Cli, BaselineWarnsOnInsufficientProgress) {
    const auto cfg = write_config("n = 16\nbaseline_iters = 2\n");
    const auto r = run("baseline --config " + cfg + " --scaling 1e-7 --out " + (dir / "base").string());
    EXPECT_EQ(r.code, 0) << r.out;
    EXPECT_NE(r.out.find("warning: insufficient progress"), std::string::npos) << r.out;
}

TEST_F(Cli, BaselineMeshFailureIsSolverError) {
    const auto cfg = write_config("n = 16\n");
    const auto r = run("baseline --config " + cfg + " --scaling 1e4 --out " + (dir / "base").string());
    EXPECT_EQ(r.code, 2) << r.out;
    EXPECT_NE(r.out.find("iteration 0"), std::string::npos) << r.out;
}

TEST_F(Cli, VerifyPasses) {
    const auto r = run("verify");
    EXPECT_EQ(r.code, 0) << r.out;
    EXPECT_EQ(r.out.find("FAIL"), std::string::npos) << r.out;
    EXPECT_NE(r.out.find("PASS hessian_symmetry"), std::string::npos);
}

TEST_F(Cli, VersionFlag) {
    const auto r = run("--version");
    EXPECT_EQ(r.code, 0);
    EXPECT_NE(r.out.find("shapeopt"), std::string::npos);
}
