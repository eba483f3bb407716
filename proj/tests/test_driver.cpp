#include <gtest/gtest.h>

#include <cmath>

#include "shapeopt/driver.hpp"
#include "shapeopt/errors.hpp"

using namespace shapeopt;

namespace {

ExperimentConfig small_config(int n = 16) {
    ExperimentConfig c;
    c.n = n;
    return c;
}

template <typename Mutate>
void expect_config_error(Mutate mutate, const std::string& key) {
    ExperimentConfig c;
    mutate(c);
    try {
        c.validate();
        ADD_FAILURE() << "expected ConfigError for " << key;
    } catch (const ConfigError& e) {
        EXPECT_EQ(std::string(e.what()).rfind(key + ":", 0), 0u) << e.what();
    }
}

}  // namespace

TEST(Config, DefaultsAreValid) {
    ExperimentConfig c;
    EXPECT_NO_THROW(c.validate());
    EXPECT_EQ(c.f1, 1000.0);
    EXPECT_EQ(c.f2, 1.0);
    EXPECT_EQ(c.mu, 10.0);
    EXPECT_EQ(build_template(c.n).num_triangles(), 6050u);
}

TEST(Config, ValidationNamesTheKey) {
    expect_config_error([](ExperimentConfig& c) { c.f2 = c.f1; }, "f1");
    expect_config_error([](ExperimentConfig& c) { c.mu = 0.0; }, "mu");
    expect_config_error([](ExperimentConfig& c) { c.levels = 0; }, "levels");
    expect_config_error([](ExperimentConfig& c) { c.n = 1; }, "n");
    expect_config_error([](ExperimentConfig& c) { c.cg_tol = 1.0; }, "cg_tol");
    expect_config_error([](ExperimentConfig& c) { c.alpha = 0.0; }, "alpha");
    expect_config_error([](ExperimentConfig& c) { c.alpha = 1.5; }, "alpha");
    expect_config_error([](ExperimentConfig& c) { c.baseline_scaling = -1.0; }, "baseline_scaling");
    expect_config_error([](ExperimentConfig& c) { c.max_sqp_iters = -1; }, "max_sqp_iters");
}

TEST(Data, StraightInterfaceStateOnRefinedMesh) {
    const auto c = small_config(8);
    const auto data = generate_data(c);
    EXPECT_EQ(data->mesh().num_triangles(), 2u * 8 * 8 * 16);
    EXPECT_EQ(dist_to_solution(data->mesh()).value, 0.0);
    EXPECT_GE(data->ybar.values.minCoeff(), 0.0);
    // On its own mesh the data is returned verbatim.
    const NodalField same = data_on(data->mesh(), *data);
    EXPECT_EQ(same.values, data->ybar.values);
    EXPECT_EQ(objective_misfit(data->mesh(), solve_state(data->mesh(), c.f1, c.f2), same), 0.0);
}

TEST(Data, InterpolationOntoNestedMeshIsExact) {
    // Template vertices are vertices of the refined data mesh.
    const auto c = small_config(8);
    const auto data = generate_data(c);
    const TriMesh coarse = level_mesh(8, 1);
    const NodalField y = data_on(coarse, *data);
    for (std::size_t v = 0; v < coarse.num_vertices(); ++v) {
        const Vec2 x = coarse.vertex(static_cast<int>(v));
        const auto loc = data->locator.locate(x);
        double expected = 0.0;
        for (int k = 0; k < 3; ++k) {
            expected += loc.barycentric[static_cast<std::size_t>(k)] *
                        data->ybar.values[data->mesh().triangle(loc.triangle)[static_cast<std::size_t>(k)]];
        }
        EXPECT_NEAR(y.values[static_cast<Eigen::Index>(v)], expected, 1e-14);
    }
}

TEST(Meshes, LevelsRefineAndStartOnSpline) {
    EXPECT_EQ(level_mesh(55, 1).num_triangles(), 6050u);
    EXPECT_EQ(level_mesh(55, 2).num_triangles(), 24200u);
    EXPECT_EQ(level_mesh(10, 3).num_triangles(), 3200u);
    EXPECT_THROW((void)level_mesh(10, 0), ConfigError);
    const TriMesh m = initial_mesh(20, 2);
    EXPECT_NEAR(dist_to_solution(m).value, 0.06875, 2e-3);
    EXPECT_GT(m.min_signed_area(), 0.0);
}

TEST(Sqp, StraightStartWithSelfConsistentDataIsStationary) {
    SolveOptions o;
    o.start = StartShape::Straight;
    o.self_consistent_data = true;
    const auto t = sqp_solve(small_config(), o);
    ASSERT_EQ(t.records.size(), 1u);
    EXPECT_EQ(t.records[0].dist, 0.0);
    EXPECT_LE(t.records[0].grad_norm, 1e-10);
}

TEST(Sqp, CoarseRunDecreasesObjectiveAndDistance) {
    auto c = small_config(24);
    c.max_sqp_iters = 3;
    const auto t = sqp_solve(c);
    ASSERT_EQ(t.records.size(), 4u);
    for (std::size_t k = 0; k < t.records.size(); ++k) {
        EXPECT_EQ(t.records[k].iter, static_cast<int>(k));
        EXPECT_EQ(t.records[k].level, 1);
        if (k > 0) {
            EXPECT_LT(t.records[k].objective, t.records[k - 1].objective);
            EXPECT_LT(t.records[k].dist, t.records[k - 1].dist);
            EXPECT_LT(t.records[k].grad_norm, t.records[k - 1].grad_norm);
        }
    }
    EXPECT_EQ(t.records.back().alpha, 0.0);
    EXPECT_EQ(t.records.front().alpha, 1.0);
    EXPECT_GT(t.records.front().cg_iters, 0);
    // Superlinear: the last distance is far below the first squared.
    const auto d = t.dists();
    EXPECT_LT(d[2], 10.0 * d[1] * d[1]);
}

TEST(Sqp, Deterministic) {
    const auto c = small_config(12);
    const auto a = sqp_solve(c);
    const auto b = sqp_solve(c);
    ASSERT_EQ(a.records.size(), b.records.size());
    for (std::size_t k = 0; k < a.records.size(); ++k) {
        EXPECT_EQ(a.records[k].dist, b.records[k].dist);
        EXPECT_EQ(a.records[k].objective, b.records[k].objective);
    }
}

TEST(Sqp, OnIterateCalledOncePerRecord) {
    std::vector<int> seen;
    std::vector<std::string> lines;
    SolveOptions o;
    o.on_iterate = [&](const IterateView& v) {
        seen.push_back(v.iter);
        EXPECT_EQ(v.record.iter, v.iter);
        EXPECT_EQ(v.workspace.objective_value(), v.record.objective);
    };
    o.log = [&](const std::string& s) { lines.push_back(s); };
    const auto t = sqp_solve(small_config(12), o);
    ASSERT_EQ(seen.size(), t.records.size());
    for (std::size_t k = 0; k < seen.size(); ++k) EXPECT_EQ(seen[k], static_cast<int>(k));
    EXPECT_GE(lines.size(), t.records.size());
}

TEST(SteepestDescent, ZeroGradientDoesNotMove) {
    SolveOptions o;
    o.start = StartShape::Straight;
    o.self_consistent_data = true;
    const auto t = steepest_descent_solve(small_config(), o);
    ASSERT_EQ(t.records.size(), 1u);
    EXPECT_EQ(t.records[0].dist, 0.0);
}

TEST(SteepestDescent, SmallScalingDescends) {
    auto c = small_config(16);
    c.baseline_scaling = 1e-4;
    c.baseline_iters = 3;
    const auto t = steepest_descent_solve(c);
    ASSERT_EQ(t.records.size(), 4u);
    for (std::size_t k = 1; k < t.records.size(); ++k) {
        EXPECT_LT(t.records[k].dist, t.records[k - 1].dist);
        EXPECT_LT(t.records[k].objective, t.records[k - 1].objective);
    }
}

TEST(SteepestDescent, HugeScalingFailsAtFirstIteration) {
    auto c = small_config(16);
    c.baseline_scaling = 1e4;
    try {
        (void)steepest_descent_solve(c);
        FAIL() << "expected IterationError";
    } catch (const IterationError& e) {
        EXPECT_EQ(e.iteration(), 0);
    }
}

TEST(Study, LevelsShareStartAndConverge) {
    auto c = small_config(16);
    c.levels = 2;
    const auto traces = convergence_study(c);
    ASSERT_EQ(traces.size(), 2u);
    for (std::size_t l = 0; l < traces.size(); ++l) {
        EXPECT_EQ(traces[l].level, static_cast<int>(l) + 1);
        ASSERT_FALSE(traces[l].failed) << traces[l].failure;
        ASSERT_EQ(traces[l].records.size(), 3u);
        const auto d = traces[l].dists();
        EXPECT_GT(d[0], d[1]);
        EXPECT_GT(d[1], d[2]);
    }
    EXPECT_NEAR(traces[0].records[0].dist, traces[1].records[0].dist, 2e-2 * traces[1].records[0].dist);
}

TEST(Study, FailingLevelIsReportedNotThrown) {
    auto c = small_config(16);
    c.levels = 1;
    c.alpha = 1.0;
    SolveOptions o;
    o.elasticity.mu = -1.0;  // indefinite mesh-motion operator
    const auto traces = convergence_study(c, o);
    ASSERT_EQ(traces.size(), 1u);
    EXPECT_TRUE(traces[0].failed);
    EXPECT_FALSE(traces[0].failure.empty());
}
