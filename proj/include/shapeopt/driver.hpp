#pragma once

// Outer optimization loops: shape Lagrange-Newton (SQP) and the
// steepest-descent baseline, synthetic data generation, and the
// multi-level convergence study.

#include <cstdint>
#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "shapeopt/fem.hpp"
#include "shapeopt/mesh.hpp"
#include "shapeopt/qp.hpp"
#include "shapeopt/shape.hpp"

namespace shapeopt {

struct ExperimentConfig {
    double f1 = 1000.0;
    double f2 = 1.0;
    double mu = 10.0;
    int levels = 3;
    int n = 55;
    int max_sqp_iters = 2;
    double cg_tol = 1e-8;
    double alpha = 1.0;
    double baseline_scaling = 1e4;
    int baseline_iters = 5;
    std::uint64_t seed = 12345;

    /// Throws ConfigError naming the offending key.
    void validate() const;
};

/// Observation data: the state on a straight-interface mesh, evaluated on
/// other meshes by interpolation.
struct DataSet {
    PointLocator locator;
    NodalField ybar;

    [[nodiscard]] const TriMesh& mesh() const noexcept { return locator.mesh(); }
};

/// State solved on the straight interface, `refinements` uniform refinements
/// above the n x n template.
[[nodiscard]] std::shared_ptr<const DataSet> generate_data(const ExperimentConfig& config, int refinements = 2);
[[nodiscard]] std::shared_ptr<const DataSet> generate_data_on(const TriMesh& mesh, double f1, double f2);

/// The data interpolated at the vertices of `mesh`.
[[nodiscard]] NodalField data_on(const TriMesh& mesh, const DataSet& data);

/// Straight-interface template refined to the given level (level 1 = template).
[[nodiscard]] TriMesh level_mesh(int n, int level);
/// Level mesh with its interface moved onto the initial spline by elasticity.
[[nodiscard]] TriMesh initial_mesh(int n, int level);

struct SqpRecord {
    int level = 1;
    int iter = 0;
    double dist = 0.0;
    bool dist_graph = true;
    double objective = 0.0;
    double grad_norm = 0.0;
    int cg_iters = 0;
    double alpha = 0.0;   // step applied to leave this iterate; 0 on the last record
    double step_norm = 0.0;  // max |w| of the computed direction
    bool negative_curvature = false;
};

struct SqpTrace {
    int level = 1;
    std::vector<SqpRecord> records;
    bool failed = false;
    std::string failure;

    [[nodiscard]] std::vector<double> dists() const;
};

enum class StartShape { Spline, Straight };

struct IterateView {
    int level;
    int iter;
    const QpWorkspace& workspace;
    const SqpRecord& record;
};

struct SolveOptions {
    int level = 1;
    StartShape start = StartShape::Spline;
    /// Null: generate data two levels above the template.
    std::shared_ptr<const DataSet> data;
    /// Use the starting mesh itself as the data mesh (exact discrete optimum at a straight start).
    bool self_consistent_data = false;
    QpOptions qp;
    ElasticityParams elasticity;
    std::function<void(const IterateView&)> on_iterate;
    std::function<void(const std::string&)> log;
};

/// Shape SQP: per iteration a QP workspace (state and adjoint), a CG solve of
/// the reduced problem, and a retraction with step alpha. Throws
/// IterationError when the retraction fails after all step halvings.
[[nodiscard]] SqpTrace sqp_solve(const ExperimentConfig& config, const SolveOptions& options = {});

/// Steepest descent with w = scaling * ((f1 - f2) p - mu kappa).
[[nodiscard]] SqpTrace steepest_descent_solve(const ExperimentConfig& config, const SolveOptions& options = {});

/// Runs sqp_solve on levels 1..config.levels from the same initial curve.
/// Levels run concurrently; a failing level is reported in its trace.
[[nodiscard]] std::vector<SqpTrace> convergence_study(const ExperimentConfig& config,
                                                      const SolveOptions& options = {});

}  // namespace shapeopt
