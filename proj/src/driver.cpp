#include "shapeopt/driver.hpp"

#include <cmath>
#include <future>
#include <optional>
#include <sstream>
#include <utility>

#include "shapeopt/errors.hpp"

namespace shapeopt {

void ExperimentConfig::validate() const {
    auto fail = [](const std::string& key, const std::string& why) { throw ConfigError(key + ": " + why); };
    if (!std::isfinite(f1)) fail("f1", "must be finite");
    if (!std::isfinite(f2)) fail("f2", "must be finite");
    if (f1 == f2) fail("f1", "f1 and f2 must differ (the interface is not identifiable otherwise)");
    if (!(mu > 0.0) || !std::isfinite(mu)) fail("mu", "must be positive");
    if (levels < 1) fail("levels", "must be at least 1");
    if (n < 2) fail("n", "must be at least 2");
    if (max_sqp_iters < 0) fail("max_sqp_iters", "must be non-negative");
    if (!(cg_tol > 0.0) || cg_tol >= 1.0) fail("cg_tol", "must lie in (0, 1)");
    if (!(alpha > 0.0) || alpha > 1.0) fail("alpha", "must lie in (0, 1]");
    if (!(baseline_scaling > 0.0) || !std::isfinite(baseline_scaling)) fail("baseline_scaling", "must be positive");
    if (baseline_iters < 0) fail("baseline_iters", "must be non-negative");
}

std::shared_ptr<const DataSet> generate_data_on(const TriMesh& mesh, double f1, double f2) {
    NodalField y = solve_state(mesh, f1, f2);
    return std::make_shared<const DataSet>(DataSet{PointLocator(mesh), std::move(y)});
}

std::shared_ptr<const DataSet> generate_data(const ExperimentConfig& config, int refinements) {
    TriMesh mesh = build_template(config.n);
    for (int r = 0; r < refinements; ++r) {
        mesh = refine_uniform(mesh);
    }
    return generate_data_on(mesh, config.f1, config.f2);
}

NodalField data_on(const TriMesh& mesh, const DataSet& data) {
    if (mesh.tag() == data.mesh().tag()) {
        return data.ybar;
    }
    const auto values = evaluate_field(data.locator, data.ybar, mesh.vertices());
    NodalField out = NodalField::zeros(mesh);
    for (std::size_t i = 0; i < values.size(); ++i) {
        out.values[static_cast<Eigen::Index>(i)] = values[i];
    }
    return out;
}

TriMesh level_mesh(int n, int level) {
    if (level < 1) {
        throw ConfigError("level: must be at least 1");
    }
    TriMesh mesh = build_template(n);
    for (int l = 1; l < level; ++l) {
        mesh = refine_uniform(mesh);
    }
    return mesh;
}

TriMesh initial_mesh(int n, int level) {
    const TriMesh straight = level_mesh(n, level);
    const auto nodes = straight.interface_nodes();
    std::vector<Vec2> targets(nodes.size());
    for (std::size_t i = 0; i < nodes.size(); ++i) {
        targets[i] = initial_curve_at_height(straight.vertex(nodes[i]).y());
    }
    return move_interface_to(straight, targets);
}

std::vector<double> SqpTrace::dists() const {
    std::vector<double> out;
    out.reserve(records.size());
    for (const auto& r : records) {
        out.push_back(r.dist);
    }
    return out;
}

namespace {

struct Start {
    TriMesh mesh;
    std::shared_ptr<const DataSet> data;
};

Start make_start(const ExperimentConfig& config, const SolveOptions& options) {
    config.validate();
    TriMesh mesh = options.start == StartShape::Spline ? initial_mesh(config.n, options.level)
                                                       : level_mesh(config.n, options.level);
    std::shared_ptr<const DataSet> data = options.data;
    if (options.self_consistent_data) {
        data = generate_data_on(options.start == StartShape::Straight ? mesh : level_mesh(config.n, options.level),
                                config.f1, config.f2);
    } else if (!data) {
        data = generate_data(config);
    }
    return {std::move(mesh), std::move(data)};
}

QpOptions qp_options(const ExperimentConfig& config, const SolveOptions& options) {
    QpOptions qp = options.qp;
    qp.cg_tol = config.cg_tol;
    return qp;
}

std::unique_ptr<QpWorkspace> make_workspace(const TriMesh& mesh, const DataSet& data, const ExperimentConfig& config,
                                            const QpOptions& qp) {
    return std::make_unique<QpWorkspace>(mesh, data_on(mesh, data), config.f1, config.f2, config.mu, qp);
}

SqpRecord base_record(int level, int iter, const QpWorkspace& ws) {
    SqpRecord rec;
    rec.level = level;
    rec.iter = iter;
    const auto d = dist_to_solution(ws.geometry().points);
    rec.dist = d.value;
    rec.dist_graph = d.graph;
    rec.objective = ws.objective_value();
    rec.grad_norm = norm_s(ws.geometry(), ws.gradient().values);
    return rec;
}

void log_line(const SolveOptions& options, const std::string& what) {
    if (options.log) {
        options.log(what);
    }
}

std::string describe(const SqpRecord& r) {
    std::ostringstream os;
    os.precision(7);
    os << "level " << r.level << " iter " << r.iter << ": dist " << r.dist << " J " << r.objective << " |g| "
       << r.grad_norm;
    if (r.cg_iters > 0) {
        os << " cg " << r.cg_iters;
    }
    if (!r.dist_graph) {
        os << " (interface not a graph, arc-length distance)";
    }
    return os.str();
}

constexpr double kGradientStop = 1e-10;
constexpr double kObjectiveGrowth = 1.1;
constexpr int kMaxObjectiveHalvings = 10;

// Retracts along w with step `alpha`, halving while the objective grows by
// more than 10 %. Returns the workspace of the accepted iterate.
std::unique_ptr<QpWorkspace> advance(const QpWorkspace& ws, const InterfaceField& w, double alpha,
                                     const DataSet& data, const ExperimentConfig& config, const QpOptions& qp,
                                     const SolveOptions& options, int iter, double& applied) {
    const double j0 = ws.objective_value();
    double step = alpha;
    for (int h = 0;; ++h) {
        RetractResult moved = [&] {
            try {
                return retract(ws.mesh(), w, ws.geometry(), step, options.elasticity);
            } catch (const MeshValidityError& e) {
                throw IterationError(iter, e.what());
            }
        }();
        auto next = make_workspace(moved.mesh, data, config, qp);
        const double j1 = next->objective_value();
        if (j1 <= kObjectiveGrowth * j0 || h == kMaxObjectiveHalvings) {
            applied = moved.step;
            if (h == kMaxObjectiveHalvings && j1 > kObjectiveGrowth * j0) {
                log_line(options, "objective still increasing after step halvings; accepting step");
            }
            return next;
        }
        step = 0.5 * moved.step;
    }
}

}  // namespace

SqpTrace sqp_solve(const ExperimentConfig& config, const SolveOptions& options) {
    Start start = make_start(config, options);
    const QpOptions qp = qp_options(config, options);
    SqpTrace trace;
    trace.level = options.level;

    auto ws = make_workspace(start.mesh, *start.data, config, qp);
    for (int k = 0;; ++k) {
        SqpRecord rec = base_record(options.level, k, *ws);
        const bool last = rec.grad_norm <= kGradientStop || k >= config.max_sqp_iters;
        std::unique_ptr<QpWorkspace> next;
        if (!last) {
            const CgResult cg = solve_qp_cg(*ws);
            rec.cg_iters = cg.iterations;
            rec.negative_curvature = cg.negative_curvature;
            rec.step_norm = cg.w.values.lpNorm<Eigen::Infinity>();
            if (cg.negative_curvature) {
                log_line(options, "negative curvature detected in CG; using the last iterate");
            }
            next = advance(*ws, cg.w, config.alpha, *start.data, config, qp, options, k, rec.alpha);
        }
        log_line(options, describe(rec));
        trace.records.push_back(rec);
        if (options.on_iterate) {
            options.on_iterate({options.level, k, *ws, trace.records.back()});
        }
        if (last) {
            break;
        }
        ws = std::move(next);
    }
    return trace;
}

SqpTrace steepest_descent_solve(const ExperimentConfig& config, const SolveOptions& options) {
    Start start = make_start(config, options);
    const QpOptions qp = qp_options(config, options);
    SqpTrace trace;
    trace.level = options.level;

    auto ws = make_workspace(start.mesh, *start.data, config, qp);
    for (int k = 0;; ++k) {
        SqpRecord rec = base_record(options.level, k, *ws);
        const bool last = rec.grad_norm <= kGradientStop || k >= config.baseline_iters;
        std::unique_ptr<QpWorkspace> next;
        if (!last) {
            const InterfaceField g = ws->gradient();
            const InterfaceField w{-config.baseline_scaling * g.values, FieldRole::Design};
            rec.step_norm = w.values.lpNorm<Eigen::Infinity>();
            try {
                RetractResult moved = retract(ws->mesh(), w, ws->geometry(), 1.0, options.elasticity);
                rec.alpha = moved.step;
                next = make_workspace(moved.mesh, *start.data, config, qp);
            } catch (const MeshValidityError& e) {
                throw IterationError(k, e.what());
            }
        }
        log_line(options, describe(rec));
        trace.records.push_back(rec);
        if (options.on_iterate) {
            options.on_iterate({options.level, k, *ws, trace.records.back()});
        }
        if (last) {
            break;
        }
        ws = std::move(next);
    }
    return trace;
}

std::vector<SqpTrace> convergence_study(const ExperimentConfig& config, const SolveOptions& options) {
    config.validate();
    // One data set shared by all levels; each level owns its workspaces.
    const auto data = options.data ? options.data : generate_data(config);
    std::vector<std::future<SqpTrace>> jobs;
    for (int level = 1; level <= config.levels; ++level) {
        SolveOptions opts = options;
        opts.level = level;
        opts.data = data;
        jobs.push_back(std::async(std::launch::async, [config, opts] {
            try {
                return sqp_solve(config, opts);
            } catch (const Error& e) {
                SqpTrace t;
                t.level = opts.level;
                t.failed = true;
                t.failure = e.what();
                return t;
            }
        }));
    }
    std::vector<SqpTrace> out;
    out.reserve(jobs.size());
    for (auto& j : jobs) {
        out.push_back(j.get());
    }
    return out;
}

}  // namespace shapeopt
