// Command-line front end: solve, study, baseline, verify.
//
// Exit codes: 0 success, 1 configuration or usage error, 2 solver failure.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "shapeopt/config.hpp"
#include "shapeopt/driver.hpp"
#include "shapeopt/errors.hpp"
#include "shapeopt/io.hpp"
#include "shapeopt/verify.hpp"

namespace fs = std::filesystem;
using namespace shapeopt;

namespace {

constexpr int kOk = 0;
constexpr int kConfigError = 1;
constexpr int kSolverError = 2;

struct CommonArgs {
    std::string config_path;
    std::string out_dir = "shapeopt_out";
    bool force = false;
    std::optional<int> level;
    std::optional<double> alpha;
    std::optional<double> scaling;
    std::optional<double> cg_tol;
    std::optional<std::uint64_t> seed;
};

void add_common(CLI::App* cmd, CommonArgs& a, bool with_output) {
    cmd->add_option("--config", a.config_path, "key=value configuration file");
    if (with_output) {
        cmd->add_option("--out", a.out_dir, "output directory")->capture_default_str();
        cmd->add_flag("--force", a.force, "reuse an existing output directory");
    }
    cmd->add_option("--level", a.level, "mesh level (1 = coarsest)");
    cmd->add_option("--alpha", a.alpha, "step length");
    cmd->add_option("--scaling", a.scaling, "steepest-descent scaling");
    cmd->add_option("--cg-tol", a.cg_tol, "relative CG tolerance");
    cmd->add_option("--seed", a.seed, "seed for randomized checks");
}

ExperimentConfig resolve_config(const CommonArgs& a) {
    ExperimentConfig c = a.config_path.empty() ? ExperimentConfig{} : load_config(a.config_path);
    if (a.alpha) c.alpha = *a.alpha;
    if (a.scaling) c.baseline_scaling = *a.scaling;
    if (a.cg_tol) c.cg_tol = *a.cg_tol;
    if (a.seed) c.seed = *a.seed;
    c.validate();
    if (a.level && (*a.level < 1 || *a.level > 6)) {
        throw ConfigError("level: must lie in [1, 6]");
    }
    return c;
}

/// Creates the output directory (refusing to reuse one without --force) and
/// writes the manifest before anything else.
fs::path prepare_output(const CommonArgs& a, const ExperimentConfig& c, const std::string& command) {
    const fs::path dir(a.out_dir);
    if (fs::exists(dir) && !a.force) {
        throw ConfigError("output directory " + dir.string() + " already exists (use --force to overwrite)");
    }
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) {
        throw ConfigError("cannot create output directory " + dir.string() + ": " + ec.message());
    }
    write_manifest(dir / "manifest.txt", make_manifest(c, dir, command));
    return dir;
}

class RunLog {
public:
    explicit RunLog(const fs::path& path) : file_(path) {}

    void operator()(const std::string& line) {
        std::lock_guard lock(mutex_);
        std::cout << line << '\n';
        file_ << line << '\n';
    }

private:
    std::mutex mutex_;
    std::ofstream file_;
};

template <typename Body>
int guarded(Body&& body) {
    try {
        return body();
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return kConfigError;
    } catch (const IterationError& e) {
        std::cerr << "solver failure at " << e.what() << '\n';
        return kSolverError;
    } catch (const Error& e) {
        std::cerr << "solver failure: " << e.what() << '\n';
        return kSolverError;
    }
}

SolveOptions logged_options(RunLog& log, const fs::path& dir, const std::string& prefix, int level) {
    SolveOptions opts;
    opts.level = level;
    opts.log = [&log](const std::string& s) { log(s); };
    opts.on_iterate = [dir, prefix](const IterateView& v) { write_iterate_snapshot(dir, prefix, v); };
    return opts;
}

int cmd_solve(const CommonArgs& a) {
    return guarded([&] {
        const ExperimentConfig c = resolve_config(a);
        const fs::path dir = prepare_output(a, c, "solve");
        RunLog log(dir / "run.log");
        log("data: state on the straight interface, two refinements above the template");
        const std::vector<SqpTrace> traces{sqp_solve(c, logged_options(log, dir, "sqp", a.level.value_or(1)))};
        write_trace_csv(dir / "trace.csv", traces);
        std::cout << format_dist_table(traces);
        return kOk;
    });
}

int cmd_study(const CommonArgs& a) {
    return guarded([&] {
        const ExperimentConfig c = resolve_config(a);
        const fs::path dir = prepare_output(a, c, "study");
        RunLog log(dir / "run.log");
        const auto traces = convergence_study(c, logged_options(log, dir, "sqp", 1));
        write_trace_csv(dir / "trace.csv", traces);
        std::cout << format_dist_table(traces);
        int status = kOk;
        for (const auto& t : traces) {
            if (t.failed) {
                std::cerr << "level " << t.level << " failed: " << t.failure << '\n';
                status = kSolverError;
            }
        }
        return status;
    });
}

int cmd_baseline(const CommonArgs& a) {
    return guarded([&] {
        const ExperimentConfig c = resolve_config(a);
        const fs::path dir = prepare_output(a, c, "baseline");
        RunLog log(dir / "run.log");
        const std::vector<SqpTrace> traces{
            steepest_descent_solve(c, logged_options(log, dir, "descent", a.level.value_or(1)))};
        write_trace_csv(dir / "trace.csv", traces);
        std::cout << format_dist_table(traces);
        const auto& r = traces.front().records;
        for (std::size_t k = 1; k < r.size(); ++k) {
            if (r[k - 1].dist > 0.0 && (r[k - 1].dist - r[k].dist) / r[k - 1].dist <= 0.01) {
                log("warning: insufficient progress, dist decreased by at most 1% at iteration " + std::to_string(k) +
                    "; increase --scaling");
                break;
            }
        }
        return kOk;
    });
}

int cmd_verify(const CommonArgs& a) {
    return guarded([&] {
        const ExperimentConfig c = resolve_config(a);
        bool all = true;
        for (const auto& r : run_verification(c)) {
            std::cout << (r.passed ? "PASS " : "FAIL ") << r.name << ": " << r.detail << '\n';
            all = all && r.passed;
        }
        return all ? kOk : kConfigError;
    });
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Interface identification by shape Lagrange-Newton iterations"};
    app.require_subcommand(1);
    app.set_version_flag("--version", std::string(tool_version()));

    CommonArgs solve_args, study_args, baseline_args, verify_args;
    auto* solve = app.add_subcommand("solve", "run the SQP iteration on one mesh level");
    add_common(solve, solve_args, true);
    auto* study = app.add_subcommand("study", "run the SQP iteration on all levels and print the distance table");
    add_common(study, study_args, true);
    auto* baseline = app.add_subcommand("baseline", "run scaled steepest descent");
    add_common(baseline, baseline_args, true);
    auto* verify = app.add_subcommand("verify", "run the numerical self-checks");
    add_common(verify, verify_args, false);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kOk : kConfigError;
    }

    if (*solve) return cmd_solve(solve_args);
    if (*study) return cmd_study(study_args);
    if (*baseline) return cmd_baseline(baseline_args);
    return cmd_verify(verify_args);
}
