#pragma once

// Self-checks behind the `verify` subcommand. Each check is independent and
// reports a measured quantity next to its threshold.

#include <cstdint>
#include <string>
#include <vector>

#include "shapeopt/driver.hpp"

namespace shapeopt {

struct CheckResult {
    std::string name;
    bool passed = false;
    std::string detail;
};

/// P1 Poisson on the straight template with exact solution sin(pi x) sin(pi y):
/// true L2 errors and observed orders over the given subdivisions.
struct ConvergenceReport {
    std::vector<int> n;
    std::vector<double> l2_error;
    std::vector<double> order;  // order[k] between n[k] and n[k+1]
};
[[nodiscard]] ConvergenceReport manufactured_convergence(const std::vector<int>& subdivisions);

/// Smooth random normal field on the interface: sum of four sine modes with
/// standard-normal coefficients, amplitude decaying like 1/k; zero at the ends.
[[nodiscard]] InterfaceField random_smooth_field(const InterfaceGeometry& geometry, std::uint64_t seed);

/// Analytic pairing <g, w>_s against central differences of J(retract(eps w)),
/// best over eps in {1e-3, 1e-4, 1e-5}, at the initial spline shape.
struct GradientCheck {
    std::vector<double> analytic;
    std::vector<double> finite_difference;
    std::vector<double> rel_error;
    [[nodiscard]] double max_rel_error() const;
};
[[nodiscard]] GradientCheck gradient_fd_check(const ExperimentConfig& config, int n, int fields, std::uint64_t seed);

/// max over random pairs of |<A w1, w2>_s - <A w2, w1>_s| / (|<A w1, w2>_s| + |<A w2, w1>_s|)
/// on the straight interface.
[[nodiscard]] double hessian_asymmetry(const ExperimentConfig& config, int n, int pairs, std::uint64_t seed);

[[nodiscard]] std::vector<CheckResult> run_verification(const ExperimentConfig& config);

}  // namespace shapeopt
