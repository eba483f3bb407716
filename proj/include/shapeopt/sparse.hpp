#pragma once

#include <memory>
#include <span>
#include <vector>

#include <Eigen/Core>
#include <Eigen/SparseCore>

namespace shapeopt {

using SparseMatrix = Eigen::SparseMatrix<double>;

/// Symmetric positive definite solver with a fixed set of Dirichlet
/// (constrained) unknowns. The free block is factorized once with a sparse
/// Cholesky; each solve eliminates the constrained unknowns symmetrically.
class ConstrainedSpdSolver {
public:
    /// Throws SolverError if the free block is not positive definite.
    ConstrainedSpdSolver(const SparseMatrix& a, std::span<const char> constrained);
    ~ConstrainedSpdSolver();
    ConstrainedSpdSolver(ConstrainedSpdSolver&&) noexcept;
    ConstrainedSpdSolver& operator=(ConstrainedSpdSolver&&) noexcept;

    /// Solves A x = rhs on the free unknowns with x fixed to `values` on the
    /// constrained ones (zero when `values` is empty). Relative residual of
    /// the reduced system is guaranteed <= 1e-10 or SolverError is thrown.
    [[nodiscard]] Eigen::VectorXd solve(const Eigen::VectorXd& rhs, const Eigen::VectorXd& values = {}) const;

    [[nodiscard]] Eigen::Index size() const noexcept { return n_; }
    [[nodiscard]] Eigen::Index free_size() const noexcept { return static_cast<Eigen::Index>(free_.size()); }

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
    Eigen::Index n_ = 0;
    std::vector<int> free_;      // free unknown -> global index
};

}  // namespace shapeopt
