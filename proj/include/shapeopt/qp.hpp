#pragma once

// Lagrange-Newton step for the interface problem. The QP in (z, w) is
// reduced onto the interface normal displacement w: each residual
// evaluation solves the linearized state for z, the QP adjoint for q, and
// evaluates the design equation on the interface. The reduced Hessian is
// applied matrix-free and inverted by conjugate gradients.

#include <vector>

#include <Eigen/Core>

#include "shapeopt/fem.hpp"
#include "shapeopt/mesh.hpp"
#include "shapeopt/shape.hpp"
#include "shapeopt/sparse.hpp"

namespace shapeopt {

enum class CgInnerProduct { ArcLength, Euclidean };
enum class CgPreconditioner { None, Tridiagonal };

struct QpOptions {
    double cg_tol = 1e-8;
    int cg_max_iters = 0;  // 0: number of free interface unknowns times 10
    CgInnerProduct inner_product = CgInnerProduct::ArcLength;
    CgPreconditioner preconditioner = CgPreconditioner::None;
};

struct CgResult {
    InterfaceField w;
    int iterations = 0;
    double residual_norm = 0.0;
    double initial_residual_norm = 0.0;
    bool converged = false;
    bool negative_curvature = false;
    std::vector<double> residual_history;  // residual norm per iteration, starting at iteration 0
};

/// Per-iterate data of the QP: mesh, geometry, state, adjoint, data and the
/// factorized Dirichlet Laplacian. Not shareable between threads.
class QpWorkspace {
public:
    /// Solves state and adjoint on `mesh`; `ybar` must live on the same mesh.
    QpWorkspace(TriMesh mesh, NodalField ybar, double f1, double f2, double mu, QpOptions options = {});

    [[nodiscard]] const TriMesh& mesh() const noexcept { return mesh_; }
    [[nodiscard]] const InterfaceGeometry& geometry() const noexcept { return geometry_; }
    [[nodiscard]] const NodalField& state() const noexcept { return y_; }
    [[nodiscard]] const NodalField& adjoint() const noexcept { return p_; }
    [[nodiscard]] const NodalField& data() const noexcept { return ybar_; }
    [[nodiscard]] double f1() const noexcept { return f1_; }
    [[nodiscard]] double f2() const noexcept { return f2_; }
    [[nodiscard]] double mu() const noexcept { return mu_; }
    [[nodiscard]] const QpOptions& options() const noexcept { return options_; }
    [[nodiscard]] const SparseMatrix& stiffness() const noexcept { return stiffness_; }
    [[nodiscard]] const SparseMatrix& mass() const noexcept { return mass_; }
    [[nodiscard]] const Eigen::VectorXd& load() const noexcept { return load_; }
    [[nodiscard]] const ConstrainedSpdSolver& laplace_solver() const noexcept { return solver_; }

    [[nodiscard]] InterfaceField gradient() const;
    [[nodiscard]] double objective_value() const;
    /// Number of PDE solves performed since construction (state and adjoint included).
    [[nodiscard]] long pde_solves() const noexcept { return pde_solves_; }

    /// Weak interface source: entry j = (f1 - f2) s_j w_j on interface nodes.
    [[nodiscard]] Eigen::VectorXd interface_source(const InterfaceField& w) const;
    [[nodiscard]] Eigen::VectorXd solve_laplace(const Eigen::VectorXd& rhs) const;

private:
    TriMesh mesh_;
    InterfaceGeometry geometry_;
    NodalField ybar_;
    double f1_;
    double f2_;
    double mu_;
    QpOptions options_;
    SparseMatrix stiffness_;
    SparseMatrix mass_;
    Eigen::VectorXd load_;
    ConstrainedSpdSolver solver_;
    NodalField y_;
    NodalField p_;
    mutable long pde_solves_ = 0;
};

/// Linearized state z(w): a(z, q) - int_u [[f]] q w ds = -a(y, q) + b(q).
[[nodiscard]] NodalField qp_state_solve(const QpWorkspace& ws, const InterfaceField& w);

/// QP adjoint (full multiplier): -Laplace(q) = -z - (y - ybar), q = 0 on the outer boundary.
[[nodiscard]] NodalField qp_adjoint_solve(const QpWorkspace& ws, const NodalField& z);

/// Design-equation residual in CG sign convention: r(w) = -(design expression),
/// so r(0) equals the negative shape gradient and r(w) = r(0) - A w.
[[nodiscard]] InterfaceField design_residual(const QpWorkspace& ws, const InterfaceField& w);

/// A w = r(0) - r(w).
[[nodiscard]] InterfaceField reduced_hessian_apply(const QpWorkspace& ws, const InterfaceField& w);

/// Solves A w = r(0) by conjugate gradients.
[[nodiscard]] CgResult solve_qp_cg(const QpWorkspace& ws);

/// Direct solve of mu * L w = rhs with L the pinned tangential Laplacian.
[[nodiscard]] InterfaceField solve_tangential_laplacian(const InterfaceGeometry& geometry, double mu,
                                                        const InterfaceField& rhs);

}  // namespace shapeopt
