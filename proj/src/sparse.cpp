#include "shapeopt/sparse.hpp"

#include <Eigen/SparseCholesky>

#include "shapeopt/errors.hpp"

namespace shapeopt {

namespace {
constexpr double kResidualTolerance = 1e-10;
}

struct ConstrainedSpdSolver::Impl {
    SparseMatrix a_ff;
    SparseMatrix a_fc;  // free rows, all columns restricted to constrained ones
    Eigen::SimplicialLLT<SparseMatrix, Eigen::Lower, Eigen::AMDOrdering<int>> llt;
};

ConstrainedSpdSolver::ConstrainedSpdSolver(const SparseMatrix& a, std::span<const char> constrained)
    : impl_(std::make_unique<Impl>()), n_(a.rows()) {
    if (a.rows() != a.cols() || static_cast<Eigen::Index>(constrained.size()) != a.rows()) {
        throw SolverError("constrained solver: matrix/constraint size mismatch");
    }
    std::vector<int> local(static_cast<std::size_t>(n_), -1);
    for (Eigen::Index i = 0; i < n_; ++i) {
        if (constrained[static_cast<std::size_t>(i)] == 0) {
            local[static_cast<std::size_t>(i)] = static_cast<int>(free_.size());
            free_.push_back(static_cast<int>(i));
        }
    }
    if (free_.empty()) {
        throw SolverError("constrained solver: no free unknowns");
    }
    const auto nf = static_cast<Eigen::Index>(free_.size());

    std::vector<Eigen::Triplet<double>> tff;
    std::vector<Eigen::Triplet<double>> tfc;
    tff.reserve(static_cast<std::size_t>(a.nonZeros()));
    for (Eigen::Index col = 0; col < a.outerSize(); ++col) {
        for (SparseMatrix::InnerIterator it(a, col); it; ++it) {
            const int r = local[static_cast<std::size_t>(it.row())];
            if (r < 0) {
                continue;
            }
            const int c = local[static_cast<std::size_t>(it.col())];
            if (c >= 0) {
                tff.emplace_back(r, c, it.value());
            } else {
                tfc.emplace_back(r, static_cast<int>(it.col()), it.value());
            }
        }
    }
    impl_->a_ff.resize(nf, nf);
    impl_->a_ff.setFromTriplets(tff.begin(), tff.end());
    impl_->a_fc.resize(nf, n_);
    impl_->a_fc.setFromTriplets(tfc.begin(), tfc.end());

    impl_->llt.compute(impl_->a_ff);
    if (impl_->llt.info() != Eigen::Success) {
        throw SolverError("constrained solver: Cholesky factorization failed (matrix not positive definite; "
                          "check assembly)");
    }
}

ConstrainedSpdSolver::~ConstrainedSpdSolver() = default;
ConstrainedSpdSolver::ConstrainedSpdSolver(ConstrainedSpdSolver&&) noexcept = default;
ConstrainedSpdSolver& ConstrainedSpdSolver::operator=(ConstrainedSpdSolver&&) noexcept = default;

Eigen::VectorXd ConstrainedSpdSolver::solve(const Eigen::VectorXd& rhs, const Eigen::VectorXd& values) const {
    if (rhs.size() != n_ || (values.size() != 0 && values.size() != n_)) {
        throw SolverError("constrained solver: vector size mismatch");
    }
    const auto nf = static_cast<Eigen::Index>(free_.size());
    Eigen::VectorXd b(nf);
    for (Eigen::Index i = 0; i < nf; ++i) {
        b[i] = rhs[free_[static_cast<std::size_t>(i)]];
    }
    if (values.size() != 0) {
        b -= impl_->a_fc * values;
    }

    Eigen::VectorXd x = impl_->llt.solve(b);
    const double bnorm = b.norm();
    double res = (b - impl_->a_ff * x).norm();
    if (bnorm > 0.0 && res > kResidualTolerance * bnorm) {
        x += impl_->llt.solve(Eigen::VectorXd(b - impl_->a_ff * x));
        res = (b - impl_->a_ff * x).norm();
        if (res > kResidualTolerance * bnorm) {
            throw SolverError("constrained solver: relative residual " + std::to_string(res / bnorm) +
                              " above tolerance");
        }
    }

    Eigen::VectorXd out = values.size() != 0 ? values : Eigen::VectorXd::Zero(n_);
    for (Eigen::Index i = 0; i < nf; ++i) {
        out[free_[static_cast<std::size_t>(i)]] = x[i];
    }
    return out;
}

}  // namespace shapeopt
