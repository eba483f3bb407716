#include "shapeopt/qp.hpp"

#include <cmath>
#include <functional>
#include <string>
#include <utility>

#include "shapeopt/errors.hpp"

namespace shapeopt {

QpWorkspace::QpWorkspace(TriMesh mesh, NodalField ybar, double f1, double f2, double mu, QpOptions options)
    : mesh_(std::move(mesh)),
      geometry_(compute_geometry(mesh_)),
      ybar_(std::move(ybar)),
      f1_(f1),
      f2_(f2),
      mu_(mu),
      options_(options),
      stiffness_(assemble_stiffness(mesh_)),
      mass_(assemble_mass(mesh_)),
      load_(assemble_load_piecewise(mesh_, f1, f2)),
      solver_(stiffness_, outer_boundary_mask(mesh_)) {
    require_same_mesh(mesh_, ybar_, "QpWorkspace(ybar)");
    y_ = {solve_laplace(load_), mesh_.tag()};
    p_ = {solve_laplace(-(mass_ * (y_.values - ybar_.values))), mesh_.tag()};
}

Eigen::VectorXd QpWorkspace::solve_laplace(const Eigen::VectorXd& rhs) const {
    ++pde_solves_;
    return solver_.solve(rhs);
}

InterfaceField QpWorkspace::gradient() const { return shape_gradient(mesh_, geometry_, p_, f1_, f2_, mu_); }

double QpWorkspace::objective_value() const { return objective(mesh_, y_, ybar_, geometry_, mu_); }

Eigen::VectorXd QpWorkspace::interface_source(const InterfaceField& w) const {
    const auto nodes = mesh_.interface_nodes();
    if (static_cast<std::size_t>(w.values.size()) != nodes.size()) {
        throw GeometryError("interface_source: field size does not match interface");
    }
    const double jump = source_jump(f1_, f2_);
    Eigen::VectorXd b = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(mesh_.num_vertices()));
    // Trapezoidal rule on each interface edge: node j collects s_j w_j.
    for (std::size_t j = 1; j + 1 < nodes.size(); ++j) {
        b[nodes[j]] = jump * geometry_.arc_weights[j] * w.values[static_cast<Eigen::Index>(j)];
    }
    return b;
}

NodalField qp_state_solve(const QpWorkspace& ws, const InterfaceField& w) {
    // Right-hand side -a(y, q) + b(q): the discrete state residual, zero up to solver tolerance.
    const Eigen::VectorXd state_residual = ws.load() - ws.stiffness() * ws.state().values;
    return {ws.solve_laplace(state_residual + ws.interface_source(w)), ws.mesh().tag()};
}

NodalField qp_adjoint_solve(const QpWorkspace& ws, const NodalField& z) {
    require_same_mesh(ws.mesh(), z, "qp_adjoint_solve");
    const Eigen::VectorXd rhs = -(ws.mass() * (z.values + ws.state().values - ws.data().values));
    return {ws.solve_laplace(rhs), ws.mesh().tag()};
}

InterfaceField design_residual(const QpWorkspace& ws, const InterfaceField& w) {
    const auto nodes = ws.mesh().interface_nodes();
    const auto& geo = ws.geometry();
    if (static_cast<std::size_t>(w.values.size()) != nodes.size()) {
        throw GeometryError("design_residual: field size does not match interface");
    }
    const NodalField z = qp_state_solve(ws, w);
    // Newton increment of the multiplier: q(z) - p, obtained directly as the
    // solution driven by -z so that it is exactly linear in w.
    const Eigen::VectorXd q_inc = ws.solve_laplace(-(ws.mass() * z.values));
    const InterfaceField lw = tangential_laplacian_apply(geo, w);

    const double jump = source_jump(ws.f1(), ws.f2());
    const double mu = ws.mu();
    auto r = InterfaceField::zeros(nodes.size(), FieldRole::Residual);
    for (std::size_t i = 1; i + 1 < nodes.size(); ++i) {
        const auto k = static_cast<Eigen::Index>(i);
        const double p = ws.adjoint().values[nodes[i]];
        const double kappa = geo.curvature[i];
        const double design = -jump * (p + kappa * p * w.values[k] + q_inc[nodes[i]]) + mu * kappa + mu * lw.values[k];
        r.values[k] = -design;
    }
    return r;
}

InterfaceField reduced_hessian_apply(const QpWorkspace& ws, const InterfaceField& w) {
    const auto r0 = design_residual(ws, InterfaceField::zeros(static_cast<std::size_t>(w.values.size())));
    const auto rw = design_residual(ws, w);
    return {r0.values - rw.values, FieldRole::Generic};
}

InterfaceField solve_tangential_laplacian(const InterfaceGeometry& geometry, double mu, const InterfaceField& rhs) {
    const std::size_t m = geometry.size();
    if (m < 3) {
        throw GeometryError("solve_tangential_laplacian: need at least 3 interface nodes");
    }
    if (static_cast<std::size_t>(rhs.values.size()) != m) {
        throw GeometryError("solve_tangential_laplacian: size mismatch");
    }
    // Symmetric tridiagonal system on interior nodes 1..m-2 (Thomas algorithm).
    const std::size_t n = m - 2;
    const auto& e = geometry.edge_lengths;
    std::vector<double> diag(n);
    std::vector<double> off(n);  // off[i] couples interior i and i+1
    std::vector<double> b(n);
    for (std::size_t i = 0; i < n; ++i) {
        const std::size_t node = i + 1;
        diag[i] = mu * (1.0 / e[node - 1] + 1.0 / e[node]);
        off[i] = -mu / e[node];
        b[i] = geometry.arc_weights[node] * rhs.values[static_cast<Eigen::Index>(node)];
    }
    for (std::size_t i = 1; i < n; ++i) {
        const double factor = off[i - 1] / diag[i - 1];
        diag[i] -= factor * off[i - 1];
        b[i] -= factor * b[i - 1];
    }
    auto w = InterfaceField::zeros(m, FieldRole::Design);
    double next = 0.0;
    for (std::size_t i = n; i-- > 0;) {
        const double xi = (b[i] - (i + 1 < n ? off[i] * next : 0.0)) / diag[i];
        w.values[static_cast<Eigen::Index>(i + 1)] = xi;
        next = xi;
    }
    return w;
}

CgResult solve_qp_cg(const QpWorkspace& ws) {
    const auto& geo = ws.geometry();
    const std::size_t m = geo.size();
    const auto& opt = ws.options();
    const bool arc = opt.inner_product == CgInnerProduct::ArcLength;
    const int max_iters = opt.cg_max_iters > 0 ? opt.cg_max_iters : static_cast<int>(10 * (m - 2));

    Eigen::VectorXd weights(static_cast<Eigen::Index>(m));
    for (std::size_t i = 0; i < m; ++i) {
        weights[static_cast<Eigen::Index>(i)] = geo.arc_weights[i];
    }
    // ArcLength: CG on A (self-adjoint in the s-pairing). Euclidean: CG on the
    // assembled system S A w = S r0 with the plain dot product.
    auto ip = [&](const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
        return arc ? inner_s(geo, a, b) : a.dot(b);
    };
    const auto r0 = design_residual(ws, InterfaceField::zeros(m)).values;
    auto apply = [&](const Eigen::VectorXd& d) -> Eigen::VectorXd {
        Eigen::VectorXd ad = r0 - design_residual(ws, {d, FieldRole::Design}).values;
        return arc ? ad : Eigen::VectorXd(weights.cwiseProduct(ad));
    };
    auto precondition = [&](const Eigen::VectorXd& r) -> Eigen::VectorXd {
        if (opt.preconditioner == CgPreconditioner::None) {
            return r;
        }
        const Eigen::VectorXd density = arc ? r : Eigen::VectorXd(r.cwiseQuotient(weights));
        return solve_tangential_laplacian(geo, ws.mu(), {density, FieldRole::Residual}).values;
    };

    CgResult out;
    out.w = InterfaceField::zeros(m, FieldRole::Design);
    Eigen::VectorXd r = arc ? r0 : Eigen::VectorXd(weights.cwiseProduct(r0));
    out.initial_residual_norm = std::sqrt(ip(r, r));
    out.residual_norm = out.initial_residual_norm;
    out.residual_history.push_back(out.residual_norm);
    if (out.initial_residual_norm == 0.0) {
        out.converged = true;
        return out;
    }
    Eigen::VectorXd z = precondition(r);
    Eigen::VectorXd d = z;
    double rz = ip(r, z);
    Eigen::VectorXd& x = out.w.values;
    for (int k = 0; k < max_iters; ++k) {
        const Eigen::VectorXd ad = apply(d);
        const double dad = ip(d, ad);
        if (!(dad > 0.0)) {
            out.negative_curvature = true;
            break;
        }
        const double alpha = rz / dad;
        x += alpha * d;
        r -= alpha * ad;
        out.iterations = k + 1;
        out.residual_norm = std::sqrt(ip(r, r));
        out.residual_history.push_back(out.residual_norm);
        if (out.residual_norm <= opt.cg_tol * out.initial_residual_norm) {
            out.converged = true;
            break;
        }
        z = precondition(r);
        const double rz_next = ip(r, z);
        d = z + (rz_next / rz) * d;
        rz = rz_next;
    }
    x[0] = 0.0;
    x[static_cast<Eigen::Index>(m - 1)] = 0.0;
    return out;
}

}  // namespace shapeopt
