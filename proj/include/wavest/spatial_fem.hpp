#pragma once

#include <cmath>
#include <string>

#include "wavest/lagrange_space.hpp"
#include "wavest/linalg.hpp"

namespace wavest {

enum class OperatorKind { Mass, Stiffness };

namespace detail {

inline double checked_coefficient(const SpaceFunction& c, Point2 x) {
    if (!c) return 1.0;
    const double v = c(x);
    if (!(v > 0.0)) throw DomainError("wavespeed must be strictly positive");
    return v;
}

} // namespace detail

/// Mass (phi_i, phi_j) or weighted stiffness (c^2 grad phi_i, grad phi_j).
/// An empty coefficient means c = 1.
inline CompressedMatrix assemble(const LagrangeSpace& space, OperatorKind kind, const SpaceFunction& c = {}) {
    const auto& rule = space.rule();
    const int nloc = space.dofs_per_cell();
    Triplets trips;
    trips.reserve(space.mesh().num_cells() * nloc * nloc);
    Eigen::MatrixXd local(nloc, nloc);
    for (std::size_t cell = 0; cell < space.mesh().num_cells(); ++cell) {
        const auto& geo = space.geometry(cell);
        local.setZero();
        for (std::size_t g = 0; g < rule.size(); ++g) {
            const double w = rule.weights[g] * geo.det;
            if (kind == OperatorKind::Mass) {
                const auto phi = space.basis_at_qp().row(g);
                local.noalias() += w * phi.transpose() * phi;
            } else {
                const double cv = detail::checked_coefficient(c, geo.map(rule.xi[g], rule.eta[g]));
                Eigen::MatrixXd grad(2, nloc);
                grad.row(0) = space.dxi_at_qp().row(g);
                grad.row(1) = space.deta_at_qp().row(g);
                const Eigen::MatrixXd phys = geo.inverse_transpose * grad;
                local.noalias() += (w * cv * cv) * phys.transpose() * phys;
            }
        }
        const auto& dofs = space.cell_dofs(cell);
        for (int a = 0; a < nloc; ++a) {
            for (int b = 0; b < nloc; ++b) trips.emplace_back(dofs[a], dofs[b], local(a, b));
        }
    }
    CompressedMatrix m(space.dimension(), space.dimension());
    m.setFromTriplets(trips.begin(), trips.end());
    return m;
}

/// Load vector (f, phi_i).
inline Vector load_vector(const LagrangeSpace& space, const SpaceFunction& f) {
    const auto& rule = space.rule();
    Vector b = Vector::Zero(space.dimension());
    for (std::size_t cell = 0; cell < space.mesh().num_cells(); ++cell) {
        const auto& geo = space.geometry(cell);
        Eigen::VectorXd local = Eigen::VectorXd::Zero(space.dofs_per_cell());
        for (std::size_t g = 0; g < rule.size(); ++g) {
            const double fv = f(geo.map(rule.xi[g], rule.eta[g]));
            local += (rule.weights[g] * geo.det * fv) * space.basis_at_qp().row(g).transpose();
        }
        const auto& dofs = space.cell_dofs(cell);
        for (std::size_t a = 0; a < dofs.size(); ++a) b[dofs[a]] += local[a];
    }
    return b;
}

/// Load vector (c^2 grad f, grad phi_i) for a given gradient callback.
inline Vector gradient_load_vector(const LagrangeSpace& space, const GradientFunction& grad_f,
                                   const SpaceFunction& c = {}) {
    const auto& rule = space.rule();
    const int nloc = space.dofs_per_cell();
    Vector b = Vector::Zero(space.dimension());
    for (std::size_t cell = 0; cell < space.mesh().num_cells(); ++cell) {
        const auto& geo = space.geometry(cell);
        Eigen::VectorXd local = Eigen::VectorXd::Zero(nloc);
        for (std::size_t g = 0; g < rule.size(); ++g) {
            const Point2 x = geo.map(rule.xi[g], rule.eta[g]);
            const double cv = detail::checked_coefficient(c, x);
            // (J^{-T} gref) . gf = gref . (J^{-1} gf)
            const Eigen::Vector2d pulled = geo.inverse_transpose.transpose() * grad_f(x);
            local += (rule.weights[g] * geo.det * cv * cv) *
                     (pulled[0] * space.dxi_at_qp().row(g) + pulled[1] * space.deta_at_qp().row(g)).transpose();
        }
        const auto& dofs = space.cell_dofs(cell);
        for (int a = 0; a < nloc; ++a) b[dofs[a]] += local[a];
    }
    return b;
}

/// Interior-interior, interior-boundary blocks of an assembled operator.
struct InteriorBlocks {
    CompressedMatrix ii;
    CompressedMatrix ib;
};

inline InteriorBlocks interior_blocks(const LagrangeSpace& space, const CompressedMatrix& a) {
    return {extract_block(a, space.interior_dofs(), space.interior_dofs()),
            extract_block(a, space.interior_dofs(), space.boundary_dofs())};
}

inline Vector restrict_to(const Vector& full, const std::vector<int>& dofs) {
    Vector out(static_cast<Eigen::Index>(dofs.size()));
    for (std::size_t k = 0; k < dofs.size(); ++k) out[k] = full[dofs[k]];
    return out;
}

/// Ritz projection with Dirichlet data: boundary coefficients interpolate f,
/// interior coefficients satisfy (c^2 grad R f, grad z) = (c^2 grad f, grad z)
/// for all z vanishing on the boundary.
inline FEFunction ritz_project(const LagrangeSpace& space, const SpaceFunction& f, const GradientFunction& grad_f,
                               const SpaceFunction& c = {}) {
    FEFunction out{&space, Vector::Zero(space.dimension())};
    for (int d : space.boundary_dofs()) out.coeffs[d] = f(space.dof_coords()[d]);
    if (space.interior_dofs().empty()) return out;
    const auto blocks = interior_blocks(space, assemble(space, OperatorKind::Stiffness, c));
    const Vector rhs = restrict_to(gradient_load_vector(space, grad_f, c), space.interior_dofs()) -
                       blocks.ib * restrict_to(out.coeffs, space.boundary_dofs());
    Vector x;
    try {
        x = solve_spd(blocks.ii, rhs);
    } catch (const SolverFailure& e) {
        throw SolverFailure(std::string("ritz_project: internal error, ") + e.what(), e.residual());
    }
    for (std::size_t k = 0; k < space.interior_dofs().size(); ++k) out.coeffs[space.interior_dofs()[k]] = x[k];
    return out;
}

/// L2-orthogonal projection onto the FE functions vanishing on the boundary.
inline FEFunction l2_project_interior(const LagrangeSpace& space, const SpaceFunction& f) {
    FEFunction out{&space, Vector::Zero(space.dimension())};
    if (space.interior_dofs().empty()) return out;
    const auto mass = extract_block(assemble(space, OperatorKind::Mass), space.interior_dofs(), space.interior_dofs());
    const Vector x = solve_spd(mass, restrict_to(load_vector(space, f), space.interior_dofs()));
    for (std::size_t k = 0; k < space.interior_dofs().size(); ++k) out.coeffs[space.interior_dofs()[k]] = x[k];
    return out;
}

enum class NormKind { L2, H1SemiWeighted };

/// ||coeffs - g||_{L2}; g may be empty.
inline double l2_norm(const LagrangeSpace& space, const Vector& coeffs, const SpaceFunction& g = {}) {
    const auto& rule = space.rule();
    double sum = 0.0;
    for (std::size_t cell = 0; cell < space.mesh().num_cells(); ++cell) {
        const auto& geo = space.geometry(cell);
        const Eigen::VectorXd vals = space.basis_at_qp() * space.gather(coeffs, cell);
        for (std::size_t q = 0; q < rule.size(); ++q) {
            double diff = vals[q];
            if (g) diff -= g(geo.map(rule.xi[q], rule.eta[q]));
            sum += rule.weights[q] * geo.det * diff * diff;
        }
    }
    return std::sqrt(sum);
}

/// (int c^2 |grad(coeffs) - grad_g|^2)^{1/2}; grad_g and c may be empty.
inline double h1_seminorm(const LagrangeSpace& space, const Vector& coeffs, const GradientFunction& grad_g = {},
                          const SpaceFunction& c = {}) {
    const auto& rule = space.rule();
    double sum = 0.0;
    for (std::size_t cell = 0; cell < space.mesh().num_cells(); ++cell) {
        const auto& geo = space.geometry(cell);
        const Eigen::VectorXd local = space.gather(coeffs, cell);
        const Eigen::VectorXd gx = space.dxi_at_qp() * local;
        const Eigen::VectorXd ge = space.deta_at_qp() * local;
        for (std::size_t q = 0; q < rule.size(); ++q) {
            const Point2 x = geo.map(rule.xi[q], rule.eta[q]);
            Eigen::Vector2d diff = geo.inverse_transpose * Eigen::Vector2d(gx[q], ge[q]);
            if (grad_g) diff -= grad_g(x);
            const double cv = detail::checked_coefficient(c, x);
            sum += rule.weights[q] * geo.det * cv * cv * diff.squaredNorm();
        }
    }
    return std::sqrt(sum);
}

/// L2 norm of a plain callback over the mesh.
inline double l2_norm_of(const LagrangeSpace& space, const SpaceFunction& g) {
    return l2_norm(space, Vector::Zero(space.dimension()), g);
}

/// Spatial norm of fn (optionally minus an exact field / gradient).
inline double spatial_norm(const FEFunction& fn, NormKind kind, const SpaceFunction& exact = {},
                           const GradientFunction& exact_gradient = {}, const SpaceFunction& c = {}) {
    if (kind == NormKind::L2) return l2_norm(*fn.space, fn.coeffs, exact);
    return h1_seminorm(*fn.space, fn.coeffs, exact_gradient, c);
}

} // namespace wavest
