#pragma once

#include <Eigen/Dense>

#include <array>
#include <functional>
#include <map>
#include <set>
#include <utility>
#include <vector>

#include "wavest/errors.hpp"
#include "wavest/linalg.hpp"
#include "wavest/mesh.hpp"
#include "wavest/quadrature.hpp"

namespace wavest {

using Gradient = Eigen::Vector2d;
using SpaceFunction = std::function<double(Point2)>;
using GradientFunction = std::function<Gradient(Point2)>;

/// Equispaced Lagrange basis of degree p on the reference triangle with
/// vertices (0,0), (1,0), (0,1).
///
/// Node (i, j, k), i + j + k = p, sits at barycentric (i, j, k) / p and its
/// basis function is R_i(l1) R_j(l2) R_k(l3) with
/// R_m(l) = prod_{s<m} (p l - s) / (s + 1).
class ReferenceTriangle {
  public:
    explicit ReferenceTriangle(int degree) : p_(degree) {
        if (p_ < 0) throw InvalidArgument("ReferenceTriangle: negative degree");
        for (int b = 0; b <= p_; ++b) {
            for (int a = 0; a <= p_ - b; ++a) lattice_.push_back({p_ - a - b, a, b});
        }
        factors_.resize(p_ + 1);
        for (int m = 0; m <= p_; ++m) {
            std::vector<double> poly{1.0};
            for (int s = 0; s < m; ++s) {
                // multiply by (p l - s) / (s + 1)
                std::vector<double> next(poly.size() + 1, 0.0);
                for (std::size_t d = 0; d < poly.size(); ++d) {
                    next[d] += -s * poly[d] / (s + 1.0);
                    next[d + 1] += p_ * poly[d] / (s + 1.0);
                }
                poly = std::move(next);
            }
            factors_[m] = std::move(poly);
        }
    }

    [[nodiscard]] int degree() const { return p_; }
    [[nodiscard]] int num_nodes() const { return static_cast<int>(lattice_.size()); }
    [[nodiscard]] const std::array<int, 3>& lattice(int k) const { return lattice_[k]; }

    /// Reference coordinates (xi, eta) of node k.
    [[nodiscard]] std::array<double, 2> node(int k) const {
        if (p_ == 0) return {1.0 / 3.0, 1.0 / 3.0};
        return {static_cast<double>(lattice_[k][1]) / p_, static_cast<double>(lattice_[k][2]) / p_};
    }

    [[nodiscard]] Eigen::VectorXd values(double xi, double eta) const {
        Eigen::VectorXd out(num_nodes());
        const std::array<double, 3> lam{1.0 - xi - eta, xi, eta};
        for (int k = 0; k < num_nodes(); ++k) {
            double v = 1.0;
            for (int a = 0; a < 3; ++a) v *= factor(lattice_[k][a], lam[a], 0);
            out[k] = v;
        }
        return out;
    }

    /// Reference gradients, one row (d/dxi, d/deta) per node.
    [[nodiscard]] Eigen::MatrixX2d gradients(double xi, double eta) const {
        Eigen::MatrixX2d out(num_nodes(), 2);
        const std::array<double, 3> lam{1.0 - xi - eta, xi, eta};
        for (int k = 0; k < num_nodes(); ++k) {
            std::array<double, 3> f{}, df{};
            for (int a = 0; a < 3; ++a) {
                f[a] = factor(lattice_[k][a], lam[a], 0);
                df[a] = factor(lattice_[k][a], lam[a], 1);
            }
            const std::array<double, 3> dl{df[0] * f[1] * f[2], f[0] * df[1] * f[2], f[0] * f[1] * df[2]};
            // grad l1 = (-1, -1), grad l2 = (1, 0), grad l3 = (0, 1)
            out(k, 0) = -dl[0] + dl[1];
            out(k, 1) = -dl[0] + dl[2];
        }
        return out;
    }

    /// Reference Hessians, one row (xx, xy, yy) per node.
    [[nodiscard]] Eigen::MatrixX3d hessians(double xi, double eta) const {
        static constexpr double grad_lambda[3][2] = {{-1.0, -1.0}, {1.0, 0.0}, {0.0, 1.0}};
        Eigen::MatrixX3d out(num_nodes(), 3);
        const std::array<double, 3> lam{1.0 - xi - eta, xi, eta};
        for (int k = 0; k < num_nodes(); ++k) {
            std::array<std::array<double, 3>, 3> d{}; // d[order][a]
            for (int a = 0; a < 3; ++a) {
                for (int o = 0; o < 3; ++o) d[o][a] = factor(lattice_[k][a], lam[a], o);
            }
            double hxx = 0.0, hxy = 0.0, hyy = 0.0;
            for (int a = 0; a < 3; ++a) {
                for (int b = 0; b < 3; ++b) {
                    double second = 1.0;
                    for (int c = 0; c < 3; ++c) {
                        const int order = (c == a) + (c == b);
                        second *= d[order][c];
                    }
                    hxx += second * grad_lambda[a][0] * grad_lambda[b][0];
                    hxy += second * grad_lambda[a][0] * grad_lambda[b][1];
                    hyy += second * grad_lambda[a][1] * grad_lambda[b][1];
                }
            }
            out(k, 0) = hxx;
            out(k, 1) = hxy;
            out(k, 2) = hyy;
        }
        return out;
    }

  private:
    // order-th derivative of R_m at l
    [[nodiscard]] double factor(int m, double l, int order) const {
        const auto& c = factors_[m];
        double v = 0.0;
        for (int d = static_cast<int>(c.size()) - 1; d >= order; --d) {
            double coef = c[d];
            for (int s = 0; s < order; ++s) coef *= (d - s);
            v = v * l + coef;
        }
        return v;
    }

    int p_;
    std::vector<std::array<int, 3>> lattice_;
    std::vector<std::vector<double>> factors_;
};

/// Affine map of one cell: x = origin + jacobian * (xi, eta).
struct CellGeometry {
    Point2 origin;
    Eigen::Matrix2d jacobian;
    Eigen::Matrix2d inverse_transpose;
    double det = 0.0;

    [[nodiscard]] Point2 map(double xi, double eta) const {
        return {origin.x + jacobian(0, 0) * xi + jacobian(0, 1) * eta,
                origin.y + jacobian(1, 0) * xi + jacobian(1, 1) * eta};
    }
};

/// Conforming degree-p Lagrange space on a Mesh.
class LagrangeSpace {
  public:
    LagrangeSpace(Mesh mesh, int degree)
        : mesh_(std::move(mesh)), p_(degree), ref_(degree), rule_(triangle_rule(std::max(2 * degree + 2, 6))) {
        if (p_ < 1 || p_ > 10) throw InvalidArgument("LagrangeSpace: degree must be in [1, 10]");
        number_dofs();
        tabulate();
    }

    [[nodiscard]] const Mesh& mesh() const { return mesh_; }
    [[nodiscard]] int degree() const { return p_; }
    [[nodiscard]] const ReferenceTriangle& reference() const { return ref_; }
    [[nodiscard]] int dimension() const { return static_cast<int>(dof_coords_.size()); }
    [[nodiscard]] int dofs_per_cell() const { return ref_.num_nodes(); }
    [[nodiscard]] const std::vector<Point2>& dof_coords() const { return dof_coords_; }
    [[nodiscard]] const std::vector<int>& cell_dofs(std::size_t cell) const { return cell_dofs_[cell]; }
    [[nodiscard]] const std::vector<int>& boundary_dofs() const { return boundary_dofs_; }
    [[nodiscard]] const std::vector<int>& interior_dofs() const { return interior_dofs_; }
    [[nodiscard]] bool is_boundary(int dof) const { return interior_index_[dof] < 0; }
    /// Position of a dof within interior_dofs(), or -1 on the boundary.
    [[nodiscard]] int interior_index(int dof) const { return interior_index_[dof]; }
    [[nodiscard]] const CellGeometry& geometry(std::size_t cell) const { return geometry_[cell]; }

    // cell-independent tabulation of the reference basis on the quadrature rule
    [[nodiscard]] const TriangleRule& rule() const { return rule_; }
    [[nodiscard]] const Eigen::MatrixXd& basis_at_qp() const { return values_; }   // nq x nloc
    [[nodiscard]] const Eigen::MatrixXd& dxi_at_qp() const { return dxi_; }        // nq x nloc
    [[nodiscard]] const Eigen::MatrixXd& deta_at_qp() const { return deta_; }      // nq x nloc

    /// Local coefficient vector of a global coefficient vector on one cell.
    [[nodiscard]] Eigen::VectorXd gather(const Vector& coeffs, std::size_t cell) const {
        const auto& dofs = cell_dofs_[cell];
        Eigen::VectorXd local(dofs.size());
        for (std::size_t k = 0; k < dofs.size(); ++k) local[k] = coeffs[dofs[k]];
        return local;
    }

  private:
    void number_dofs() {
        const int nv = static_cast<int>(mesh_.num_vertices());
        std::map<std::pair<int, int>, int> edge_base;
        std::vector<std::pair<int, int>> edges;
        for (const auto& c : mesh_.cells) {
            for (int a = 0; a < 3; ++a) {
                const int u = c[a];
                const int w = c[(a + 1) % 3];
                const auto key = std::minmax(u, w);
                if (edge_base.emplace(key, 0).second) edges.push_back(key);
            }
        }
        int next = nv;
        for (const auto& e : edges) {
            edge_base[e] = next;
            next += p_ - 1;
        }
        const int interior_per_cell = (p_ - 1) * (p_ - 2) / 2;

        dof_coords_.assign(next + interior_per_cell * mesh_.num_cells(), Point2{});
        for (int v = 0; v < nv; ++v) dof_coords_[v] = mesh_.vertices[v];

        cell_dofs_.resize(mesh_.num_cells());
        for (std::size_t cell = 0; cell < mesh_.num_cells(); ++cell) {
            const auto& c = mesh_.cells[cell];
            auto& dofs = cell_dofs_[cell];
            dofs.resize(ref_.num_nodes());
            int interior_count = 0;
            for (int k = 0; k < ref_.num_nodes(); ++k) {
                const auto& w = ref_.lattice(k);
                const int zeros = (w[0] == 0) + (w[1] == 0) + (w[2] == 0);
                int dof;
                if (zeros == 2) {
                    dof = c[w[0] == p_ ? 0 : (w[1] == p_ ? 1 : 2)];
                } else if (zeros == 1) {
                    int a = -1, b = -1;
                    for (int s = 0; s < 3; ++s) {
                        if (w[s] == 0) continue;
                        (a < 0 ? a : b) = s;
                    }
                    const int ga = c[a];
                    const int gb = c[b];
                    const int offset = ga > gb ? w[a] : w[b]; // weight of the higher-id vertex
                    dof = edge_base.at(std::minmax(ga, gb)) + offset - 1;
                } else {
                    dof = next + static_cast<int>(cell) * interior_per_cell + interior_count++;
                }
                dofs[k] = dof;
                Point2 x{};
                for (int s = 0; s < 3; ++s) x = x + (static_cast<double>(w[s]) / p_) * mesh_.vertices[c[s]];
                dof_coords_[dof] = x;
            }
        }

        std::vector<char> on_boundary(dof_coords_.size(), 0);
        for (const auto& [u, w] : mesh_.boundary_edges) {
            on_boundary[u] = on_boundary[w] = 1;
            const int base = edge_base.at(std::minmax(u, w));
            for (int s = 0; s < p_ - 1; ++s) on_boundary[base + s] = 1;
        }
        interior_index_.assign(dof_coords_.size(), -1);
        for (int d = 0; d < static_cast<int>(dof_coords_.size()); ++d) {
            if (on_boundary[d]) {
                boundary_dofs_.push_back(d);
            } else {
                interior_index_[d] = static_cast<int>(interior_dofs_.size());
                interior_dofs_.push_back(d);
            }
        }
    }

    void tabulate() {
        const auto nq = static_cast<Eigen::Index>(rule_.size());
        values_.resize(nq, ref_.num_nodes());
        dxi_.resize(nq, ref_.num_nodes());
        deta_.resize(nq, ref_.num_nodes());
        for (Eigen::Index g = 0; g < nq; ++g) {
            values_.row(g) = ref_.values(rule_.xi[g], rule_.eta[g]).transpose();
            const auto grads = ref_.gradients(rule_.xi[g], rule_.eta[g]);
            dxi_.row(g) = grads.col(0).transpose();
            deta_.row(g) = grads.col(1).transpose();
        }
        geometry_.resize(mesh_.num_cells());
        for (std::size_t cell = 0; cell < mesh_.num_cells(); ++cell) {
            const auto& c = mesh_.cells[cell];
            const Point2 a = mesh_.vertices[c[0]];
            const Point2 b = mesh_.vertices[c[1]];
            const Point2 d = mesh_.vertices[c[2]];
            CellGeometry geo;
            geo.origin = a;
            geo.jacobian << b.x - a.x, d.x - a.x, b.y - a.y, d.y - a.y;
            geo.det = geo.jacobian.determinant();
            if (!(geo.det > 0.0)) throw InvalidArgument("LagrangeSpace: cell with nonpositive area");
            geo.inverse_transpose = geo.jacobian.inverse().transpose();
            geometry_[cell] = geo;
        }
    }

    Mesh mesh_;
    int p_;
    ReferenceTriangle ref_;
    TriangleRule rule_;
    std::vector<Point2> dof_coords_;
    std::vector<std::vector<int>> cell_dofs_;
    std::vector<int> boundary_dofs_;
    std::vector<int> interior_dofs_;
    std::vector<int> interior_index_;
    std::vector<CellGeometry> geometry_;
    Eigen::MatrixXd values_;
    Eigen::MatrixXd dxi_;
    Eigen::MatrixXd deta_;
};

inline LagrangeSpace build_space(const Mesh& mesh, int degree) { return LagrangeSpace(mesh, degree); }

/// Element of a LagrangeSpace. The space is not owned.
struct FEFunction {
    const LagrangeSpace* space = nullptr;
    Vector coeffs;
};

inline FEFunction interpolate_nodal(const LagrangeSpace& space, const SpaceFunction& f) {
    FEFunction fn{&space, Vector(space.dimension())};
    for (int i = 0; i < space.dimension(); ++i) fn.coeffs[i] = f(space.dof_coords()[i]);
    return fn;
}

/// Value of fn at a cell-local reference point.
inline double evaluate_in_cell(const FEFunction& fn, std::size_t cell, double xi, double eta) {
    return fn.space->reference().values(xi, eta).dot(fn.space->gather(fn.coeffs, cell));
}

/// Value of fn at a physical point; throws DomainError outside the mesh.
inline double evaluate(const FEFunction& fn, Point2 point) {
    const auto& mesh = fn.space->mesh();
    const std::size_t cell = mesh.locate(point);
    const auto lam = mesh.barycentric(cell, point);
    return evaluate_in_cell(fn, cell, lam[1], lam[2]);
}

/// Gradient of fn at a physical point.
inline Gradient evaluate_gradient(const FEFunction& fn, Point2 point) {
    const auto& mesh = fn.space->mesh();
    const std::size_t cell = mesh.locate(point);
    const auto lam = mesh.barycentric(cell, point);
    const Eigen::Vector2d ref = fn.space->reference().gradients(lam[1], lam[2]).transpose() *
                                fn.space->gather(fn.coeffs, cell);
    return fn.space->geometry(cell).inverse_transpose * ref;
}

/// Elementwise polynomial field without inter-element continuity, stored as
/// degree-d equispaced Lagrange coefficients per cell.
struct CellwisePolynomial {
    const LagrangeSpace* space = nullptr;
    ReferenceTriangle reference{0};
    std::vector<Eigen::VectorXd> coeffs; // one vector per cell

    [[nodiscard]] double value(std::size_t cell, double xi, double eta) const {
        return reference.values(xi, eta).dot(coeffs[cell]);
    }
    [[nodiscard]] double l2_norm() const {
        const auto& rule = space->rule();
        double sum = 0.0;
        for (std::size_t cell = 0; cell < coeffs.size(); ++cell) {
            const double det = space->geometry(cell).det;
            for (std::size_t g = 0; g < rule.size(); ++g) {
                const double v = value(cell, rule.xi[g], rule.eta[g]);
                sum += rule.weights[g] * det * v * v;
            }
        }
        return std::sqrt(sum);
    }
};

/// Elementwise Laplacian c2 * Delta(fn|_K), a degree-(p-2) polynomial on each cell
/// (identically zero for p = 1).
inline CellwisePolynomial broken_laplacian(const FEFunction& fn, double c2 = 1.0) {
    const auto& space = *fn.space;
    const int d = std::max(space.degree() - 2, 0);
    CellwisePolynomial out{&space, ReferenceTriangle(d), {}};
    out.coeffs.resize(space.mesh().num_cells());
    for (std::size_t cell = 0; cell < out.coeffs.size(); ++cell) {
        const Eigen::VectorXd local = space.gather(fn.coeffs, cell);
        const Eigen::Matrix2d& g = space.geometry(cell).inverse_transpose; // J^{-T}
        Eigen::VectorXd c(out.reference.num_nodes());
        for (int k = 0; k < out.reference.num_nodes(); ++k) {
            const auto node = out.reference.node(k);
            const Eigen::RowVector3d h = local.transpose() * space.reference().hessians(node[0], node[1]);
            Eigen::Matrix2d href;
            href << h[0], h[1], h[1], h[2];
            // physical Hessian J^{-T} H J^{-1}
            c[k] = c2 * (g * href * g.transpose()).trace();
        }
        out.coeffs[cell] = std::move(c);
    }
    return out;
}

} // namespace wavest
