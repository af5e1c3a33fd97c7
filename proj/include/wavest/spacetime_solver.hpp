#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "wavest/errors.hpp"
#include "wavest/lagrange_space.hpp"
#include "wavest/linalg.hpp"
#include "wavest/problem.hpp"
#include "wavest/spatial_fem.hpp"
#include "wavest/time_calculus.hpp"

namespace wavest {

/// How the relation v = du/dt is tested.
enum class MethodVariant {
    GradientCoupling, // weighted stiffness inner product ("Method I")
    MassCoupling      // L2 inner product ("Method II")
};

/// Temporal treatment of the Dirichlet lifting.
enum class BcMode {
    PtauLifting,        // endpoint-exact projection of g_D and its time derivative
    NaiveLagrangeInTime // interpolation at q+1 equispaced nodes per slab
};

inline std::string to_string(MethodVariant m) { return m == MethodVariant::GradientCoupling ? "I" : "II"; }
inline std::string to_string(BcMode b) { return b == BcMode::PtauLifting ? "ptau" : "naive"; }

struct Discretization {
    std::shared_ptr<const LagrangeSpace> space;
    TimePartition partition;
    int q = 1;
    MethodVariant method = MethodVariant::GradientCoupling;
    BcMode bc = BcMode::PtauLifting;

    void validate() const {
        if (!space) throw InvalidArgument("Discretization: missing spatial space");
        if (space->degree() < 1) throw InvalidArgument("Discretization: p must be >= 1");
        if (q < 1) throw InvalidArgument("Discretization: q must be >= 1");
    }
};

inline Discretization make_discretization(const Mesh& mesh, int p, const TimePartition& partition, int q,
                                          MethodVariant method = MethodVariant::GradientCoupling,
                                          BcMode bc = BcMode::PtauLifting) {
    Discretization d{std::make_shared<const LagrangeSpace>(mesh, p), partition, q, method, bc};
    d.validate();
    return d;
}

/// Space-time field, continuous in time, expanded on every slab in the
/// trial basis sigma_0..sigma_degree; row j of coeffs[n-1] is the spatial
/// coefficient vector multiplying sigma_j on slab n.
struct SlabPolynomialField {
    TimePartition partition;
    int degree = 1;
    std::vector<Eigen::MatrixXd> coeffs;

    [[nodiscard]] Vector on_slab(int n, double t) const {
        const Interval slab = partition.slab(n);
        const auto& c = coeffs.at(n - 1);
        Vector out = Vector::Zero(c.cols());
        for (int j = 0; j <= degree; ++j) out += sigma_eval(j, slab, t) * c.row(j).transpose();
        return out;
    }
    [[nodiscard]] Vector operator()(double t) const { return on_slab(partition.find_slab(t), t); }
    /// Value at node t_n (n = 0..N).
    [[nodiscard]] Vector at_node(int n) const {
        if (n == 0) return coeffs.front().row(0).transpose();
        const auto& c = coeffs.at(n - 1);
        return (c.row(0) + c.row(1)).transpose();
    }
    /// Legendre coefficients (rows 0..degree) of the slab polynomial.
    [[nodiscard]] Eigen::MatrixXd legendre_coeffs(int n) const { return sigma_to_legendre(degree) * coeffs.at(n - 1); }
};

/// Boundary trajectories of the lifting, one column per boundary dof
/// (in LagrangeSpace::boundary_dofs order), in the slab trial basis.
struct BoundaryLifting {
    std::vector<Eigen::MatrixXd> u; // (q+1) x n_boundary per slab
    std::vector<Eigen::MatrixXd> v;
};

namespace detail {

inline Eigen::MatrixXd lift_trajectories(const std::vector<Point2>& points, const SpaceTimeFunction& g,
                                         const TimePartition& partition, int q, BcMode mode, int slab_index) {
    const Interval slab = partition.slab(slab_index);
    Eigen::MatrixXd out = Eigen::MatrixXd::Zero(q + 1, static_cast<Eigen::Index>(points.size()));
    if (!g) return out;
    if (mode == BcMode::PtauLifting) {
        const TimePartition single({0.0, slab.length()});
        for (std::size_t k = 0; k < points.size(); ++k) {
            const Point2 x = points[k];
            const auto proj = ptau_project(q, [&](double s) { return g(x, slab.begin + s); }, single);
            const auto sig = legendre_to_sigma(proj.coeffs[0]);
            for (int j = 0; j <= q; ++j) out(j, static_cast<Eigen::Index>(k)) = sig[j];
            // endpoint values exactly as evaluated
            out(0, static_cast<Eigen::Index>(k)) = g(x, slab.begin);
        }
        return out;
    }
    // sigma_0 carries the left value; the remaining coefficients interpolate at the other nodes
    const Eigen::MatrixXd vdm = sigma_uniform_vandermonde(q).bottomRightCorner(q, q);
    const Eigen::PartialPivLU<Eigen::MatrixXd> lu(vdm);
    Eigen::VectorXd rhs(q);
    for (std::size_t k = 0; k < points.size(); ++k) {
        const Point2 x = points[k];
        const double left = g(x, slab.begin);
        for (int a = 1; a <= q; ++a) {
            const double t = a == q ? slab.end : slab.begin + slab.length() * a / q;
            rhs[a - 1] = g(x, t) - left;
        }
        out(0, static_cast<Eigen::Index>(k)) = left;
        out.col(static_cast<Eigen::Index>(k)).tail(q) = lu.solve(rhs);
    }
    return out;
}

} // namespace detail

/// Boundary dof trajectories of the Dirichlet liftings u^D and v^D.
/// Consecutive slabs are glued so that sigma_0 on slab n+1 equals the
/// right endpoint value of slab n bit for bit.
inline BoundaryLifting build_lifting(const ProblemData& problem, const LagrangeSpace& space,
                                     const TimePartition& partition, int q, BcMode mode) {
    std::vector<Point2> points;
    points.reserve(space.boundary_dofs().size());
    for (int d : space.boundary_dofs()) points.push_back(space.dof_coords()[d]);
    BoundaryLifting lift;
    for (int n = 1; n <= partition.num_slabs(); ++n) {
        lift.u.push_back(detail::lift_trajectories(points, problem.dirichlet, partition, q, mode, n));
        lift.v.push_back(detail::lift_trajectories(points, problem.dirichlet_dt, partition, q, mode, n));
        if (n > 1) {
            for (auto* traj : {&lift.u, &lift.v}) {
                const auto& prev = (*traj)[n - 2];
                (*traj)[n - 1].row(0) = prev.row(0) + prev.row(1);
            }
        }
    }
    return lift;
}

struct DiscreteInitialData {
    FEFunction u0;
    FEFunction v0;
};

/// u_{0,h} = Ritz projection of u_0 (boundary values interpolated);
/// v_{0,h} = interpolated boundary values of v_0 plus the interior L2
/// projection of v_0 - v^D(0).
inline DiscreteInitialData discrete_initial_data(const ProblemData& problem, const LagrangeSpace& space,
                                                 const Vector& u_lift0, const Vector& v_lift0) {
    constexpr double tol = 1e-8;
    if (!problem.u0 || !problem.grad_u0 || !problem.v0) throw ConfigError("initial data incomplete");
    const auto& bdofs = space.boundary_dofs();
    DiscreteInitialData out{ritz_project(space, problem.u0, problem.grad_u0, problem.wavespeed),
                            FEFunction{&space, Vector::Zero(space.dimension())}};
    FEFunction v_lift{&space, Vector::Zero(space.dimension())};
    for (std::size_t k = 0; k < bdofs.size(); ++k) {
        const int d = bdofs[k];
        const Point2 x = space.dof_coords()[d];
        if (std::abs(out.u0.coeffs[d] - u_lift0[static_cast<Eigen::Index>(k)]) > tol) {
            throw ConfigError("incompatible initial and boundary data for u");
        }
        out.v0.coeffs[d] = problem.v0(x);
        if (problem.check_v_compatibility &&
            std::abs(out.v0.coeffs[d] - v_lift0[static_cast<Eigen::Index>(k)]) > tol) {
            throw ConfigError("incompatible initial and boundary data for v");
        }
        v_lift.coeffs[d] = v_lift0[static_cast<Eigen::Index>(k)];
    }
    const FEFunction interior = l2_project_interior(space, [&](Point2 x) {
        return problem.v0(x) - evaluate(v_lift, x);
    });
    out.v0.coeffs += interior.coeffs;
    return out;
}

/// Full space-time solution on a fixed mesh and time partition.
struct SpaceTimeSolution {
    std::shared_ptr<const LagrangeSpace> space;
    int q = 1;
    MethodVariant method = MethodVariant::GradientCoupling;
    BcMode bc = BcMode::PtauLifting;
    SlabPolynomialField u;
    SlabPolynomialField v;

    [[nodiscard]] const TimePartition& partition() const { return u.partition; }
    [[nodiscard]] int num_slabs() const { return u.partition.num_slabs(); }
    [[nodiscard]] FEFunction u_at(double t) const { return {space.get(), u(t)}; }
    [[nodiscard]] FEFunction v_at(double t) const { return {space.get(), v(t)}; }
};

/// Slab system for a fixed spatial space, degree and method. Factorizations
/// are cached per slab length so uniform partitions factorize once.
class SlabSolver {
  public:
    SlabSolver(const ProblemData& problem, const Discretization& disc)
        : problem_(problem), disc_(disc), space_(*disc.space) {
        disc_.validate();
        mass_ = assemble(space_, OperatorKind::Mass);
        stiff_ = assemble(space_, OperatorKind::Stiffness, problem.wavespeed);
        const auto& idofs = space_.interior_dofs();
        mass_ii_ = extract_block(mass_, idofs, idofs);
        stiff_ii_ = extract_block(stiff_, idofs, idofs);
    }

    [[nodiscard]] const CompressedMatrix& mass() const { return mass_; }
    [[nodiscard]] const CompressedMatrix& stiffness() const { return stiff_; }

    /// Coefficients (U, V) on slab n given the endpoint state at t_{n-1}
    /// and the boundary trajectories of the slab.
    std::pair<Eigen::MatrixXd, Eigen::MatrixXd> solve(int n, const Vector& u_prev, const Vector& v_prev,
                                                      const Eigen::MatrixXd& lift_u, const Eigen::MatrixXd& lift_v) {
        const int q = disc_.q;
        const Interval slab = disc_.partition.slab(n);
        const auto& bdofs = space_.boundary_dofs();
        const auto& idofs = space_.interior_dofs();
        const int ndof = space_.dimension();
        const auto ni = static_cast<Eigen::Index>(idofs.size());

        for (std::size_t k = 0; k < bdofs.size(); ++k) {
            const auto kk = static_cast<Eigen::Index>(k);
            const double du = std::abs(u_prev[bdofs[k]] - lift_u(0, kk));
            const double dv = std::abs(v_prev[bdofs[k]] - lift_v(0, kk));
            if (du > 1e-10 * (1.0 + std::abs(lift_u(0, kk))) || dv > 1e-10 * (1.0 + std::abs(lift_v(0, kk)))) {
                throw InvalidArgument("solve_slab " + std::to_string(n) +
                                      ": previous state disagrees with the boundary lifting");
            }
        }

        // known parts: sigma_0 from the previous state, boundary columns from the lifting
        Eigen::MatrixXd u_known = Eigen::MatrixXd::Zero(q + 1, ndof);
        Eigen::MatrixXd v_known = Eigen::MatrixXd::Zero(q + 1, ndof);
        u_known.row(0) = u_prev.transpose();
        v_known.row(0) = v_prev.transpose();
        for (std::size_t k = 0; k < bdofs.size(); ++k) {
            for (int j = 0; j <= q; ++j) {
                u_known(j, bdofs[k]) = lift_u(j, static_cast<Eigen::Index>(k));
                v_known(j, bdofs[k]) = lift_v(j, static_cast<Eigen::Index>(k));
            }
        }

        const auto tm = slab_temporal_matrices(q, slab);
        const CompressedMatrix& coupling = disc_.method == MethodVariant::GradientCoupling ? stiff_ : mass_;
        const auto loads = source_moments(slab);

        Vector rhs(2 * q * ni);
        for (int i = 0; i < q; ++i) {
            Vector eq1 = Vector::Zero(ndof);
            Vector eq2 = loads[i];
            for (int j = 0; j <= q; ++j) {
                const Vector uj = u_known.row(j).transpose();
                const Vector vj = v_known.row(j).transpose();
                eq1 -= coupling * (tm.N(i, j) * vj - tm.D(i, j) * uj);
                eq2 -= tm.D(i, j) * (mass_ * vj) + tm.N(i, j) * (stiff_ * uj);
            }
            rhs.segment((2 * i) * ni, ni) = restrict_to(eq1, idofs);
            rhs.segment((2 * i + 1) * ni, ni) = restrict_to(eq2, idofs);
        }

        Eigen::MatrixXd u_out = u_known;
        Eigen::MatrixXd v_out = v_known;
        if (ni > 0) {
            Vector x;
            try {
                x = factorization(slab, tm).solve(rhs);
            } catch (const SolverFailure& e) {
                throw SolverFailure("slab " + std::to_string(n) + ": " + e.what(), e.residual());
            }
            for (int j = 1; j <= q; ++j) {
                const Vector uj = x.segment((2 * (j - 1)) * ni, ni);
                const Vector vj = x.segment((2 * (j - 1) + 1) * ni, ni);
                for (Eigen::Index k = 0; k < ni; ++k) {
                    u_out(j, idofs[k]) = uj[k];
                    v_out(j, idofs[k]) = vj[k];
                }
            }
        }
        return {std::move(u_out), std::move(v_out)};
    }

  private:
    // int_{part} (f, L_i phi_k) dt for i < q, L_i living on the whole slab
    Eigen::MatrixXd moments_on(const Interval& slab, const Interval& part) const {
        const int q = disc_.q;
        Eigen::MatrixXd m = Eigen::MatrixXd::Zero(space_.dimension(), q);
        const auto rule = gauss_rule(std::max(q + 3, 6), part);
        for (std::size_t g = 0; g < rule.size(); ++g) {
            const double t = rule.nodes[g];
            const Vector b = load_vector(space_, [&](Point2 x) { return problem_.source(x, t); });
            for (int i = 0; i < q; ++i) m.col(i) += (rule.weights[g] * legendre_eval(i, slab, t)) * b;
        }
        return m;
    }

    // F_i = int_{I_n} (f, L_i phi_k) dt, by bisection until the Gauss rule
    // agrees with its two halves (smooth data stop after one check; data
    // singular at an endpoint get refined toward it)
    std::vector<Vector> source_moments(const Interval& slab) const {
        const int q = disc_.q;
        std::vector<Vector> loads(q, Vector::Zero(space_.dimension()));
        if (!problem_.source) return loads;
        const Eigen::MatrixXd whole = moments_on(slab, slab);
        const double tol = 1e-13 * std::max(whole.norm(), 1e-300);
        Eigen::MatrixXd total = Eigen::MatrixXd::Zero(whole.rows(), whole.cols());
        struct Piece {
            Interval part;
            Eigen::MatrixXd coarse;
            int depth;
        };
        std::vector<Piece> stack{{slab, whole, 0}};
        while (!stack.empty()) {
            Piece piece = std::move(stack.back());
            stack.pop_back();
            const double mid = 0.5 * (piece.part.begin + piece.part.end);
            const Interval left{piece.part.begin, mid};
            const Interval right{mid, piece.part.end};
            Eigen::MatrixXd ml = moments_on(slab, left);
            Eigen::MatrixXd mr = moments_on(slab, right);
            const double diff = (ml + mr - piece.coarse).norm();
            if (diff <= tol * piece.part.length() / slab.length() || piece.depth >= 60) {
                total += ml + mr;
            } else {
                stack.push_back({left, std::move(ml), piece.depth + 1});
                stack.push_back({right, std::move(mr), piece.depth + 1});
            }
        }
        for (int i = 0; i < q; ++i) loads[i] = total.col(i);
        return loads;
    }

    const GeneralSolver& factorization(const Interval& slab, const SlabTemporalMatrices& tm) {
        const double tau = slab.length();
        for (const auto& [key, solver] : cache_) {
            if (std::abs(key - tau) <= 1e-12 * tau) return *solver;
        }
        const int q = disc_.q;
        const CompressedMatrix& a_ii = disc_.method == MethodVariant::GradientCoupling ? stiff_ii_ : mass_ii_;
        const auto ni = static_cast<int>(mass_ii_.rows());
        Triplets trips;
        auto add_block = [&](int brow, int bcol, double scale, const CompressedMatrix& block) {
            if (scale == 0.0) return;
            for (int r = 0; r < block.outerSize(); ++r) {
                for (CompressedMatrix::InnerIterator it(block, r); it; ++it) {
                    trips.emplace_back(brow * ni + r, bcol * ni + static_cast<int>(it.col()), scale * it.value());
                }
            }
        };
        for (int i = 0; i < q; ++i) {
            for (int j = 1; j <= q; ++j) {
                const int ucol = 2 * (j - 1);
                const int vcol = ucol + 1;
                add_block(2 * i, vcol, tm.N(i, j), a_ii);
                add_block(2 * i, ucol, -tm.D(i, j), a_ii);
                add_block(2 * i + 1, vcol, tm.D(i, j), mass_ii_);
                add_block(2 * i + 1, ucol, tm.N(i, j), stiff_ii_);
            }
        }
        CompressedMatrix a(2 * q * ni, 2 * q * ni);
        a.setFromTriplets(trips.begin(), trips.end());
        cache_.emplace_back(tau, std::make_unique<GeneralSolver>(std::move(a)));
        return *cache_.back().second;
    }

    const ProblemData& problem_;
    Discretization disc_;
    const LagrangeSpace& space_;
    CompressedMatrix mass_;
    CompressedMatrix stiff_;
    CompressedMatrix mass_ii_;
    CompressedMatrix stiff_ii_;
    std::vector<std::pair<double, std::unique_ptr<GeneralSolver>>> cache_;
};

/// March over all slabs from the discrete initial data.
inline SpaceTimeSolution solve(const ProblemData& problem, const Discretization& disc) {
    disc.validate();
    const auto& space = *disc.space;
    const auto lift = build_lifting(problem, space, disc.partition, disc.q, disc.bc);
    const auto init = discrete_initial_data(problem, space, lift.u.front().row(0).transpose(),
                                            lift.v.front().row(0).transpose());
    SlabSolver slab_solver(problem, disc);

    SpaceTimeSolution sol{disc.space, disc.q, disc.method, disc.bc, {disc.partition, disc.q, {}},
                          {disc.partition, disc.q, {}}};
    Vector u_prev = init.u0.coeffs;
    Vector v_prev = init.v0.coeffs;
    // boundary values always come from the lifting (v_0 may disagree when its check is disabled)
    const auto& bdofs = space.boundary_dofs();
    for (std::size_t k = 0; k < bdofs.size(); ++k) {
        u_prev[bdofs[k]] = lift.u.front()(0, static_cast<Eigen::Index>(k));
        v_prev[bdofs[k]] = lift.v.front()(0, static_cast<Eigen::Index>(k));
    }
    for (int n = 1; n <= disc.partition.num_slabs(); ++n) {
        auto [un, vn] = slab_solver.solve(n, u_prev, v_prev, lift.u[n - 1], lift.v[n - 1]);
        u_prev = (un.row(0) + un.row(1)).transpose();
        v_prev = (vn.row(0) + vn.row(1)).transpose();
        sol.u.coeffs.push_back(std::move(un));
        sol.v.coeffs.push_back(std::move(vn));
    }
    return sol;
}

} // namespace wavest
