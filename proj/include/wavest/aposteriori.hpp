#pragma once

#include <algorithm>
#include <cmath>
#include <numbers>
#include <optional>
#include <vector>

#include "wavest/errors.hpp"
#include "wavest/postprocess.hpp"
#include "wavest/problem.hpp"
#include "wavest/spacetime_solver.hpp"

namespace wavest {

/// C_Pi(s): pi^{-1/2} for s <= 2, 1 / ((s - 2) pi) for s >= 3.
inline double constant_pi(int s) {
    if (s < 0) throw InvalidArgument("constant_pi: s must be >= 0");
    if (s <= 2) return 1.0 / std::sqrt(std::numbers::pi);
    return 1.0 / ((s - 2) * std::numbers::pi);
}

/// C_bullet(q) for summation slab n when the maximum sits on slab m.
inline double constant_bullet(int q, const TimePartition& partition, int n, int m) {
    if (q == 1) return std::abs(partition.node(m) - partition.node(n - 1));
    return constant_pi(q - 2) * partition.tau(n) / 2.0;
}

struct EstimatorConstants {
    double q_star;
    double pi_q_minus_1;
};

inline EstimatorConstants estimator_constants(int q) {
    if (q < 1) throw InvalidArgument("estimator_constants: q must be >= 1");
    return {constant_q_star(q), constant_pi(q - 1)};
}

/// Slab-local temporal defects (Id - Pi_{q-1}) of the data and the solution.
struct SlabDefects {
    double v_l2 = 0.0;    // L2(Q_n) norm of the v defect
    double f_l1 = 0.0;    // L1(I_n; L2) norm of the f defect
    double lap_v_l1 = 0.0;
    double lap_u_l1 = 0.0;
    double gap_max = 0.0; // sampled max of |u* - u|_{L2} on the slab
};

struct EstimatorBreakdown {
    int m_star = 1;
    double term_post = 0.0;
    double term_f = 0.0;
    double term_lap_v = 0.0;
    double term_lap_u = 0.0;
    double eta = 0.0;
    double osc_f = 0.0;
    double total = 0.0;
    std::vector<SlabDefects> slabs;
};

namespace detail {

// int_{I_n} |(Id - Pi_{q-1}) f(., t)|_{L2} dt, space integrated on the FE rule
inline double source_defect_l1(const ProblemData& problem, const LagrangeSpace& space, const Interval& slab, int q) {
    if (!problem.source) return 0.0;
    const auto time_rule = gauss_rule(std::min(30, std::max(q + 4, 8)), slab);
    const int proj_pts = std::min(30, std::max(q + 6, 12));
    const auto& rule = space.rule();
    std::vector<double> sq(time_rule.size(), 0.0);
    for (std::size_t cell = 0; cell < space.mesh().num_cells(); ++cell) {
        const auto& geo = space.geometry(cell);
        for (std::size_t g = 0; g < rule.size(); ++g) {
            const Point2 x = geo.map(rule.xi[g], rule.eta[g]);
            const auto proj = l2_project_time(q - 1, [&](double t) { return problem.source(x, t); }, slab, proj_pts);
            for (std::size_t k = 0; k < time_rule.size(); ++k) {
                const double t = time_rule.nodes[k];
                const double d = problem.source(x, t) - legendre_series(proj, slab, t);
                sq[k] += rule.weights[g] * geo.det * d * d;
            }
        }
    }
    double total = 0.0;
    for (std::size_t k = 0; k < time_rule.size(); ++k) total += time_rule.weights[k] * std::sqrt(sq[k]);
    return total;
}

} // namespace detail

/// Constant-free bound on the C0(L2) error of u for homogeneous Dirichlet
/// data and a constant wavespeed. The fully discrete solution stands in for
/// the semidiscrete one, so it should be spatially overresolved.
inline EstimatorBreakdown compute_estimator(const SpaceTimeSolution& sol, const ProblemData& problem,
                                            int samples_per_slab = default_samples_per_slab) {
    if (!problem.homogeneous_dirichlet()) throw ConfigError("estimator requires homogeneous Dirichlet data");
    if (problem.wavespeed && !problem.constant_wavespeed) throw ConfigError("estimator requires a constant wavespeed");
    const auto& space = *sol.space;
    if (space.degree() < 2) throw ConfigError("estimator requires p >= 2");
    const double c2 = std::pow(problem.constant_wavespeed.value_or(1.0), 2);
    const int q = sol.q;
    const auto& partition = sol.partition();
    const auto consts = estimator_constants(q);
    const auto ustar = postprocess_ustar(sol);

    EstimatorBreakdown est;
    double best_gap = -1.0;
    for (int n = 1; n <= partition.num_slabs(); ++n) {
        const Interval slab = partition.slab(n);
        const double tau = slab.length();
        SlabDefects d;
        // the defects of v, u are their top Legendre modes times L_q
        const FEFunction v_top{&space, sol.v.legendre_coeffs(n).row(q).transpose()};
        const FEFunction u_top{&space, sol.u.legendre_coeffs(n).row(q).transpose()};
        const double abs_lq = legendre_abs_integral(q, slab);
        d.v_l2 = l2_norm(space, v_top.coeffs) * std::sqrt(tau / (2.0 * q + 1.0));
        d.lap_v_l1 = broken_laplacian(v_top).l2_norm() * abs_lq;
        d.lap_u_l1 = broken_laplacian(u_top).l2_norm() * abs_lq;
        d.f_l1 = detail::source_defect_l1(problem, space, slab, q);
        for (double t : slab_samples(slab, samples_per_slab)) {
            d.gap_max = std::max(d.gap_max, l2_norm(space, ustar.on_slab(n, t) - sol.u.on_slab(n, t)));
        }
        if (d.gap_max > best_gap) {
            best_gap = d.gap_max;
            est.m_star = n;
        }
        est.term_post = std::max(est.term_post, std::sqrt(consts.q_star * tau) * d.v_l2);
        est.slabs.push_back(d);
    }

    const int m = est.m_star;
    const double tau_m = partition.tau(m);
    const auto& dm = est.slabs[m - 1];
    for (int n = 1; n < m; ++n) {
        const auto& dn = est.slabs[n - 1];
        const double tau = partition.tau(n);
        est.term_f += 2.0 * consts.pi_q_minus_1 * tau * dn.f_l1;
        est.term_lap_v += 2.0 * c2 * constant_bullet(q, partition, n, m) * tau * dn.lap_v_l1;
        est.term_lap_u += 2.0 * c2 * consts.pi_q_minus_1 * tau * dn.lap_u_l1;
    }
    est.term_f += 2.0 * tau_m * dm.f_l1;
    est.term_lap_v += 2.0 * c2 * tau_m * dm.lap_v_l1;
    est.term_lap_u += 2.0 * c2 * tau_m * dm.lap_u_l1;

    est.osc_f = est.term_f;
    est.eta = est.term_post + est.term_lap_v + est.term_lap_u;
    est.total = est.eta + est.osc_f;
    return est;
}

/// eta / error, undefined for a vanishing error.
inline std::optional<double> effectivity(double eta, double error) {
    if (!(error > 0.0)) return std::nullopt;
    return eta / error;
}

} // namespace wavest
