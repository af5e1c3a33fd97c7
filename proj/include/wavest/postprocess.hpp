#pragma once

#include <algorithm>
#include <cmath>
#include <numbers>
#include <optional>
#include <utility>
#include <vector>

#include "wavest/errors.hpp"
#include "wavest/problem.hpp"
#include "wavest/spacetime_solver.hpp"
#include "wavest/spatial_fem.hpp"
#include "wavest/time_calculus.hpp"

namespace wavest {

inline constexpr int default_samples_per_slab = 11;

/// u*(t) = u(0) + int_0^t v, of degree q+1 in time.
inline SlabPolynomialField postprocess_ustar(const SpaceTimeSolution& sol) {
    const int q = sol.q;
    SlabPolynomialField out{sol.partition(), q + 1, {}};
    const Eigen::MatrixXd c = sigma_to_legendre(q);
    Eigen::RowVectorXd left = sol.u.at_node(0).transpose();
    for (int n = 1; n <= sol.num_slabs(); ++n) {
        const double tau = sol.partition().tau(n);
        const Eigen::MatrixXd leg = c * sol.v.coeffs[n - 1]; // Legendre coefficients of v
        Eigen::MatrixXd coeffs(q + 2, leg.cols());
        coeffs.row(0) = left;
        // int_{t_{n-1}}^t L_k = tau sigma_{k+1}(t)
        coeffs.bottomRows(q + 1) = tau * leg;
        left = coeffs.row(0) + coeffs.row(1);
        out.coeffs.push_back(std::move(coeffs));
    }
    return out;
}

/// Uniformly spaced sample times on slab n, endpoints included.
inline std::vector<double> slab_samples(const Interval& slab, int samples) {
    std::vector<double> t(samples);
    for (int k = 0; k < samples; ++k) t[k] = slab.begin + slab.length() * k / (samples - 1);
    t.back() = slab.end;
    return t;
}

struct C0Error {
    double max = 0.0;
    std::vector<double> per_slab;
};

/// max over sampled times of the spatial error norm of exact - field.
inline C0Error error_C0(const SlabPolynomialField& field, const LagrangeSpace& space, NormKind kind,
                        const SpaceTimeFunction& exact, const SpaceTimeGradient& exact_gradient = {},
                        int samples_per_slab = default_samples_per_slab, const SpaceFunction& c = {}) {
    if (samples_per_slab < 3) throw InvalidArgument("error_C0: need at least 3 samples per slab");
    if (kind == NormKind::L2 && !exact) throw ConfigError("error_C0: exact solution missing");
    if (kind == NormKind::H1SemiWeighted && !exact_gradient) throw ConfigError("error_C0: exact gradient missing");
    C0Error err;
    for (int n = 1; n <= field.partition.num_slabs(); ++n) {
        double slab_max = 0.0;
        for (double t : slab_samples(field.partition.slab(n), samples_per_slab)) {
            const Vector coeffs = field.on_slab(n, t);
            const double e = kind == NormKind::L2
                                 ? l2_norm(space, coeffs, [&](Point2 x) { return exact(x, t); })
                                 : h1_seminorm(space, coeffs, [&](Point2 x) { return exact_gradient(x, t); }, c);
            slab_max = std::max(slab_max, e);
        }
        err.per_slab.push_back(slab_max);
        err.max = std::max(err.max, slab_max);
    }
    return err;
}

struct ErrorReport {
    C0Error u;
    C0Error ustar;
    C0Error v;
    C0Error gradu;
    int samples_per_slab = default_samples_per_slab;

    [[nodiscard]] double err_u() const { return u.max; }
    [[nodiscard]] double err_ustar() const { return ustar.max; }
    [[nodiscard]] double err_v() const { return v.max; }
    [[nodiscard]] double err_gradu() const { return gradu.max; }
};

inline ErrorReport compute_errors(const SpaceTimeSolution& sol, const ProblemData& problem,
                                  int samples_per_slab = default_samples_per_slab) {
    if (!problem.has_exact_solution()) throw ConfigError("compute_errors: problem has no exact solution");
    const auto& space = *sol.space;
    ErrorReport r;
    r.samples_per_slab = samples_per_slab;
    r.u = error_C0(sol.u, space, NormKind::L2, problem.exact_u, {}, samples_per_slab);
    r.ustar = error_C0(postprocess_ustar(sol), space, NormKind::L2, problem.exact_u, {}, samples_per_slab);
    r.v = error_C0(sol.v, space, NormKind::L2, problem.exact_v, {}, samples_per_slab);
    r.gradu = error_C0(sol.u, space, NormKind::H1SemiWeighted, {}, problem.exact_grad_u, samples_per_slab,
                       problem.wavespeed);
    return r;
}

/// E(t_n) = (|v(t_n)|^2 + |c grad u(t_n)|^2) / 2 for n = 0..N.
inline std::vector<double> energy_trace(const SpaceTimeSolution& sol, const SpaceFunction& c = {}) {
    const auto mass = assemble(*sol.space, OperatorKind::Mass);
    const auto stiff = assemble(*sol.space, OperatorKind::Stiffness, c);
    std::vector<double> e;
    for (int n = 0; n <= sol.num_slabs(); ++n) {
        const Vector u = sol.u.at_node(n);
        const Vector v = sol.v.at_node(n);
        e.push_back(0.5 * (v.dot(mass * v) + u.dot(stiff * u)));
    }
    return e;
}

/// max_n |E(t_n) - E(t_0)| / E(t_0).
inline double relative_energy_drift(const std::vector<double>& trace) {
    if (trace.empty() || trace.front() == 0.0) return 0.0;
    double m = 0.0;
    for (double e : trace) m = std::max(m, std::abs(e - trace.front()));
    return m / trace.front();
}

/// Pairwise rates log(e_k / e_{k+1}) / log(r_k / r_{k+1}); empty when undefined.
inline std::vector<std::optional<double>> convergence_rates(const std::vector<std::pair<double, double>>& table) {
    if (table.size() < 2) throw InvalidArgument("convergence_rates: need at least two rows");
    std::vector<std::optional<double>> rates;
    for (std::size_t k = 0; k + 1 < table.size(); ++k) {
        const auto [r0, e0] = table[k];
        const auto [r1, e1] = table[k + 1];
        if (!(r1 < r0) || !(r1 > 0.0)) throw InvalidArgument("convergence_rates: resolutions must decrease");
        if (!(e0 > 0.0) || !(e1 > 0.0)) {
            rates.emplace_back(std::nullopt);
        } else {
            rates.emplace_back(std::log(e0 / e1) / std::log(r0 / r1));
        }
    }
    return rates;
}

/// C_{q,*}: 1/pi for q = 1, 1/(2 sqrt((q-1) q)) otherwise.
inline double constant_q_star(int q) {
    if (q < 1) throw InvalidArgument("constant_q_star: q must be >= 1");
    if (q == 1) return 1.0 / std::numbers::pi;
    return 1.0 / (2.0 * std::sqrt(static_cast<double>((q - 1) * q)));
}

/// Gap between u* and u on one slab together with the two a priori bounds
/// in terms of the top temporal Legendre mode of v.
struct SlabGap {
    double sup_gap = 0.0;    // max over samples of |u* - u|_{L2}
    double sup_bound = 0.0;  // sqrt(C_{q,*} tau) |(Id - Pi_{q-1}) v|_{L2(Q_n)}
    double l1_gap = 0.0;     // int |u* - u|_{L2} dt
    double l1_bound = 0.0;   // tau |(Id - Pi_{q-1}) v|_{L1(I_n; L2)}
    double endpoint_gap = 0.0; // |u*(t_n) - u(t_n)|_{L2}
};

inline std::vector<SlabGap> ustar_slab_gaps(const SpaceTimeSolution& sol, int samples_per_slab = 41) {
    const int q = sol.q;
    const auto& space = *sol.space;
    const auto ustar = postprocess_ustar(sol);
    const double cq = constant_q_star(q);
    std::vector<SlabGap> gaps;
    for (int n = 1; n <= sol.num_slabs(); ++n) {
        const Interval slab = sol.partition().slab(n);
        const double tau = slab.length();
        SlabGap g;
        auto gap_at = [&](double t) { return l2_norm(space, ustar.on_slab(n, t) - sol.u.on_slab(n, t)); };
        for (double t : slab_samples(slab, samples_per_slab)) g.sup_gap = std::max(g.sup_gap, gap_at(t));
        const auto rule = gauss_rule(std::min(30, 2 * q + 8), slab);
        for (std::size_t k = 0; k < rule.size(); ++k) g.l1_gap += rule.weights[k] * gap_at(rule.nodes[k]);
        g.endpoint_gap = gap_at(slab.end);
        const Vector top = sol.v.legendre_coeffs(n).row(q).transpose();
        const double top_l2 = l2_norm(space, top);
        g.sup_bound = std::sqrt(cq * tau) * top_l2 * std::sqrt(tau / (2.0 * q + 1.0));
        g.l1_bound = tau * top_l2 * legendre_abs_integral(q, slab);
        gaps.push_back(g);
    }
    return gaps;
}

} // namespace wavest
