#include <gtest/gtest.h>

#include <cmath>

#include "wavest/postprocess.hpp"

using namespace wavest;

namespace {

SpaceTimeSolution run(const ProblemData& p, int mesh, int deg, int slabs, int q,
                      MethodVariant method = MethodVariant::GradientCoupling, BcMode bc = BcMode::PtauLifting) {
    return solve(p, make_discretization(build_structured_mesh(mesh, mesh, p.domain), deg,
                                        TimePartition::uniform(p.final_time, slabs), q, method, bc));
}

Vector time_derivative(const SlabPolynomialField& f, int n, double t) {
    const Interval slab = f.partition.slab(n);
    const Eigen::MatrixXd leg = f.legendre_coeffs(n);
    Vector out = Vector::Zero(leg.cols());
    for (int s = 0; s <= f.degree; ++s) out += legendre_eval(s, slab, t, 1) * leg.row(s).transpose();
    return out;
}

} // namespace

TEST(Ustar, DerivativeIsVAndStartsAtU0) {
    const auto problem = presets::dirichlet_cos();
    for (int q = 1; q <= 3; ++q) {
        const auto sol = run(problem, 3, 2, 4, q);
        const auto ustar = postprocess_ustar(sol);
        EXPECT_EQ(ustar.degree, q + 1);
        EXPECT_LE((ustar.at_node(0) - sol.u.at_node(0)).norm(), 1e-15);
        for (int n = 1; n <= 4; ++n) {
            for (double t : slab_samples(sol.partition().slab(n), 5)) {
                EXPECT_LE((time_derivative(ustar, n, t) - sol.v.on_slab(n, t)).norm(),
                          1e-11 * (1.0 + sol.v.on_slab(n, t).norm()));
            }
        }
    }
}

TEST(Ustar, MatchesUAtNodes) {
    // interior components always; boundary components too when g_D = 0, or
    // for the endpoint-exact lifting with q >= 2
    const auto sine = presets::standing_sine();
    const auto cosd = presets::dirichlet_cos();
    for (int q = 1; q <= 3; ++q) {
        for (auto method : {MethodVariant::GradientCoupling, MethodVariant::MassCoupling}) {
            const auto a = run(sine, 3, 2, 4, q, method);
            const auto ua = postprocess_ustar(a);
            for (int n = 1; n <= 4; ++n) EXPECT_LE((ua.at_node(n) - a.u.at_node(n)).norm(), 1e-12);
            if (q >= 2) {
                const auto b = run(cosd, 3, 2, 4, q, method);
                const auto ub = postprocess_ustar(b);
                for (int n = 1; n <= 4; ++n) EXPECT_LE((ub.at_node(n) - b.u.at_node(n)).norm(), 1e-12);
            }
        }
    }
}

TEST(Ustar, ConstantWhenVVanishes) {
    const auto problem = presets::standing_sine();
    auto sol = run(problem, 2, 2, 3, 2);
    for (auto& c : sol.v.coeffs) c.setZero();
    const auto ustar = postprocess_ustar(sol);
    const Vector u0 = sol.u.at_node(0);
    for (int n = 1; n <= 3; ++n) {
        for (double t : slab_samples(sol.partition().slab(n), 4)) EXPECT_LE((ustar.on_slab(n, t) - u0).norm(), 1e-15);
    }
}

TEST(Ustar, SlabGapBounds) {
    for (const auto& problem : {presets::standing_sine(), presets::estimator_poly(presets::profile_cos4())}) {
        for (int q = 1; q <= 3; ++q) {
            const auto sol = run(problem, 3, 2, 6, q);
            for (const auto& g : ustar_slab_gaps(sol)) {
                EXPECT_LE(g.sup_gap, g.sup_bound * (1 + 1e-8) + 1e-14);
                EXPECT_LE(g.l1_gap, g.l1_bound * (1 + 1e-8) + 1e-14);
                EXPECT_LE(g.endpoint_gap, 1e-12);
            }
        }
    }
}

TEST(ErrorC0, ZeroForExactField) {
    const auto problem = presets::linear_in_time();
    const auto sol = run(problem, 2, 2, 2, 1);
    const auto r = compute_errors(sol, problem);
    EXPECT_LE(r.err_u(), 1e-12);
    EXPECT_LE(r.err_v(), 1e-12);
    EXPECT_LE(r.err_gradu(), 1e-12);
    EXPECT_LE(r.err_ustar(), 1e-12);
    EXPECT_EQ(r.u.per_slab.size(), 2u);
}

TEST(ErrorC0, KnownValue) {
    // u_h = 0 against exact t: error max_t |t| |1|_{L2} = 1
    const LagrangeSpace space(build_structured_mesh(2, 2, BBox{}), 1);
    SlabPolynomialField zero{TimePartition::uniform(1.0, 2), 1,
                             {Eigen::MatrixXd::Zero(2, space.dimension()), Eigen::MatrixXd::Zero(2, space.dimension())}};
    const auto e = error_C0(zero, space, NormKind::L2, [](Point2, double t) { return t; });
    EXPECT_NEAR(e.max, 1.0, 1e-14);
    EXPECT_NEAR(e.per_slab[0], 0.5, 1e-14);
    EXPECT_THROW(error_C0(zero, space, NormKind::L2, [](Point2, double t) { return t; }, {}, 2), InvalidArgument);
    EXPECT_THROW(error_C0(zero, space, NormKind::H1SemiWeighted, {}), ConfigError);
}

TEST(ErrorC0, RefinedSamplingNeverSmaller) {
    const auto problem = presets::dirichlet_cos();
    const auto sol = run(problem, 3, 2, 4, 2);
    const auto coarse = compute_errors(sol, problem, 11);
    const auto fine = compute_errors(sol, problem, 21); // contains the 11 coarse samples
    EXPECT_GE(fine.err_u(), coarse.err_u());
    EXPECT_GE(fine.err_v(), coarse.err_v());
    EXPECT_GE(fine.err_gradu(), coarse.err_gradu());
    EXPECT_GE(fine.err_ustar(), coarse.err_ustar());
}

TEST(ErrorC0, SpatialRateForQuadratics) {
    const auto problem = presets::dirichlet_cos();
    const double e8 = compute_errors(run(problem, 8, 2, 32, 4), problem).err_u();
    const double e16 = compute_errors(run(problem, 16, 2, 32, 4), problem).err_u();
    EXPECT_NEAR(e8 / e16, 8.0, 2.0);
}

TEST(ConvergenceRates, Examples) {
    const auto r = convergence_rates({{1.0, 1.0}, {0.5, 0.25}, {0.25, 0.0625}});
    ASSERT_EQ(r.size(), 2u);
    EXPECT_NEAR(*r[0], 2.0, 1e-14);
    EXPECT_NEAR(*r[1], 2.0, 1e-14);
    EXPECT_NEAR(*convergence_rates({{0.1, 1e-3}, {0.05, 1.25e-4}})[0], 3.0, 1e-12);
    EXPECT_FALSE(convergence_rates({{1.0, 0.0}, {0.5, 0.1}})[0].has_value());
    EXPECT_THROW(convergence_rates({{1.0, 1.0}}), InvalidArgument);
    EXPECT_THROW(convergence_rates({{0.5, 1.0}, {0.5, 0.5}}), InvalidArgument);
}

TEST(Energy, DriftExamples) {
    EXPECT_EQ(relative_energy_drift({2.0, 2.0, 2.0}), 0.0);
    EXPECT_NEAR(relative_energy_drift({1.0, 1.1, 0.9}), 0.1, 1e-15);
    EXPECT_EQ(relative_energy_drift({}), 0.0);
}

TEST(Energy, TraceMatchesInitialEnergy) {
    // E(0) of the standing wave: |grad u_0|^2 / 2 = pi^2 / 4
    const auto problem = presets::standing_sine();
    const auto sol = run(problem, 8, 3, 4, 2);
    const auto trace = energy_trace(sol);
    ASSERT_EQ(trace.size(), 5u);
    EXPECT_NEAR(trace[0], std::pow(std::numbers::pi, 2) / 4.0, 1e-4);
    EXPECT_LE(relative_energy_drift(trace), 1e-10);
}

TEST(Constants, QStar) {
    EXPECT_NEAR(constant_q_star(1), 1.0 / std::numbers::pi, 1e-16);
    EXPECT_NEAR(constant_q_star(2), 1.0 / (2.0 * std::sqrt(2.0)), 1e-16);
    EXPECT_THROW(constant_q_star(0), InvalidArgument);
}
