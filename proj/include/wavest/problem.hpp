#pragma once

#include <cmath>
#include <functional>
#include <numbers>
#include <optional>
#include <string>

#include "wavest/errors.hpp"
#include "wavest/lagrange_space.hpp"
#include "wavest/mesh.hpp"

namespace wavest {

using SpaceTimeFunction = std::function<double(Point2, double)>;
using SpaceTimeGradient = std::function<Gradient(Point2, double)>;

/// Data of the acoustic wave problem in Hamiltonian form,
/// v = u_t, v_t - div(c^2 grad u) = f, u = g_D on the boundary.
///
/// The exact solution fields are optional and only used for error studies.
struct ProblemData {
    std::string name;
    BBox domain;
    double final_time = 1.0;

    SpaceFunction wavespeed;                 // empty means c = 1
    std::optional<double> constant_wavespeed; // set when c is a known constant
    SpaceTimeFunction source;                // empty means f = 0
    SpaceTimeFunction dirichlet;             // empty means g_D = 0
    SpaceTimeFunction dirichlet_dt;          // time derivative of g_D
    SpaceFunction u0;
    GradientFunction grad_u0;
    SpaceFunction v0;
    bool check_v_compatibility = true;

    SpaceTimeFunction exact_u;
    SpaceTimeFunction exact_v;
    SpaceTimeGradient exact_grad_u;

    [[nodiscard]] bool homogeneous_dirichlet() const { return !dirichlet; }
    [[nodiscard]] bool has_exact_solution() const { return exact_u && exact_v && exact_grad_u; }

    [[nodiscard]] double f(Point2 x, double t) const { return source ? source(x, t) : 0.0; }
    [[nodiscard]] double g(Point2 x, double t) const { return dirichlet ? dirichlet(x, t) : 0.0; }
    [[nodiscard]] double g_t(Point2 x, double t) const { return dirichlet_dt ? dirichlet_dt(x, t) : 0.0; }

    /// Scale every data field and the exact solution by lambda (linear problem).
    [[nodiscard]] ProblemData scaled(double lambda) const {
        ProblemData out = *this;
        auto sc = [lambda](auto fn) -> decltype(fn) {
            if (!fn) return fn;
            return [fn, lambda](auto... args) { return lambda * fn(args...); };
        };
        out.source = sc(source);
        out.dirichlet = sc(dirichlet);
        out.dirichlet_dt = sc(dirichlet_dt);
        out.u0 = sc(u0);
        out.grad_u0 = sc(grad_u0);
        out.v0 = sc(v0);
        out.exact_u = sc(exact_u);
        out.exact_v = sc(exact_v);
        out.exact_grad_u = sc(exact_grad_u);
        return out;
    }
};

namespace presets {

/// u = cos(sqrt(2) pi t) cos(pi x) sin(pi y) on (0,1)^2 x (0,1); c = 1, f = 0,
/// nonzero Dirichlet data on x = 0 and x = 1.
inline ProblemData dirichlet_cos() {
    using std::numbers::pi;
    const double omega = std::numbers::sqrt2 * pi;
    ProblemData d;
    d.name = "dirichlet-cos";
    d.domain = {0.0, 1.0, 0.0, 1.0};
    d.final_time = 1.0;
    d.constant_wavespeed = 1.0;
    d.exact_u = [=](Point2 x, double t) { return std::cos(omega * t) * std::cos(pi * x.x) * std::sin(pi * x.y); };
    d.exact_v = [=](Point2 x, double t) {
        return -omega * std::sin(omega * t) * std::cos(pi * x.x) * std::sin(pi * x.y);
    };
    d.exact_grad_u = [=](Point2 x, double t) {
        const double a = std::cos(omega * t);
        return Gradient(-pi * a * std::sin(pi * x.x) * std::sin(pi * x.y), pi * a * std::cos(pi * x.x) * std::cos(pi * x.y));
    };
    d.dirichlet = d.exact_u;
    d.dirichlet_dt = d.exact_v;
    d.u0 = [=](Point2 x) { return std::cos(pi * x.x) * std::sin(pi * x.y); };
    d.grad_u0 = [=](Point2 x) {
        return Gradient(-pi * std::sin(pi * x.x) * std::sin(pi * x.y), pi * std::cos(pi * x.x) * std::cos(pi * x.y));
    };
    d.v0 = [](Point2) { return 0.0; };
    return d;
}

/// Standing wave u = cos(sqrt(2) pi t) sin(pi x) sin(pi y) on (0,1)^2 with g_D = 0, f = 0.
inline ProblemData standing_sine(double final_time = 1.0) {
    using std::numbers::pi;
    const double omega = std::numbers::sqrt2 * pi;
    ProblemData d;
    d.name = "standing-sine";
    d.domain = {0.0, 1.0, 0.0, 1.0};
    d.final_time = final_time;
    d.constant_wavespeed = 1.0;
    d.exact_u = [=](Point2 x, double t) { return std::cos(omega * t) * std::sin(pi * x.x) * std::sin(pi * x.y); };
    d.exact_v = [=](Point2 x, double t) {
        return -omega * std::sin(omega * t) * std::sin(pi * x.x) * std::sin(pi * x.y);
    };
    d.exact_grad_u = [=](Point2 x, double t) {
        const double a = std::cos(omega * t);
        return Gradient(pi * a * std::cos(pi * x.x) * std::sin(pi * x.y), pi * a * std::sin(pi * x.x) * std::cos(pi * x.y));
    };
    d.u0 = [=](Point2 x) { return std::sin(pi * x.x) * std::sin(pi * x.y); };
    d.grad_u0 = [=](Point2 x) {
        return Gradient(pi * std::cos(pi * x.x) * std::sin(pi * x.y), pi * std::sin(pi * x.x) * std::cos(pi * x.y));
    };
    d.v0 = [](Point2) { return 0.0; };
    return d;
}

/// Temporal profile psi of the separable estimator solution.
struct TemporalProfile {
    std::string label;
    std::function<double(double)> value;
    std::function<double(double)> first;
    std::function<double(double)> second;
};

inline TemporalProfile profile_cos4() {
    return {"cos4", [](double t) { return std::cos(4.0 * t); }, [](double t) { return -4.0 * std::sin(4.0 * t); },
            [](double t) { return -16.0 * std::cos(4.0 * t); }};
}

inline TemporalProfile profile_power(double alpha) {
    if (!(alpha > 0.0)) throw ConfigError("power profile needs alpha > 0");
    auto pw = [](double t, double e) { return t > 0.0 ? std::pow(t, e) : (e == 0.0 ? 1.0 : 0.0); };
    return {"t^" + std::to_string(alpha), [=](double t) { return pw(t, alpha); },
            [=](double t) { return alpha * pw(t, alpha - 1.0); },
            [=](double t) { return alpha * (alpha - 1.0) * pw(t, alpha - 2.0); }};
}

/// u = psi(t) (1 - x^2)(1 - y^2) on (-1,1)^2 x (0,1), c = 1, g_D = 0.
inline ProblemData estimator_poly(const TemporalProfile& psi) {
    ProblemData d;
    d.name = "estimator-poly";
    d.domain = {-1.0, 1.0, -1.0, 1.0};
    d.final_time = 1.0;
    d.constant_wavespeed = 1.0;
    auto bubble = [](Point2 x) { return (1.0 - x.x * x.x) * (1.0 - x.y * x.y); };
    auto lap_bubble = [](Point2 x) { return -2.0 * (1.0 - x.y * x.y) - 2.0 * (1.0 - x.x * x.x); };
    auto grad_bubble = [](Point2 x) {
        return Gradient(-2.0 * x.x * (1.0 - x.y * x.y), -2.0 * x.y * (1.0 - x.x * x.x));
    };
    d.exact_u = [=](Point2 x, double t) { return psi.value(t) * bubble(x); };
    d.exact_v = [=](Point2 x, double t) { return psi.first(t) * bubble(x); };
    d.exact_grad_u = [=](Point2 x, double t) { return Gradient(psi.value(t) * grad_bubble(x)); };
    d.source = [=](Point2 x, double t) { return psi.second(t) * bubble(x) - psi.value(t) * lap_bubble(x); };
    d.u0 = [=](Point2 x) { return psi.value(0.0) * bubble(x); };
    d.grad_u0 = [=](Point2 x) { return Gradient(psi.value(0.0) * grad_bubble(x)); };
    d.v0 = [=](Point2 x) { return psi.first(0.0) * bubble(x); };
    return d;
}

/// u = t x y on the unit square: f = 0, g_D = t x y, v = x y.
inline ProblemData linear_in_time() {
    ProblemData d;
    d.name = "linear-in-time";
    d.domain = {0.0, 1.0, 0.0, 1.0};
    d.final_time = 1.0;
    d.constant_wavespeed = 1.0;
    d.exact_u = [](Point2 x, double t) { return t * x.x * x.y; };
    d.exact_v = [](Point2 x, double) { return x.x * x.y; };
    d.exact_grad_u = [](Point2 x, double t) { return Gradient(t * x.y, t * x.x); };
    d.dirichlet = d.exact_u;
    d.dirichlet_dt = d.exact_v;
    d.u0 = [](Point2) { return 0.0; };
    d.grad_u0 = [](Point2) { return Gradient(0.0, 0.0); };
    d.v0 = [](Point2 x) { return x.x * x.y; };
    return d;
}

} // namespace presets

} // namespace wavest
