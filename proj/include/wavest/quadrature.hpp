#pragma once

#include <cmath>
#include <numbers>
#include <vector>

#include "wavest/errors.hpp"

namespace wavest {

/// Quadrature nodes and weights on an interval.
struct QuadratureRule1D {
    std::vector<double> nodes;
    std::vector<double> weights;

    [[nodiscard]] std::size_t size() const { return nodes.size(); }
};

/// Legendre polynomial P_n(x) on [-1, 1] together with its derivative.
struct LegendreValue {
    double value;
    double derivative;
};

inline LegendreValue legendre_p(int n, double x) {
    if (n == 0) return {1.0, 0.0};
    double p0 = 1.0;
    double p1 = x;
    double d0 = 0.0;
    double d1 = 1.0;
    for (int k = 2; k <= n; ++k) {
        const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        // P_k' = P_{k-2}' + (2k-1) P_{k-1}
        const double d2 = d0 + (2.0 * k - 1.0) * p1;
        p0 = p1;
        p1 = p2;
        d0 = d1;
        d1 = d2;
    }
    return {p1, d1};
}

/// Gauss-Legendre rule with npts points on [-1, 1].
inline QuadratureRule1D gauss_legendre(int npts) {
    if (npts < 1 || npts > 64) {
        throw InvalidArgument("gauss_legendre: number of points out of range");
    }
    QuadratureRule1D rule;
    rule.nodes.resize(npts);
    rule.weights.resize(npts);
    for (int i = 0; i < (npts + 1) / 2; ++i) {
        double x = std::cos(std::numbers::pi * (i + 0.75) / (npts + 0.5));
        for (int it = 0; it < 100; ++it) {
            const auto [p, dp] = legendre_p(npts, x);
            const double dx = p / dp;
            x -= dx;
            if (std::abs(dx) < 1e-16) break;
        }
        const double dp = legendre_p(npts, x).derivative;
        const double w = 2.0 / ((1.0 - x * x) * dp * dp);
        rule.nodes[i] = -x;
        rule.nodes[npts - 1 - i] = x;
        rule.weights[i] = w;
        rule.weights[npts - 1 - i] = w;
    }
    if (npts % 2 == 1) rule.nodes[npts / 2] = 0.0;
    return rule;
}

/// Quadrature on the reference triangle {(xi, eta): xi, eta >= 0, xi + eta <= 1}.
struct TriangleRule {
    std::vector<double> xi;
    std::vector<double> eta;
    std::vector<double> weights; // sum to 1/2

    [[nodiscard]] std::size_t size() const { return weights.size(); }
};

/// Collapsed (Duffy) tensor Gauss rule, exact for polynomials of total degree <= degree.
inline TriangleRule triangle_rule(int degree) {
    // after collapsing, the eta direction carries one extra power from the Jacobian
    const int n = std::max(1, (degree + 2 + 1) / 2);
    const auto g = gauss_legendre(n);
    TriangleRule rule;
    rule.xi.reserve(n * n);
    rule.eta.reserve(n * n);
    rule.weights.reserve(n * n);
    for (int a = 0; a < n; ++a) {
        const double s = 0.5 * (g.nodes[a] + 1.0);
        for (int b = 0; b < n; ++b) {
            const double r = 0.5 * (g.nodes[b] + 1.0);
            rule.xi.push_back(s * (1.0 - r));
            rule.eta.push_back(r);
            rule.weights.push_back(0.25 * g.weights[a] * g.weights[b] * (1.0 - r));
        }
    }
    return rule;
}

} // namespace wavest
