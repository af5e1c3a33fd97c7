#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <functional>
#include <vector>

#include "wavest/errors.hpp"
#include "wavest/quadrature.hpp"

namespace wavest {

/// Closed time interval [begin, end].
struct Interval {
    double begin = 0.0;
    double end = 1.0;

    [[nodiscard]] double length() const { return end - begin; }
    /// Affine map to the reference coordinate x in [-1, 1].
    [[nodiscard]] double to_reference(double t) const { return 2.0 * (t - begin) / length() - 1.0; }
    [[nodiscard]] double from_reference(double x) const { return begin + 0.5 * (x + 1.0) * length(); }
};

/// Partition 0 = t_0 < t_1 < ... < t_N = T.
class TimePartition {
  public:
    explicit TimePartition(std::vector<double> nodes) : nodes_(std::move(nodes)) {
        if (nodes_.size() < 2) throw InvalidArgument("TimePartition: need at least one slab");
        if (nodes_.front() != 0.0) throw InvalidArgument("TimePartition: t_0 must be 0");
        for (std::size_t n = 1; n < nodes_.size(); ++n) {
            if (!(nodes_[n] > nodes_[n - 1])) {
                throw InvalidArgument("TimePartition: nodes must be strictly increasing");
            }
        }
    }

    static TimePartition uniform(double final_time, int num_slabs) {
        if (num_slabs < 1 || !(final_time > 0.0)) {
            throw InvalidArgument("TimePartition::uniform: invalid final time or slab count");
        }
        std::vector<double> nodes(num_slabs + 1);
        for (int n = 0; n <= num_slabs; ++n) nodes[n] = final_time * n / num_slabs;
        nodes.back() = final_time;
        return TimePartition(std::move(nodes));
    }

    [[nodiscard]] int num_slabs() const { return static_cast<int>(nodes_.size()) - 1; }
    [[nodiscard]] const std::vector<double>& nodes() const { return nodes_; }
    [[nodiscard]] double node(int n) const { return nodes_.at(n); }
    [[nodiscard]] double final_time() const { return nodes_.back(); }
    /// Slab I_n = [t_{n-1}, t_n] for n = 1..N.
    [[nodiscard]] Interval slab(int n) const { return {nodes_.at(n - 1), nodes_.at(n)}; }
    [[nodiscard]] double tau(int n) const { return slab(n).length(); }
    [[nodiscard]] double max_tau() const {
        double m = 0.0;
        for (int n = 1; n <= num_slabs(); ++n) m = std::max(m, tau(n));
        return m;
    }
    /// Slab index n with t in [t_{n-1}, t_n]; interior nodes belong to the left slab.
    [[nodiscard]] int find_slab(double t) const {
        auto it = std::lower_bound(nodes_.begin() + 1, nodes_.end(), t);
        if (it == nodes_.end()) return num_slabs();
        return static_cast<int>(it - nodes_.begin());
    }

  private:
    std::vector<double> nodes_;
};

/// Shifted Legendre polynomial L_s on a slab, normalized so that L_s(end) = 1.
inline double legendre_eval(int s, const Interval& slab, double t, int derivative_order = 0) {
    const double tol = 1e-13 * std::max(1.0, std::abs(slab.end));
    if (t < slab.begin - tol || t > slab.end + tol) {
        throw DomainError("legendre_eval: time outside slab");
    }
    const auto v = legendre_p(s, std::clamp(slab.to_reference(t), -1.0, 1.0));
    switch (derivative_order) {
        case 0: return v.value;
        case 1: return 2.0 / slab.length() * v.derivative;
        default: throw InvalidArgument("legendre_eval: derivative order must be 0 or 1");
    }
}

/// Gauss-Legendre nodes and weights mapped onto a slab.
inline QuadratureRule1D gauss_rule(int npts, const Interval& slab) {
    if (npts < 1 || npts > 30) throw InvalidArgument("gauss_rule: npts must be in [1, 30]");
    auto rule = gauss_legendre(npts);
    for (std::size_t k = 0; k < rule.size(); ++k) {
        rule.nodes[k] = slab.from_reference(rule.nodes[k]);
        rule.weights[k] *= 0.5 * slab.length();
    }
    return rule;
}

/// Evaluate sum_k coeffs[k] L_k(t) on a slab.
inline double legendre_series(const std::vector<double>& coeffs, const Interval& slab, double t) {
    const double x = std::clamp(slab.to_reference(t), -1.0, 1.0);
    double sum = 0.0;
    double p0 = 1.0;
    double p1 = x;
    for (std::size_t k = 0; k < coeffs.size(); ++k) {
        double pk;
        if (k == 0) {
            pk = 1.0;
        } else if (k == 1) {
            pk = x;
        } else {
            pk = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / static_cast<double>(k);
            p0 = p1;
            p1 = pk;
        }
        sum += coeffs[k] * pk;
    }
    return sum;
}

/// Slabwise L2 projection onto P_r: coefficient k is (2k+1)/tau * int f L_k.
inline std::vector<double> l2_project_time(int r, const std::function<double(double)>& f,
                                           const Interval& slab, int npts = 0) {
    if (r < 0) throw InvalidArgument("l2_project_time: negative degree");
    if (npts == 0) npts = std::min(30, std::max(r + 6, 12));
    const auto rule = gauss_rule(npts, slab);
    std::vector<double> coeffs(r + 1, 0.0);
    for (std::size_t g = 0; g < rule.size(); ++g) {
        const double fv = f(rule.nodes[g]);
        const double x = slab.to_reference(rule.nodes[g]);
        for (int k = 0; k <= r; ++k) {
            coeffs[k] += rule.weights[g] * fv * legendre_p(k, x).value;
        }
    }
    for (int k = 0; k <= r; ++k) coeffs[k] *= (2.0 * k + 1.0) / slab.length();
    return coeffs;
}

/// Piecewise polynomial in time stored as Legendre coefficients per slab.
struct PiecewisePolynomial {
    TimePartition partition;
    std::vector<std::vector<double>> coeffs; // coeffs[n-1] for slab n

    [[nodiscard]] double on_slab(int n, double t) const {
        return legendre_series(coeffs.at(n - 1), partition.slab(n), t);
    }
    [[nodiscard]] double operator()(double t) const { return on_slab(partition.find_slab(t), t); }
};

/// Endpoint-exact projection onto continuous piecewise P_q.
///
/// On each slab the result is Pi_{q-2} f + alpha L_{q-1} + beta L_q, with
/// alpha, beta fixed by interpolation of f at both slab endpoints.
inline PiecewisePolynomial ptau_project(int q, const std::function<double(double)>& f,
                                        const TimePartition& partition, int npts = 0) {
    if (q < 1) throw InvalidArgument("ptau_project: q must be >= 1");
    if (npts == 0) npts = std::max(q + 3, 6);
    PiecewisePolynomial result{partition, {}};
    result.coeffs.reserve(partition.num_slabs());
    for (int n = 1; n <= partition.num_slabs(); ++n) {
        const Interval slab = partition.slab(n);
        std::vector<double> c(q + 1, 0.0);
        if (q >= 2) {
            const auto low = l2_project_time(q - 2, f, slab, npts);
            std::copy(low.begin(), low.end(), c.begin());
        }
        // defects of f - Pi_{q-2} f at the endpoints; L_s(begin) = (-1)^s, L_s(end) = 1
        double low_left = 0.0;
        double low_right = 0.0;
        for (int s = 0; s <= q - 2; ++s) {
            low_left += c[s] * ((s % 2 == 0) ? 1.0 : -1.0);
            low_right += c[s];
        }
        const double delta_left = f(slab.begin) - low_left;
        const double delta_right = f(slab.end) - low_right;
        const double sign_q = (q % 2 == 0) ? 1.0 : -1.0;
        c[q - 1] = (sign_q * delta_right - delta_left) / (2.0 * sign_q);
        c[q] = (sign_q * delta_right + delta_left) / (2.0 * sign_q);
        result.coeffs.push_back(std::move(c));
    }
    return result;
}

// ---------------------------------------------------------------------------
// Slab trial basis: sigma_0 = 1, sigma_j(t) = (1/tau) int_{t_{n-1}}^t L_{j-1} ds.
// sigma_j vanishes at the left endpoint for j >= 1 and sigma_j(t_n) = delta_{j1}.

/// Trial basis function sigma_j at reference coordinate x in [-1, 1].
inline double sigma_reference(int j, double x) {
    if (j == 0) return 1.0;
    if (j == 1) return 0.5 * (x + 1.0);
    return 0.5 * (legendre_p(j, x).value - legendre_p(j - 2, x).value) / (2.0 * j - 1.0);
}

/// Trial basis function sigma_j on a slab, or its first time derivative.
inline double sigma_eval(int j, const Interval& slab, double t, int derivative_order = 0) {
    const double x = std::clamp(slab.to_reference(t), -1.0, 1.0);
    if (derivative_order == 0) return sigma_reference(j, x);
    if (j == 0) return 0.0;
    return legendre_p(j - 1, x).value / slab.length();
}

/// Column j holds the Legendre coefficients of sigma_j (degrees 0..q).
inline Eigen::MatrixXd sigma_to_legendre(int q) {
    Eigen::MatrixXd c = Eigen::MatrixXd::Zero(q + 1, q + 1);
    c(0, 0) = 1.0;
    if (q >= 1) {
        c(0, 1) = 0.5;
        c(1, 1) = 0.5;
    }
    for (int j = 2; j <= q; ++j) {
        c(j, j) = 0.5 / (2.0 * j - 1.0);
        c(j - 2, j) = -0.5 / (2.0 * j - 1.0);
    }
    return c;
}

/// Convert Legendre coefficients of a slab polynomial to trial-basis coefficients.
inline std::vector<double> legendre_to_sigma(const std::vector<double>& legendre) {
    const int q = static_cast<int>(legendre.size()) - 1;
    std::vector<double> sigma(q + 1, 0.0);
    for (int s = 0; s <= q; ++s) sigma[0] += legendre[s] * ((s % 2 == 0) ? 1.0 : -1.0);
    // g' = sum_k a_k L_k with a_k = (2/tau)(2k+1) sum_{s>k, s-k odd} b_s; sigma_{k+1} weight is tau a_k
    for (int k = 0; k < q; ++k) {
        double acc = 0.0;
        for (int s = k + 1; s <= q; s += 2) acc += legendre[s];
        sigma[k + 1] = 2.0 * (2.0 * k + 1.0) * acc;
    }
    return sigma;
}

/// Values of sigma_j at q+1 uniformly spaced nodes (including both endpoints);
/// its inverse maps nodal values to trial-basis coefficients.
inline Eigen::MatrixXd sigma_uniform_vandermonde(int q) {
    Eigen::MatrixXd v(q + 1, q + 1);
    for (int a = 0; a <= q; ++a) {
        const double x = -1.0 + 2.0 * a / q;
        for (int j = 0; j <= q; ++j) v(a, j) = sigma_reference(j, x);
    }
    return v;
}

/// Temporal coupling matrices of one slab:
/// N(i, j) = int sigma_j L_i dt and D(i, j) = int sigma_j' L_i dt, i < q, j <= q.
struct SlabTemporalMatrices {
    Eigen::MatrixXd N;
    Eigen::MatrixXd D;
};

inline SlabTemporalMatrices slab_temporal_matrices(int q, const Interval& slab) {
    if (q < 1) throw InvalidArgument("slab_temporal_matrices: q must be >= 1");
    const auto rule = gauss_rule(q + 1, slab);
    SlabTemporalMatrices m{Eigen::MatrixXd::Zero(q, q + 1), Eigen::MatrixXd::Zero(q, q + 1)};
    for (std::size_t g = 0; g < rule.size(); ++g) {
        const double t = rule.nodes[g];
        const double w = rule.weights[g];
        for (int i = 0; i < q; ++i) {
            const double li = legendre_eval(i, slab, t);
            for (int j = 0; j <= q; ++j) {
                m.N(i, j) += w * sigma_eval(j, slab, t) * li;
                m.D(i, j) += w * sigma_eval(j, slab, t, 1) * li;
            }
        }
    }
    return m;
}

/// int_{I_n} |L_q(t)| dt, exact (splits the slab at the roots of L_q).
inline double legendre_abs_integral(int q, const Interval& slab) {
    if (q == 0) return slab.length();
    const auto roots = gauss_legendre(q).nodes;
    std::vector<double> breaks{-1.0};
    breaks.insert(breaks.end(), roots.begin(), roots.end());
    breaks.push_back(1.0);
    const auto rule = gauss_legendre(q / 2 + 1);
    double total = 0.0;
    for (std::size_t k = 0; k + 1 < breaks.size(); ++k) {
        const double a = breaks[k];
        const double b = breaks[k + 1];
        double part = 0.0;
        for (std::size_t g = 0; g < rule.size(); ++g) {
            const double x = 0.5 * (a + b) + 0.5 * (b - a) * rule.nodes[g];
            part += rule.weights[g] * legendre_p(q, x).value;
        }
        total += std::abs(0.5 * (b - a) * part);
    }
    return 0.5 * slab.length() * total;
}

} // namespace wavest
