#pragma once

#include <Eigen/Sparse>
#include <Eigen/SparseCholesky>
#include <Eigen/SparseLU>

#include <string>
#include <vector>

#include "wavest/errors.hpp"

namespace wavest {

/// Compressed-row sparse matrix with sorted column indices.
using CompressedMatrix = Eigen::SparseMatrix<double, Eigen::RowMajor>;
using Vector = Eigen::VectorXd;
using Triplets = std::vector<Eigen::Triplet<double>>;

inline double relative_residual(const CompressedMatrix& a, const Vector& x, const Vector& b) {
    const double nb = b.norm();
    const double nr = (a * x - b).norm();
    return nb > 0.0 ? nr / nb : nr;
}

namespace detail {

// A few steps of iterative refinement on top of a direct factorization.
template <class Factorization>
Vector refined_solve(const Factorization& fact, const CompressedMatrix& a, const Vector& b, double tol,
                     const char* who) {
    Vector x = fact.solve(b);
    double res = relative_residual(a, x, b);
    for (int it = 0; it < 3 && res > tol; ++it) {
        x += fact.solve(b - a * x);
        res = relative_residual(a, x, b);
    }
    if (!(res <= tol)) throw SolverFailure(std::string(who) + ": residual contract not met", res);
    return x;
}

} // namespace detail

/// Reusable Cholesky (LDL^T) factorization of a symmetric positive definite matrix.
class SpdSolver {
  public:
    explicit SpdSolver(CompressedMatrix a, double tol = 1e-12) : a_(std::move(a)), tol_(tol) {
        Eigen::SparseMatrix<double> col = a_;
        fact_.compute(col);
        if (fact_.info() != Eigen::Success) throw SolverFailure("solve_spd: factorization failed", 1.0);
        if ((fact_.vectorD().array() <= 0.0).any()) {
            throw SolverFailure("solve_spd: matrix is not positive definite", 1.0);
        }
    }

    [[nodiscard]] Vector solve(const Vector& b) const {
        if (b.size() == 0) return b;
        return detail::refined_solve(fact_, a_, b, tol_, "solve_spd");
    }

  private:
    CompressedMatrix a_;
    double tol_;
    Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> fact_;
};

/// Reusable sparse LU factorization of a general nonsingular matrix.
class GeneralSolver {
  public:
    explicit GeneralSolver(CompressedMatrix a, double tol = 1e-11) : a_(std::move(a)), tol_(tol) {
        if (a_.rows() != a_.cols()) throw InvalidArgument("solve_general: matrix must be square");
        Eigen::SparseMatrix<double> col = a_;
        col.makeCompressed();
        fact_.analyzePattern(col);
        fact_.factorize(col);
        if (fact_.info() != Eigen::Success) {
            throw SolverFailure("solve_general: singular matrix (" + fact_.lastErrorMessage() + ")", 1.0);
        }
    }

    [[nodiscard]] Vector solve(const Vector& b) const {
        if (b.size() == 0) return b;
        return detail::refined_solve(fact_, a_, b, tol_, "solve_general");
    }

  private:
    CompressedMatrix a_;
    double tol_;
    Eigen::SparseLU<Eigen::SparseMatrix<double>, Eigen::COLAMDOrdering<int>> fact_;
};

/// ||Ax - b|| <= tol ||b|| for symmetric positive definite A.
inline Vector solve_spd(const CompressedMatrix& a, const Vector& b, double tol = 1e-12) {
    return SpdSolver(a, tol).solve(b);
}

/// ||Ax - b|| <= tol ||b|| for square nonsingular A.
inline Vector solve_general(const CompressedMatrix& a, const Vector& b, double tol = 1e-11) {
    return GeneralSolver(a, tol).solve(b);
}

/// Submatrix A(rows, cols) given index lists.
inline CompressedMatrix extract_block(const CompressedMatrix& a, const std::vector<int>& rows,
                                      const std::vector<int>& cols) {
    std::vector<int> col_pos(a.cols(), -1);
    for (std::size_t k = 0; k < cols.size(); ++k) col_pos[cols[k]] = static_cast<int>(k);
    Triplets trips;
    for (std::size_t r = 0; r < rows.size(); ++r) {
        for (CompressedMatrix::InnerIterator it(a, rows[r]); it; ++it) {
            const int c = col_pos[it.col()];
            if (c >= 0) trips.emplace_back(static_cast<int>(r), c, it.value());
        }
    }
    CompressedMatrix block(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(cols.size()));
    block.setFromTriplets(trips.begin(), trips.end());
    return block;
}

} // namespace wavest
