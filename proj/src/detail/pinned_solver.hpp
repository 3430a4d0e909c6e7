#pragma once

#include <Eigen/SparseCore>
#include <Eigen/SparseLU>

#include <cmath>
#include <string>
#include <vector>

#include "gflame/error.hpp"

namespace gflame::detail {

using Triplet = Eigen::Triplet<double, int>;
using SparseMatrix = Eigen::SparseMatrix<double, Eigen::ColMajor, int>;

/// Direct solver for a periodic operator whose kernel is the constants.
/// Node 0 is pinned to zero (row and column 0 dropped); the factorization is
/// computed once and reused for every right-hand side. Rounded column sums are
/// not exactly zero, so the dropped row collects a defect that grows with the
/// grid size; a precomputed correction spreads it into a uniform residual.
class PinnedSolver {
public:
    /// `triplets` describe the full N x N operator.
    PinnedSolver(int size, const std::vector<Triplet>& triplets) : size_(size) {
        std::vector<Triplet> reduced;
        reduced.reserve(triplets.size());
        full_.resize(size, size);
        full_.setFromTriplets(triplets.begin(), triplets.end());
        for (const auto& t : triplets)
            if (t.row() > 0 && t.col() > 0) reduced.emplace_back(t.row() - 1, t.col() - 1, t.value());
        reduced_.resize(size - 1, size - 1);
        reduced_.setFromTriplets(reduced.begin(), reduced.end());
        reduced_.makeCompressed();
        lu_.analyzePattern(reduced_);
        lu_.factorize(reduced_);
        if (lu_.info() != Eigen::Success)
            throw Error(ErrorKind::SingularProblem, "sparse LU factorization failed: " + lu_.lastErrorMessage());

        // z solves rows 1.. of L z = -1/N; q is row 0 of L z.
        const Eigen::VectorXd minus_mean = Eigen::VectorXd::Constant(size - 1, -1.0 / size);
        spread_.setZero(size);
        spread_.tail(size - 1) = lu_.solve(minus_mean);
        spread_row0_ = (full_ * spread_)(0) + 1.0 / size;
    }

    /// Solves L x = b with x[0] = 0, refining until the relative residual of
    /// the full system is below tol. Returns that relative residual.
    double solve(const Eigen::VectorXd& b, Eigen::VectorXd& x, double tol, int max_refine = 4) const {
        Eigen::VectorXd rb = b.tail(size_ - 1);
        Eigen::VectorXd y = lu_.solve(rb);
        const double bnorm = std::max(b.norm(), 1e-300);
        x.setZero(size_);
        x.tail(size_ - 1) = y;
        double rel = (b - full_ * x).norm() / bnorm;
        for (int it = 0; it < max_refine && rel > tol; ++it) {
            Eigen::VectorXd r = rb - reduced_ * y;
            y += lu_.solve(r);
            x.tail(size_ - 1) = y;
            rel = (b - full_ * x).norm() / bnorm;
        }
        if (spread_row0_ != 0.0) {
            const double r0 = b[0] - full_.row(0).dot(x);
            x += (r0 / spread_row0_) * spread_;
            rel = (b - full_ * x).norm() / bnorm;
        }
        if (!std::isfinite(rel)) throw Error(ErrorKind::NonConvergence, "linear solve produced non-finite values");
        return rel;
    }

    const SparseMatrix& matrix() const noexcept { return full_; }

private:
    int size_;
    SparseMatrix full_;
    SparseMatrix reduced_;
    Eigen::VectorXd spread_;
    double spread_row0_ = 0.0;
    Eigen::SparseLU<SparseMatrix, Eigen::COLAMDOrdering<int>> lu_;
};

}  // namespace gflame::detail
