#pragma once

#include <cstddef>
#include <vector>

#include "gflame/error.hpp"

namespace gflame::detail {

/// Solves the periodic tridiagonal system
///   lower[j] x[j-1] + diag[j] x[j] + upper[j] x[j+1] = rhs[j]   (indices mod n)
/// by Thomas elimination with a Sherman-Morrison correction for the corners.
/// Requires a diagonally dominant matrix (no pivoting).
class CyclicTridiagonal {
public:
    explicit CyclicTridiagonal(std::size_t n) : n_(n), bb_(n), u_(n), z_(n), c_(n) {
        if (n < 3) throw Error(ErrorKind::InvalidArgument, "cyclic tridiagonal solve needs n >= 3");
    }

    void solve(const std::vector<double>& lower, const std::vector<double>& diag, const std::vector<double>& upper,
               const std::vector<double>& rhs, std::vector<double>& x) {
        const std::size_t n = n_;
        const double alpha = upper[n - 1];  // couples row n-1 to x[0]
        const double beta = lower[0];       // couples row 0 to x[n-1]
        const double gamma = -diag[0];
        bb_ = diag;
        bb_[0] = diag[0] - gamma;
        bb_[n - 1] = diag[n - 1] - alpha * beta / gamma;
        thomas(lower, bb_, upper, rhs, x);
        std::fill(u_.begin(), u_.end(), 0.0);
        u_[0] = gamma;
        u_[n - 1] = alpha;
        thomas(lower, bb_, upper, u_, z_);
        const double fact = (x[0] + beta * x[n - 1] / gamma) / (1.0 + z_[0] + beta * z_[n - 1] / gamma);
        for (std::size_t j = 0; j < n; ++j) x[j] -= fact * z_[j];
    }

private:
    void thomas(const std::vector<double>& a, const std::vector<double>& b, const std::vector<double>& c,
                const std::vector<double>& r, std::vector<double>& x) {
        const std::size_t n = n_;
        x.resize(n);
        double bet = b[0];
        x[0] = r[0] / bet;
        for (std::size_t j = 1; j < n; ++j) {
            c_[j] = c[j - 1] / bet;
            bet = b[j] - a[j] * c_[j];
            x[j] = (r[j] - a[j] * x[j - 1]) / bet;
        }
        for (std::size_t j = n - 1; j-- > 0;) x[j] -= c_[j + 1] * x[j + 1];
    }

    std::size_t n_;
    std::vector<double> bb_, u_, z_, c_;
};

}  // namespace gflame::detail
