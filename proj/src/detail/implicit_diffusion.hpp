#pragma once

#include <fftw3.h>

#include <cmath>
#include <mutex>
#include <numbers>
#include <vector>

#include "gflame/grid.hpp"

namespace gflame::detail {

/// FFTW's planner is not reentrant; every plan create/destroy takes this lock.
inline std::mutex& fftw_planner_mutex() {
    static std::mutex m;
    return m;
}

/// Exact backward-Euler solve of (I - dt d Lap_h) u = f for the 5-point
/// periodic Laplacian, which is diagonal in the DFT basis.
class ImplicitDiffusion {
public:
    ImplicitDiffusion(const PeriodicGrid& grid, double d, double dt) : n_(grid.n()), nc_(grid.n() / 2 + 1) {
        real_ = fftw_alloc_real(static_cast<std::size_t>(n_) * n_);
        spec_ = fftw_alloc_complex(static_cast<std::size_t>(n_) * nc_);
        {
            std::lock_guard lock(fftw_planner_mutex());
            forward_ = fftw_plan_dft_r2c_2d(n_, n_, real_, spec_, FFTW_ESTIMATE);
            backward_ = fftw_plan_dft_c2r_2d(n_, n_, spec_, real_, FFTW_ESTIMATE);
        }
        const double h = grid.h();
        const double norm = 1.0 / (static_cast<double>(n_) * n_);
        factor_.resize(static_cast<std::size_t>(n_) * nc_);
        for (int k = 0; k < n_; ++k) {
            const double sk = std::sin(std::numbers::pi * k / n_);
            for (int l = 0; l < nc_; ++l) {
                const double sl = std::sin(std::numbers::pi * l / n_);
                const double lambda = -4.0 / (h * h) * (sk * sk + sl * sl);
                factor_[static_cast<std::size_t>(k) * nc_ + l] = norm / (1.0 - dt * d * lambda);
            }
        }
    }

    ImplicitDiffusion(const ImplicitDiffusion&) = delete;
    ImplicitDiffusion& operator=(const ImplicitDiffusion&) = delete;

    ~ImplicitDiffusion() {
        {
            std::lock_guard lock(fftw_planner_mutex());
            fftw_destroy_plan(forward_);
            fftw_destroy_plan(backward_);
        }
        fftw_free(real_);
        fftw_free(spec_);
    }

    /// out = (I - dt d Lap_h)^{-1} in; in and out may alias.
    void apply(const double* in, double* out) {
        const std::size_t total = static_cast<std::size_t>(n_) * n_;
        for (std::size_t k = 0; k < total; ++k) real_[k] = in[k];
        fftw_execute(forward_);
        for (std::size_t k = 0; k < factor_.size(); ++k) {
            spec_[k][0] *= factor_[k];
            spec_[k][1] *= factor_[k];
        }
        fftw_execute(backward_);
        for (std::size_t k = 0; k < total; ++k) out[k] = real_[k];
    }

private:
    int n_;
    int nc_;
    double* real_;
    fftw_complex* spec_;
    fftw_plan forward_;
    fftw_plan backward_;
    std::vector<double> factor_;
};

}  // namespace gflame::detail
