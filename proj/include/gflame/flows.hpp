#pragma once

#include <array>
#include <optional>
#include <string>
#include <vector>

#include "gflame/grid.hpp"
#include "gflame/kernels.hpp"

namespace gflame {

enum class FlowKind { zero, cellular, shear };

/// raw: V = A grad-perp H. scaled: V = (A / 2 pi) grad-perp H, the form used
/// by the tabulated cellular runs.
enum class Normalization { raw, scaled };

/// Periodic shear profile on [0,1) stored as a truncated Fourier series
///   v(y) = c0 + sum_k a_k cos(2 pi k y) + b_k sin(2 pi k y),  k = 1, 2, ...
/// which gives exact derivatives and an exact mean.
class ShearProfile {
public:
    static ShearProfile cosine();
    static ShearProfile cosine_minus_one();
    /// v = -c sin^2(2 pi y) (1 + eps cos(2 pi y)); maxima 0 at y = 0 and 1/2.
    static ShearProfile two_bump(double c, double eps);
    static ShearProfile fourier(double c0, std::vector<double> cos_coeffs, std::vector<double> sin_coeffs,
                                std::string name = "custom");
    /// v = 0. Bypasses the non-constant check; only meant for trivial cases.
    static ShearProfile zero();

    const std::string& name() const noexcept { return name_; }
    double v(double y) const;
    double dv(double y) const;
    double d2v(double y) const;

    double mean() const noexcept { return c0_; }
    bool is_constant() const;

    double max() const { return max_value_; }
    double min() const { return min_value_; }
    /// Global maximizers in [0,1), each refined by Newton on v'.
    const std::vector<double>& maximizers() const { return maximizers_; }
    /// |v''| at each maximizer, same order as maximizers().
    std::vector<double> curvature_at_maxima() const;

private:
    ShearProfile(std::string name, double c0, std::vector<double> a, std::vector<double> b);
    void locate_extrema();

    std::string name_;
    double c0_;
    std::vector<double> a_;
    std::vector<double> b_;
    double max_value_ = 0.0;
    double min_value_ = 0.0;
    std::vector<double> maximizers_;
};

/// Throws DegenerateProfile for constant profiles.
ShearProfile make_shear_profile(const std::string& name, double c = 1.0, double eps = 0.3);

/// Prescribed incompressible velocity on the 2D torus.
class FlowField {
public:
    static FlowField zero();
    static FlowField cellular(double amplitude, Normalization norm = Normalization::scaled);
    static FlowField shear(double amplitude, ShearProfile profile);

    FlowKind kind() const noexcept { return kind_; }
    double amplitude() const noexcept { return amplitude_; }
    Normalization normalization() const noexcept { return norm_; }
    const std::optional<ShearProfile>& profile() const noexcept { return profile_; }

    FlowField with_amplitude(double amplitude) const;

    /// Amplitude-scaled velocity A V(x).
    Vec2 velocity(Vec2 x) const;
    /// Velocity at unit amplitude.
    Vec2 unit_velocity(Vec2 x) const;
    /// Cellular stream function H = sin(2 pi x1) sin(2 pi x2), unscaled. Zero otherwise.
    double stream(Vec2 x) const;
    /// Factor s with velocity = s grad-perp H for cellular flows.
    double stream_scale() const;

    VelocitySamples sample(const PeriodicGrid& grid) const;
    VelocitySamples sample_unit(const PeriodicGrid& grid) const;

    /// Normal velocity on the face between nodes (i,j) and (i+1,j), computed
    /// from stream-function corner differences so the face field is exactly
    /// discretely divergence-free.
    double face_velocity_x(const PeriodicGrid& grid, int i, int j) const;
    /// Normal velocity on the face between nodes (i,j) and (i,j+1).
    double face_velocity_y(const PeriodicGrid& grid, int i, int j) const;

private:
    FlowField(FlowKind kind, double amplitude, Normalization norm, std::optional<ShearProfile> profile);

    FlowKind kind_;
    double amplitude_;
    Normalization norm_;
    std::optional<ShearProfile> profile_;
};

/// Cellular velocity at x for intensity A.
Vec2 eval_cellular(Vec2 x, double amplitude, Normalization norm);

inline double cellular_stream(Vec2 x) {
    constexpr double two_pi = 6.283185307179586476925286766559;
    return std::sin(two_pi * x.x) * std::sin(two_pi * x.y);
}

struct BandMask {
    RegionMask mask;
    bool empty;
};

/// Nodes with lo <= |H(x)| <= hi for the cellular stream function.
BandMask band_mask(const PeriodicGrid& grid, double lo, double hi);

/// Four open quarter cells bounded by the separatrix {H = 0}:
/// C1 = (0,1/2)^2, C2 = (-1/2,0)x(0,1/2), C3 = (-1/2,0)^2, C4 = (0,1/2)x(-1/2,0).
struct QuarterCellDecomposition {
    std::array<RegionMask, 4> cells;
    RegionMask separatrix;

    static QuarterCellDecomposition build(const PeriodicGrid& grid);
};

}  // namespace gflame
