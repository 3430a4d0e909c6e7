#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <type_traits>
#include <vector>

#include "gflame/error.hpp"

namespace gflame {

struct Vec2 {
    double x = 0.0;
    double y = 0.0;

    friend Vec2 operator+(Vec2 a, Vec2 b) { return {a.x + b.x, a.y + b.y}; }
    friend Vec2 operator-(Vec2 a, Vec2 b) { return {a.x - b.x, a.y - b.y}; }
    friend Vec2 operator*(double s, Vec2 a) { return {s * a.x, s * a.y}; }
    friend bool operator==(Vec2, Vec2) = default;
};

inline double dot(Vec2 a, Vec2 b) { return a.x * b.x + a.y * b.y; }
inline double norm(Vec2 a) { return std::hypot(a.x, a.y); }

/// Uniform node-centred periodic grid.
///
/// The 1D torus is [0,1) and the 2D torus is [-1/2,1/2)^2, both with n nodes
/// per axis and spacing h = 1/n. 2D storage is row-major with the first
/// coordinate x1 as the slow index.
class PeriodicGrid {
public:
    static constexpr int min_nodes = 8;

    static PeriodicGrid line(int n);
    static PeriodicGrid square(int n);

    int dims() const noexcept { return dims_; }
    int n() const noexcept { return n_; }
    double h() const noexcept { return h_; }
    std::size_t size() const noexcept {
        return dims_ == 1 ? static_cast<std::size_t>(n_)
                          : static_cast<std::size_t>(n_) * static_cast<std::size_t>(n_);
    }
    double origin() const noexcept { return dims_ == 1 ? 0.0 : -0.5; }
    double coord(int i) const noexcept { return origin() + h_ * i; }
    double cell_volume() const noexcept { return dims_ == 1 ? h_ : h_ * h_; }

    int wrap(int i) const noexcept {
        int r = i % n_;
        return r < 0 ? r + n_ : r;
    }
    std::size_t index(int i, int j) const noexcept {
        return static_cast<std::size_t>(wrap(i)) * static_cast<std::size_t>(n_) +
               static_cast<std::size_t>(wrap(j));
    }
    Vec2 point(int i, int j) const noexcept { return {coord(i), coord(j)}; }

    friend bool operator==(const PeriodicGrid&, const PeriodicGrid&) = default;

private:
    PeriodicGrid(int dims, int n);

    int dims_;
    int n_;
    double h_;
};

/// Grid-sampled scalar with periodic topology; one value per node.
class ScalarField {
public:
    explicit ScalarField(const PeriodicGrid& grid, double value = 0.0);
    ScalarField(const PeriodicGrid& grid, std::vector<double> values);

    /// Samples f(x) (1D) or f(x1, x2) (2D) at every node.
    template <class F>
    static ScalarField sample(const PeriodicGrid& grid, F&& f) {
        ScalarField out(grid);
        const int n = grid.n();
        if constexpr (std::is_invocable_v<F, double, double>) {
            if (grid.dims() != 2) throw Error(ErrorKind::InvalidArgument, "two-argument sampler needs a 2D grid");
            for (int i = 0; i < n; ++i)
                for (int j = 0; j < n; ++j) out.values_[grid.index(i, j)] = f(grid.coord(i), grid.coord(j));
        } else {
            if (grid.dims() != 1) throw Error(ErrorKind::InvalidArgument, "one-argument sampler needs a 1D grid");
            for (int i = 0; i < n; ++i) out.values_[i] = f(grid.coord(i));
        }
        return out;
    }

    const PeriodicGrid& grid() const noexcept { return grid_; }
    std::size_t size() const noexcept { return values_.size(); }

    double& operator[](std::size_t k) { return values_[k]; }
    double operator[](std::size_t k) const { return values_[k]; }
    double& operator()(int i, int j) { return values_[grid_.index(i, j)]; }
    double operator()(int i, int j) const { return values_[grid_.index(i, j)]; }
    double& operator()(int i) { return values_[grid_.wrap(i)]; }
    double operator()(int i) const { return values_[grid_.wrap(i)]; }

    std::span<double> values() noexcept { return values_; }
    std::span<const double> values() const noexcept { return values_; }

    double mean() const;
    double min() const;
    double max() const;
    double max_abs() const;
    bool all_finite() const;

    /// Periodic index shift: out(i, j) = this(i + di, j + dj).
    ScalarField shifted(int di, int dj = 0) const;

    ScalarField& operator+=(double c);
    ScalarField& operator*=(double c);

private:
    PeriodicGrid grid_;
    std::vector<double> values_;
};

/// Boolean node selection on a grid.
class RegionMask {
public:
    explicit RegionMask(const PeriodicGrid& grid, bool fill = false);
    static RegionMask full(const PeriodicGrid& grid) { return RegionMask(grid, true); }

    const PeriodicGrid& grid() const noexcept { return grid_; }
    bool operator[](std::size_t k) const { return flags_[k] != 0; }
    void set(std::size_t k, bool on) { flags_[k] = on ? 1 : 0; }

    std::size_t count() const;
    double measure() const { return static_cast<double>(count()) * grid_.cell_volume(); }
    bool empty() const { return count() == 0; }

    RegionMask operator&(const RegionMask& other) const;
    RegionMask operator|(const RegionMask& other) const;
    RegionMask operator!() const;

private:
    PeriodicGrid grid_;
    std::vector<std::uint8_t> flags_;
};

/// Fixed-order pairwise summation; the result never depends on threading.
double pairwise_sum(std::span<const double> values);

/// Midpoint quadrature over the whole torus.
double integrate(const ScalarField& f);
/// Midpoint quadrature restricted to masked nodes.
double integrate(const ScalarField& f, const RegionMask& mask);

// Node dumps. CSV: a "dims,n_per_axis" header line, the two values, then one
// line per x1 row. Binary: int32 dims, int32 n, then row-major doubles.
void write_field_csv(const ScalarField& f, std::ostream& out);
void write_field_binary(const ScalarField& f, std::ostream& out);
ScalarField read_field_binary(std::istream& in);

}  // namespace gflame
