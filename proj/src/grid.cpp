#include "gflame/grid.hpp"

#include <algorithm>
#include <istream>
#include <limits>
#include <ostream>

#include "gflame/error.hpp"

namespace gflame {

std::string_view to_string(ErrorKind kind) noexcept {
    switch (kind) {
    case ErrorKind::InvalidArgument: return "InvalidArgument";
    case ErrorKind::NonConvergence: return "NonConvergence";
    case ErrorKind::CFLViolation: return "CFLViolation";
    case ErrorKind::DiffusionTooSmall: return "DiffusionTooSmall";
    case ErrorKind::InvalidModelParams: return "InvalidModelParams";
    case ErrorKind::DegenerateProfile: return "DegenerateProfile";
    case ErrorKind::InvalidP: return "InvalidP";
    case ErrorKind::SingularProblem: return "SingularProblem";
    case ErrorKind::InsufficientData: return "InsufficientData";
    case ErrorKind::MissingColumn: return "MissingColumn";
    case ErrorKind::ConfigError: return "ConfigError";
    case ErrorKind::PartialFailure: return "PartialFailure";
    }
    return "Unknown";
}

PeriodicGrid::PeriodicGrid(int dims, int n) : dims_(dims), n_(n), h_(1.0 / n) {
    if (n < min_nodes)
        throw Error(ErrorKind::InvalidArgument, "grid needs at least 8 nodes per axis, got " + std::to_string(n));
}

PeriodicGrid PeriodicGrid::line(int n) { return PeriodicGrid(1, n); }
PeriodicGrid PeriodicGrid::square(int n) { return PeriodicGrid(2, n); }

ScalarField::ScalarField(const PeriodicGrid& grid, double value) : grid_(grid), values_(grid.size(), value) {}

ScalarField::ScalarField(const PeriodicGrid& grid, std::vector<double> values)
    : grid_(grid), values_(std::move(values)) {
    if (values_.size() != grid_.size())
        throw Error(ErrorKind::InvalidArgument, "value count does not match grid node count");
}

double ScalarField::mean() const { return pairwise_sum(values_) / static_cast<double>(values_.size()); }
double ScalarField::min() const { return *std::min_element(values_.begin(), values_.end()); }
double ScalarField::max() const { return *std::max_element(values_.begin(), values_.end()); }

double ScalarField::max_abs() const {
    double m = 0.0;
    for (double v : values_) m = std::max(m, std::abs(v));
    return m;
}

bool ScalarField::all_finite() const {
    return std::all_of(values_.begin(), values_.end(), [](double v) { return std::isfinite(v); });
}

ScalarField ScalarField::shifted(int di, int dj) const {
    ScalarField out(grid_);
    const int n = grid_.n();
    if (grid_.dims() == 1) {
        for (int i = 0; i < n; ++i) out.values_[i] = values_[grid_.wrap(i + di)];
    } else {
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) out.values_[grid_.index(i, j)] = values_[grid_.index(i + di, j + dj)];
    }
    return out;
}

ScalarField& ScalarField::operator+=(double c) {
    for (double& v : values_) v += c;
    return *this;
}

ScalarField& ScalarField::operator*=(double c) {
    for (double& v : values_) v *= c;
    return *this;
}

RegionMask::RegionMask(const PeriodicGrid& grid, bool fill) : grid_(grid), flags_(grid.size(), fill ? 1 : 0) {}

std::size_t RegionMask::count() const {
    return static_cast<std::size_t>(std::count(flags_.begin(), flags_.end(), std::uint8_t{1}));
}

RegionMask RegionMask::operator&(const RegionMask& other) const {
    RegionMask out(grid_);
    for (std::size_t k = 0; k < flags_.size(); ++k) out.flags_[k] = flags_[k] & other.flags_[k];
    return out;
}

RegionMask RegionMask::operator|(const RegionMask& other) const {
    RegionMask out(grid_);
    for (std::size_t k = 0; k < flags_.size(); ++k) out.flags_[k] = flags_[k] | other.flags_[k];
    return out;
}

RegionMask RegionMask::operator!() const {
    RegionMask out(grid_);
    for (std::size_t k = 0; k < flags_.size(); ++k) out.flags_[k] = flags_[k] ? 0 : 1;
    return out;
}

double pairwise_sum(std::span<const double> values) {
    constexpr std::size_t block = 64;
    if (values.size() <= block) {
        double s = 0.0;
        for (double v : values) s += v;
        return s;
    }
    const std::size_t half = values.size() / 2;
    return pairwise_sum(values.first(half)) + pairwise_sum(values.subspan(half));
}

double integrate(const ScalarField& f) { return pairwise_sum(f.values()) * f.grid().cell_volume(); }

double integrate(const ScalarField& f, const RegionMask& mask) {
    if (!(mask.grid() == f.grid())) throw Error(ErrorKind::InvalidArgument, "mask and field live on different grids");
    std::vector<double> selected(f.size(), 0.0);
    for (std::size_t k = 0; k < f.size(); ++k)
        if (mask[k]) selected[k] = f[k];
    return pairwise_sum(selected) * f.grid().cell_volume();
}

void write_field_csv(const ScalarField& f, std::ostream& out) {
    const auto& g = f.grid();
    auto old = out.precision(std::numeric_limits<double>::max_digits10);
    out << "dims,n_per_axis\n" << g.dims() << ',' << g.n() << '\n';
    const int rows = g.dims() == 1 ? 1 : g.n();
    for (int i = 0; i < rows; ++i) {
        for (int j = 0; j < g.n(); ++j) {
            if (j) out << ',';
            out << f[static_cast<std::size_t>(i) * g.n() + j];
        }
        out << '\n';
    }
    out.precision(old);
}

void write_field_binary(const ScalarField& f, std::ostream& out) {
    const std::int32_t header[2] = {f.grid().dims(), f.grid().n()};
    out.write(reinterpret_cast<const char*>(header), sizeof(header));
    out.write(reinterpret_cast<const char*>(f.values().data()),
              static_cast<std::streamsize>(f.size() * sizeof(double)));
}

ScalarField read_field_binary(std::istream& in) {
    std::int32_t header[2] = {0, 0};
    in.read(reinterpret_cast<char*>(header), sizeof(header));
    if (!in || (header[0] != 1 && header[0] != 2)) throw Error(ErrorKind::InvalidArgument, "bad field dump header");
    const auto grid = header[0] == 1 ? PeriodicGrid::line(header[1]) : PeriodicGrid::square(header[1]);
    std::vector<double> values(grid.size());
    in.read(reinterpret_cast<char*>(values.data()), static_cast<std::streamsize>(values.size() * sizeof(double)));
    if (!in) throw Error(ErrorKind::InvalidArgument, "truncated field dump");
    return ScalarField(grid, std::move(values));
}

}  // namespace gflame
