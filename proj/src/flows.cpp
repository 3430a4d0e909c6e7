#include "gflame/flows.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "gflame/error.hpp"

namespace gflame {

namespace {

constexpr double two_pi = 2.0 * std::numbers::pi;

}  // namespace

ShearProfile::ShearProfile(std::string name, double c0, std::vector<double> a, std::vector<double> b)
    : name_(std::move(name)), c0_(c0), a_(std::move(a)), b_(std::move(b)) {
    const std::size_t k = std::max(a_.size(), b_.size());
    a_.resize(k, 0.0);
    b_.resize(k, 0.0);
    locate_extrema();
}

ShearProfile ShearProfile::cosine() { return ShearProfile("cosine", 0.0, {1.0}, {}); }

ShearProfile ShearProfile::cosine_minus_one() { return ShearProfile("cosine_minus_one", -1.0, {1.0}, {}); }

ShearProfile ShearProfile::two_bump(double c, double eps) {
    // -c sin^2(2 pi y)(1 + eps cos 2 pi y) expanded with product-to-sum identities.
    return ShearProfile("two_bump", -0.5 * c, {-0.25 * c * eps, 0.5 * c, 0.25 * c * eps}, {});
}

ShearProfile ShearProfile::fourier(double c0, std::vector<double> cos_coeffs, std::vector<double> sin_coeffs,
                                   std::string name) {
    return ShearProfile(std::move(name), c0, std::move(cos_coeffs), std::move(sin_coeffs));
}

ShearProfile ShearProfile::zero() { return ShearProfile("zero", 0.0, {}, {}); }

double ShearProfile::v(double y) const {
    double s = c0_;
    for (std::size_t k = 0; k < a_.size(); ++k) {
        const double t = two_pi * static_cast<double>(k + 1) * y;
        s += a_[k] * std::cos(t) + b_[k] * std::sin(t);
    }
    return s;
}

double ShearProfile::dv(double y) const {
    double s = 0.0;
    for (std::size_t k = 0; k < a_.size(); ++k) {
        const double w = two_pi * static_cast<double>(k + 1);
        s += w * (-a_[k] * std::sin(w * y) + b_[k] * std::cos(w * y));
    }
    return s;
}

double ShearProfile::d2v(double y) const {
    double s = 0.0;
    for (std::size_t k = 0; k < a_.size(); ++k) {
        const double w = two_pi * static_cast<double>(k + 1);
        s -= w * w * (a_[k] * std::cos(w * y) + b_[k] * std::sin(w * y));
    }
    return s;
}

bool ShearProfile::is_constant() const {
    return std::all_of(a_.begin(), a_.end(), [](double c) { return c == 0.0; }) &&
           std::all_of(b_.begin(), b_.end(), [](double c) { return c == 0.0; });
}

void ShearProfile::locate_extrema() {
    maximizers_.clear();
    if (is_constant()) {
        max_value_ = min_value_ = c0_;
        return;
    }
    constexpr int samples = 4096;
    std::vector<double> vals(samples);
    for (int k = 0; k < samples; ++k) vals[k] = v(static_cast<double>(k) / samples);
    min_value_ = *std::min_element(vals.begin(), vals.end());

    // Refine every sampled local maximum, then keep those at the global max.
    std::vector<std::pair<double, double>> peaks;
    for (int k = 0; k < samples; ++k) {
        const double l = vals[(k + samples - 1) % samples];
        const double r = vals[(k + 1) % samples];
        if (vals[k] < l || vals[k] <= r) continue;
        double y = static_cast<double>(k) / samples;
        for (int it = 0; it < 50; ++it) {
            const double c = d2v(y);
            if (c == 0.0) break;
            const double step = dv(y) / c;
            y -= step;
            if (std::abs(step) < 1e-15) break;
        }
        y -= std::floor(y);
        peaks.emplace_back(y, v(y));
    }
    max_value_ = peaks.empty() ? *std::max_element(vals.begin(), vals.end()) : peaks.front().second;
    for (const auto& p : peaks) max_value_ = std::max(max_value_, p.second);
    const double scale = std::max(1.0, max_value_ - min_value_);
    for (const auto& p : peaks)
        if (max_value_ - p.second <= 1e-10 * scale) maximizers_.push_back(p.first);
    std::sort(maximizers_.begin(), maximizers_.end());
}

std::vector<double> ShearProfile::curvature_at_maxima() const {
    std::vector<double> out;
    out.reserve(maximizers_.size());
    for (double y : maximizers_) out.push_back(std::abs(d2v(y)));
    return out;
}

ShearProfile make_shear_profile(const std::string& name, double c, double eps) {
    ShearProfile p = [&] {
        if (name == "cosine") return ShearProfile::cosine();
        if (name == "cosine_minus_one") return ShearProfile::cosine_minus_one();
        if (name == "two_bump") return ShearProfile::two_bump(c, eps);
        throw Error(ErrorKind::InvalidArgument, "unknown shear profile '" + name + "'");
    }();
    if (p.is_constant()) throw Error(ErrorKind::DegenerateProfile, "shear profile '" + name + "' is constant");
    return p;
}

FlowField::FlowField(FlowKind kind, double amplitude, Normalization norm, std::optional<ShearProfile> profile)
    : kind_(kind), amplitude_(amplitude), norm_(norm), profile_(std::move(profile)) {
    if (!(amplitude >= 0.0) || !std::isfinite(amplitude))
        throw Error(ErrorKind::InvalidArgument, "flow amplitude must be finite and nonnegative");
}

FlowField FlowField::zero() { return FlowField(FlowKind::zero, 0.0, Normalization::raw, std::nullopt); }

FlowField FlowField::cellular(double amplitude, Normalization norm) {
    return FlowField(FlowKind::cellular, amplitude, norm, std::nullopt);
}

FlowField FlowField::shear(double amplitude, ShearProfile profile) {
    return FlowField(FlowKind::shear, amplitude, Normalization::raw, std::move(profile));
}

FlowField FlowField::with_amplitude(double amplitude) const {
    return FlowField(kind_, amplitude, norm_, profile_);
}

Vec2 eval_cellular(Vec2 x, double amplitude, Normalization norm) {
    const double s = norm == Normalization::raw ? amplitude * two_pi : amplitude;
    const double s1 = std::sin(two_pi * x.x), c1 = std::cos(two_pi * x.x);
    const double s2 = std::sin(two_pi * x.y), c2 = std::cos(two_pi * x.y);
    return {-s * s1 * c2, s * c1 * s2};
}

Vec2 FlowField::unit_velocity(Vec2 x) const {
    switch (kind_) {
    case FlowKind::zero: return {};
    case FlowKind::cellular: return eval_cellular(x, 1.0, norm_);
    case FlowKind::shear: return {profile_->v(x.y), 0.0};
    }
    return {};
}

Vec2 FlowField::velocity(Vec2 x) const { return amplitude_ * unit_velocity(x); }

double FlowField::stream(Vec2 x) const { return kind_ == FlowKind::cellular ? cellular_stream(x) : 0.0; }

double FlowField::stream_scale() const {
    return norm_ == Normalization::raw ? amplitude_ : amplitude_ / two_pi;
}

VelocitySamples FlowField::sample(const PeriodicGrid& grid) const {
    VelocitySamples out(grid);
    const int n = grid.n();
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            const Vec2 v = velocity(grid.point(i, j));
            out.vx(i, j) = v.x;
            out.vy(i, j) = v.y;
        }
    return out;
}

VelocitySamples FlowField::sample_unit(const PeriodicGrid& grid) const {
    return with_amplitude(1.0).sample(grid);
}

double FlowField::face_velocity_x(const PeriodicGrid& grid, int i, int j) const {
    const double h = grid.h();
    const double xf = grid.coord(i) + 0.5 * h;
    switch (kind_) {
    case FlowKind::zero: return 0.0;
    case FlowKind::shear: return amplitude_ * profile_->v(grid.coord(j));
    case FlowKind::cellular: {
        const double yp = grid.coord(j) + 0.5 * h, ym = grid.coord(j) - 0.5 * h;
        return -stream_scale() * (cellular_stream({xf, yp}) - cellular_stream({xf, ym})) / h;
    }
    }
    return 0.0;
}

double FlowField::face_velocity_y(const PeriodicGrid& grid, int i, int j) const {
    const double h = grid.h();
    const double yf = grid.coord(j) + 0.5 * h;
    switch (kind_) {
    case FlowKind::zero:
    case FlowKind::shear: return 0.0;
    case FlowKind::cellular: {
        const double xp = grid.coord(i) + 0.5 * h, xm = grid.coord(i) - 0.5 * h;
        return stream_scale() * (cellular_stream({xp, yf}) - cellular_stream({xm, yf})) / h;
    }
    }
    return 0.0;
}

BandMask band_mask(const PeriodicGrid& grid, double lo, double hi) {
    if (!(lo >= 0.0) || !(lo < hi)) throw Error(ErrorKind::InvalidArgument, "band needs 0 <= lo < hi");
    RegionMask mask(grid);
    const int n = grid.n();
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            const double a = std::abs(cellular_stream(grid.point(i, j)));
            mask.set(grid.index(i, j), a >= lo && a <= hi);
        }
    const bool empty = mask.empty();
    return {std::move(mask), empty};
}

QuarterCellDecomposition QuarterCellDecomposition::build(const PeriodicGrid& grid) {
    if (grid.dims() != 2) throw Error(ErrorKind::InvalidArgument, "quarter cells need a 2D grid");
    QuarterCellDecomposition q{{RegionMask(grid), RegionMask(grid), RegionMask(grid), RegionMask(grid)},
                               RegionMask(grid)};
    const int n = grid.n();
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            const Vec2 x = grid.point(i, j);
            const std::size_t k = grid.index(i, j);
            const bool xp = x.x > 0.0, xm = x.x < 0.0 && x.x > -0.5;
            const bool yp = x.y > 0.0, ym = x.y < 0.0 && x.y > -0.5;
            if (xp && yp) q.cells[0].set(k, true);
            else if (xm && yp) q.cells[1].set(k, true);
            else if (xm && ym) q.cells[2].set(k, true);
            else if (xp && ym) q.cells[3].set(k, true);
            else q.separatrix.set(k, true);
        }
    return q;
}

}  // namespace gflame
