#pragma once

#include <hydrores/errors.hpp>
#include <hydrores/grid.hpp>

#include <cmath>
#include <span>
#include <vector>

namespace hydrores {

/// v = U0 + (2/3) eps - 4 |lambda| k^2, shared by solitons and cnoidal waves.
inline double cnoidal_velocity(double epsilon, double k, double u0, double lambda) {
    return u0 + (2.0 / 3.0) * epsilon - 4.0 * std::abs(lambda) * k * k;
}

/// Background soliton. The velocity is derived on construction and has no setter.
class SolitonParams {
public:
    SolitonParams(double u0, double us, double ks, double lambda, double center)
        : u0_(u0), us_(us), ks_(ks), center_(center), vs_(cnoidal_velocity(us, ks, u0, lambda)) {
        if (!(us > 0.0)) throw ArgumentError("soliton height must be positive");
        if (!(ks > 0.0)) throw ArgumentError("soliton wavenumber must be positive");
        if (!std::isfinite(u0) || !std::isfinite(center)) throw ArgumentError("soliton parameters must be finite");
    }

    /// U0 = 1, Us = 1, ks = 1/2 placed at `center`.
    static SolitonParams reference(double lambda, double center) { return {1.0, 1.0, 0.5, lambda, center}; }

    double u0() const { return u0_; }
    double us() const { return us_; }
    double ks() const { return ks_; }
    double vs() const { return vs_; }
    double center() const { return center_; }

    friend bool operator==(const SolitonParams&, const SolitonParams&) = default;

private:
    double u0_, us_, ks_, center_, vs_;
};

/// One cos^2 input wave. The velocity is derived on construction.
class CnoidalParams {
public:
    CnoidalParams(double epsilon, double k, double u0, double lambda, double phase_center = 0.0)
        : epsilon_(epsilon), k_(k), phase_center_(phase_center), v_(cnoidal_velocity(epsilon, k, u0, lambda)) {
        if (!(epsilon >= 0.0) || !std::isfinite(epsilon)) throw ArgumentError("cnoidal amplitude must be non-negative");
        if (!(k > 0.0) || !std::isfinite(k)) throw ArgumentError("cnoidal wavenumber must be positive");
    }

    double epsilon() const { return epsilon_; }
    double k() const { return k_; }
    double v() const { return v_; }
    double phase_center() const { return phase_center_; }

    friend bool operator==(const CnoidalParams&, const CnoidalParams&) = default;

private:
    double epsilon_, k_, phase_center_, v_;
};

struct WindowParams {
    double scale = 20.0;
    int order = 8;

    void validate() const {
        if (!(scale > 0.0)) throw ArgumentError("window scale must be positive");
        if (order <= 0 || order % 2 != 0) throw ArgumentError("window order must be a positive even integer");
    }
};

inline WaveField soliton_profile(const SolitonParams& p, const SpatialGrid& grid, double t = 0.0) {
    std::vector<double> h(grid.num_points);
    for (std::size_t i = 0; i < h.size(); ++i) {
        const double s = 1.0 / std::cosh(p.ks() * (grid.coord(i) - p.center() - p.vs() * t));
        h[i] = p.u0() + p.us() * s * s;
    }
    return WaveField(grid, std::move(h), t);
}

/// eps cos^2[k (x - phase_center - v t)], without the rest height.
inline WaveField cnoidal_profile(const CnoidalParams& p, const SpatialGrid& grid, double t = 0.0) {
    std::vector<double> h(grid.num_points);
    for (std::size_t i = 0; i < h.size(); ++i) {
        const double c = std::cos(p.k() * (grid.coord(i) - p.phase_center() - p.v() * t));
        h[i] = p.epsilon() * c * c;
    }
    return WaveField(grid, std::move(h), t);
}

/// exp[-(x/l)^order], centered on x = 0.
inline std::vector<double> super_gaussian(const SpatialGrid& grid, const WindowParams& w) {
    w.validate();
    std::vector<double> out(grid.num_points);
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = std::exp(-std::pow(grid.coord(i) / w.scale, w.order));
    return out;
}

/// Soliton on the rest height plus the windowed superposition of the input
/// waves, all at t = 0. The window touches only the input waves.
inline WaveField build_initial_condition(std::span<const CnoidalParams> waves, const SolitonParams& soliton,
                                         const WindowParams& window, const SpatialGrid& grid) {
    WaveField field = soliton_profile(soliton, grid, 0.0);
    if (waves.empty()) return field;
    const std::vector<double> env = super_gaussian(grid, window);
    std::vector<double> sum(grid.num_points, 0.0);
    for (const auto& w : waves) {
        const WaveField c = cnoidal_profile(w, grid, 0.0);
        for (std::size_t i = 0; i < sum.size(); ++i) sum[i] += c.heights[i];
    }
    for (std::size_t i = 0; i < sum.size(); ++i) field.heights[i] += env[i] * sum[i];
    return field;
}

} // namespace hydrores
