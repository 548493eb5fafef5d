#pragma once

// Pseudo-spectral solver for  u_t + u u_x + lambda u_xxx = 0  on a periodic
// domain. Dispersion is integrated exactly through an integrating factor and
// the advective term with classical RK4 (Lawson IF-RK4).

#include <hydrores/errors.hpp>
#include <hydrores/grid.hpp>

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <limits>
#include <mutex>
#include <numbers>
#include <span>
#include <vector>

namespace hydrores {

struct SolverParams {
    /// Dispersion coefficient. The reference soliton (U0=1, Us=1, ks=1/2) travels at 4/3 only for 1/3.
    double lambda = 1.0 / 3.0;
    double dt = 0.02;
    bool dealias = true;
    /// Scales the u u_x term. 1 is KdV; 0 leaves the linear Airy equation (test hook).
    double nonlinearity = 1.0;
    /// Height scale used in the advective stability bound.
    double height_bound = 10.0;
    /// |u| above this aborts the integration.
    double blowup_threshold = 1e4;

    void validate() const {
        if (!(dt > 0.0) || !std::isfinite(dt)) throw ConfigurationError("dt must be positive");
        if (!(std::abs(lambda) > 0.0) || !std::isfinite(lambda))
            throw ConfigurationError("lambda must be non-zero");
        if (!(height_bound > 0.0)) throw ConfigurationError("height bound must be positive");
        if (!(blowup_threshold > 0.0)) throw ConfigurationError("blow-up threshold must be positive");
    }

    friend bool operator==(const SolverParams&, const SolverParams&) = default;
};

enum class Interpolation { Nearest, Linear };

struct DetectionConfig {
    double position = 10.0;
    Interpolation interpolation = Interpolation::Linear;
};

/// Largest retained wavenumber of the nonlinear product.
inline double cutoff_wavenumber(const SpatialGrid& grid, bool dealias) {
    const std::size_t jmax = dealias ? grid.num_points / 3 : grid.num_points / 2 - 1;
    return 2.0 * std::numbers::pi * static_cast<double>(jmax) / grid.length;
}

/// Stable step for the advective part: dt * height_bound * k_cut <= 2 sqrt(2),
/// the imaginary-axis extent of the RK4 stability region. Dispersion imposes no
/// limit because the integrating factor treats it exactly.
inline double max_stable_dt(const SpatialGrid& grid, const SolverParams& params) {
    return 2.0 * std::numbers::sqrt2 /
           (params.height_bound * std::max(std::abs(params.nonlinearity), 1e-12) *
            cutoff_wavenumber(grid, params.dealias));
}

/// Number of steps of size dt covering t, snapping values within roundoff of
/// a step boundary onto it.
inline std::size_t steps_to_reach(double t, double dt) {
    const double q = t / dt;
    const double r = std::round(q);
    if (std::abs(q - r) <= 1e-9 * std::max(1.0, q)) return static_cast<std::size_t>(r);
    return static_cast<std::size_t>(std::ceil(q));
}

/// Step index at or below t and the fractional position toward the next step.
struct StepBracket {
    std::size_t lo = 0;
    double frac = 0.0;
};

inline StepBracket bracket(double t, double dt) {
    const double q = t / dt;
    const double r = std::round(q);
    if (std::abs(q - r) <= 1e-9 * std::max(1.0, q)) return {static_cast<std::size_t>(r), 0.0};
    const double fl = std::floor(q);
    return {static_cast<std::size_t>(fl), q - fl};
}

/// Height at a detection coordinate, interpolated in space.
inline double sample_at(const SpatialGrid& grid, std::span<const double> u, const DetectionConfig& det) {
    const std::size_t n = grid.num_points;
    double s = (det.position - grid.origin) / grid.spacing();
    if (det.interpolation == Interpolation::Nearest) {
        auto i = static_cast<std::size_t>(std::llround(s)) % n;
        return u[i];
    }
    const double fl = std::floor(s);
    double w = s - fl;
    auto i0 = static_cast<std::size_t>(fl) % n;
    if (w < 1e-12) return u[i0];
    if (w > 1.0 - 1e-12) return u[(i0 + 1) % n];
    return (1.0 - w) * u[i0] + w * u[(i0 + 1) % n];
}

namespace detail {

inline std::mutex& fftw_planner_mutex() {
    static std::mutex m;
    return m;
}

template <class T>
inline double trapezoid_periodic(std::span<const double> u, double dx, T&& f) {
    double s = 0.0;
    for (double v : u) s += f(v);
    return s * dx;
}

} // namespace detail

/// Trapezoidal quadrature of u over the periodic domain.
inline double conserved_mass(const WaveField& field) {
    field.validate();
    return detail::trapezoid_periodic(field.heights, field.grid.spacing(), [](double v) { return v; });
}

/// Trapezoidal quadrature of u^2 over the periodic domain.
inline double conserved_momentum(const WaveField& field) {
    field.validate();
    return detail::trapezoid_periodic(field.heights, field.grid.spacing(), [](double v) { return v * v; });
}

/// Heights at the detection point for every step 0..n of an integration.
struct Trace {
    std::vector<double> times;
    std::vector<double> heights;
};

/// Owns FFT plans and scratch buffers for one grid. Not thread-safe: give each
/// worker its own instance.
class KdvSolver {
public:
    using cplx = std::complex<double>;

    KdvSolver(const SpatialGrid& grid, const SolverParams& params)
        : grid_(grid), params_(params), n_(grid.num_points), nc_(grid.num_points / 2 + 1) {
        grid_.validate();
        params_.validate();
        const double limit = max_stable_dt(grid_, params_);
        if (params_.dt > limit)
            throw ConfigurationError("dt " + std::to_string(params_.dt) + " exceeds stability bound " +
                                     std::to_string(limit));

        real_.assign(n_, 0.0);
        phys_.assign(n_, 0.0);
        spec_.assign(nc_, cplx{});
        for (auto* v : {&state_, &ka_, &kb_, &kc_, &kd_, &tmp_}) v->assign(nc_, cplx{});

        nl_coef_.resize(nc_);
        lin_.resize(nc_);
        half_.resize(nc_);
        full_.resize(nc_);
        const double base = 2.0 * std::numbers::pi / grid_.length;
        for (std::size_t j = 0; j < nc_; ++j) {
            // Nyquist mode carries no odd derivative for a real field.
            const double k = (j == n_ / 2) ? 0.0 : base * static_cast<double>(j);
            const bool keep = params_.dealias ? (3 * j <= n_) : true;
            nl_coef_[j] = keep ? cplx(0.0, -0.5 * params_.nonlinearity * k) : cplx{};
            lin_[j] = cplx(0.0, params_.lambda * k * k * k);
            half_[j] = std::exp(lin_[j] * (0.5 * params_.dt));
            full_[j] = std::exp(lin_[j] * params_.dt);
        }

        std::lock_guard lock(detail::fftw_planner_mutex());
        r2c_ = fftw_plan_dft_r2c_1d(static_cast<int>(n_), real_.data(),
                                    reinterpret_cast<fftw_complex*>(spec_.data()), FFTW_ESTIMATE);
        c2r_ = fftw_plan_dft_c2r_1d(static_cast<int>(n_), reinterpret_cast<fftw_complex*>(spec_.data()),
                                    real_.data(), FFTW_ESTIMATE);
    }

    KdvSolver(const KdvSolver&) = delete;
    KdvSolver& operator=(const KdvSolver&) = delete;

    ~KdvSolver() {
        std::lock_guard lock(detail::fftw_planner_mutex());
        if (r2c_) fftw_destroy_plan(r2c_);
        if (c2r_) fftw_destroy_plan(c2r_);
    }

    const SpatialGrid& grid() const { return grid_; }
    const SolverParams& params() const { return params_; }

    /// du/dt = -u u_x - lambda u_xxx in physical space.
    std::vector<double> rhs(const WaveField& field) {
        check_field(field);
        forward(field.heights, state_);
        nonlinear(state_, ka_);
        for (std::size_t j = 0; j < nc_; ++j) spec_[j] = ka_[j] + lin_[j] * state_[j];
        fftw_execute(c2r_);
        std::vector<double> out(real_.begin(), real_.end());
        for (double& v : out) v /= static_cast<double>(n_);
        return out;
    }

    /// Advance by one dt.
    WaveField step(const WaveField& field, std::size_t step_index = 0) {
        WaveField out = field;
        integrate(field, 1, [&](std::size_t n, std::span<const double> u) {
            if (n == 1) std::copy(u.begin(), u.end(), out.heights.begin());
        }, step_index);
        out.time = field.time + params_.dt;
        return out;
    }

    /// Integrates n_steps steps, calling visit(n, u_n) for n = 0..n_steps.
    /// Throws DivergenceError when a state is non-finite or exceeds the blow-up threshold.
    template <class Visit>
    void integrate(const WaveField& initial, std::size_t n_steps, Visit&& visit, std::size_t step_offset = 0) {
        check_field(initial);
        forward(initial.heights, state_);
        for (std::size_t n = 0;; ++n) {
            if (n < n_steps) {
                lawson_rk4();  // leaves u_n in phys_
            } else {
                spec_ = state_;
                fftw_execute(c2r_);
                const double inv = 1.0 / static_cast<double>(n_);
                for (std::size_t i = 0; i < n_; ++i) phys_[i] = real_[i] * inv;
            }
            // Report the initial state itself rather than its FFT round trip.
            if (n == 0) std::copy(initial.heights.begin(), initial.heights.end(), phys_.begin());
            check_blowup(n + step_offset);
            visit(n, std::span<const double>(phys_));
            if (n == n_steps) break;
        }
    }

    /// u(D, t_i) for ascending times, linear in time between bracketing steps.
    std::vector<double> sample(const WaveField& initial, const DetectionConfig& det, std::span<const double> times,
                               double t_max = std::numeric_limits<double>::infinity()) {
        check_times(times, t_max);
        check_detection(det);
        std::vector<double> out(times.size(), 0.0);
        if (times.empty()) return out;

        std::vector<StepBracket> slots(times.size());
        std::size_t last = 0;
        for (std::size_t i = 0; i < times.size(); ++i) {
            slots[i] = bracket(times[i], params_.dt);
            last = std::max(last, slots[i].frac > 0.0 ? slots[i].lo + 1 : slots[i].lo);
        }

        std::vector<double> at_d(last + 1);
        integrate(initial, last, [&](std::size_t n, std::span<const double> u) { at_d[n] = sample_at(grid_, u, det); });

        for (std::size_t i = 0; i < times.size(); ++i) {
            const auto [lo, frac] = slots[i];
            out[i] = frac == 0.0 ? at_d[lo] : (1.0 - frac) * at_d[lo] + frac * at_d[lo + 1];
        }
        return out;
    }

    /// Detection-point history over [0, t_end] at every step.
    Trace trace(const WaveField& initial, const DetectionConfig& det, double t_end) {
        check_detection(det);
        if (!(t_end >= 0.0)) throw ArgumentError("trace end time must be non-negative");
        const std::size_t n_steps = steps_to_reach(t_end, params_.dt);
        Trace tr;
        tr.times.reserve(n_steps + 1);
        tr.heights.reserve(n_steps + 1);
        integrate(initial, n_steps, [&](std::size_t n, std::span<const double> u) {
            tr.times.push_back(initial.time + static_cast<double>(n) * params_.dt);
            tr.heights.push_back(sample_at(grid_, u, det));
        });
        return tr;
    }

    /// Physical field after advancing to time t (rounded to whole steps).
    WaveField advance(const WaveField& initial, double t) {
        const std::size_t n_steps = steps_to_reach(t, params_.dt);
        WaveField out = initial;
        integrate(initial, n_steps, [&](std::size_t n, std::span<const double> u) {
            if (n == n_steps) std::copy(u.begin(), u.end(), out.heights.begin());
        });
        out.time = initial.time + static_cast<double>(n_steps) * params_.dt;
        return out;
    }

private:
    void check_field(const WaveField& field) const {
        field.validate();
        if (!(field.grid == grid_)) throw ArgumentError("field grid differs from solver grid");
    }

    void check_detection(const DetectionConfig& det) const {
        if (!std::isfinite(det.position) || !grid_.contains(det.position))
            throw ArgumentError("detection point outside the domain");
    }

    static void check_times(std::span<const double> times, double t_max) {
        for (std::size_t i = 0; i < times.size(); ++i) {
            if (!std::isfinite(times[i]) || times[i] < 0.0 || times[i] > t_max)
                throw ArgumentError("readout time outside [0, T_max]");
            if (i > 0 && times[i] < times[i - 1]) throw ArgumentError("readout times must be ascending");
        }
    }

    void check_blowup(std::size_t step) const {
        for (double v : phys_) {
            if (!std::isfinite(v)) throw DivergenceError(step, "non-finite height");
            if (std::abs(v) > params_.blowup_threshold) throw DivergenceError(step, "height exceeds blow-up threshold");
        }
    }

    void forward(std::span<const double> u, std::vector<cplx>& out) {
        std::copy(u.begin(), u.end(), real_.begin());
        fftw_execute(r2c_);
        out = spec_;
    }

    // N(S) = -(1/2) d/dx (u^2), with u^2 de-aliased through nl_coef_.
    void nonlinear(const std::vector<cplx>& s, std::vector<cplx>& out, std::vector<double>* phys_out = nullptr) {
        spec_ = s;
        fftw_execute(c2r_);
        const double inv = 1.0 / static_cast<double>(n_);
        for (std::size_t i = 0; i < n_; ++i) {
            const double u = real_[i] * inv;
            if (phys_out) (*phys_out)[i] = u;
            real_[i] = u * u;
        }
        fftw_execute(r2c_);
        for (std::size_t j = 0; j < nc_; ++j) out[j] = nl_coef_[j] * spec_[j];
    }

    // One step of state_; the physical field at the start of the step lands in phys_.
    void lawson_rk4() {
        const double dt = params_.dt;
        nonlinear(state_, ka_, &phys_);
        for (std::size_t j = 0; j < nc_; ++j) tmp_[j] = half_[j] * (state_[j] + 0.5 * dt * ka_[j]);
        nonlinear(tmp_, kb_);
        for (std::size_t j = 0; j < nc_; ++j) tmp_[j] = half_[j] * state_[j] + 0.5 * dt * kb_[j];
        nonlinear(tmp_, kc_);
        for (std::size_t j = 0; j < nc_; ++j) tmp_[j] = full_[j] * state_[j] + dt * half_[j] * kc_[j];
        nonlinear(tmp_, kd_);
        for (std::size_t j = 0; j < nc_; ++j)
            state_[j] = full_[j] * state_[j] +
                        (dt / 6.0) * (full_[j] * ka_[j] + 2.0 * half_[j] * (kb_[j] + kc_[j]) + kd_[j]);
    }

    SpatialGrid grid_;
    SolverParams params_;
    std::size_t n_;
    std::size_t nc_;

    std::vector<double> real_, phys_;
    std::vector<cplx> spec_, state_, ka_, kb_, kc_, kd_, tmp_;
    std::vector<cplx> nl_coef_, lin_, half_, full_;
    fftw_plan r2c_ = nullptr;
    fftw_plan c2r_ = nullptr;
};

/// Free-function forms. Each call builds its own solver.
inline std::vector<double> kdv_rhs(const WaveField& field, const SolverParams& params) {
    KdvSolver solver(field.grid, params);
    return solver.rhs(field);
}

inline WaveField step(const WaveField& field, const SolverParams& params) {
    KdvSolver solver(field.grid, params);
    return solver.step(field);
}

inline std::vector<double> simulate_and_sample(const WaveField& initial, const SolverParams& params,
                                               const DetectionConfig& detection, std::span<const double> times,
                                               double t_max = std::numeric_limits<double>::infinity()) {
    KdvSolver solver(initial.grid, params);
    return solver.sample(initial, detection, times, t_max);
}

} // namespace hydrores
