#pragma once

#include <hydrores/errors.hpp>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

namespace hydrores {

/// Uniform periodic grid over [origin, origin + length).
struct SpatialGrid {
    double length = 80.0;
    std::size_t num_points = 256;
    double origin = -40.0;

    /// Grid of the given extent centered on zero.
    static SpatialGrid centered(double length, std::size_t num_points) {
        SpatialGrid g{length, num_points, -0.5 * length};
        g.validate();
        return g;
    }

    void validate() const {
        if (!(length > 0.0) || !std::isfinite(length))
            throw ConfigurationError("grid length must be positive");
        if (num_points < 16)
            throw ConfigurationError("grid needs at least 16 points");
        if (num_points % 2 != 0)
            throw ConfigurationError("grid point count must be even for spectral differentiation");
        if (!std::isfinite(origin))
            throw ConfigurationError("grid origin must be finite");
    }

    double spacing() const { return length / static_cast<double>(num_points); }
    double coord(std::size_t i) const { return origin + static_cast<double>(i) * spacing(); }
    bool contains(double x) const { return x >= origin && x <= origin + length; }

    std::vector<double> coords() const {
        std::vector<double> xs(num_points);
        for (std::size_t i = 0; i < num_points; ++i) xs[i] = coord(i);
        return xs;
    }

    friend bool operator==(const SpatialGrid&, const SpatialGrid&) = default;
};

/// Water height u sampled on a grid at one instant.
struct WaveField {
    SpatialGrid grid;
    std::vector<double> heights;
    double time = 0.0;

    WaveField() = default;
    WaveField(SpatialGrid g, std::vector<double> h, double t = 0.0)
        : grid(g), heights(std::move(h)), time(t) {}

    static WaveField constant(const SpatialGrid& g, double value, double t = 0.0) {
        return WaveField(g, std::vector<double>(g.num_points, value), t);
    }

    bool finite() const {
        for (double h : heights)
            if (!std::isfinite(h)) return false;
        return true;
    }

    void validate() const {
        grid.validate();
        if (heights.size() != grid.num_points)
            throw InvalidFieldError("field length does not match grid");
        if (!finite()) throw InvalidFieldError("field contains non-finite heights");
    }
};

/// Largest absolute pointwise difference.
inline double max_abs_difference(std::span<const double> a, std::span<const double> b) {
    if (a.size() != b.size()) throw ArgumentError("length mismatch");
    double m = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
    return m;
}

} // namespace hydrores
