#pragma once

// Feature vectors to cnoidal input waves.
//
// Gene layout per feature, amplitude scheme (frequency scheme swaps the roles
// of amplitude and frequency):
//   Discrete(M)      [k, eps_0 .. eps_{M-1}]            value m picks eps_m
//   Continuous(d)    [k_0 .. k_{d-1}, w_0 .. w_{d-1}]    digit g gives eps = w_g * digit_g
// All genes live in [0, 1] and are mapped linearly into EncodingBounds.

#include <hydrores/errors.hpp>
#include <hydrores/waves.hpp>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace hydrores {

enum class Scheme { Amplitude, Frequency };

inline std::string_view to_string(Scheme s) { return s == Scheme::Amplitude ? "amplitude" : "frequency"; }

inline Scheme parse_scheme(std::string_view s) {
    if (s == "amplitude") return Scheme::Amplitude;
    if (s == "frequency") return Scheme::Frequency;
    throw ArgumentError("unknown encoding scheme '" + std::string(s) + "'");
}

struct Discrete {
    int cardinality = 2;
};

struct Continuous {
    int digits = 3;
    double lo = 0.0;
    double hi = 1.0;
};

using FeatureKind = std::variant<Discrete, Continuous>;

struct FeatureSpec {
    std::vector<FeatureKind> features;

    void validate() const {
        for (const auto& f : features) {
            if (const auto* d = std::get_if<Discrete>(&f)) {
                if (d->cardinality < 2) throw ConfigurationError("discrete feature needs at least two values");
            } else {
                const auto& c = std::get<Continuous>(f);
                if (c.digits < 1 || c.digits > 15) throw ConfigurationError("digit precision must be in [1, 15]");
                if (!(c.lo < c.hi)) throw ConfigurationError("continuous domain must satisfy lo < hi");
            }
        }
    }

    std::size_t num_waves() const {
        std::size_t n = 0;
        for (const auto& f : features)
            n += std::holds_alternative<Discrete>(f) ? 1 : static_cast<std::size_t>(std::get<Continuous>(f).digits);
        return n;
    }

    std::size_t encoding_gene_count() const {
        std::size_t n = 0;
        for (const auto& f : features) {
            if (const auto* d = std::get_if<Discrete>(&f))
                n += 1 + static_cast<std::size_t>(d->cardinality);
            else
                n += 2 * static_cast<std::size_t>(std::get<Continuous>(f).digits);
        }
        return n;
    }
};

struct EncodingBounds {
    double amp_min = 0.0;
    double amp_max = 1.5;
    double freq_min = 0.1;
    double freq_max = 3.0;
    double t_max = 30.0;

    void validate() const {
        if (!(amp_min >= 0.0 && amp_min < amp_max)) throw ConfigurationError("amplitude range must satisfy 0 <= min < max");
        if (!(freq_min > 0.0 && freq_min < freq_max)) throw ConfigurationError("frequency range must satisfy 0 < min < max");
        if (!(t_max > 0.0)) throw ConfigurationError("T_max must be positive");
    }

    double amplitude(double gene) const { return amp_min + gene * (amp_max - amp_min); }
    double frequency(double gene) const { return freq_min + gene * (freq_max - freq_min); }

    /// Range of whichever parameter carries the input under `scheme`.
    std::pair<double, double> encoded_range(Scheme s) const {
        return s == Scheme::Amplitude ? std::pair{amp_min, amp_max} : std::pair{freq_min, freq_max};
    }
};

/// Rest height and dispersion needed to derive wave velocities.
struct Medium {
    double u0 = 1.0;
    double lambda = 1.0 / 3.0;
};

struct Genotype {
    Scheme scheme = Scheme::Amplitude;
    std::vector<double> readout_times;
    std::vector<double> encoding_genes;

    std::size_t size() const { return readout_times.size() + encoding_genes.size(); }

    void validate() const {
        auto in_unit = [](double g) { return g >= 0.0 && g <= 1.0; };
        if (!std::all_of(readout_times.begin(), readout_times.end(), in_unit) ||
            !std::all_of(encoding_genes.begin(), encoding_genes.end(), in_unit))
            throw ArgumentError("genes must lie in [0, 1]");
    }

    template <class Rng>
    static Genotype random(Scheme scheme, std::size_t n_times, std::size_t n_encoding, Rng& rng) {
        std::uniform_real_distribution<double> u(0.0, 1.0);
        Genotype g{scheme, std::vector<double>(n_times), std::vector<double>(n_encoding)};
        for (double& x : g.readout_times) x = u(rng);
        for (double& x : g.encoding_genes) x = u(rng);
        return g;
    }

    friend bool operator==(const Genotype&, const Genotype&) = default;
};

/// First d base-10 digits of (x - lo) / (hi - lo), truncated; x = hi gives all nines.
inline std::vector<int> digits(double x, double lo, double hi, int d) {
    if (!(lo < hi)) throw ArgumentError("digit domain must satisfy lo < hi");
    if (d < 1 || d > 15) throw ArgumentError("digit precision must be in [1, 15]");
    if (!(x >= lo && x <= hi)) throw ArgumentError("value outside the feature domain");
    const double n = (x - lo) / (hi - lo);
    const double scale = std::pow(10.0, d);
    // The slack absorbs representation error such as 0.3 * 1000 = 299.99999999999994.
    auto fixed = static_cast<std::int64_t>(std::floor(n * scale + 1e-9));
    fixed = std::clamp<std::int64_t>(fixed, 0, static_cast<std::int64_t>(scale) - 1);
    std::vector<int> out(static_cast<std::size_t>(d));
    for (int g = d - 1; g >= 0; --g) {
        out[static_cast<std::size_t>(g)] = static_cast<int>(fixed % 10);
        fixed /= 10;
    }
    return out;
}

/// Time genes mapped onto [0, T_max], ascending.
inline std::vector<double> readout_times(const Genotype& g, const EncodingBounds& bounds) {
    std::vector<double> t(g.readout_times.size());
    std::transform(g.readout_times.begin(), g.readout_times.end(), t.begin(),
                   [&](double x) { return x * bounds.t_max; });
    std::sort(t.begin(), t.end());
    return t;
}

inline std::vector<CnoidalParams> encode(std::span<const double> x, const Genotype& genotype, const FeatureSpec& spec,
                                         const EncodingBounds& bounds, const Medium& medium = {}) {
    if (x.size() != spec.features.size()) throw ArgumentError("feature vector does not match the feature spec");
    if (genotype.encoding_genes.size() != spec.encoding_gene_count())
        throw ConfigurationError("genotype has " + std::to_string(genotype.encoding_genes.size()) +
                                 " encoding genes, layout needs " + std::to_string(spec.encoding_gene_count()));

    const auto& genes = genotype.encoding_genes;
    const bool amp = genotype.scheme == Scheme::Amplitude;
    std::vector<CnoidalParams> waves;
    waves.reserve(spec.num_waves());
    std::size_t off = 0;

    for (std::size_t f = 0; f < spec.features.size(); ++f) {
        if (const auto* d = std::get_if<Discrete>(&spec.features[f])) {
            const double v = x[f];
            if (v != std::floor(v) || v < 0.0 || v >= d->cardinality)
                throw ArgumentError("discrete value " + std::to_string(v) + " out of range");
            const auto m = static_cast<std::size_t>(v);
            const double fixed = genes[off];
            const double chosen = genes[off + 1 + m];
            if (amp)
                waves.emplace_back(bounds.amplitude(chosen), bounds.frequency(fixed), medium.u0, medium.lambda);
            else
                waves.emplace_back(bounds.amplitude(fixed), bounds.frequency(chosen), medium.u0, medium.lambda);
            off += 1 + static_cast<std::size_t>(d->cardinality);
        } else {
            const auto& c = std::get<Continuous>(spec.features[f]);
            const auto nd = static_cast<std::size_t>(c.digits);
            const std::vector<int> dig = digits(x[f], c.lo, c.hi, c.digits);
            for (std::size_t g = 0; g < nd; ++g) {
                const double fixed = genes[off + g];
                const double weight = genes[off + nd + g];
                if (amp) {
                    const double eps = std::clamp(weight * (bounds.amp_max / 9.0) * dig[g], bounds.amp_min, bounds.amp_max);
                    waves.emplace_back(eps, bounds.frequency(fixed), medium.u0, medium.lambda);
                } else {
                    const double k = std::clamp(weight * (bounds.freq_max / 9.0) * dig[g], bounds.freq_min, bounds.freq_max);
                    waves.emplace_back(bounds.amplitude(fixed), k, medium.u0, medium.lambda);
                }
            }
            off += 2 * nd;
        }
    }
    return waves;
}

/// The input-carrying parameter of each wave: amplitudes or frequencies.
inline std::vector<double> encoded_values(std::span<const CnoidalParams> waves, Scheme scheme) {
    std::vector<double> out;
    out.reserve(waves.size());
    for (const auto& w : waves) out.push_back(scheme == Scheme::Amplitude ? w.epsilon() : w.k());
    return out;
}

} // namespace hydrores
