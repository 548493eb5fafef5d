#pragma once

// The KdV tank as a reservoir: one simulation per observation, heights at the
// detection point at the genotype's readout times form one row of R. Fitness
// is |det R|; the readout layer solves W R = y with zero bias.

#include <hydrores/dataset.hpp>
#include <hydrores/encoding.hpp>
#include <hydrores/kdv.hpp>
#include <hydrores/waves.hpp>

#include <Eigen/Dense>

#include <cmath>
#include <limits>
#include <span>
#include <string>
#include <vector>

namespace hydrores {

struct ReservoirConfig {
    SpatialGrid grid = SpatialGrid::centered(80.0, 256);
    SolverParams solver{.dt = 0.01};
    DetectionConfig detection{};
    /// Background soliton; its center defaults to -L/4, left of the input window.
    double u0 = 1.0;
    double soliton_height = 1.0;
    double soliton_wavenumber = 0.5;
    double soliton_center = -20.0;
    WindowParams window{};
    EncodingBounds bounds{};

    void validate() const {
        grid.validate();
        solver.validate();
        window.validate();
        bounds.validate();
        if (!grid.contains(detection.position)) throw ConfigurationError("detection point outside the domain");
        if (!grid.contains(soliton_center)) throw ConfigurationError("soliton center outside the domain");
        if (solver.dt > max_stable_dt(grid, solver)) throw ConfigurationError("dt exceeds the stability bound");
    }

    Medium medium() const { return {u0, solver.lambda}; }
    SolitonParams soliton() const {
        return {u0, soliton_height, soliton_wavenumber, solver.lambda, soliton_center};
    }
};

struct ReadoutMatrix {
    Eigen::MatrixXd values;

    std::size_t size() const { return static_cast<std::size_t>(values.rows()); }
    bool square() const { return values.rows() == values.cols(); }
    bool finite() const { return values.allFinite(); }
};

/// |det R| from a partially pivoted LU. Exactly singular input gives 0.
inline double fitness(const ReadoutMatrix& r) {
    if (!r.square()) throw ArgumentError("readout matrix must be square");
    if (r.values.size() == 0) return 0.0;
    if (!r.finite()) return 0.0;
    return std::abs(r.values.partialPivLu().determinant());
}

/// 2-norm condition number; infinite when singular.
inline double condition_number(const Eigen::MatrixXd& m) {
    if (m.size() == 0) return std::numeric_limits<double>::infinity();
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(m);
    const auto& s = svd.singularValues();
    const double smin = s(s.size() - 1);
    if (!(smin > 0.0)) return std::numeric_limits<double>::infinity();
    return s(0) / smin;
}

/// Below this condition number W is solved exactly, above it by min-norm least squares.
inline constexpr double kExactSolveCondition = 1e10;

/// Row vector of weights with the bias fixed at zero. Weights are kept in
/// extended precision so that exact solves stay exact on the training points
/// even when R is poorly conditioned.
struct LinearReadout {
    Eigen::Matrix<long double, 1, Eigen::Dynamic> weights;
    bool exact = false;
    double condition = std::numeric_limits<double>::infinity();
    double residual = 0.0;

    std::size_t size() const { return static_cast<std::size_t>(weights.size()); }

    double apply(std::span<const double> readouts) const {
        if (readouts.size() != size()) throw ArgumentError("readout vector length does not match the weights");
        long double acc = 0.0L;
        for (std::size_t j = 0; j < readouts.size(); ++j) acc += weights(static_cast<Eigen::Index>(j)) * readouts[j];
        return static_cast<double>(acc);
    }
};

/// W = argmin ||W R - y||, with R's rows the observations.
///
/// Rows of R index observations and columns readout times, so the prediction
/// for observation i is sum_j W_j R_ij, i.e. y = R W^T. Well-conditioned R is
/// solved by LU with one refinement step; otherwise the SVD gives the minimum
/// norm least-squares solution.
inline LinearReadout train(const ReadoutMatrix& r, std::span<const double> y) {
    if (!r.square()) throw ArgumentError("readout matrix must be square");
    if (y.size() != r.size()) throw ArgumentError("target count does not match readout matrix");
    using MatL = Eigen::Matrix<long double, Eigen::Dynamic, Eigen::Dynamic>;
    using VecL = Eigen::Matrix<long double, Eigen::Dynamic, 1>;

    const auto n = static_cast<Eigen::Index>(y.size());
    const MatL a = r.values.cast<long double>();
    VecL b(n);
    for (Eigen::Index i = 0; i < n; ++i) b(i) = y[static_cast<std::size_t>(i)];

    LinearReadout out;
    out.condition = r.finite() ? condition_number(r.values) : std::numeric_limits<double>::infinity();
    VecL w;
    if (out.condition < kExactSolveCondition) {
        Eigen::PartialPivLU<MatL> lu(a);
        w = lu.solve(b);
        w += lu.solve(VecL(b - a * w));
        out.exact = true;
    } else if (r.finite()) {
        Eigen::JacobiSVD<MatL> svd(a, Eigen::ComputeThinU | Eigen::ComputeThinV);
        w = svd.solve(b);
    } else {
        w = VecL::Zero(n);
    }
    out.weights = w.transpose();
    out.residual = static_cast<double>((a * w - b).cwiseAbs().maxCoeff());
    return out;
}

enum class EvalStatus { Ok, Diverged };

struct EvaluationResult {
    double fitness = 0.0;
    ReadoutMatrix readout;
    std::vector<double> descriptor_samples;
    EvalStatus status = EvalStatus::Ok;
    std::string message;

    bool ok() const { return status == EvalStatus::Ok; }
};

/// Evaluates genotypes of one scheme on one dataset.
class Reservoir {
public:
    Reservoir(ReservoirConfig config, Dataset data, Scheme scheme)
        : config_(std::move(config)), data_(std::move(data)), scheme_(scheme) {
        config_.validate();
    }

    const ReservoirConfig& config() const { return config_; }
    const Dataset& dataset() const { return data_; }
    Scheme scheme() const { return scheme_; }
    std::size_t num_readouts() const { return data_.size(); }
    std::size_t num_encoding_genes() const { return data_.spec().encoding_gene_count(); }

    void check_genotype(const Genotype& g) const {
        g.validate();
        if (g.scheme != scheme_) throw ConfigurationError("genotype scheme does not match the reservoir");
        if (g.readout_times.size() != num_readouts())
            throw ConfigurationError("readout count must equal the number of observations");
        if (g.encoding_genes.size() != num_encoding_genes()) throw ConfigurationError("encoding gene count mismatch");
    }

    WaveField initial_condition(const Genotype& g, std::span<const double> x) const {
        const auto waves = encode(x, g, data_.spec(), config_.bounds, config_.medium());
        return build_initial_condition(waves, config_.soliton(), config_.window, config_.grid);
    }

    /// Heights at D at the genotype's readout times, for one input.
    std::vector<double> observe(const Genotype& g, std::span<const double> x, KdvSolver& solver) const {
        const auto times = readout_times(g, config_.bounds);
        return solver.sample(initial_condition(g, x), config_.detection, times, config_.bounds.t_max);
    }

    std::vector<double> observe(const Genotype& g, std::span<const double> x) const {
        KdvSolver solver(config_.grid, config_.solver);
        return observe(g, x, solver);
    }

    /// Row i holds observation i. Throws DivergenceError if any simulation blows up.
    ReadoutMatrix build_readout_matrix(const Genotype& g) const {
        check_genotype(g);
        KdvSolver solver(config_.grid, config_.solver);
        const std::size_t n = data_.size();
        ReadoutMatrix r{Eigen::MatrixXd(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n))};
        for (std::size_t i = 0; i < n; ++i) {
            const auto row = observe(g, data_.observations()[i], solver);
            for (std::size_t j = 0; j < n; ++j)
                r.values(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = row[j];
        }
        return r;
    }

    std::vector<double> descriptor_samples(const Genotype& g) const {
        std::vector<double> out;
        for (const auto& x : data_.observations()) {
            const auto waves = encode(x, g, data_.spec(), config_.bounds, config_.medium());
            const auto v = encoded_values(waves, scheme_);
            out.insert(out.end(), v.begin(), v.end());
        }
        return out;
    }

    /// Never throws on divergence: the result is marked and scored 0.
    EvaluationResult evaluate(const Genotype& g) const {
        EvaluationResult res;
        res.descriptor_samples = descriptor_samples(g);
        try {
            res.readout = build_readout_matrix(g);
        } catch (const DivergenceError& e) {
            res.status = EvalStatus::Diverged;
            res.message = e.what();
            res.fitness = 0.0;
            return res;
        }
        res.fitness = fitness(res.readout);
        if (!std::isfinite(res.fitness)) {
            res.status = EvalStatus::Diverged;
            res.message = "non-finite determinant";
            res.fitness = 0.0;
        }
        return res;
    }

    LinearReadout train(const Genotype& g) const {
        return hydrores::train(build_readout_matrix(g), data_.targets());
    }

    double predict(const LinearReadout& w, const Genotype& g, std::span<const double> x) const {
        if (w.size() != g.readout_times.size()) throw ArgumentError("readout size does not match the genotype");
        return w.apply(observe(g, x));
    }

    /// Descriptor ranges implied by the bounds: mean spans the encoded
    /// parameter's range, std spans [0, half of it].
    std::pair<double, double> encoded_range() const { return config_.bounds.encoded_range(scheme_); }

private:
    ReservoirConfig config_;
    Dataset data_;
    Scheme scheme_;
};

} // namespace hydrores
