#pragma once

// MAP-Elites over (mean, std) of the encoded wave parameters.

#include <hydrores/encoding.hpp>
#include <hydrores/errors.hpp>
#include <hydrores/reservoir.hpp>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <concepts>
#include <cstdint>
#include <exception>
#include <functional>
#include <optional>
#include <random>
#include <span>
#include <thread>
#include <vector>

namespace hydrores {

struct Descriptor {
    double mean = 0.0;
    double std = 0.0;
};

/// Population mean and standard deviation of the samples. Empty or diverged
/// evaluations have no descriptor.
inline std::optional<Descriptor> descriptor(std::span<const double> samples) {
    if (samples.empty()) return std::nullopt;
    double mean = 0.0;
    for (double s : samples) mean += s;
    mean /= static_cast<double>(samples.size());
    double var = 0.0;
    for (double s : samples) var += (s - mean) * (s - mean);
    var /= static_cast<double>(samples.size());
    Descriptor d{mean, std::sqrt(var)};
    if (!std::isfinite(d.mean) || !std::isfinite(d.std)) return std::nullopt;
    return d;
}

inline std::optional<Descriptor> descriptor(const EvaluationResult& r) {
    if (!r.ok()) return std::nullopt;
    return descriptor(r.descriptor_samples);
}

struct Individual {
    Genotype genotype;
    double fitness = 0.0;
    Descriptor descriptor;
    std::size_t eval_index = 0;
};

struct ArchiveShape {
    std::size_t rows = 32;
    std::size_t cols = 32;
};

struct DescriptorRanges {
    double mean_lo = 0.0;
    double mean_hi = 1.0;
    double std_lo = 0.0;
    double std_hi = 0.5;

    /// mean over [lo, hi], std over [0, (hi - lo) / 2].
    static DescriptorRanges for_parameter_range(double lo, double hi) { return {lo, hi, 0.0, 0.5 * (hi - lo)}; }
};

struct Cell {
    std::size_t row = 0;
    std::size_t col = 0;
    friend bool operator==(const Cell&, const Cell&) = default;
};

/// One elite per cell. Rows bin the mean, columns the standard deviation;
/// values outside the ranges fall into the edge bins.
class Archive {
public:
    Archive(ArchiveShape shape, DescriptorRanges ranges) : shape_(shape), ranges_(ranges) {
        if (shape.rows == 0 || shape.cols == 0) throw ConfigurationError("archive needs at least one bin per axis");
        if (!(ranges.mean_lo < ranges.mean_hi) || !(ranges.std_lo < ranges.std_hi))
            throw ConfigurationError("descriptor ranges must be non-empty");
        cells_.resize(shape.rows * shape.cols);
    }

    const ArchiveShape& shape() const { return shape_; }
    const DescriptorRanges& ranges() const { return ranges_; }

    Cell cell_of(const Descriptor& d) const {
        return {bin(d.mean, ranges_.mean_lo, ranges_.mean_hi, shape_.rows),
                bin(d.std, ranges_.std_lo, ranges_.std_hi, shape_.cols)};
    }

    std::size_t index(const Cell& c) const { return c.row * shape_.cols + c.col; }
    Cell cell(std::size_t index) const { return {index / shape_.cols, index % shape_.cols}; }

    /// Inserts iff the cell is empty or the candidate is strictly fitter.
    bool insert(const Individual& ind) {
        if (!std::isfinite(ind.descriptor.mean) || !std::isfinite(ind.descriptor.std))
            throw ArgumentError("descriptor must be finite");
        if (!std::isfinite(ind.fitness) || ind.fitness < 0.0) throw ArgumentError("fitness must be finite and non-negative");
        auto& slot = cells_[index(cell_of(ind.descriptor))];
        if (slot && !(ind.fitness > slot->fitness)) return false;
        slot = ind;
        return true;
    }

    const std::optional<Individual>& at(std::size_t index) const { return cells_.at(index); }
    const std::optional<Individual>& at(const Cell& c) const { return cells_.at(index(c)); }

    /// Occupied cell indices in ascending order.
    std::vector<std::size_t> occupied() const {
        std::vector<std::size_t> out;
        for (std::size_t i = 0; i < cells_.size(); ++i)
            if (cells_[i]) out.push_back(i);
        return out;
    }

    std::size_t size() const {
        return static_cast<std::size_t>(std::count_if(cells_.begin(), cells_.end(), [](const auto& c) { return c.has_value(); }));
    }

    const Individual* best() const {
        const Individual* b = nullptr;
        for (const auto& c : cells_)
            if (c && (!b || c->fitness > b->fitness)) b = &*c;
        return b;
    }

private:
    static std::size_t bin(double v, double lo, double hi, std::size_t n) {
        const double t = (v - lo) / (hi - lo) * static_cast<double>(n);
        if (!(t > 0.0)) return 0;
        return std::min(static_cast<std::size_t>(t), n - 1);
    }

    ArchiveShape shape_;
    DescriptorRanges ranges_;
    std::vector<std::optional<Individual>> cells_;
};

struct EvoConfig {
    std::size_t budget = 2000;
    std::size_t init_count = 100;
    double sigma = 0.1;
    std::uint64_t seed = 1;
    /// Offspring per generation. Fixed independently of the worker count so
    /// results do not depend on parallelism.
    std::size_t batch_size = 16;
    std::size_t workers = 1;
    ArchiveShape shape{};

    void validate() const {
        if (init_count < 1) throw ConfigurationError("init_count must be at least 1");
        if (budget < init_count) throw ConfigurationError("budget must be at least init_count");
        if (!(sigma > 0.0)) throw ConfigurationError("sigma must be positive");
        if (batch_size < 1) throw ConfigurationError("batch size must be at least 1");
    }
};

/// Gaussian perturbation of every gene, clamped to [0, 1]. sigma = 0 copies.
template <class Rng>
Genotype mutate(const Genotype& parent, double sigma, Rng& rng) {
    Genotype child = parent;
    if (sigma == 0.0) return child;
    std::normal_distribution<double> noise(0.0, sigma);
    auto perturb = [&](std::vector<double>& genes) {
        for (double& g : genes) g = std::clamp(g + noise(rng), 0.0, 1.0);
    };
    perturb(child.readout_times);
    perturb(child.encoding_genes);
    return child;
}

inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

/// Independent stream for evaluation `index` of a run seeded with `seed`.
inline std::mt19937_64 evaluation_rng(std::uint64_t seed, std::uint64_t index) {
    return std::mt19937_64(splitmix64(splitmix64(seed) ^ splitmix64(index + 0x632BE59BD9B4E019ULL)));
}

template <class E>
concept GenotypeEvaluator = requires(const E& e, const Genotype& g) {
    { e.evaluate(g) } -> std::same_as<EvaluationResult>;
    { e.scheme() } -> std::convertible_to<Scheme>;
    { e.num_readouts() } -> std::convertible_to<std::size_t>;
    { e.num_encoding_genes() } -> std::convertible_to<std::size_t>;
    { e.encoded_range() } -> std::convertible_to<std::pair<double, double>>;
};

struct EvalLogEntry {
    std::size_t eval_index = 0;
    double fitness = 0.0;
    std::optional<Cell> cell;
    bool accepted = false;
    bool diverged = false;
};

struct RunResult {
    Archive archive;
    std::vector<EvalLogEntry> log;
};

/// Runs `jobs` calls of fn(i) on up to `workers` threads. Results must be
/// written by index; exceptions are rethrown on the caller.
inline void parallel_for(std::size_t jobs, std::size_t workers, const std::function<void(std::size_t)>& fn) {
    workers = std::max<std::size_t>(1, std::min(workers, jobs));
    if (workers == 1) {
        for (std::size_t i = 0; i < jobs; ++i) fn(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::vector<std::exception_ptr> errors(workers);
    {
        std::vector<std::jthread> pool;
        pool.reserve(workers);
        for (std::size_t w = 0; w < workers; ++w)
            pool.emplace_back([&, w] {
                try {
                    for (std::size_t i = next++; i < jobs; i = next++) fn(i);
                } catch (...) {
                    errors[w] = std::current_exception();
                    next = jobs;
                }
            });
    }
    for (auto& e : errors)
        if (e) std::rethrow_exception(e);
}

inline std::size_t default_workers() { return std::max(1u, std::thread::hardware_concurrency()); }

/// init_count uniform random genotypes, then mutated copies of uniformly
/// chosen elites until the budget is spent. Each generation of batch_size
/// offspring is produced from the archive as it stood before the generation
/// and inserted in evaluation order.
template <GenotypeEvaluator E>
RunResult run(const E& evaluator, const EvoConfig& config,
              const std::function<void(std::size_t, const Archive&)>& progress = {}) {
    config.validate();
    const auto [lo, hi] = evaluator.encoded_range();
    RunResult out{Archive(config.shape, DescriptorRanges::for_parameter_range(lo, hi)), {}};
    out.log.reserve(config.budget);

    std::vector<Genotype> batch;
    std::vector<EvaluationResult> results;
    std::size_t done = 0;
    while (done < config.budget) {
        const std::size_t n = std::min(config.batch_size, config.budget - done);
        const auto elites = out.archive.occupied();
        batch.clear();
        for (std::size_t j = 0; j < n; ++j) {
            const std::size_t idx = done + j;
            auto rng = evaluation_rng(config.seed, idx);
            if (idx < config.init_count || elites.empty()) {
                batch.push_back(Genotype::random(evaluator.scheme(), evaluator.num_readouts(),
                                                 evaluator.num_encoding_genes(), rng));
            } else {
                std::uniform_int_distribution<std::size_t> pick(0, elites.size() - 1);
                const auto& parent = out.archive.at(elites[pick(rng)])->genotype;
                batch.push_back(mutate(parent, config.sigma, rng));
            }
        }

        results.assign(n, EvaluationResult{});
        parallel_for(n, config.workers, [&](std::size_t j) { results[j] = evaluator.evaluate(batch[j]); });

        for (std::size_t j = 0; j < n; ++j) {
            EvalLogEntry entry{done + j, results[j].fitness, std::nullopt, false, !results[j].ok()};
            if (const auto d = descriptor(results[j])) {
                Individual ind{batch[j], results[j].fitness, *d, done + j};
                entry.cell = out.archive.cell_of(*d);
                entry.accepted = out.archive.insert(ind);
            }
            out.log.push_back(entry);
        }
        done += n;
        if (progress) progress(done, out.archive);
    }
    return out;
}

} // namespace hydrores
