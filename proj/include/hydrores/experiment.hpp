#pragma once

// Experiment orchestration behind the command-line tool: configuration,
// per-seed MAP-Elites runs, manifests, replay and encoding comparison.

#include <hydrores/errors.hpp>
#include <hydrores/evolution.hpp>
#include <hydrores/io.hpp>
#include <hydrores/reservoir.hpp>
#include <hydrores/stats.hpp>
#include <hydrores/tasks.hpp>

#include <nlohmann/json.hpp>

#include <chrono>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace hydrores {

inline constexpr std::string_view kVersion = "0.1.0";

struct RegressionConfig {
    std::size_t n_train = 8;
    int digits = 3;
    std::size_t n_test = 200;
    std::uint64_t test_seed = 2024;
};

struct ExperimentConfig {
    TaskKind task = TaskKind::Xnor;
    Scheme scheme = Scheme::Amplitude;
    std::size_t budget = 2000;
    std::size_t init_count = 100;
    std::size_t batch_size = 16;
    double sigma = 0.1;
    std::vector<std::uint64_t> seeds{1};
    /// 0 picks the available hardware parallelism.
    std::size_t workers = 0;
    ArchiveShape shape{};
    ReservoirConfig reservoir{};
    RegressionConfig regression{};
    std::filesystem::path out = "runs";
    bool debug_fields = false;

    std::size_t effective_workers() const { return workers == 0 ? default_workers() : workers; }

    EvoConfig evo(std::uint64_t seed) const {
        EvoConfig e;
        e.budget = budget;
        e.init_count = init_count;
        e.sigma = sigma;
        e.seed = seed;
        e.batch_size = batch_size;
        e.workers = effective_workers();
        e.shape = shape;
        return e;
    }

    Dataset dataset() const {
        return task == TaskKind::Xnor ? xnor_dataset() : sigmoid_dataset(regression.n_train, regression.digits);
    }

    void validate() const {
        if (seeds.empty()) throw ConfigurationError("at least one seed is required");
        for (std::size_t i = 0; i < seeds.size(); ++i)
            for (std::size_t j = i + 1; j < seeds.size(); ++j)
                if (seeds[i] == seeds[j]) throw ConfigurationError("seeds must be distinct");
        if (out.empty()) throw ConfigurationError("output directory must be set");
        if (regression.n_test < 1) throw ConfigurationError("n_test must be at least 1");
        evo(seeds.front()).validate();
        reservoir.validate();
        Reservoir(reservoir, dataset(), scheme);
    }
};

// JSON -------------------------------------------------------------------

namespace detail {

/// Copies j[key] into dst when present.
template <class T>
void take(const nlohmann::json& j, const char* key, T& dst) {
    if (auto it = j.find(key); it != j.end()) {
        try {
            dst = it->get<T>();
        } catch (const nlohmann::json::exception&) {
            throw ConfigurationError(std::string("bad value for '") + key + "'");
        }
    }
}

inline void only_keys(const nlohmann::json& j, std::initializer_list<std::string_view> keys, std::string_view where) {
    if (!j.is_object()) throw ConfigurationError(std::string(where) + " must be an object");
    for (const auto& [k, v] : j.items())
        if (std::find(keys.begin(), keys.end(), k) == keys.end())
            throw ConfigurationError("unknown key '" + k + "' in " + std::string(where));
}

inline const nlohmann::json* section(const nlohmann::json& j, const char* key) {
    auto it = j.find(key);
    return it == j.end() ? nullptr : &*it;
}

} // namespace detail

inline nlohmann::json to_json(const ExperimentConfig& c) {
    const auto& r = c.reservoir;
    return {
        {"task", to_string(c.task)},
        {"scheme", to_string(c.scheme)},
        {"budget", c.budget},
        {"init_count", c.init_count},
        {"batch_size", c.batch_size},
        {"sigma", c.sigma},
        {"seeds", c.seeds},
        {"workers", c.workers},
        {"archive", {{"rows", c.shape.rows}, {"cols", c.shape.cols}}},
        {"grid", {{"length", r.grid.length}, {"points", r.grid.num_points}}},
        {"solver",
         {{"lambda", r.solver.lambda},
          {"dt", r.solver.dt},
          {"dealias", r.solver.dealias},
          {"height_bound", r.solver.height_bound},
          {"blowup_threshold", r.solver.blowup_threshold}}},
        {"detection",
         {{"position", r.detection.position},
          {"interpolation", r.detection.interpolation == Interpolation::Linear ? "linear" : "nearest"}}},
        {"soliton",
         {{"u0", r.u0}, {"height", r.soliton_height}, {"wavenumber", r.soliton_wavenumber}, {"center", r.soliton_center}}},
        {"window", {{"scale", r.window.scale}, {"order", r.window.order}}},
        {"bounds",
         {{"amp_min", r.bounds.amp_min},
          {"amp_max", r.bounds.amp_max},
          {"freq_min", r.bounds.freq_min},
          {"freq_max", r.bounds.freq_max},
          {"t_max", r.bounds.t_max}}},
        {"regression",
         {{"n_train", c.regression.n_train},
          {"digits", c.regression.digits},
          {"n_test", c.regression.n_test},
          {"test_seed", c.regression.test_seed}}},
        {"out", c.out.generic_string()},
        {"debug_fields", c.debug_fields},
    };
}

/// Overlays the keys present in j onto c. Unknown keys are rejected.
inline void apply_json(ExperimentConfig& c, const nlohmann::json& j) {
    using detail::take;
    detail::only_keys(j,
                      {"task", "scheme", "budget", "init_count", "batch_size", "sigma", "seeds", "workers", "archive",
                       "grid", "solver", "detection", "soliton", "window", "bounds", "regression", "out",
                       "debug_fields"},
                      "config");
    std::string s;
    if (j.contains("task")) {
        take(j, "task", s);
        c.task = parse_task(s);
    }
    if (j.contains("scheme")) {
        take(j, "scheme", s);
        c.scheme = parse_scheme(s);
    }
    take(j, "budget", c.budget);
    take(j, "init_count", c.init_count);
    take(j, "batch_size", c.batch_size);
    take(j, "sigma", c.sigma);
    take(j, "seeds", c.seeds);
    take(j, "workers", c.workers);
    take(j, "debug_fields", c.debug_fields);
    if (j.contains("out")) {
        take(j, "out", s);
        c.out = s;
    }

    auto& r = c.reservoir;
    if (const auto* a = detail::section(j, "archive")) {
        detail::only_keys(*a, {"rows", "cols"}, "archive");
        take(*a, "rows", c.shape.rows);
        take(*a, "cols", c.shape.cols);
    }
    if (const auto* g = detail::section(j, "grid")) {
        detail::only_keys(*g, {"length", "points"}, "grid");
        double length = r.grid.length;
        std::size_t points = r.grid.num_points;
        take(*g, "length", length);
        take(*g, "points", points);
        r.grid = SpatialGrid::centered(length, points);
    }
    if (const auto* sv = detail::section(j, "solver")) {
        detail::only_keys(*sv, {"lambda", "dt", "dealias", "height_bound", "blowup_threshold"}, "solver");
        take(*sv, "lambda", r.solver.lambda);
        take(*sv, "dt", r.solver.dt);
        take(*sv, "dealias", r.solver.dealias);
        take(*sv, "height_bound", r.solver.height_bound);
        take(*sv, "blowup_threshold", r.solver.blowup_threshold);
    }
    if (const auto* d = detail::section(j, "detection")) {
        detail::only_keys(*d, {"position", "interpolation"}, "detection");
        take(*d, "position", r.detection.position);
        if (d->contains("interpolation")) {
            take(*d, "interpolation", s);
            if (s == "linear")
                r.detection.interpolation = Interpolation::Linear;
            else if (s == "nearest")
                r.detection.interpolation = Interpolation::Nearest;
            else
                throw ConfigurationError("interpolation must be 'linear' or 'nearest'");
        }
    }
    if (const auto* so = detail::section(j, "soliton")) {
        detail::only_keys(*so, {"u0", "height", "wavenumber", "center"}, "soliton");
        take(*so, "u0", r.u0);
        take(*so, "height", r.soliton_height);
        take(*so, "wavenumber", r.soliton_wavenumber);
        take(*so, "center", r.soliton_center);
    }
    if (const auto* w = detail::section(j, "window")) {
        detail::only_keys(*w, {"scale", "order"}, "window");
        take(*w, "scale", r.window.scale);
        take(*w, "order", r.window.order);
    }
    if (const auto* b = detail::section(j, "bounds")) {
        detail::only_keys(*b, {"amp_min", "amp_max", "freq_min", "freq_max", "t_max"}, "bounds");
        take(*b, "amp_min", r.bounds.amp_min);
        take(*b, "amp_max", r.bounds.amp_max);
        take(*b, "freq_min", r.bounds.freq_min);
        take(*b, "freq_max", r.bounds.freq_max);
        take(*b, "t_max", r.bounds.t_max);
    }
    if (const auto* rg = detail::section(j, "regression")) {
        detail::only_keys(*rg, {"n_train", "digits", "n_test", "test_seed"}, "regression");
        take(*rg, "n_train", c.regression.n_train);
        take(*rg, "digits", c.regression.digits);
        take(*rg, "n_test", c.regression.n_test);
        take(*rg, "test_seed", c.regression.test_seed);
    }
}

inline ExperimentConfig config_from_json(const nlohmann::json& j) {
    ExperimentConfig c;
    apply_json(c, j);
    return c;
}

// Scoring ----------------------------------------------------------------

struct EliteScore {
    std::size_t id = 0;
    std::size_t row = 0;
    std::size_t col = 0;
    double fitness = 0.0;
    double condition = 0.0;
    bool exact = false;
    double train_residual = 0.0;
    double test_mse = std::numeric_limits<double>::quiet_NaN();
    std::size_t failed_points = 0;
};

/// Trains the readout of one genotype and scores it on the test inputs.
/// Divergent test simulations are counted and left out of the error.
inline EliteScore score_elite(const Reservoir& res, const io::ArchiveRow& elite, std::span<const double> test_x) {
    EliteScore s{elite.id, elite.row, elite.col, elite.fitness};
    LinearReadout w;
    try {
        w = res.train(elite.genotype);
    } catch (const DivergenceError&) {
        s.failed_points = test_x.size();
        return s;
    }
    s.condition = w.condition;
    s.exact = w.exact;
    s.train_residual = w.residual;
    KdvSolver solver(res.config().grid, res.config().solver);
    std::vector<double> pred, target;
    for (double x : test_x) {
        const std::vector<double> xv{x};
        try {
            pred.push_back(w.apply(res.observe(elite.genotype, xv, solver)));
            target.push_back(sigmoid(x));
        } catch (const DivergenceError&) {
            ++s.failed_points;
        }
    }
    if (!pred.empty()) s.test_mse = mse(pred, target);
    return s;
}

inline std::vector<EliteScore> score_archive(const Reservoir& res, std::span<const io::ArchiveRow> elites,
                                             std::span<const double> test_x, std::size_t workers) {
    std::vector<EliteScore> out(elites.size());
    parallel_for(elites.size(), workers, [&](std::size_t i) { out[i] = score_elite(res, elites[i], test_x); });
    return out;
}

inline void write_scores_csv(const std::filesystem::path& path, std::span<const EliteScore> scores) {
    io::CsvWriter w(path);
    w.header({"id", "row", "col", "fitness", "condition", "exact", "train_residual", "test_mse", "failed_points"});
    for (const auto& s : scores) {
        w.cell(s.id).cell(s.row).cell(s.col).cell(s.fitness).cell(s.condition).cell(s.exact).cell(s.train_residual);
        w.cell(std::isfinite(s.test_mse) ? io::format_double(s.test_mse) : std::string("nan")).cell(s.failed_points);
        w.end_row();
    }
}

inline nlohmann::json correlation_json(std::span<const EliteScore> scores) {
    std::vector<FitnessMse> pairs;
    for (const auto& s : scores) pairs.push_back({s.fitness, s.test_mse});
    try {
        const auto r = fitness_mse_correlation(pairs);
        return {{"pairs_used", r.pairs_used},
                {"spearman_rho", r.spearman.rho},
                {"spearman_p", r.spearman.p_value},
                {"loglog_slope", r.loglog.slope},
                {"loglog_intercept", r.loglog.intercept},
                {"loglog_r_squared", r.loglog.r_squared},
                {"loglog_f", r.loglog.f_statistic},
                {"loglog_p", r.loglog.p_value}};
    } catch (const InsufficientDataError& e) {
        return {{"error", e.what()}};
    }
}

/// Training-set predictions of one genotype, with XNOR accuracy when the
/// targets are binary (threshold 0.5).
inline nlohmann::json training_report(const Reservoir& res, const Genotype& g) {
    const auto r = res.build_readout_matrix(g);
    const auto& y = res.dataset().targets();
    const auto w = hydrores::train(r, y);
    std::vector<double> pred;
    std::size_t correct = 0;
    for (Eigen::Index i = 0; i < r.values.rows(); ++i) {
        const Eigen::RowVectorXd rv = r.values.row(i);
        const std::vector<double> row(rv.data(), rv.data() + rv.size());
        pred.push_back(w.apply(row));
        if ((pred.back() >= 0.5 ? 1.0 : 0.0) == y[static_cast<std::size_t>(i)]) ++correct;
    }
    nlohmann::json j{{"condition", w.condition}, {"exact", w.exact}, {"train_residual", w.residual},
                     {"predictions", pred}};
    std::vector<double> wv;
    for (Eigen::Index k = 0; k < w.weights.size(); ++k) wv.push_back(static_cast<double>(w.weights(k)));
    j["weights"] = wv;
    if (std::all_of(y.begin(), y.end(), [](double v) { return v == 0.0 || v == 1.0; }))
        j["accuracy"] = static_cast<double>(correct) / static_cast<double>(y.size());
    return j;
}

// Runs -------------------------------------------------------------------

struct SeedOutcome {
    std::uint64_t seed = 0;
    bool ok = false;
    std::string error;
    std::filesystem::path dir;
    std::vector<io::ArchiveRow> elites;
    std::vector<EliteScore> scores;
    double seconds = 0.0;
};

struct ExperimentOutcome {
    nlohmann::json manifest;
    std::vector<SeedOutcome> seeds;
    bool ok() const { return manifest.value("status", "") == "ok"; }
};

inline std::filesystem::path seed_dir(const std::filesystem::path& out, std::uint64_t seed) {
    return out / ("seed_" + std::to_string(seed));
}

using ProgressFn = std::function<void(std::uint64_t seed, std::size_t done, const Archive&)>;

/// Runs every seed and writes, under config.out:
///   seed_<s>/archive.csv, seed_<s>/log.csv, seed_<s>/fitness_mse.csv (regression),
///   merged_archive.csv, report.json and manifest.json.
/// A failing seed is recorded in the manifest and the remaining seeds still run.
inline ExperimentOutcome run_experiment(const ExperimentConfig& config, const ProgressFn& progress = {}) {
    namespace fs = std::filesystem;
    using clock = std::chrono::steady_clock;
    config.validate();
    fs::create_directories(config.out);

    const Reservoir res(config.reservoir, config.dataset(), config.scheme);
    const auto [lo, hi] = res.encoded_range();
    const auto ranges = DescriptorRanges::for_parameter_range(lo, hi);
    std::vector<double> test_x;
    if (config.task == TaskKind::Regression) test_x = test_points(config.regression.n_test, config.regression.test_seed);

    ExperimentOutcome outcome;
    nlohmann::json seeds_json = nlohmann::json::array();
    nlohmann::json report_seeds = nlohmann::json::array();
    std::vector<std::vector<io::ArchiveRow>> all_elites;
    std::vector<EliteScore> all_scores;

    for (std::uint64_t seed : config.seeds) {
        SeedOutcome so;
        so.seed = seed;
        so.dir = seed_dir(config.out, seed);
        const auto start = clock::now();
        nlohmann::json sj{{"seed", seed}, {"dir", so.dir.lexically_relative(config.out).generic_string()}};
        nlohmann::json rj{{"seed", seed}};
        try {
            fs::create_directories(so.dir);
            std::function<void(std::size_t, const Archive&)> cb;
            if (progress) cb = [&](std::size_t done, const Archive& a) { progress(seed, done, a); };
            const RunResult run_result = run(res, config.evo(seed), cb);
            so.elites = io::archive_rows(run_result.archive);
            io::write_archive_csv(so.dir / "archive.csv", so.elites);
            io::write_log_csv(so.dir / "log.csv", run_result.log);
            sj["archive"] = "archive.csv";
            sj["log"] = "log.csv";

            const std::size_t diverged = static_cast<std::size_t>(
                std::count_if(run_result.log.begin(), run_result.log.end(), [](const auto& e) { return e.diverged; }));
            rj["elites"] = so.elites.size();
            rj["evaluations"] = run_result.log.size();
            rj["diverged"] = diverged;
            if (const auto* best = run_result.archive.best()) {
                rj["best_fitness"] = best->fitness;
                rj["best_id"] = run_result.archive.index(run_result.archive.cell_of(best->descriptor));
                rj["best_training"] = training_report(res, best->genotype);
                if (config.debug_fields) {
                    fs::create_directories(so.dir / "fields");
                    for (std::size_t i = 0; i < res.dataset().size(); ++i)
                        io::write_field_csv(so.dir / "fields" / ("best_obs" + std::to_string(i) + "_t0.csv"),
                                            res.initial_condition(best->genotype, res.dataset().observations()[i]));
                }
            }

            if (config.task == TaskKind::Regression) {
                so.scores = score_archive(res, so.elites, test_x, config.effective_workers());
                write_scores_csv(so.dir / "fitness_mse.csv", so.scores);
                sj["fitness_mse"] = "fitness_mse.csv";
                rj["correlation"] = correlation_json(so.scores);
                double best_mse = std::numeric_limits<double>::infinity();
                for (const auto& s : so.scores)
                    if (std::isfinite(s.test_mse)) best_mse = std::min(best_mse, s.test_mse);
                if (std::isfinite(best_mse)) rj["lowest_test_mse"] = best_mse;
                all_scores.insert(all_scores.end(), so.scores.begin(), so.scores.end());
            }
            so.ok = true;
            all_elites.push_back(so.elites);
        } catch (const std::exception& e) {
            so.error = e.what();
        }
        so.seconds = std::chrono::duration<double>(clock::now() - start).count();
        sj["status"] = so.ok ? "ok" : "error";
        if (!so.ok) sj["error"] = so.error;
        sj["seconds"] = so.seconds;
        seeds_json.push_back(sj);
        report_seeds.push_back(rj);
        outcome.seeds.push_back(std::move(so));
    }

    const auto merged = io::merge_archives(all_elites);
    io::write_archive_csv(config.out / "merged_archive.csv", merged);

    nlohmann::json report{{"task", to_string(config.task)}, {"scheme", to_string(config.scheme)}, {"seeds", report_seeds}};
    report["merged"] = {{"elites", merged.size()}};
    if (!merged.empty())
        report["merged"]["best_fitness"] =
            std::max_element(merged.begin(), merged.end(), [](const auto& a, const auto& b) { return a.fitness < b.fitness; })
                ->fitness;
    if (config.task == TaskKind::Regression) {
        report["test_seed"] = config.regression.test_seed;
        report["pooled_correlation"] = correlation_json(all_scores);
    }
    io::write_json(config.out / "report.json", report);

    const bool all_ok = std::all_of(outcome.seeds.begin(), outcome.seeds.end(), [](const auto& s) { return s.ok; });
    ExperimentConfig effective = config;
    effective.workers = config.effective_workers();
    outcome.manifest = {
        {"version", kVersion},
        {"config", to_json(effective)},
        {"archive",
         {{"rows", config.shape.rows},
          {"cols", config.shape.cols},
          {"mean_range", {ranges.mean_lo, ranges.mean_hi}},
          {"std_range", {ranges.std_lo, ranges.std_hi}}}},
        {"seeds", seeds_json},
        {"merged_archive", "merged_archive.csv"},
        {"report", "report.json"},
        {"status", all_ok ? "ok" : "error"},
    };
    io::write_json(config.out / "manifest.json", outcome.manifest);
    return outcome;
}

// Replay -----------------------------------------------------------------

struct LoadedRun {
    std::filesystem::path dir;
    nlohmann::json manifest;
    ExperimentConfig config;
};

/// Accepts a manifest file or the directory holding one.
inline LoadedRun load_run(const std::filesystem::path& manifest_or_dir) {
    namespace fs = std::filesystem;
    fs::path path = manifest_or_dir;
    if (fs::is_directory(path)) path /= "manifest.json";
    LoadedRun r;
    r.dir = path.parent_path();
    r.manifest = io::read_json(path);
    if (!r.manifest.contains("config")) throw ConfigurationError("manifest has no config");
    r.config = config_from_json(r.manifest.at("config"));
    r.config.out = r.dir;
    return r;
}

inline std::vector<io::ArchiveRow> load_seed_archive(const LoadedRun& run, std::uint64_t seed) {
    for (const auto& s : run.manifest.at("seeds"))
        if (s.at("seed").get<std::uint64_t>() == seed) {
            if (!s.contains("archive")) throw LookupError("seed " + std::to_string(seed) + " has no archive");
            return io::read_archive_csv(run.dir / s.at("dir").get<std::string>() / s.at("archive").get<std::string>());
        }
    throw LookupError("seed " + std::to_string(seed) + " is not part of this run");
}

struct ReplayRequest {
    std::uint64_t seed = 0;
    /// Archive cell id; ignored when random_seed is set.
    std::size_t id = 0;
    /// Replay a uniform random genotype drawn with this seed instead of an elite.
    std::optional<std::uint64_t> random_seed;
    std::filesystem::path out;
    bool debug_fields = false;
};

/// Re-simulates one genotype and writes traces.csv, readouts.csv,
/// readout_matrix.csv, predictions.csv and replay.json into request.out.
inline nlohmann::json replay(const LoadedRun& run, const ReplayRequest& req) {
    namespace fs = std::filesystem;
    const auto& cfg = run.config;
    const Reservoir res(cfg.reservoir, cfg.dataset(), cfg.scheme);

    Genotype g;
    std::optional<double> archived;
    if (req.random_seed) {
        std::mt19937_64 rng(*req.random_seed);
        g = Genotype::random(cfg.scheme, res.num_readouts(), res.num_encoding_genes(), rng);
    } else {
        const auto rows = load_seed_archive(run, req.seed);
        auto it = std::find_if(rows.begin(), rows.end(), [&](const auto& r) { return r.id == req.id; });
        if (it == rows.end())
            throw LookupError("no elite with id " + std::to_string(req.id) + " in seed " + std::to_string(req.seed));
        g = it->genotype;
        archived = it->fitness;
    }
    res.check_genotype(g);
    fs::create_directories(req.out);

    const auto& bounds = cfg.reservoir.bounds;
    const auto times = readout_times(g, bounds);
    KdvSolver solver(cfg.reservoir.grid, cfg.reservoir.solver);

    io::CsvWriter traces(req.out / "traces.csv");
    traces.header({"observation", "step", "time", "height"});
    io::CsvWriter readouts(req.out / "readouts.csv");
    readouts.header({"observation", "readout", "time", "height"});
    for (std::size_t i = 0; i < res.dataset().size(); ++i) {
        const auto& x = res.dataset().observations()[i];
        const WaveField init = res.initial_condition(g, x);
        const Trace tr = solver.trace(init, cfg.reservoir.detection, bounds.t_max);
        for (std::size_t n = 0; n < tr.times.size(); ++n) {
            traces.cell(i).cell(n).cell(tr.times[n]).cell(tr.heights[n]);
            traces.end_row();
        }
        const auto r = res.observe(g, x, solver);
        for (std::size_t j = 0; j < r.size(); ++j) {
            readouts.cell(i).cell(j).cell(times[j]).cell(r[j]);
            readouts.end_row();
        }
        if (req.debug_fields) {
            fs::create_directories(req.out / "fields");
            const std::string stem = "obs" + std::to_string(i);
            io::write_field_csv(req.out / "fields" / (stem + "_t0.csv"), init);
            for (std::size_t j = 0; j < times.size(); ++j)
                io::write_field_csv(req.out / "fields" / (stem + "_r" + std::to_string(j) + ".csv"),
                                    solver.advance(init, times[j]));
        }
    }

    const auto result = res.evaluate(g);
    io::write_matrix_csv(req.out / "readout_matrix.csv", result.readout.values, times);

    nlohmann::json j{{"seed", req.seed}, {"fitness", result.fitness}, {"status", result.ok() ? "ok" : "diverged"},
                     {"genotype", io::genotype_to_json(g)}, {"readout_times", times}};
    if (req.random_seed)
        j["random_seed"] = *req.random_seed;
    else
        j["id"] = req.id;
    if (archived) {
        j["archived_fitness"] = *archived;
        j["matches_archive"] = result.fitness == *archived;
    }
    if (result.ok()) {
        j["training"] = training_report(res, g);
        io::CsvWriter pw(req.out / "predictions.csv");
        if (cfg.task == TaskKind::Regression) {
            const auto test_x = test_points(cfg.regression.n_test, cfg.regression.test_seed);
            const auto w = res.train(g);
            pw.header({"x", "target", "prediction"});
            std::vector<double> pred, target;
            for (double x : test_x) {
                const std::vector<double> xv{x};
                std::string p = "nan";
                try {
                    pred.push_back(w.apply(res.observe(g, xv, solver)));
                    target.push_back(sigmoid(x));
                    p = io::format_double(pred.back());
                } catch (const DivergenceError&) {
                }
                pw.cell(x).cell(sigmoid(x)).cell(std::string_view(p));
                pw.end_row();
            }
            if (!pred.empty()) j["test_mse"] = mse(pred, target);
            j["test_points"] = test_x.size();
            j["failed_points"] = test_x.size() - pred.size();
        } else {
            const auto& preds = j["training"]["predictions"];
            pw.header({"observation", "target", "prediction", "label"});
            for (std::size_t i = 0; i < res.dataset().size(); ++i) {
                const double p = preds[i].get<double>();
                pw.cell(i).cell(res.dataset().targets()[i]).cell(p).cell(p >= 0.5 ? 1 : 0);
                pw.end_row();
            }
        }
    }
    io::write_json(req.out / "replay.json", j);
    return j;
}

// Comparison -------------------------------------------------------------

/// Final-archive fitness of every seed of a run.
inline std::vector<double> pooled_fitness(const LoadedRun& run) {
    std::vector<double> out;
    for (const auto& s : run.manifest.at("seeds")) {
        if (s.value("status", "") != "ok") continue;
        for (const auto& r : load_seed_archive(run, s.at("seed").get<std::uint64_t>())) out.push_back(r.fitness);
    }
    return out;
}

/// One-sided test that amplitude-encoded elites are fitter. Writes
/// compare.json and histogram.csv (log10 fitness bins, zero fitness counted apart).
inline nlohmann::json compare_encodings(std::span<const double> amplitude, std::span<const double> frequency,
                                        const std::filesystem::path& out, std::size_t bins = 30) {
    if (amplitude.empty() || frequency.empty()) throw InsufficientDataError("both encodings need at least one elite");
    const auto mw = stats::mann_whitney_greater(amplitude, frequency);
    nlohmann::json j{{"alternative", "amplitude > frequency"},
                     {"u", mw.u},
                     {"z", mw.z},
                     {"p_value", mw.p_value},
                     {"n_amplitude", mw.n1},
                     {"n_frequency", mw.n2},
                     {"median_amplitude", mw.median1},
                     {"median_frequency", mw.median2}};

    double lo = std::numeric_limits<double>::infinity(), hi = -lo;
    for (auto s : {amplitude, frequency})
        for (double f : s)
            if (f > 0.0) {
                lo = std::min(lo, std::log10(f));
                hi = std::max(hi, std::log10(f));
            }
    if (!std::isfinite(lo)) lo = hi = 0.0;
    if (hi <= lo) hi = lo + 1.0;
    auto histogram = [&](std::span<const double> s) {
        std::vector<std::size_t> h(bins + 1, 0);  // last slot: zero fitness
        for (double f : s) {
            if (!(f > 0.0)) {
                ++h[bins];
                continue;
            }
            const auto b = static_cast<std::size_t>((std::log10(f) - lo) / (hi - lo) * static_cast<double>(bins));
            ++h[std::min(b, bins - 1)];
        }
        return h;
    };
    const auto ha = histogram(amplitude), hf = histogram(frequency);
    std::filesystem::create_directories(out);
    io::CsvWriter w(out / "histogram.csv");
    w.header({"log10_lo", "log10_hi", "amplitude", "frequency"});
    const double width = (hi - lo) / static_cast<double>(bins);
    for (std::size_t b = 0; b < bins; ++b) {
        w.cell(lo + width * static_cast<double>(b)).cell(lo + width * static_cast<double>(b + 1)).cell(ha[b]).cell(hf[b]);
        w.end_row();
    }
    w.cell(std::string_view("zero")).cell(std::string_view("zero")).cell(ha[bins]).cell(hf[bins]);
    w.end_row();
    io::write_json(out / "compare.json", j);
    return j;
}

// Dataset export ---------------------------------------------------------

/// dataset.csv with one column per feature plus the target; regression also
/// writes test_points.csv.
inline void export_dataset(const ExperimentConfig& cfg, const std::filesystem::path& out) {
    std::filesystem::create_directories(out);
    const Dataset d = cfg.dataset();
    io::CsvWriter w(out / "dataset.csv");
    std::vector<std::string> h;
    for (std::size_t f = 0; f < d.spec().features.size(); ++f) h.push_back("x" + std::to_string(f));
    h.push_back("y");
    w.header(h);
    for (std::size_t i = 0; i < d.size(); ++i) {
        for (double v : d.observations()[i]) w.cell(v);
        w.cell(d.targets()[i]);
        w.end_row();
    }
    if (cfg.task == TaskKind::Regression) {
        io::CsvWriter t(out / "test_points.csv");
        t.header({"x", "y"});
        for (double x : test_points(cfg.regression.n_test, cfg.regression.test_seed)) {
            t.cell(x).cell(sigmoid(x));
            t.end_row();
        }
    }
}

} // namespace hydrores
