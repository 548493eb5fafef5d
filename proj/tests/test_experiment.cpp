#include <hydrores/experiment.hpp>

#include <gtest/gtest.h>

#include <fstream>
#include <sstream>

using namespace hydrores;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
    const auto p = fs::temp_directory_path() / ("hydrores_" + name);
    fs::remove_all(p);
    return p;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

ExperimentConfig smoke_config(const fs::path& out) {
    ExperimentConfig c;
    c.task = TaskKind::Xnor;
    c.budget = 50;
    c.init_count = 20;
    c.workers = 1;
    c.out = out;
    return c;
}

} // namespace

TEST(Config, JsonRoundTrip) {
    ExperimentConfig c;
    c.task = TaskKind::Regression;
    c.scheme = Scheme::Frequency;
    c.budget = 123;
    c.seeds = {4, 9};
    c.reservoir.detection.position = -7.5;
    c.reservoir.bounds.t_max = 22.0;
    c.reservoir.grid = SpatialGrid::centered(100.0, 320);
    c.regression.test_seed = 77;
    const auto back = config_from_json(to_json(c));
    EXPECT_EQ(to_json(back), to_json(c));
    EXPECT_EQ(back.reservoir.grid, c.reservoir.grid);
    EXPECT_EQ(back.seeds, c.seeds);
}

TEST(Config, PartialOverlayAndUnknownKeys) {
    ExperimentConfig c;
    apply_json(c, nlohmann::json::parse(R"({"budget": 10, "solver": {"dt": 0.01}})"));
    EXPECT_EQ(c.budget, 10u);
    EXPECT_EQ(c.reservoir.solver.dt, 0.01);
    EXPECT_EQ(c.reservoir.solver.lambda, 1.0 / 3.0);
    EXPECT_THROW(apply_json(c, nlohmann::json::parse(R"({"budgte": 10})")), ConfigurationError);
    EXPECT_THROW(apply_json(c, nlohmann::json::parse(R"({"solver": {"stepsize": 1}})")), ConfigurationError);
    EXPECT_THROW(apply_json(c, nlohmann::json::parse(R"({"budget": "many"})")), ConfigurationError);
}

TEST(Config, Validation) {
    auto c = smoke_config("x");
    c.seeds.clear();
    EXPECT_THROW(c.validate(), ConfigurationError);
    c = smoke_config("x");
    c.seeds = {3, 3};
    EXPECT_THROW(c.validate(), ConfigurationError);
    c = smoke_config("x");
    c.reservoir.solver.dt = 1.0;
    EXPECT_THROW(c.validate(), ConfigurationError);
    c = smoke_config("x");
    c.reservoir.detection.position = 100.0;
    EXPECT_THROW(c.validate(), ConfigurationError);
}

TEST(RunExperiment, SmokeRunIsReplayable) {
    const auto dir = scratch("smoke");
    const auto outcome = run_experiment(smoke_config(dir));
    ASSERT_TRUE(outcome.ok());
    const auto rows = io::read_archive_csv(dir / "seed_1" / "archive.csv");
    ASSERT_GE(rows.size(), 1u);
    EXPECT_TRUE(fs::exists(dir / "seed_1" / "log.csv"));
    EXPECT_TRUE(fs::exists(dir / "merged_archive.csv"));
    EXPECT_TRUE(fs::exists(dir / "report.json"));

    const auto run = load_run(dir);
    EXPECT_EQ(run.manifest.at("version"), std::string(kVersion));
    ReplayRequest rq;
    rq.seed = 1;
    rq.id = rows.back().id;
    rq.out = dir / "replay";
    const auto j = replay(run, rq);
    EXPECT_TRUE(j.at("matches_archive").get<bool>());
    EXPECT_EQ(j.at("fitness").get<double>(), rows.back().fitness);

    const auto traces = io::read_csv(dir / "replay" / "traces.csv");
    const auto& cfg = run.config.reservoir;
    const auto per_obs = static_cast<std::size_t>(std::ceil(cfg.bounds.t_max / cfg.solver.dt)) + 1;
    EXPECT_EQ(traces.rows.size(), 4 * per_obs);
    EXPECT_EQ(io::read_csv(dir / "replay" / "readouts.csv").rows.size(), 16u);
    EXPECT_EQ(io::read_csv(dir / "replay" / "readout_matrix.csv").rows.size(), 4u);
    EXPECT_EQ(io::read_csv(dir / "replay" / "predictions.csv").rows.size(), 4u);

    rq.id = 100000;
    EXPECT_THROW(replay(run, rq), LookupError);
    rq.seed = 99;
    EXPECT_THROW(replay(run, rq), LookupError);
}

TEST(RunExperiment, ByteIdenticalOutputs) {
    const auto a = scratch("det_a"), b = scratch("det_b");
    auto ca = smoke_config(a);
    ca.budget = 80;
    auto cb = ca;
    cb.out = b;
    cb.workers = 3;
    run_experiment(ca);
    run_experiment(cb);
    for (const char* f : {"seed_1/archive.csv", "seed_1/log.csv", "merged_archive.csv"})
        EXPECT_EQ(slurp(a / f), slurp(b / f)) << f;
}

TEST(RunExperiment, MergeKeepsBestPerCell) {
    const auto dir = scratch("merge");
    auto c = smoke_config(dir);
    c.seeds = {1, 2};
    ASSERT_TRUE(run_experiment(c).ok());
    const auto s1 = io::read_archive_csv(dir / "seed_1" / "archive.csv");
    const auto s2 = io::read_archive_csv(dir / "seed_2" / "archive.csv");
    const auto merged = io::read_archive_csv(dir / "merged_archive.csv");
    for (const auto& m : merged) {
        double best = -1.0;
        for (const auto* s : {&s1, &s2})
            for (const auto& r : *s)
                if (r.id == m.id) best = std::max(best, r.fitness);
        EXPECT_EQ(m.fitness, best);
    }
}

TEST(RunExperiment, RegressionWritesFitnessMsePairs) {
    const auto dir = scratch("regression");
    auto c = smoke_config(dir);
    c.task = TaskKind::Regression;
    c.budget = 24;
    c.init_count = 24;
    c.regression.n_test = 5;
    ASSERT_TRUE(run_experiment(c).ok());
    const auto t = io::read_csv(dir / "seed_1" / "fitness_mse.csv");
    EXPECT_EQ(t.rows.size(), io::read_archive_csv(dir / "seed_1" / "archive.csv").size());
    const auto report = io::read_json(dir / "report.json");
    EXPECT_TRUE(report.contains("pooled_correlation"));

    const auto run = load_run(dir);
    ReplayRequest rq;
    rq.seed = 1;
    rq.random_seed = 3;
    rq.out = dir / "replay_random";
    rq.debug_fields = true;
    const auto j = replay(run, rq);
    EXPECT_FALSE(j.contains("archived_fitness"));
    EXPECT_EQ(io::read_csv(dir / "replay_random" / "predictions.csv").rows.size(), 5u);
    EXPECT_TRUE(fs::exists(dir / "replay_random" / "fields" / "obs0_t0.csv"));
}

TEST(RunExperiment, FailedSeedYieldsErrorManifest) {
    const auto dir = scratch("failing");
    auto c = smoke_config(dir);
    c.seeds = {1, 2};
    fs::create_directories(dir);
    std::ofstream(dir / "seed_2") << "a file where a directory should be";
    const auto outcome = run_experiment(c);
    EXPECT_FALSE(outcome.ok());
    const auto m = io::read_json(dir / "manifest.json");
    EXPECT_EQ(m.at("status"), "error");
    EXPECT_EQ(m.at("seeds")[0].at("status"), "ok");
    EXPECT_EQ(m.at("seeds")[1].at("status"), "error");
    EXPECT_TRUE(fs::exists(dir / "seed_1" / "archive.csv"));
}

TEST(Compare, NullAndSeparatedSamples) {
    const auto dir = scratch("compare");
    const std::vector<double> same{0.1, 0.5, 0.9, 2.0, 3.0};
    auto j = compare_encodings(same, same, dir);
    EXPECT_NEAR(j.at("p_value").get<double>(), 0.5, 0.1);
    const std::vector<double> hi(30, 1.0), lo(30, 0.0);
    j = compare_encodings(hi, lo, dir);
    EXPECT_LT(j.at("p_value").get<double>(), 1e-10);
    EXPECT_TRUE(fs::exists(dir / "histogram.csv"));
    EXPECT_THROW(compare_encodings(hi, std::vector<double>{}, dir), InsufficientDataError);
}

TEST(ExportDataset, WritesTrainingAndTestSets) {
    const auto dir = scratch("export");
    ExperimentConfig c;
    c.task = TaskKind::Regression;
    export_dataset(c, dir);
    EXPECT_EQ(io::read_csv(dir / "dataset.csv").rows.size(), 8u);
    EXPECT_EQ(io::read_csv(dir / "test_points.csv").rows.size(), 200u);
}

TEST(Io, NumbersRoundTrip) {
    for (double v : {0.1, 1.0 / 3.0, -2.5e-300, 123456789.0})
        EXPECT_EQ(io::parse_double(io::format_double(v)), v);
    EXPECT_THROW(io::parse_double("1.0x"), Error);
}

TEST(Io, GenotypeRecordRoundTrip) {
    const Genotype g{Scheme::Frequency, {0.1, 0.2}, {0.3, 1.0, 0.0}};
    EXPECT_EQ(io::genotype_from_json(io::genotype_to_json(g)), g);
    const auto rec = io::genotype_record(g);
    EXPECT_EQ(io::parse_genotype_record(rec, 2), g);
}
