// hydrores: run, replay and compare KdV reservoir experiments.

#include <hydrores/experiment.hpp>

#include <CLI11.hpp>

#include <iostream>

using namespace hydrores;
namespace fs = std::filesystem;

namespace {

struct RunFlags {
    std::string config_path;
    std::string task;
    std::string scheme;
    std::optional<std::size_t> budget;
    std::vector<std::uint64_t> seeds;
    std::string out;
    std::optional<std::size_t> workers;
    bool debug_fields = false;
    bool quiet = false;
};

ExperimentConfig resolve(const RunFlags& f) {
    ExperimentConfig c;
    if (!f.config_path.empty()) apply_json(c, io::read_json(f.config_path));
    if (!f.task.empty()) c.task = parse_task(f.task);
    if (!f.scheme.empty()) c.scheme = parse_scheme(f.scheme);
    if (f.budget) c.budget = *f.budget;
    if (!f.seeds.empty()) c.seeds = f.seeds;
    if (!f.out.empty()) c.out = f.out;
    if (f.workers) c.workers = *f.workers;
    if (f.debug_fields) c.debug_fields = true;
    return c;
}

void add_common(CLI::App* cmd, RunFlags& f) {
    cmd->add_option("--config", f.config_path, "JSON config file; flags override its values")->check(CLI::ExistingFile);
    cmd->add_option("--task", f.task, "xnor or regression");
    cmd->add_option("--scheme", f.scheme, "amplitude or frequency");
    cmd->add_option("--out", f.out, "output directory");
}

int cmd_run(const RunFlags& f) {
    const ExperimentConfig cfg = resolve(f);
    ProgressFn progress;
    if (!f.quiet)
        progress = [&](std::uint64_t seed, std::size_t done, const Archive& a) {
            if (done % 200 != 0 && done != cfg.budget) return;
            const auto* best = a.best();
            std::cerr << "seed " << seed << ": " << done << "/" << cfg.budget << " evals, " << a.size()
                      << " elites, best " << (best ? best->fitness : 0.0) << "\n";
        };
    const auto outcome = run_experiment(cfg, progress);
    for (const auto& s : outcome.seeds)
        if (!s.ok) std::cerr << "seed " << s.seed << " failed: " << s.error << "\n";
    std::cout << (cfg.out / "manifest.json").string() << "\n";
    return outcome.ok() ? 0 : 1;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"KdV shallow-water reservoir computing with MAP-Elites"};
    app.require_subcommand(1);
    app.set_version_flag("--version", std::string(kVersion));

    RunFlags rf;
    auto* run_cmd = app.add_subcommand("run", "evolve reservoirs for every seed and write archives");
    add_common(run_cmd, rf);
    run_cmd->add_option("--budget", rf.budget, "fitness evaluations per seed");
    run_cmd->add_option("--seeds", rf.seeds, "comma-separated seeds")->delimiter(',');
    run_cmd->add_option("--workers", rf.workers, "evaluation threads, 0 for all cores");
    run_cmd->add_flag("--debug-fields", rf.debug_fields, "dump initial fields of each seed's best elite");
    run_cmd->add_flag("--quiet,-q", rf.quiet, "no progress output");

    std::string manifest;
    ReplayRequest rq;
    std::optional<std::uint64_t> random_seed;
    std::string replay_out;
    auto* replay_cmd = app.add_subcommand("replay", "re-simulate one archived genotype");
    replay_cmd->add_option("manifest", manifest, "manifest.json or its run directory")->required();
    replay_cmd->add_option("--seed", rq.seed, "seed whose archive holds the elite");
    replay_cmd->add_option("--id", rq.id, "archive cell id (row * cols + col)");
    replay_cmd->add_option("--random", random_seed, "replay a random genotype drawn with this seed instead");
    replay_cmd->add_option("--out", replay_out, "output directory");
    replay_cmd->add_flag("--debug-fields", rq.debug_fields, "dump fields at t=0 and each readout time");

    std::vector<std::string> amp_runs, freq_runs;
    std::string compare_out = "compare";
    auto* compare_cmd = app.add_subcommand("compare", "Mann-Whitney test of amplitude against frequency elites");
    compare_cmd->add_option("--amplitude", amp_runs, "amplitude run directories or manifests")->required();
    compare_cmd->add_option("--frequency", freq_runs, "frequency run directories or manifests")->required();
    compare_cmd->add_option("--out", compare_out, "output directory");

    RunFlags ef;
    auto* export_cmd = app.add_subcommand("export-dataset", "write the task's training set (and test points)");
    add_common(export_cmd, ef);

    CLI11_PARSE(app, argc, argv);

    try {
        if (*run_cmd) return cmd_run(rf);

        if (*replay_cmd) {
            const auto run = load_run(manifest);
            rq.random_seed = random_seed;
            if (!replay_cmd->count("--seed")) rq.seed = run.config.seeds.front();
            rq.out = replay_out.empty()
                         ? run.dir / (random_seed ? "replay_random_" + std::to_string(*random_seed)
                                                  : "replay_seed" + std::to_string(rq.seed) + "_id" + std::to_string(rq.id))
                         : fs::path(replay_out);
            const auto j = replay(run, rq);
            std::cout << j.dump(2) << "\n";
            return 0;
        }

        if (*compare_cmd) {
            std::vector<double> amp, freq;
            for (const auto& p : amp_runs) {
                const auto f = pooled_fitness(load_run(p));
                amp.insert(amp.end(), f.begin(), f.end());
            }
            for (const auto& p : freq_runs) {
                const auto f = pooled_fitness(load_run(p));
                freq.insert(freq.end(), f.begin(), f.end());
            }
            std::cout << compare_encodings(amp, freq, compare_out).dump(2) << "\n";
            return 0;
        }

        if (*export_cmd) {
            const auto cfg = resolve(ef);
            export_dataset(cfg, cfg.out);
            std::cout << (cfg.out / "dataset.csv").string() << "\n";
            return 0;
        }
    } catch (const LookupError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 0;
}
