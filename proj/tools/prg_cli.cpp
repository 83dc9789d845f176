#include <cstdint>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "prg/runner.hpp"

int main(int argc, char** argv) {
    CLI::App app{"MNAR semi-supervised learning testbed with class-transition guidance"};
    app.require_subcommand(1);

    std::string config_path, grid_path, out_dir, manifest_path;
    std::uint64_t seed = 1;
    std::vector<std::uint64_t> seeds;

    auto* run_cmd = app.add_subcommand("run", "Execute a single training run");
    run_cmd->add_option("--config", config_path, "Experiment config JSON")->required();
    run_cmd->add_option("--seed", seed, "Run seed")->required();
    run_cmd->add_option("--out", out_dir, "Output directory")->required();

    auto* sweep_cmd = app.add_subcommand("sweep", "Run a parameter grid across seeds");
    sweep_cmd->add_option("--config", config_path, "Experiment config JSON")->required();
    sweep_cmd->add_option("--grid", grid_path, "Grid JSON file")->required();
    sweep_cmd->add_option("--seeds", seeds, "Seed list")->required();
    sweep_cmd->add_option("--out", out_dir, "Output directory")->required();

    auto* replay_cmd = app.add_subcommand("replay", "Verify byte-identical reproduction of a manifest");
    replay_cmd->add_option("--manifest", manifest_path, "manifest.json of a previous run")->required();

    auto* dump_cmd = app.add_subcommand("dump-dataset", "Generate a dataset and write CSV splits");
    dump_cmd->add_option("--config", config_path, "Experiment config JSON")->required();
    dump_cmd->add_option("--seed", seed, "Dataset seed")->required();
    dump_cmd->add_option("--out", out_dir, "Output directory")->required();

    CLI11_PARSE(app, argc, argv);

    try {
        if (run_cmd->parsed()) {
            const auto config = prg::ExperimentConfig::load(config_path);
            const auto manifest = prg::run(config, seed, out_dir);
            std::cout << "run complete: seed=" << manifest.seed
                      << " accuracy=" << manifest.final_record.test_accuracy
                      << " gm=" << manifest.final_record.gm << " (" << manifest.duration_seconds
                      << "s)\n";
        } else if (sweep_cmd->parsed()) {
            const auto config = prg::ExperimentConfig::load(config_path);
            std::ifstream grid_file(grid_path);
            if (!grid_file) throw std::runtime_error("cannot open grid file: " + grid_path);
            std::ostringstream grid_text;
            grid_text << grid_file.rdbuf();
            const auto report = prg::sweep(config, grid_text.str(), seeds, out_dir);
            std::cout << report.to_json() << '\n';
            for (const auto& cell : report.cells)
                if (!cell.failures.empty()) return 1;
        } else if (replay_cmd->parsed()) {
            if (!prg::replay(manifest_path)) {
                std::cerr << "replay mismatch: metrics.csv differs\n";
                return 1;
            }
            std::cout << "replay ok\n";
        } else if (dump_cmd->parsed()) {
            const auto config = prg::ExperimentConfig::load(config_path);
            const auto ds = prg::generate_dataset(config.synthetic, config.mnar, seed);
            prg::dump_dataset_csv(ds, out_dir);
            std::cout << "wrote " << ds.labeled.size() << " labeled, " << ds.unlabeled.size()
                      << " unlabeled, " << ds.test.size() << " test samples\n";
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
