// Command-line front end: gen / run / eval / compare / report.

#include <cstdio>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "hwrloop/dataset_io.hpp"
#include "hwrloop/errors.hpp"
#include "hwrloop/harness.hpp"
#include "hwrloop/kernels.hpp"
#include "hwrloop/metrics.hpp"

namespace {

using namespace hwrloop;

int cmd_gen(const std::string& config_path, const std::string& out_dir, bool serial) {
    const ExperimentConfig config = load_config(config_path);
    const LoadedDataset dataset = make_dataset(config, serial ? Exec::Serial : default_exec());
    save_dataset(dataset, out_dir);
    std::cout << "dataset_digest=" << dataset.manifest.dataset_digest
              << " samples=" << dataset.ledger.samples().size()
              << " pages=" << dataset.ledger.pages().size() << "\n";
    return 0;
}

int cmd_run(const std::string& config_path, const std::string& variant_name, std::uint64_t seed,
            const std::string& data_dir, const std::string& out_dir) {
    const ExperimentConfig config = load_config(config_path);
    const Variant variant = variant_from_string(variant_name);
    const LoadedDataset dataset = load_dataset(data_dir);
    if (config_to_json_text(config) != config_to_json_text(dataset.manifest.config))
        throw protocol_error("config does not match the dataset manifest in " + data_dir);

    RunConfig run_config;
    run_config.experiment = config;
    run_config.variant = variant;
    run_config.seed = seed;
    run_config.data_dir = data_dir;
    run_config.out_dir = out_dir;
    const RunResult run = run_experiment(run_config, dataset);
    std::cout << run.summary_csv;
    return 0;
}

void print_aggregate_row(const EvalResult& r, const std::string& split) {
    char buf[160];
    std::snprintf(buf, sizeof(buf), "all,%s,%llu,%llu,%.2f,%.2f,%.2f,%.4f\n", split.c_str(),
                  static_cast<unsigned long long>(r.n_words),
                  static_cast<unsigned long long>(r.n_words_hr), r.crr(), r.wrr(), r.wrr_hr(),
                  r.avg_char_confidence());
    std::cout << buf;
}

int cmd_eval(const std::string& checkpoint_path, const std::string& data_dir,
             const std::string& split) {
    const LoadedDataset dataset = load_dataset(data_dir);
    const CentroidModel model = CentroidModel::load_checkpoint(checkpoint_path);
    if (model.alphabet_size() != dataset.manifest.config.alphabet_size ||
        model.feature_dim() != dataset.manifest.config.feature_dim)
        throw protocol_error("checkpoint dimensions do not match the dataset");

    if (split == "holdout") {
        const auto samples = dataset.ledger.standard_holdout();
        if (samples.empty()) throw protocol_error("dataset has no standard holdout pages");
        std::cout << "user_id,split,n_words,n_words_hr,crr,wrr,wrr_hr,avg_conf\n";
        print_aggregate_row(evaluate(predict_batch(model, samples), samples), split);
        return 0;
    }
    if (split != "validation" && split != "test")
        throw config_error("split must be validation, test or holdout");

    const Role role = role_from_string(split);
    const auto results = per_user_eval(model, dataset.ledger, role);
    std::cout << per_user_csv(results, role);
    EvalResult aggregate;
    for (const auto& [id, r] : results) aggregate.merge(r);
    print_aggregate_row(aggregate, split);
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Deterministic simulator for budgeted, iterative upgrades of a "
                 "handwritten-text-recognition service"};
    app.require_subcommand(1);

    std::string config_path, out_dir, data_dir, variant = "IterTCLm";
    std::string checkpoint_path, split = "test", format = "csv", run_dir;
    std::vector<std::string> compare_dirs;
    std::uint64_t seed = 1;
    bool serial = false;

    auto* gen = app.add_subcommand("gen", "Generate a synthetic dataset");
    gen->add_option("--config", config_path, "Experiment config (JSON)")->required();
    gen->add_option("--out", out_dir, "Output dataset directory")->required();
    gen->add_flag("--serial", serial, "Render pages on a single thread");

    auto* run = app.add_subcommand("run", "Run an experiment variant");
    run->add_option("--config", config_path, "Experiment config (JSON)")->required();
    run->add_option("--variant", variant,
                    "Iter1FT|Iter1CL|IterTCLm|SwapS1|SwapS2|WorstWrrAblation|RandomAblation");
    run->add_option("--seed", seed, "Run seed (training-time randomness)");
    run->add_option("--data", data_dir, "Dataset directory from gen")->required();
    run->add_option("--out", out_dir, "Run output directory")->required();

    auto* eval = app.add_subcommand("eval", "Evaluate a checkpoint on a split");
    eval->add_option("--checkpoint", checkpoint_path, "Checkpoint JSON file")->required();
    eval->add_option("--data", data_dir, "Dataset directory")->required();
    eval->add_option("--split", split, "validation|test|holdout");

    auto* compare = app.add_subcommand("compare", "Compare completed runs");
    compare->add_option("dirs", compare_dirs, "Run directories")->expected(-2);

    auto* report = app.add_subcommand("report", "Re-emit a run's results");
    report->add_option("--run", run_dir, "Run directory")->required();
    report->add_option("--format", format, "csv|json");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    try {
        if (gen->parsed()) return cmd_gen(config_path, out_dir, serial);
        if (run->parsed()) return cmd_run(config_path, variant, seed, data_dir, out_dir);
        if (eval->parsed()) return cmd_eval(checkpoint_path, data_dir, split);
        if (compare->parsed()) {
            std::cout << hwrloop::compare_runs(compare_dirs);
            return 0;
        }
        if (report->parsed()) {
            std::cout << hwrloop::report_from_run_dir(run_dir, format);
            return 0;
        }
    } catch (const hwrloop::config_error& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const hwrloop::protocol_error& e) {
        std::cerr << "protocol error: " << e.what() << "\n";
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
