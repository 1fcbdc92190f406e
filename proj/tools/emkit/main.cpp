#include "commands.hpp"

#include <CLI11.hpp>
#include <fmt/format.h>

#include <iostream>

namespace {

using emkit::cli::Overrides;

void add_common(CLI::App* cmd, Overrides& o, std::string& config, std::string& out) {
    cmd->add_option("--config", config, "JSON run configuration")->check(CLI::ExistingFile);
    cmd->add_option("--out", out, "Output directory");
    cmd->add_option_function<std::uint64_t>("--seed", [&o](std::uint64_t v) { o.seed = v; }, "Global seed");
    cmd->add_option_function<int>("--jobs", [&o](int v) { o.jobs = v; }, "Worker threads")
        ->check(CLI::PositiveNumber);
    cmd->add_option_function<std::string>("--backend", [&o](const std::string& v) { o.backend = v; },
                                          "scripted:PATH or http:URL");
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Episodic-memory dialogue data generation and evaluation toolkit", "emkit"};
    app.require_subcommand(1);

    Overrides o;
    std::string config, out;
    int count = 0;
    std::optional<int> dialogue_count;
    std::string dataset, stats_path, human, results;

    auto* personas = app.add_subcommand("gen-personas", "Generate character cards");
    add_common(personas, o, config, out);
    personas->add_option("--count", count, "Number of cards")->required()->check(CLI::NonNegativeNumber);

    auto* dialogues = app.add_subcommand("gen-dialogues", "Generate EM-Train dialogues and training samples");
    add_common(dialogues, o, config, out);
    dialogues->add_option_function<int>("--count", [&](int v) { dialogue_count = v; },
                                        "Number of dialogues (default: one per persona)")
        ->check(CLI::NonNegativeNumber);
    dialogues->add_option_function<int>("--max-rounds", [&o](int v) { o.max_rounds = v; }, "Round cap")
        ->check(CLI::PositiveNumber);

    auto* qa = app.add_subcommand("gen-temporal-qa", "Generate temporal-QA training and evaluation sets");
    add_common(qa, o, config, out);

    auto* ev = app.add_subcommand("eval", "Evaluate a model on an EM-Test or temporal-QA file");
    add_common(ev, o, config, out);
    ev->add_option("--dataset", dataset, "Dataset file (default: paths.dataset)")->check(CLI::ExistingFile);

    auto* st = app.add_subcommand("stats", "Print statistics for a dataset or corpus file");
    st->add_option("path", stats_path, "JSONL file")->required()->check(CLI::ExistingFile);
    st->add_option("--out", out, "Also write stats.json here");

    auto* corr = app.add_subcommand("correlate", "Correlate human scores with similarity results");
    corr->add_option("--human", human, "Human-score JSONL")->required()->check(CLI::ExistingFile);
    corr->add_option("--results", results, "Results JSONL")->required()->check(CLI::ExistingFile);
    corr->add_option("--out", out, "Also write correlation.json here");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : 2;
    }

    try {
        if (!config.empty()) o.config = config;
        if (!out.empty()) o.out = out;
        std::optional<emkit::cli::fs::path> out_dir;
        if (!out.empty()) out_dir = out;

        if (st->parsed()) {
            emkit::cli::cmd_stats(stats_path, out_dir, std::cout, std::cerr);
        } else if (corr->parsed()) {
            emkit::cli::cmd_correlate(human, results, out_dir, std::cout);
        } else {
            const auto cfg = emkit::cli::RunConfig::resolve(o);
            if (personas->parsed()) {
                emkit::cli::cmd_gen_personas(cfg, count, std::cerr);
            } else if (dialogues->parsed()) {
                emkit::cli::cmd_gen_dialogues(cfg, dialogue_count, std::cerr);
            } else if (qa->parsed()) {
                emkit::cli::cmd_gen_temporal_qa(cfg, std::cerr);
            } else if (ev->parsed()) {
                emkit::cli::fs::path path = dataset;
                if (dataset.empty()) {
                    if (!cfg.dataset) throw emkit::PreconditionError("no dataset given (--dataset or paths.dataset)");
                    path = *cfg.dataset;
                }
                emkit::cli::cmd_eval(cfg, path, std::cout, std::cerr);
            }
        }
    } catch (const std::exception& e) {
        std::cerr << "emkit: " << e.what() << '\n';
        return emkit::cli::exit_code_for(e);
    }
    return 0;
}
