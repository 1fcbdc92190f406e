#pragma once

#include "emkit/dialogue.hpp"
#include "emkit/jsonl.hpp"
#include "emkit/parallel.hpp"
#include "emkit/persona.hpp"
#include "emkit/temporal_qa.hpp"

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace emkit::cli {

namespace fs = std::filesystem;

// Values given on the command line. Each one beats the config file.
struct Overrides {
    std::optional<fs::path> config;
    std::optional<std::uint64_t> seed;
    std::optional<int> jobs;
    std::optional<fs::path> out;
    std::optional<std::string> backend;  // "scripted:PATH" or "http:URL"
    std::optional<int> max_rounds;
};

struct RunConfig {
    std::optional<std::uint64_t> seed;
    int jobs = default_jobs();
    fs::path out_dir = "out";
    std::string language = "English";
    std::string model_name = "model";

    // Backend specs in the make_chat_backend / make_embedder format. Relative
    // fixture paths are already resolved.
    std::optional<nlohmann::json> generation_backend;
    std::optional<nlohmann::json> eval_backend;
    nlohmann::json embedder = {{"kind", "hash"}};

    std::optional<fs::path> event_library;
    std::optional<fs::path> attribute_pools;
    std::optional<fs::path> templates;
    std::optional<fs::path> personas;
    std::optional<fs::path> dataset;

    dialogue::TimePolicy time_policy;
    dialogue::GenLimits limits;
    persona::PlotMix plot_mix;
    std::vector<std::string> common_hints = persona::default_common_hints();
    temporal_qa::QAConfig qa_train = temporal_qa::QAConfig::train_preset();
    temporal_qa::QAConfig qa_eval = temporal_qa::QAConfig::eval_preset();

    std::uint64_t require_seed() const;

    // Parses a config document. Relative paths resolve against base_dir.
    static RunConfig from_json(const nlohmann::json& j, const fs::path& base_dir);
    // Loads --config if given, then applies the other overrides.
    static RunConfig resolve(const Overrides& overrides);
};

// "scripted:PATH" -> {"kind":"scripted","fixture":PATH}; "http:URL" -> {"kind":"http","endpoint":URL}.
nlohmann::json parse_backend_flag(const std::string& flag);

}  // namespace emkit::cli
