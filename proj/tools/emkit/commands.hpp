#pragma once

#include "run_config.hpp"

#include "emkit/persona.hpp"

#include <exception>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace emkit::cli {

// Output file names, all relative to the output directory.
inline constexpr const char* kPersonasFile = "personas.jsonl";
inline constexpr const char* kPlotsFile = "plots.jsonl";
inline constexpr const char* kEmTrainFile = "em_train.jsonl";
inline constexpr const char* kTrainingSamplesFile = "training_samples.jsonl";
inline constexpr const char* kQaTrainFile = "temporal_qa_train.jsonl";
inline constexpr const char* kQaEvalFile = "temporal_qa_eval.jsonl";
inline constexpr const char* kResultsFile = "results.jsonl";
inline constexpr const char* kReportJsonFile = "report.json";
inline constexpr const char* kReportTextFile = "report.txt";
inline constexpr const char* kStatsFile = "stats.json";
inline constexpr const char* kCorrelationFile = "correlation.json";

struct PersonaEntry {
    std::string id;
    persona::CharacterCard card;

    OrderedJson to_json() const;
    static PersonaEntry from_json(const nlohmann::json& j);
};

std::vector<PersonaEntry> load_personas(const fs::path& path);

void cmd_gen_personas(const RunConfig& config, int count, std::ostream& log);

// count defaults to one dialogue per persona.
void cmd_gen_dialogues(const RunConfig& config, std::optional<int> count, std::ostream& log);

void cmd_gen_temporal_qa(const RunConfig& config, std::ostream& log);

// EM-Test datasets get the similarity report; temporal-QA files get keyword
// pass rates. The text report goes to `out`.
void cmd_eval(const RunConfig& config, const fs::path& dataset, std::ostream& out, std::ostream& log);

// Prints the table matching the file's record type. Writes stats.json when
// out_dir is given.
void cmd_stats(const fs::path& path, const std::optional<fs::path>& out_dir, std::ostream& out,
               std::ostream& log);

void cmd_correlate(const fs::path& human, const fs::path& results,
                   const std::optional<fs::path>& out_dir, std::ostream& out);

// 2 data/config errors, 3 backend errors, 4 invariant violations, 1 otherwise.
int exit_code_for(const std::exception& e);

}  // namespace emkit::cli
