#include "commands.hpp"

#include "emkit/backends.hpp"
#include "emkit/dialogue.hpp"
#include "emkit/emtest.hpp"
#include "emkit/error.hpp"
#include "emkit/eval.hpp"
#include "emkit/parallel.hpp"
#include "emkit/temporal_qa.hpp"

#include <fmt/format.h>
#include <fmt/ostream.h>

#include <atomic>
#include <fstream>
#include <ostream>
#include <random>

namespace emkit::cli {

namespace {

enum class Stream : std::uint32_t { Persona = 1, Dialogue = 2 };

persona::Rng item_rng(std::uint64_t seed, Stream stream, std::size_t index) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(index),
                      static_cast<std::uint32_t>(static_cast<std::uint64_t>(index) >> 32)};
    return persona::Rng(seq);
}

template <typename T>
void write_lines(const fs::path& path, const std::vector<T>& items) {
    std::vector<OrderedJson> lines;
    lines.reserve(items.size());
    for (const auto& item : items) lines.push_back(item.to_json());
    write_jsonl(path, lines);
}

persona::EventLibrary library_for(const RunConfig& c) {
    return c.event_library ? persona::EventLibrary::load(*c.event_library) : persona::EventLibrary::defaults();
}

persona::AttributePools pools_for(const RunConfig& c) {
    return c.attribute_pools ? persona::AttributePools::load(*c.attribute_pools)
                             : persona::AttributePools::defaults();
}

persona::PromptTemplates templates_for(const RunConfig& c) {
    return c.templates ? persona::PromptTemplates::load(*c.templates) : persona::PromptTemplates::defaults();
}

std::unique_ptr<backends::ChatBackend> eval_backend_for(const RunConfig& c) {
    if (!c.eval_backend) throw PreconditionError("no evaluation backend configured (--backend or \"eval_backend\")");
    nlohmann::json spec = *c.eval_backend;
    // evaluation decodes greedily unless the config says otherwise
    if (spec.value("kind", "") == "http" && !spec.contains("temperature")) spec["temperature"] = 0.0;
    return backends::make_chat_backend(spec);
}

// First non-blank line of a JSONL file, or null for an empty file.
nlohmann::json first_record(const fs::path& path) {
    nlohmann::json first;
    bool found = false;
    const std::string text = read_text(path);
    for_each_jsonl(std::string_view(text), [&](std::size_t, const nlohmann::json& j) {
        if (!found) {
            first = j;
            found = true;
        }
    });
    return first;
}

bool is_qa_record(const nlohmann::json& j) { return j.is_object() && j.contains("family"); }

struct PlotEntry {
    std::string id;
    persona::Plot plot;

    OrderedJson to_json() const {
        OrderedJson j;
        j["id"] = id;
        OrderedJson events = OrderedJson::array();
        for (const auto& e : plot.events) events.push_back(e.id);
        j["events"] = std::move(events);
        return j;
    }
};

}  // namespace

OrderedJson PersonaEntry::to_json() const {
    OrderedJson j;
    j["id"] = id;
    j["card"] = card.to_json();
    return j;
}

PersonaEntry PersonaEntry::from_json(const nlohmann::json& j) {
    PersonaEntry e;
    e.id = j.at("id").get<std::string>();
    e.card = persona::CharacterCard::from_json(j.at("card"));
    e.card.validate();
    return e;
}

std::vector<PersonaEntry> load_personas(const fs::path& path) {
    std::vector<PersonaEntry> out;
    for_each_jsonl(path, [&](std::size_t, const nlohmann::json& j) { out.push_back(PersonaEntry::from_json(j)); });
    return out;
}

void cmd_gen_personas(const RunConfig& config, int count, std::ostream& log) {
    if (count < 0) throw PreconditionError("--count must be >= 0");
    const std::uint64_t seed = config.require_seed();
    const auto pools = pools_for(config);
    pools.validate();
    std::unique_ptr<backends::ChatBackend> chat;
    if (config.generation_backend) chat = backends::make_chat_backend(*config.generation_backend);

    std::vector<PersonaEntry> entries(static_cast<std::size_t>(count));
    parallel_for(entries.size(), config.jobs, [&](std::size_t i) {
        auto rng = item_rng(seed, Stream::Persona, i);
        PersonaEntry e;
        e.id = fmt::format("persona-{:05}", i);
        e.card = persona::generate_character_card(rng, pools, chat.get(), e.id + "/persona");
        entries[i] = std::move(e);
    });
    const fs::path out = config.out_dir / kPersonasFile;
    write_lines(out, entries);
    fmt::print(log, "wrote {} character cards to {}\n", entries.size(), out.string());
}

void cmd_gen_dialogues(const RunConfig& config, std::optional<int> count, std::ostream& log) {
    const std::uint64_t seed = config.require_seed();
    if (!config.generation_backend) {
        throw PreconditionError("no generation backend configured (--backend or \"generation_backend\")");
    }
    const fs::path personas_path = config.personas.value_or(config.out_dir / kPersonasFile);
    if (!fs::exists(personas_path)) {
        throw DataError(fmt::format("persona file not found: {} (run gen-personas first)", personas_path.string()));
    }
    const auto personas = load_personas(personas_path);
    const int n = count.value_or(static_cast<int>(personas.size()));
    if (n < 0) throw PreconditionError("--count must be >= 0");
    if (n > 0 && personas.empty()) throw DataError("persona file is empty");

    const auto library = library_for(config);
    const auto templates = templates_for(config);
    auto chat = backends::make_chat_backend(*config.generation_backend);

    struct Slot {
        std::optional<dialogue::EMTrainRecord> record;
        PlotEntry plot;
        std::string skipped;
    };
    std::vector<Slot> slots(static_cast<std::size_t>(n));
    parallel_for(slots.size(), config.jobs, [&](std::size_t i) {
        auto rng = item_rng(seed, Stream::Dialogue, i);
        const auto& who = personas[i % personas.size()];
        Slot& slot = slots[i];
        slot.plot.id = fmt::format("plot-{:05}", i);
        slot.plot.plot = persona::sample_plot(rng, library, config.plot_mix);
        const auto prompts =
            persona::render_prompts(who.card, slot.plot.plot, config.common_hints, templates, config.language);
        const dialogue::DialogueRequest request{fmt::format("dialogue-{:05}", i), who.id, slot.plot.id};
        try {
            slot.record = dialogue::generate_dialogue(*chat, request, prompts, config.time_policy, config.limits, rng);
        } catch (const InvariantError& e) {
            // a broken record is dropped; the rest of the batch continues
            slot.skipped = e.what();
        }
    });

    std::vector<OrderedJson> records, samples, plots;
    for (const auto& slot : slots) {
        if (!slot.record) {
            fmt::print(log, "skipped {}: {}\n", slot.plot.id, slot.skipped);
            continue;
        }
        records.push_back(slot.record->to_json());
        samples.push_back(dialogue::to_training_sample(*slot.record).to_json());
        plots.push_back(slot.plot.to_json());
    }
    write_jsonl(config.out_dir / kEmTrainFile, records);
    write_jsonl(config.out_dir / kTrainingSamplesFile, samples);
    write_jsonl(config.out_dir / kPlotsFile, plots);
    fmt::print(log, "wrote {} dialogues ({} skipped) to {}\n", records.size(), slots.size() - records.size(),
               config.out_dir.string());
}

void cmd_gen_temporal_qa(const RunConfig& config, std::ostream& log) {
    const std::uint64_t seed = config.require_seed();
    config.qa_train.validate();
    config.qa_eval.validate();
    // the two splits draw from different seeds so they never share items
    const auto train = temporal_qa::synthesize(config.qa_train, seed);
    const auto test = temporal_qa::synthesize(config.qa_eval, seed ^ 0x9e3779b97f4a7c15ULL);
    write_lines(config.out_dir / kQaTrainFile, train);
    write_lines(config.out_dir / kQaEvalFile, test);
    fmt::print(log, "wrote {} training and {} evaluation items to {}\n", train.size(), test.size(),
               config.out_dir.string());
}

void cmd_eval(const RunConfig& config, const fs::path& dataset, std::ostream& out, std::ostream& log) {
    auto model = eval_backend_for(config);
    const eval::RunOptions options{config.jobs};
    std::string model_name = config.model_name;
    if (config.eval_backend && config.eval_backend->contains("model") && model_name == "model") {
        model_name = (*config.eval_backend)["model"].get<std::string>();
    }

    if (is_qa_record(first_record(dataset))) {
        std::vector<temporal_qa::QAItem> items;
        for_each_jsonl(dataset, [&](std::size_t, const nlohmann::json& j) {
            items.push_back(temporal_qa::QAItem::from_json(j));
        });
        const auto results = eval::run_keyword_eval(*model, items, options);
        const auto report = eval::aggregate_keywords(results);
        write_lines(config.out_dir / kResultsFile, results);
        write_text(config.out_dir / kReportJsonFile, report.to_json().dump(2) + "\n");
        const std::string text = report.to_text(model_name);
        write_text(config.out_dir / kReportTextFile, text);
        out << text;
        std::size_t failed = 0;
        for (const auto& r : results) failed += r.error ? 1 : 0;
        if (!results.empty() && failed == results.size()) {
            throw BackendError(fmt::format("every request failed ({}); backend unreachable?", results.front().error.value()));
        }
        return;
    }

    const auto data = emtest::load_dataset(dataset);
    auto embedder = backends::make_embedder(config.embedder);
    const auto results = eval::run_eval(*model, data, *embedder, options);
    const auto report = eval::aggregate(results);
    write_lines(config.out_dir / kResultsFile, results);
    write_text(config.out_dir / kReportJsonFile, report.to_json().dump(2) + "\n");
    const std::string text = report.to_text(model_name);
    write_text(config.out_dir / kReportTextFile, text);
    out << text;
    std::size_t failed = 0;
    for (const auto& r : results) failed += r.error ? 1 : 0;
    if (report.flagged > 0) fmt::print(log, "{} of {} points flagged\n", report.flagged, results.size());
    if (!results.empty() && failed == results.size()) {
        throw BackendError(fmt::format("every request failed ({}); backend unreachable?", results.front().error.value()));
    }
}

void cmd_stats(const fs::path& path, const std::optional<fs::path>& out_dir, std::ostream& out,
               std::ostream& log) {
    const auto first = first_record(path);
    OrderedJson summary;
    if (first.is_object() && first.contains("meta") && first.contains("turns")) {
        std::vector<dialogue::EMTrainRecord> records;
        for_each_jsonl(path, [&](std::size_t, const nlohmann::json& j) {
            records.push_back(dialogue::EMTrainRecord::from_json(j));
        });
        const auto s = emtest::corpus_stats(records);
        out << s.to_text();
        summary = s.to_json();
    } else if (is_qa_record(first)) {
        temporal_qa::QAConfig counts;
        for_each_jsonl(path, [&](std::size_t, const nlohmann::json& j) {
            const auto item = temporal_qa::QAItem::from_json(j);
            counts.set(item.family, item.horizon, counts.count(item.family, item.horizon) + 1);
        });
        out << fmt::format("{:<26}{:>7}{:>7}{:>7}\n", "Family", "Short", "Long", "Total");
        std::array<int, 2> totals{};
        for (auto f : temporal_qa::kFamilies) {
            const int s = counts.count(f, temporal_qa::Horizon::Short);
            const int l = counts.count(f, temporal_qa::Horizon::Long);
            totals[0] += s;
            totals[1] += l;
            out << fmt::format("{:<26}{:>7}{:>7}{:>7}\n", temporal_qa::to_string(f), s, l, s + l);
            summary[std::string(temporal_qa::to_string(f))] = {{"short", s}, {"long", l}};
        }
        out << fmt::format("{:<26}{:>7}{:>7}{:>7}\n", "Overall Number", totals[0], totals[1], totals[0] + totals[1]);
        summary["overall"] = {{"short", totals[0]}, {"long", totals[1]}, {"total", totals[0] + totals[1]}};
    } else {
        const auto data = emtest::load_dataset(path);
        const auto table = emtest::stats(data);
        out << table.to_text();
        summary = table.to_json();
        for (const auto& w : emtest::lint_spans(data, emtest::SpanWindows::defaults())) {
            fmt::print(log, "warning: {}: {}\n", w.point_id, w.message);
        }
    }
    if (out_dir) write_text(*out_dir / kStatsFile, summary.dump(2) + "\n");
}

void cmd_correlate(const fs::path& human, const fs::path& results,
                   const std::optional<fs::path>& out_dir, std::ostream& out) {
    const auto scores = eval::load_human_scores(human);
    const auto points = eval::load_results(results);
    const auto rows = eval::correlate_by_difficulty(scores, points);
    OrderedJson doc = OrderedJson::object();
    for (const auto& row : rows) {
        out << fmt::format("{:<5} n={:<4} r={:.3f} {}\n", emtest::to_string(row.difficulty), row.n,
                           row.correlation.r, eval::to_string(row.correlation.label));
        OrderedJson j;
        j["n"] = row.n;
        j["r"] = row.correlation.r;
        j["label"] = eval::to_string(row.correlation.label);
        doc[std::string(emtest::to_string(row.difficulty))] = std::move(j);
    }
    if (out_dir) write_text(*out_dir / kCorrelationFile, doc.dump(2) + "\n");
}

int exit_code_for(const std::exception& e) {
    const auto* err = dynamic_cast<const Error*>(&e);
    if (err == nullptr) return 1;
    switch (err->category()) {
        case ErrorCategory::Data:
        case ErrorCategory::Precondition:
            return 2;
        case ErrorCategory::Backend:
            return 3;
        case ErrorCategory::Invariant:
            return 4;
    }
    return 1;
}

}  // namespace emkit::cli
