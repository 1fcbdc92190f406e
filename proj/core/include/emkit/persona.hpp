#pragma once

#include "emkit/backends.hpp"
#include "emkit/error.hpp"
#include "emkit/jsonl.hpp"

#include <filesystem>
#include <map>
#include <optional>
#include <random>
#include <string>
#include <string_view>
#include <vector>

namespace emkit::persona {

using Rng = std::mt19937_64;

struct CharacterCard {
    std::string name;
    std::string occupation;
    int age = 0;
    std::string gender;
    std::vector<std::string> hobbies;
    std::vector<std::string> personality;
    std::string social_relationships;

    // Throws InvariantError unless all seven attributes are populated.
    void validate() const;
    OrderedJson to_json() const;
    static CharacterCard from_json(const nlohmann::json& j);
    bool operator==(const CharacterCard&) const = default;
};

// Raised when the chat backend fails while writing social relationships.
// Carries the six sampled attributes so the caller can retry just that step.
class CardGenerationError : public BackendError {
public:
    CardGenerationError(const std::string& what, CharacterCard partial)
        : BackendError(what), partial_(std::move(partial)) {}
    const CharacterCard& partial() const noexcept { return partial_; }

private:
    CharacterCard partial_;
};

// Pools for the six randomly drawn attributes, keyed by attribute name:
// name, occupation, age, gender, hobbies, personality.
struct AttributePools {
    std::map<std::string, std::vector<std::string>, std::less<>> values;
    int hobbies_per_card = 2;
    int traits_per_card = 2;

    static AttributePools parse(std::string_view jsonl);
    static AttributePools load(const std::filesystem::path& path);
    static AttributePools defaults();
    void validate() const;
};

// Six attributes from the pools; social relationships from `chat` (sent
// under `agent`) or from a fixed template when no backend is given.
CharacterCard generate_character_card(Rng& rng, const AttributePools& pools,
                                      backends::ChatBackend* chat = nullptr,
                                      std::string_view agent = "persona");

std::string default_social_relationships(const CharacterCard& card);

enum class EventKind { Common, Real, Hallucinatory, Farewell };

std::string_view to_string(EventKind kind);
std::optional<EventKind> event_kind_from_string(std::string_view text);

struct Event {
    std::string id;
    EventKind kind = EventKind::Common;
    std::string description;
    // Real events that probe an earlier one ("do you remember X") name the
    // event that must precede them.
    std::optional<std::string> after;
    // Short form shown to the assistant for hallucinatory events.
    std::optional<std::string> hint;

    OrderedJson to_json() const;
    static Event from_json(const nlohmann::json& j);
    bool operator==(const Event&) const = default;
};

class LibraryError : public DataError {
public:
    using DataError::DataError;
};

class EventLibrary {
public:
    EventLibrary() = default;
    explicit EventLibrary(std::vector<Event> events);

    static EventLibrary parse(std::string_view jsonl);
    static EventLibrary load(const std::filesystem::path& path);
    static EventLibrary defaults();

    const std::vector<Event>& events() const noexcept { return events_; }
    std::vector<const Event*> of_kind(EventKind kind) const;
    const Event* find(std::string_view id) const;

private:
    std::vector<Event> events_;
};

enum class ShufflePolicy {
    Random,        // uniformly random among orderings respecting `after`
    LibraryOrder   // keep library order (which must already respect `after`)
};

struct PlotMix {
    int real = 9;
    int hallucinatory = 4;
    int common = 6;
    ShufflePolicy shuffle = ShufflePolicy::Random;

    int total() const noexcept { return real + hallucinatory + common; }
};

inline constexpr int kPlotLength = 20;

struct Plot {
    std::vector<Event> events;

    // Length 20, Farewell last and only last, unique ids, every `after`
    // dependency present and earlier.
    void validate() const;
    std::vector<const Event*> of_kind(EventKind kind) const;
};

// Draws the configured counts per kind without replacement, orders them, and
// appends a Farewell event.
Plot sample_plot(Rng& rng, const EventLibrary& library, const PlotMix& mix = {});

struct PromptPair {
    std::string human_prompt;
    std::string assistant_prompt;
};

// Text templates with {{name}} placeholders and {{#name}}...{{/name}}
// sections that render only when the named list is non-empty.
struct PromptTemplates {
    std::string human;
    std::string assistant;

    static PromptTemplates defaults();
    static PromptTemplates load(const std::filesystem::path& dir);
};

std::string render_template(std::string_view tmpl,
                            const std::map<std::string, std::string, std::less<>>& values,
                            const std::map<std::string, bool, std::less<>>& sections);

std::vector<std::string> default_common_hints();

std::string format_card(const CharacterCard& card);

PromptPair render_prompts(const CharacterCard& card, const Plot& plot,
                          const std::vector<std::string>& common_hints,
                          const PromptTemplates& templates = PromptTemplates::defaults(),
                          std::string_view language = "English");

}  // namespace emkit::persona
