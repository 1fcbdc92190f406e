#pragma once

#include "emkit/backends.hpp"
#include "emkit/calendar.hpp"
#include "emkit/jsonl.hpp"
#include "emkit/persona.hpp"
#include "emkit/types.hpp"

#include <cstddef>
#include <random>
#include <string>
#include <utility>
#include <vector>

namespace emkit::dialogue {

using Rng = std::mt19937_64;
using calendar::CivilDateTime;

struct Turn {
    Role role = Role::User;
    std::string content;
    std::size_t index = 0;

    bool operator==(const Turn&) const = default;
};

class History {
public:
    void append(Role role, std::string content);
    const std::vector<Turn>& turns() const noexcept { return turns_; }
    std::size_t size() const noexcept { return turns_.size(); }

private:
    std::vector<Turn> turns_;
};

struct TimePolicy {
    double session_continue_probability = 0.7;
    std::pair<std::int64_t, std::int64_t> within_session_gap{30, 30 * 60};
    std::pair<std::int64_t, std::int64_t> between_session_gap{6 * 3600, 400LL * 86'400};
    std::pair<CivilDateTime, CivilDateTime> start_window{
        CivilDateTime::make(2000, 1, 1), CivilDateTime::make(2030, 12, 31, 23, 59, 59)};

    // Throws PreconditionError on an inconsistent policy.
    void validate() const;
    static TimePolicy from_json(const nlohmann::json& j);
};

CivilDateTime random_start_time(const TimePolicy& policy, Rng& rng);

// Strictly later than `current`: a within-session gap with probability
// session_continue_probability, otherwise a between-session gap.
CivilDateTime random_next_time(const CivilDateTime& current, const TimePolicy& policy, Rng& rng);

struct GenLimits {
    int max_rounds = 60;
    std::vector<std::string> farewell_phrases{"goodbye", "talk to you later"};

    void validate() const;
    static GenLimits from_json(const nlohmann::json& j);
};

bool contains_farewell(std::string_view text, const GenLimits& limits);

// True when either latest message contains a farewell phrase
// (case-insensitive), or `rounds` exceeds the round cap.
bool stopping_met(std::string_view latest_user, std::string_view latest_assistant, int rounds,
                  const GenLimits& limits);

struct RecordMeta {
    std::string character_id;
    std::string plot_id;
    std::string first_timestamp;
    std::string last_timestamp;
    int round_count = 0;

    bool operator==(const RecordMeta&) const = default;
};

struct EMTrainRecord {
    std::string id;
    std::vector<Turn> turns;
    RecordMeta meta;

    OrderedJson to_json() const;
    static EMTrainRecord from_json(const nlohmann::json& j);
    bool operator==(const EMTrainRecord&) const = default;
};

// Checks (User, Observation, Assistant)* with strictly increasing canonical
// timestamps, no System turns, consistent indices and meta. Throws
// InvariantError.
void validate_record(const EMTrainRecord& record, const GenLimits& limits);

class SeedMismatchError : public InvariantError {
public:
    using InvariantError::InvariantError;
};

// Drops the leading System turn holding `seed` and reindexes from 0.
std::vector<Turn> strip_seed(const History& history, std::string_view seed);

// Backend failure during generation; carries what had been generated.
class GenerationError : public BackendError {
public:
    GenerationError(const std::string& what, History partial)
        : BackendError(what), partial_(std::move(partial)) {}
    const History& partial() const noexcept { return partial_; }

private:
    History partial_;
};

struct DialogueRequest {
    std::string id;
    std::string character_id;
    std::string plot_id;
};

// The two-agent loop. Agents are tagged "<id>/human" and "<id>/assistant".
// The human agent sees the shared history with user/assistant roles swapped.
EMTrainRecord generate_dialogue(backends::ChatBackend& chat, const DialogueRequest& request,
                                const persona::PromptPair& prompts, const TimePolicy& policy,
                                const GenLimits& limits, Rng& rng);

struct SampleMessage {
    Role role = Role::User;
    std::string content;
    bool loss = false;

    bool operator==(const SampleMessage&) const = default;
};

struct TrainingSample {
    std::vector<SampleMessage> messages;

    OrderedJson to_json() const;
    static TrainingSample from_json(const nlohmann::json& j);
};

TrainingSample to_training_sample(const EMTrainRecord& record);
// Drops loss flags and reindexes.
std::vector<Turn> turns_from_sample(const TrainingSample& sample);

}  // namespace emkit::dialogue
