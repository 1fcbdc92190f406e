#include "emkit/dialogue.hpp"

#include <algorithm>
#include <cctype>

#include <fmt/format.h>

namespace emkit::dialogue {
namespace {

std::string lower(std::string_view s) {
    std::string out(s);
    for (auto& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    return out;
}

std::string trim(std::string_view s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(" \t\r\n");
    return std::string(s.substr(b, e - b + 1));
}

std::vector<backends::ChatMessage> as_messages(const History& h, bool swap_speakers) {
    std::vector<backends::ChatMessage> out;
    out.reserve(h.size());
    for (const Turn& t : h.turns()) {
        Role role = t.role;
        if (swap_speakers && role == Role::User) {
            role = Role::Assistant;
        } else if (swap_speakers && role == Role::Assistant) {
            role = Role::User;
        }
        out.push_back({role, t.content});
    }
    return out;
}

OrderedJson turns_to_json(const std::vector<Turn>& turns) {
    OrderedJson arr = OrderedJson::array();
    for (const Turn& t : turns) {
        OrderedJson j;
        j["role"] = std::string(to_string(t.role));
        j["content"] = t.content;
        arr.push_back(std::move(j));
    }
    return arr;
}

Role parse_role(const nlohmann::json& j) {
    const auto role = role_from_string(j.at("role").get<std::string>());
    if (!role) throw DataError(fmt::format("unknown role '{}'", j.at("role").get<std::string>()));
    return *role;
}

}  // namespace

void History::append(Role role, std::string content) {
    turns_.push_back(Turn{role, std::move(content), turns_.size()});
}

void TimePolicy::validate() const {
    const double p = session_continue_probability;
    if (!(p >= 0.0 && p <= 1.0)) throw PreconditionError("session_continue_probability must be in [0,1]");
    if (within_session_gap.first < 1) throw PreconditionError("within-session gap must be >= 1 s");
    if (within_session_gap.first > within_session_gap.second ||
        between_session_gap.first > between_session_gap.second) {
        throw PreconditionError("gap ranges need min <= max");
    }
    if (within_session_gap.second >= between_session_gap.first) {
        throw PreconditionError("within-session max must be below between-session min");
    }
    if (start_window.first > start_window.second) throw PreconditionError("start window is reversed");
}

TimePolicy TimePolicy::from_json(const nlohmann::json& j) {
    TimePolicy p;
    p.session_continue_probability = j.value("session_continue_probability", p.session_continue_probability);
    if (j.contains("within_session_gap")) {
        p.within_session_gap = j["within_session_gap"].get<std::pair<std::int64_t, std::int64_t>>();
    }
    if (j.contains("between_session_gap")) {
        p.between_session_gap = j["between_session_gap"].get<std::pair<std::int64_t, std::int64_t>>();
    }
    if (j.contains("start_window")) {
        const auto& w = j["start_window"];
        p.start_window = {calendar::parse_timestamp(w.at(0).get<std::string>()),
                          calendar::parse_timestamp(w.at(1).get<std::string>())};
    }
    p.validate();
    return p;
}

CivilDateTime random_start_time(const TimePolicy& policy, Rng& rng) {
    std::uniform_int_distribution<std::int64_t> dist(policy.start_window.first.seconds_since_epoch(),
                                                     policy.start_window.second.seconds_since_epoch());
    return CivilDateTime::from_seconds(dist(rng));
}

CivilDateTime random_next_time(const CivilDateTime& current, const TimePolicy& policy, Rng& rng) {
    std::bernoulli_distribution same_session(policy.session_continue_probability);
    const auto& range = same_session(rng) ? policy.within_session_gap : policy.between_session_gap;
    std::uniform_int_distribution<std::int64_t> gap(range.first, range.second);
    return calendar::add_offset(current, calendar::DateOffset::of_seconds(gap(rng)));
}

void GenLimits::validate() const {
    if (max_rounds < 1) throw PreconditionError("max_rounds must be >= 1");
    if (farewell_phrases.empty()) throw PreconditionError("farewell phrase list is empty");
    for (const auto& p : farewell_phrases) {
        if (p.empty()) throw PreconditionError("empty farewell phrase");
    }
}

GenLimits GenLimits::from_json(const nlohmann::json& j) {
    GenLimits l;
    l.max_rounds = j.value("max_rounds", l.max_rounds);
    if (j.contains("farewell_phrases")) l.farewell_phrases = j["farewell_phrases"].get<std::vector<std::string>>();
    l.validate();
    return l;
}

bool contains_farewell(std::string_view text, const GenLimits& limits) {
    const std::string haystack = lower(text);
    return std::any_of(limits.farewell_phrases.begin(), limits.farewell_phrases.end(),
                       [&](const std::string& p) { return haystack.find(lower(p)) != std::string::npos; });
}

bool stopping_met(std::string_view latest_user, std::string_view latest_assistant, int rounds,
                  const GenLimits& limits) {
    if (rounds < 0) throw PreconditionError("rounds must be >= 0");
    return contains_farewell(latest_user, limits) || contains_farewell(latest_assistant, limits) ||
           rounds > limits.max_rounds;
}

OrderedJson EMTrainRecord::to_json() const {
    OrderedJson j;
    j["id"] = id;
    OrderedJson m;
    m["character_id"] = meta.character_id;
    m["plot_id"] = meta.plot_id;
    m["first_timestamp"] = meta.first_timestamp;
    m["last_timestamp"] = meta.last_timestamp;
    m["round_count"] = meta.round_count;
    j["meta"] = std::move(m);
    j["turns"] = turns_to_json(turns);
    return j;
}

EMTrainRecord EMTrainRecord::from_json(const nlohmann::json& j) {
    EMTrainRecord r;
    r.id = j.at("id").get<std::string>();
    const auto& m = j.at("meta");
    r.meta.character_id = m.at("character_id").get<std::string>();
    r.meta.plot_id = m.at("plot_id").get<std::string>();
    r.meta.first_timestamp = m.at("first_timestamp").get<std::string>();
    r.meta.last_timestamp = m.at("last_timestamp").get<std::string>();
    r.meta.round_count = m.at("round_count").get<int>();
    for (const auto& t : j.at("turns")) {
        r.turns.push_back(Turn{parse_role(t), t.at("content").get<std::string>(), r.turns.size()});
    }
    return r;
}

void validate_record(const EMTrainRecord& record, const GenLimits& limits) {
    auto fail = [&](const std::string& why) {
        throw InvariantError(fmt::format("record '{}': {}", record.id, why));
    };
    if (record.turns.size() % 3 != 0) fail("turn count is not a multiple of 3");
    static constexpr Role kPattern[] = {Role::User, Role::Observation, Role::Assistant};
    std::optional<CivilDateTime> previous;
    int assistants = 0;
    for (std::size_t i = 0; i < record.turns.size(); ++i) {
        const Turn& t = record.turns[i];
        if (t.index != i) fail(fmt::format("turn {} has index {}", i, t.index));
        if (t.role != kPattern[i % 3]) {
            fail(fmt::format("turn {} has role {}, expected {}", i, to_string(t.role), to_string(kPattern[i % 3])));
        }
        if (t.role == Role::Assistant) ++assistants;
        if (t.role != Role::Observation) continue;
        CivilDateTime ts;
        try {
            ts = calendar::parse_timestamp(t.content);
        } catch (const calendar::CalendarError& e) {
            fail(fmt::format("turn {} timestamp: {}", i, e.what()));
        }
        if (calendar::format_timestamp(ts) != t.content) fail(fmt::format("turn {} timestamp is not canonical", i));
        if (previous && !(*previous < ts)) fail(fmt::format("turn {} timestamp does not increase", i));
        previous = ts;
    }
    if (assistants != record.meta.round_count) fail("round_count does not match assistant turns");
    if (record.meta.round_count > limits.max_rounds) fail("round cap exceeded");
    if (!record.turns.empty()) {
        if (record.meta.first_timestamp != record.turns[1].content ||
            record.meta.last_timestamp != record.turns[record.turns.size() - 2].content) {
            fail("meta timestamps disagree with the turns");
        }
    }
}

std::vector<Turn> strip_seed(const History& history, std::string_view seed) {
    const auto& turns = history.turns();
    if (turns.empty() || turns.front().role != Role::System) {
        throw SeedMismatchError("history does not start with a system seed");
    }
    if (turns.front().content != seed) throw SeedMismatchError("history seed differs from the expected prompt");
    std::vector<Turn> out(turns.begin() + 1, turns.end());
    for (std::size_t i = 0; i < out.size(); ++i) out[i].index = i;
    return out;
}

EMTrainRecord generate_dialogue(backends::ChatBackend& chat, const DialogueRequest& request,
                                const persona::PromptPair& prompts, const TimePolicy& policy,
                                const GenLimits& limits, Rng& rng) {
    policy.validate();
    limits.validate();
    const std::string human_tag = request.id + "/human";
    const std::string assistant_tag = request.id + "/assistant";

    History human_history;
    History assistant_history;
    human_history.append(Role::System, prompts.human_prompt);
    assistant_history.append(Role::System, prompts.assistant_prompt);

    auto ask = [&](const std::string& tag, const History& h, bool swap) {
        try {
            std::string reply = trim(chat.chat(tag, as_messages(h, swap)));
            if (reply.empty()) throw backends::EmptyCompletionError("blank completion for '" + tag + "'");
            return reply;
        } catch (const BackendError& e) {
            throw GenerationError(fmt::format("dialogue '{}': {}", request.id, e.what()), assistant_history);
        }
    };

    std::string answer_user;
    std::string answer_assistant;
    std::optional<CivilDateTime> time;
    int rounds = 0;
    // The criterion is checked against the round about to start, so a
    // dialogue that never says farewell ends with exactly max_rounds.
    while (!stopping_met(answer_user, answer_assistant, rounds + 1, limits)) {
        answer_user = ask(human_tag, human_history, true);
        time = time ? random_next_time(*time, policy, rng) : random_start_time(policy, rng);
        const std::string stamp = calendar::format_timestamp(*time);
        for (History* h : {&human_history, &assistant_history}) {
            h->append(Role::User, answer_user);
            h->append(Role::Observation, stamp);
        }
        answer_assistant = ask(assistant_tag, assistant_history, false);
        human_history.append(Role::Assistant, answer_assistant);
        assistant_history.append(Role::Assistant, answer_assistant);
        ++rounds;
    }

    EMTrainRecord record;
    record.id = request.id;
    record.turns = strip_seed(assistant_history, prompts.assistant_prompt);
    record.meta.character_id = request.character_id;
    record.meta.plot_id = request.plot_id;
    record.meta.round_count = rounds;
    if (!record.turns.empty()) {
        record.meta.first_timestamp = record.turns[1].content;
        record.meta.last_timestamp = record.turns[record.turns.size() - 2].content;
    }
    validate_record(record, limits);
    return record;
}

OrderedJson TrainingSample::to_json() const {
    OrderedJson arr = OrderedJson::array();
    for (const auto& m : messages) {
        OrderedJson j;
        j["role"] = std::string(to_string(m.role));
        j["content"] = m.content;
        j["loss"] = m.loss;
        arr.push_back(std::move(j));
    }
    OrderedJson j;
    j["messages"] = std::move(arr);
    return j;
}

TrainingSample TrainingSample::from_json(const nlohmann::json& j) {
    TrainingSample s;
    for (const auto& m : j.at("messages")) {
        s.messages.push_back({parse_role(m), m.at("content").get<std::string>(), m.at("loss").get<bool>()});
    }
    return s;
}

TrainingSample to_training_sample(const EMTrainRecord& record) {
    TrainingSample s;
    s.messages.reserve(record.turns.size());
    for (const Turn& t : record.turns) {
        s.messages.push_back({t.role, t.content, t.role == Role::Assistant});
    }
    return s;
}

std::vector<Turn> turns_from_sample(const TrainingSample& sample) {
    std::vector<Turn> out;
    out.reserve(sample.messages.size());
    for (const auto& m : sample.messages) out.push_back(Turn{m.role, m.content, out.size()});
    return out;
}

}  // namespace emkit::dialogue
