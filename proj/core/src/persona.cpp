#include "emkit/persona.hpp"
#include "emkit/default_data.hpp"

#include <algorithm>
#include <charconv>
#include <set>
#include <unordered_map>

#include <fmt/format.h>

namespace emkit::persona {
namespace {

constexpr std::string_view kRandomAttributes[] = {"name",    "occupation", "age",
                                                  "gender",  "hobbies",    "personality"};

template <typename T>
const T& pick(Rng& rng, const std::vector<T>& values) {
    std::uniform_int_distribution<std::size_t> dist(0, values.size() - 1);
    return values[dist(rng)];
}

std::vector<std::string> pick_distinct(Rng& rng, const std::vector<std::string>& values, int k) {
    std::vector<std::string> out;
    std::sample(values.begin(), values.end(), std::back_inserter(out),
                std::min<std::size_t>(static_cast<std::size_t>(std::max(k, 1)), values.size()),
                rng);
    std::shuffle(out.begin(), out.end(), rng);
    return out;
}

std::string trim(std::string_view s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(" \t\r\n");
    return std::string(s.substr(b, e - b + 1));
}

std::string join(const std::vector<std::string>& items, std::string_view sep) {
    std::string out;
    for (std::size_t i = 0; i < items.size(); ++i) {
        if (i) out += sep;
        out += items[i];
    }
    return out;
}

}  // namespace

void CharacterCard::validate() const {
    auto require = [](bool ok, std::string_view field) {
        if (!ok) throw InvariantError(fmt::format("character card field '{}' is empty", field));
    };
    require(!name.empty(), "name");
    require(!occupation.empty(), "occupation");
    require(age > 0, "age");
    require(!gender.empty(), "gender");
    require(!hobbies.empty(), "hobbies");
    require(!personality.empty(), "personality");
    require(!social_relationships.empty(), "social_relationships");
}

OrderedJson CharacterCard::to_json() const {
    OrderedJson j;
    j["name"] = name;
    j["occupation"] = occupation;
    j["age"] = age;
    j["gender"] = gender;
    j["hobbies"] = hobbies;
    j["personality"] = personality;
    j["social_relationships"] = social_relationships;
    return j;
}

CharacterCard CharacterCard::from_json(const nlohmann::json& j) {
    CharacterCard c;
    c.name = j.at("name").get<std::string>();
    c.occupation = j.at("occupation").get<std::string>();
    c.age = j.at("age").get<int>();
    c.gender = j.at("gender").get<std::string>();
    c.hobbies = j.at("hobbies").get<std::vector<std::string>>();
    c.personality = j.at("personality").get<std::vector<std::string>>();
    c.social_relationships = j.at("social_relationships").get<std::string>();
    c.validate();
    return c;
}

AttributePools AttributePools::parse(std::string_view jsonl) {
    AttributePools pools;
    for_each_jsonl(jsonl, [&](std::size_t, const nlohmann::json& j) {
        auto& slot = pools.values[j.at("attribute").get<std::string>()];
        for (const auto& v : j.at("values")) slot.push_back(v.get<std::string>());
    });
    pools.validate();
    return pools;
}

AttributePools AttributePools::load(const std::filesystem::path& path) {
    return parse(read_text(path));
}

AttributePools AttributePools::defaults() { return parse(defaults::attribute_pools_jsonl()); }

void AttributePools::validate() const {
    for (auto attr : kRandomAttributes) {
        auto it = values.find(attr);
        if (it == values.end() || it->second.empty()) {
            throw DataError(fmt::format("attribute pool '{}' is missing or empty", attr));
        }
        for (const auto& v : it->second) {
            if (v.empty()) throw DataError(fmt::format("attribute pool '{}' has an empty value", attr));
        }
    }
    for (const auto& a : values.at("age")) {
        int age = 0;
        auto [p, ec] = std::from_chars(a.data(), a.data() + a.size(), age);
        if (ec != std::errc{} || p != a.data() + a.size() || age <= 0) {
            throw DataError(fmt::format("age pool value '{}' is not a positive integer", a));
        }
    }
}

std::string default_social_relationships(const CharacterCard& card) {
    return fmt::format(
        "{} lives near family and keeps in touch with a few close friends; colleagues from "
        "work as a {} and fellow {} enthusiasts make up the rest of their circle.",
        card.name, card.occupation, card.hobbies.empty() ? "hobby" : card.hobbies.front());
}

CharacterCard generate_character_card(Rng& rng, const AttributePools& pools,
                                      backends::ChatBackend* chat, std::string_view agent) {
    pools.validate();
    CharacterCard card;
    card.name = pick(rng, pools.values.at("name"));
    card.occupation = pick(rng, pools.values.at("occupation"));
    card.age = std::stoi(pick(rng, pools.values.at("age")));
    card.gender = pick(rng, pools.values.at("gender"));
    card.hobbies = pick_distinct(rng, pools.values.at("hobbies"), pools.hobbies_per_card);
    card.personality = pick_distinct(rng, pools.values.at("personality"), pools.traits_per_card);

    if (chat == nullptr) {
        card.social_relationships = default_social_relationships(card);
        return card;
    }
    const std::vector<backends::ChatMessage> request = {
        {Role::System,
         "You write concise, realistic character backgrounds. Reply with one or two sentences "
         "and nothing else."},
        {Role::User,
         fmt::format("Describe the social relationships (family, friends, colleagues) of this "
                     "person.\nName: {}\nOccupation: {}\nAge: {}\nGender: {}\nHobbies: {}\n"
                     "Personality: {}",
                     card.name, card.occupation, card.age, card.gender, join(card.hobbies, ", "),
                     join(card.personality, ", "))}};
    try {
        card.social_relationships = trim(chat->chat(agent, request));
    } catch (const BackendError& e) {
        throw CardGenerationError(e.what(), card);
    }
    if (card.social_relationships.empty()) {
        throw CardGenerationError("backend returned blank social relationships", card);
    }
    return card;
}

std::string_view to_string(EventKind kind) {
    switch (kind) {
        case EventKind::Common: return "common";
        case EventKind::Real: return "real";
        case EventKind::Hallucinatory: return "hallucinatory";
        case EventKind::Farewell: return "farewell";
    }
    return "common";
}

std::optional<EventKind> event_kind_from_string(std::string_view text) {
    for (auto k : {EventKind::Common, EventKind::Real, EventKind::Hallucinatory,
                   EventKind::Farewell}) {
        if (to_string(k) == text) return k;
    }
    return std::nullopt;
}

OrderedJson Event::to_json() const {
    OrderedJson j;
    j["id"] = id;
    j["kind"] = std::string(to_string(kind));
    j["description"] = description;
    if (after) j["after"] = *after;
    if (hint) j["hint"] = *hint;
    return j;
}

Event Event::from_json(const nlohmann::json& j) {
    Event e;
    e.id = j.at("id").get<std::string>();
    const auto kind = event_kind_from_string(j.at("kind").get<std::string>());
    if (!kind) throw LibraryError(fmt::format("event '{}' has an unknown kind", e.id));
    e.kind = *kind;
    e.description = j.at("description").get<std::string>();
    if (j.contains("after")) e.after = j["after"].get<std::string>();
    if (j.contains("hint")) e.hint = j["hint"].get<std::string>();
    return e;
}

EventLibrary::EventLibrary(std::vector<Event> events) : events_(std::move(events)) {
    std::unordered_map<std::string, const Event*> by_id;
    bool has_farewell = false;
    for (const auto& e : events_) {
        if (e.id.empty()) throw LibraryError("event with empty id");
        if (e.description.empty()) throw LibraryError(fmt::format("event '{}' has no description", e.id));
        if (!by_id.emplace(e.id, &e).second) throw LibraryError(fmt::format("duplicate event id '{}'", e.id));
        has_farewell = has_farewell || e.kind == EventKind::Farewell;
    }
    if (!has_farewell) throw LibraryError("event library has no farewell event");
    for (const auto& e : events_) {
        if (!e.after) continue;
        if (e.kind == EventKind::Farewell) {
            throw LibraryError(fmt::format("farewell event '{}' cannot depend on another", e.id));
        }
        // Walk the chain: every link must exist, share the kind, and end.
        std::set<std::string> seen{e.id};
        const Event* cur = &e;
        while (cur->after) {
            auto it = by_id.find(*cur->after);
            if (it == by_id.end()) {
                throw LibraryError(fmt::format("event '{}' depends on unknown '{}'", cur->id, *cur->after));
            }
            if (it->second->kind != e.kind) {
                throw LibraryError(fmt::format("event '{}' depends on '{}' of another kind", cur->id, *cur->after));
            }
            if (!seen.insert(it->second->id).second) {
                throw LibraryError(fmt::format("dependency cycle through '{}'", e.id));
            }
            cur = it->second;
        }
    }
}

EventLibrary EventLibrary::parse(std::string_view jsonl) {
    std::vector<Event> events;
    for_each_jsonl(jsonl, [&](std::size_t, const nlohmann::json& j) {
        events.push_back(Event::from_json(j));
    });
    return EventLibrary(std::move(events));
}

EventLibrary EventLibrary::load(const std::filesystem::path& path) {
    return parse(read_text(path));
}

EventLibrary EventLibrary::defaults() { return parse(defaults::event_library_jsonl()); }

std::vector<const Event*> EventLibrary::of_kind(EventKind kind) const {
    std::vector<const Event*> out;
    for (const auto& e : events_) {
        if (e.kind == kind) out.push_back(&e);
    }
    return out;
}

const Event* EventLibrary::find(std::string_view id) const {
    for (const auto& e : events_) {
        if (e.id == id) return &e;
    }
    return nullptr;
}

void Plot::validate() const {
    if (events.size() != static_cast<std::size_t>(kPlotLength)) {
        throw InvariantError(fmt::format("plot has {} events, expected {}", events.size(), kPlotLength));
    }
    std::set<std::string> seen;
    for (std::size_t i = 0; i < events.size(); ++i) {
        const Event& e = events[i];
        const bool last = i + 1 == events.size();
        if (last != (e.kind == EventKind::Farewell)) {
            throw InvariantError("plot must contain exactly one farewell event, in last place");
        }
        if (e.after && !seen.contains(*e.after)) {
            throw InvariantError(fmt::format("plot event '{}' precedes its prerequisite '{}'", e.id, *e.after));
        }
        if (!seen.insert(e.id).second) throw InvariantError(fmt::format("plot repeats event '{}'", e.id));
    }
}

std::vector<const Event*> Plot::of_kind(EventKind kind) const {
    std::vector<const Event*> out;
    for (const auto& e : events) {
        if (e.kind == kind) out.push_back(&e);
    }
    return out;
}

Plot sample_plot(Rng& rng, const EventLibrary& library, const PlotMix& mix) {
    if (mix.real < 0 || mix.hallucinatory < 0 || mix.common < 0 || mix.total() != kPlotLength - 1) {
        throw PreconditionError(fmt::format("plot mix must total {} non-farewell events, got {}",
                                            kPlotLength - 1, mix.total()));
    }
    std::unordered_map<std::string, std::size_t> library_index;
    for (std::size_t i = 0; i < library.events().size(); ++i) {
        library_index.emplace(library.events()[i].id, i);
    }

    // Greedy draw without replacement: an event is taken together with any of
    // its prerequisites not yet chosen, provided the whole chain fits.
    std::vector<const Event*> chosen;
    std::set<std::string> chosen_ids;
    auto draw = [&](EventKind kind, int quota) {
        auto pool = library.of_kind(kind);
        std::shuffle(pool.begin(), pool.end(), rng);
        int taken = 0;
        for (const Event* e : pool) {
            if (taken == quota) break;
            std::vector<const Event*> chain;
            for (const Event* cur = e; cur && !chosen_ids.contains(cur->id);
                 cur = cur->after ? library.find(*cur->after) : nullptr) {
                chain.push_back(cur);
            }
            if (chain.empty() || taken + static_cast<int>(chain.size()) > quota) continue;
            for (const Event* c : chain) {
                chosen.push_back(c);
                chosen_ids.insert(c->id);
            }
            taken += static_cast<int>(chain.size());
        }
        if (taken != quota) {
            throw LibraryError(fmt::format("event library cannot supply {} {} events (got {})",
                                           quota, to_string(kind), taken));
        }
    };
    draw(EventKind::Real, mix.real);
    draw(EventKind::Hallucinatory, mix.hallucinatory);
    draw(EventKind::Common, mix.common);

    // Topological order over `after` edges; ties broken by rng or library index.
    Plot plot;
    std::vector<const Event*> remaining = chosen;
    std::set<std::string> placed;
    while (!remaining.empty()) {
        std::vector<std::size_t> ready;
        for (std::size_t i = 0; i < remaining.size(); ++i) {
            const Event* e = remaining[i];
            if (!e->after || placed.contains(*e->after)) ready.push_back(i);
        }
        std::size_t next = ready.front();
        if (mix.shuffle == ShufflePolicy::Random) {
            next = ready[std::uniform_int_distribution<std::size_t>(0, ready.size() - 1)(rng)];
        } else {
            for (std::size_t i : ready) {
                if (library_index[remaining[i]->id] < library_index[remaining[next]->id]) next = i;
            }
        }
        plot.events.push_back(*remaining[next]);
        placed.insert(remaining[next]->id);
        remaining.erase(remaining.begin() + static_cast<std::ptrdiff_t>(next));
    }

    const auto farewells = library.of_kind(EventKind::Farewell);
    plot.events.push_back(*pick(rng, farewells));
    plot.validate();
    return plot;
}

PromptTemplates PromptTemplates::defaults() {
    return {std::string(defaults::human_prompt_template()),
            std::string(defaults::assistant_prompt_template())};
}

PromptTemplates PromptTemplates::load(const std::filesystem::path& dir) {
    return {read_text(dir / "human_prompt.txt"), read_text(dir / "assistant_prompt.txt")};
}

std::string render_template(std::string_view tmpl,
                            const std::map<std::string, std::string, std::less<>>& values,
                            const std::map<std::string, bool, std::less<>>& sections) {
    std::string out;
    std::vector<std::pair<std::string, bool>> open;  // (section, emitting)
    auto emitting = [&] { return open.empty() || open.back().second; };

    std::size_t pos = 0;
    while (pos < tmpl.size()) {
        const auto start = tmpl.find("{{", pos);
        if (start == std::string_view::npos) {
            if (emitting()) out.append(tmpl.substr(pos));
            break;
        }
        if (emitting()) out.append(tmpl.substr(pos, start - pos));
        const auto end = tmpl.find("}}", start);
        if (end == std::string_view::npos) throw DataError("unterminated template placeholder");
        const std::string_view tag = tmpl.substr(start + 2, end - start - 2);
        pos = end + 2;

        if (!tag.empty() && (tag.front() == '#' || tag.front() == '/')) {
            const std::string name(tag.substr(1));
            if (tag.front() == '#') {
                auto it = sections.find(name);
                if (it == sections.end()) throw DataError(fmt::format("unknown template section '{}'", name));
                open.emplace_back(name, emitting() && it->second);
            } else {
                if (open.empty() || open.back().first != name) {
                    throw DataError(fmt::format("mismatched template section close '{}'", name));
                }
                open.pop_back();
            }
            // A section tag on its own line swallows that line's newline.
            if (pos < tmpl.size() && tmpl[pos] == '\n' && (start == 0 || tmpl[start - 1] == '\n')) ++pos;
            continue;
        }
        auto it = values.find(tag);
        if (it == values.end()) throw DataError(fmt::format("unknown template placeholder '{}'", tag));
        if (emitting()) out += it->second;
    }
    if (!open.empty()) throw DataError(fmt::format("unclosed template section '{}'", open.back().first));
    return out;
}

std::vector<std::string> default_common_hints() { return {"name, old, hobby, gender"}; }

std::string format_card(const CharacterCard& card) {
    return fmt::format(
        "Name: {}\nOccupation: {}\nAge: {}\nGender: {}\nHobbies: {}\nPersonality: {}\n"
        "Social Relationships: {}",
        card.name, card.occupation, card.age, card.gender, join(card.hobbies, ", "),
        join(card.personality, ", "), card.social_relationships);
}

PromptPair render_prompts(const CharacterCard& card, const Plot& plot,
                          const std::vector<std::string>& common_hints,
                          const PromptTemplates& templates, std::string_view language) {
    plot.validate();
    std::string plot_text;
    for (std::size_t i = 0; i < plot.events.size(); ++i) {
        plot_text += fmt::format("{}{}. {}", i ? "\n" : "", i + 1, plot.events[i].description);
    }
    std::string hallucinatory;
    for (const Event* e : plot.of_kind(EventKind::Hallucinatory)) {
        if (!hallucinatory.empty()) hallucinatory += '\n';
        hallucinatory += "- " + e->hint.value_or(e->description);
    }
    std::string hints;
    for (const auto& h : common_hints) {
        if (!hints.empty()) hints += '\n';
        hints += "- " + h;
    }

    const std::map<std::string, std::string, std::less<>> values = {
        {"card", format_card(card)},
        {"plot", plot_text},
        {"hallucinatory", hallucinatory},
        {"common_hints", hints},
        {"language", std::string(language)}};
    const std::map<std::string, bool, std::less<>> sections = {
        {"card", true},
        {"plot", true},
        {"hallucinatory", !hallucinatory.empty()},
        {"common_hints", !hints.empty()}};
    return {render_template(templates.human, values, sections),
            render_template(templates.assistant, values, sections)};
}

}  // namespace emkit::persona
