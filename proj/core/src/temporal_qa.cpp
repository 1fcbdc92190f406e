#include "emkit/temporal_qa.hpp"

#include <algorithm>
#include <cctype>
#include <cstdlib>

#include <fmt/format.h>

namespace emkit::temporal_qa {
namespace {

using calendar::DateOffset;
using calendar::add_offset;
using calendar::format_compact_date;
using calendar::format_timestamp;
using calendar::month_abbreviation;
using calendar::month_name;
using calendar::weekday_name;
using calendar::weekday_of;

constexpr std::string_view kFamilyNames[] = {"absolute_offset", "relative_day", "weekday_query",
                                             "weekend_query", "elapsed_since_last_chat"};

std::size_t family_index(Family f) { return static_cast<std::size_t>(f); }
std::size_t horizon_index(Horizon h) { return h == Horizon::Short ? 0 : 1; }

std::int64_t uniform(Rng& rng, std::int64_t lo, std::int64_t hi) {
    return std::uniform_int_distribution<std::int64_t>(lo, hi)(rng);
}

template <std::size_t N>
std::string_view choose(Rng& rng, const std::string_view (&options)[N]) {
    return options[static_cast<std::size_t>(uniform(rng, 0, N - 1))];
}

std::string plural(std::int64_t n, std::string_view unit) {
    return fmt::format("{} {}{}", n, unit, n == 1 ? "" : "s");
}

std::string ordinal(int day) {
    const int mod100 = day % 100;
    std::string_view suffix = "th";
    if (mod100 < 11 || mod100 > 13) {
        switch (day % 10) {
            case 1: suffix = "st"; break;
            case 2: suffix = "nd"; break;
            case 3: suffix = "rd"; break;
            default: break;
        }
    }
    return fmt::format("{}{}", day, suffix);
}

// "Monday, July 5th, 2027"
std::string long_date(const CivilDateTime& d) {
    return fmt::format("{}, {} {}, {}", weekday_name(weekday_of(d)), month_name(d.month()),
                       ordinal(d.day()), d.year());
}

std::string capitalize(std::string s) {
    if (!s.empty()) s[0] = static_cast<char>(std::toupper(static_cast<unsigned char>(s[0])));
    return s;
}

std::string lower(std::string_view s) {
    std::string out(s);
    for (auto& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    return out;
}

// Relative day phrase for a signed day count, e.g. "the day before yesterday".
std::string day_phrase(std::int64_t days) {
    switch (days) {
        case 0: return "today";
        case -1: return "yesterday";
        case 1: return "tomorrow";
        case -2: return "the day before yesterday";
        case 2: return "the day after tomorrow";
        default: break;
    }
    return days < 0 ? plural(-days, "day") + " ago" : plural(days, "day") + " from now";
}

// Nonzero (count, unit) pairs describing b - a: minutes under an hour,
// hours and minutes under a day, otherwise calendar years, months and days.
// Falls back to seconds under a minute.
std::vector<std::pair<std::int64_t, std::string_view>> elapsed_parts(const CivilDateTime& a,
                                                                     const CivilDateTime& b) {
    const std::int64_t gap = b.seconds_since_epoch() - a.seconds_since_epoch();
    if (gap < 0) throw PreconditionError("elapsed time must not be negative");
    std::vector<std::pair<std::int64_t, std::string_view>> parts;
    if (gap < 3600) {
        parts = {{gap / 60, "minute"}};
    } else if (gap < 86'400) {
        parts = {{gap / 3600, "hour"}, {gap % 3600 / 60, "minute"}};
    } else {
        const auto e = calendar::diff(a, b);
        parts = {{e.years, "year"}, {e.months, "month"}, {e.days, "day"}};
    }
    std::erase_if(parts, [](const auto& p) { return p.first == 0; });
    if (parts.empty()) parts = {{gap, "second"}};
    return parts;
}

std::int64_t nonzero_days(Rng& rng, std::int64_t lo, std::int64_t hi) {
    const std::int64_t magnitude = uniform(rng, lo, hi);
    return uniform(rng, 0, 1) ? magnitude : -magnitude;
}

CivilDateTime random_observation(Rng& rng, const QAConfig& config) {
    const auto lo = CivilDateTime::make(config.year_range.first, 1, 1).seconds_since_epoch();
    const auto hi = CivilDateTime::make(config.year_range.second, 12, 31, 23, 59, 59).seconds_since_epoch();
    return CivilDateTime::from_seconds(uniform(rng, lo, hi));
}

struct Draft {
    std::vector<QATurn> turns;
    CivilDateTime observation;
    std::string answer;
    std::vector<KeywordGroup> keywords;
    Derivation derivation;
};

Draft make_absolute_offset(Rng& rng, const QAConfig& config) {
    const std::int64_t ymin = config.year_range.first;
    const std::int64_t base_year = uniform(rng, std::max<std::int64_t>(1000, ymin - 600), ymin - 250);
    const int base_month = static_cast<int>(uniform(rng, 1, 12));
    std::int64_t years = uniform(rng, 0, 200);
    std::int64_t months = uniform(rng, years == 0 ? 1 : 0, 11);
    const bool after = uniform(rng, 0, 3) != 0;

    std::string span;
    if (years && months) {
        span = fmt::format("{} and {}", plural(years, "year"), plural(months, "month"));
    } else {
        span = years ? plural(years, "year") : plural(months, "month");
    }
    const std::string base_text = fmt::format("{} {}", month_name(base_month), base_year);
    static constexpr std::string_view kAfter[] = {
        "What is the time {span} after {base}?",
        "Which month and year is {span} after {base}?",
        "Starting from {base}, what month and year is it {span} later?"};
    static constexpr std::string_view kBefore[] = {
        "What is the time {span} before {base}?",
        "Which month and year is {span} before {base}?",
        "Starting from {base}, what month and year was it {span} earlier?"};
    const std::string question =
        fmt::format(fmt::runtime(after ? choose(rng, kAfter) : choose(rng, kBefore)),
                    fmt::arg("span", span), fmt::arg("base", base_text));

    Draft d;
    d.observation = random_observation(rng, config);
    const auto anchor = CivilDateTime::make(base_year, base_month, 1);
    const DateOffset offset{.years = after ? years : -years, .months = after ? months : -months};
    const auto target = add_offset(anchor, offset);
    d.turns = {{Role::User, question}};
    d.answer = answer_absolute_offset(anchor, offset);
    d.keywords = keywords_for_date(target, Granularity::YM);
    d.derivation = {anchor, offset, target, target};
    return d;
}

Draft make_relative_day(Rng& rng, const QAConfig& config, Horizon horizon) {
    Draft d;
    d.observation = random_observation(rng, config);
    DateOffset offset;
    if (horizon == Horizon::Short) {
        offset.days = nonzero_days(rng, 1, 7);
    } else {
        const std::int64_t max_years = std::min<std::int64_t>(500, d.observation.year() - 1000);
        switch (uniform(rng, 0, 3)) {
            case 0: offset.years = -uniform(rng, 1, max_years); break;
            case 1: offset.months = -uniform(rng, 1, 30); break;
            case 2: offset.years = uniform(rng, 1, 100); break;
            default: offset.days = nonzero_days(rng, 8, 3000); break;
        }
    }
    const bool past = offset.years + offset.months + offset.days < 0;
    const std::string phrase = relative_phrase(offset);
    const auto target = add_offset(d.observation, offset);
    static constexpr std::string_view kPast[] = {"What was the date {p}?", "Which date was it {p}?",
                                                 "{P}, which day was it?"};
    static constexpr std::string_view kFuture[] = {"What will the date be {p}?",
                                                   "Which date will it be {p}?",
                                                   "{P}, which day will it be?"};
    const std::string question = fmt::format(fmt::runtime(past ? choose(rng, kPast) : choose(rng, kFuture)),
                                             fmt::arg("p", phrase), fmt::arg("P", capitalize(phrase)));
    d.turns = {{Role::User, question}};
    d.answer = answer_relative_day(d.observation, offset);
    d.keywords = keywords_for_date(target, Granularity::YMD);
    d.derivation = {d.observation, offset, target, target};
    return d;
}

Draft make_weekday_query(Rng& rng, const QAConfig& config, Horizon horizon) {
    Draft d;
    d.observation = random_observation(rng, config);
    const std::int64_t days = horizon == Horizon::Short ? uniform(rng, -7, 7) : nonzero_days(rng, 8, 1000);
    const DateOffset offset = DateOffset::of_days(days);
    const auto target = add_offset(d.observation, offset);
    const std::string phrase = day_phrase(days);

    std::string question;
    if (days == 0) {
        static constexpr std::string_view kToday[] = {"What day of the week is it today?",
                                                      "Which weekday is today?",
                                                      "Do you know what day of the week it is?"};
        question = choose(rng, kToday);
    } else if (days < 0) {
        static constexpr std::string_view kPast[] = {"What day of the week was {p}?",
                                                     "Which weekday was {p}?",
                                                     "{P}, what day of the week was it?"};
        question = fmt::format(fmt::runtime(choose(rng, kPast)), fmt::arg("p", phrase),
                               fmt::arg("P", capitalize(phrase)));
    } else {
        static constexpr std::string_view kFuture[] = {"What day of the week will it be {p}?",
                                                       "Which weekday will it be {p}?",
                                                       "{P}, what day of the week will it be?"};
        question = fmt::format(fmt::runtime(choose(rng, kFuture)), fmt::arg("p", phrase),
                               fmt::arg("P", capitalize(phrase)));
    }
    d.turns = {{Role::User, question}};
    d.answer = answer_weekday_query(d.observation, days);
    d.keywords = keywords_for_date(target, Granularity::WeekdayOnly);
    d.derivation = {d.observation, offset, target, target};
    return d;
}

Draft make_weekend_query(Rng& rng, const QAConfig& config, Horizon horizon) {
    Draft d;
    d.observation = random_observation(rng, config);
    const std::int64_t days = horizon == Horizon::Short ? nonzero_days(rng, 1, 7) : nonzero_days(rng, 8, 1000);
    const DateOffset offset = DateOffset::of_days(days);
    const auto target = add_offset(d.observation, offset);
    const std::string phrase = day_phrase(days);
    const bool weekend = calendar::is_weekend(target);

    static constexpr std::string_view kPast[] = {"Was {p} a weekend?", "Was {p} on a weekend?",
                                                 "{P}, was that a weekend day?"};
    static constexpr std::string_view kFuture[] = {"Will {p} be a weekend?", "Is {p} going to be a weekend?",
                                                   "{P}, will that be a weekend day?"};
    const std::string question = fmt::format(fmt::runtime(days < 0 ? choose(rng, kPast) : choose(rng, kFuture)),
                                             fmt::arg("p", phrase), fmt::arg("P", capitalize(phrase)));
    d.turns = {{Role::User, question}};
    d.answer = answer_weekend_query(d.observation, days);
    d.keywords = {KeywordGroup{{weekend ? "Yes" : "No"}},
                  KeywordGroup{{std::string(weekday_name(weekday_of(target)))}}};
    d.derivation = {d.observation, offset, target, target};
    return d;
}

// Filler exchanges placed before the "how long ago" probe.
constexpr std::pair<std::string_view, std::string_view> kFiller[] = {
    {"Can you recommend a good book about the history of science?",
     "Sure. \"A Short History of Nearly Everything\" by Bill Bryson is an accessible and entertaining overview."},
    {"How do I keep basil alive on a windowsill?",
     "Give it at least six hours of sun, water when the top of the soil feels dry, and pinch off flower buds."},
    {"What is a simple way to start learning to code?",
     "Pick one beginner-friendly language such as Python and build a small project you care about."},
    {"Could you explain why the sky is blue?",
     "Sunlight scatters off air molecules, and shorter blue wavelengths scatter the most, so the sky looks blue."},
    {"Any tips for falling asleep faster?",
     "Keep a regular schedule, dim screens an hour before bed, and keep the bedroom cool and dark."},
};

Draft make_elapsed(Rng& rng, const QAConfig& config, Horizon horizon) {
    Draft d;
    std::int64_t gap = 0;
    if (horizon == Horizon::Short) {
        switch (uniform(rng, 0, 2)) {
            case 0: gap = uniform(rng, 60, 3599); break;
            case 1: gap = uniform(rng, 3600, 86'399); break;
            default: gap = uniform(rng, 86'400, kShortHorizonSeconds); break;
        }
    } else {
        gap = uniform(rng, kShortHorizonSeconds + 86'400, 5LL * 365 * 86'400);
    }
    const auto last_chat = random_observation(rng, config);
    const DateOffset offset = DateOffset::of_seconds(gap);
    d.observation = add_offset(last_chat, offset);

    const auto& filler = kFiller[static_cast<std::size_t>(uniform(rng, 0, std::size(kFiller) - 1))];
    static constexpr std::string_view kProbe[] = {"How long ago was our last chat?",
                                                  "How long has it been since we last talked?",
                                                  "When did we last chat, and how long ago was that?"};
    d.turns = {{Role::User, std::string(filler.first)},
               {Role::Observation, format_timestamp(last_chat)},
               {Role::Assistant, std::string(filler.second)},
               {Role::User, std::string(choose(rng, kProbe))}};

    d.answer = answer_elapsed(last_chat, d.observation);
    for (const auto& [n, unit] : elapsed_parts(last_chat, d.observation)) {
        d.keywords.push_back(KeywordGroup{{std::to_string(n)}});
        d.keywords.push_back(KeywordGroup{{std::string(unit)}});
    }
    d.derivation = {last_chat, offset, d.observation, last_chat};
    return d;
}

Draft make_item(Family family, Horizon horizon, Rng& rng, const QAConfig& config) {
    switch (family) {
        case Family::AbsoluteOffset: return make_absolute_offset(rng, config);
        case Family::RelativeDay: return make_relative_day(rng, config, horizon);
        case Family::WeekdayQuery: return make_weekday_query(rng, config, horizon);
        case Family::WeekendQuery: return make_weekend_query(rng, config, horizon);
        case Family::ElapsedSinceLastChat: return make_elapsed(rng, config, horizon);
    }
    throw PreconditionError("unknown family");
}

OrderedJson offset_to_json(const DateOffset& o) {
    OrderedJson j;
    j["years"] = o.years;
    j["months"] = o.months;
    j["days"] = o.days;
    j["hours"] = o.hours;
    j["minutes"] = o.minutes;
    j["seconds"] = o.seconds;
    return j;
}

DateOffset offset_from_json(const nlohmann::json& j) {
    return DateOffset{j.value("years", std::int64_t{0}), j.value("months", std::int64_t{0}),
                      j.value("days", std::int64_t{0}), j.value("hours", std::int64_t{0}),
                      j.value("minutes", std::int64_t{0}), j.value("seconds", std::int64_t{0})};
}

bool has_letter(std::string_view s) {
    return std::any_of(s.begin(), s.end(), [](char c) { return std::isalpha(static_cast<unsigned char>(c)); });
}

bool all_digits(std::string_view s) {
    return !s.empty() && std::all_of(s.begin(), s.end(), [](char c) { return std::isdigit(static_cast<unsigned char>(c)); });
}

bool is_digit_at(std::string_view s, std::size_t i) {
    return i < s.size() && std::isdigit(static_cast<unsigned char>(s[i]));
}

}  // namespace

std::string relative_phrase(const DateOffset& offset) {
    const int set = (offset.years != 0) + (offset.months != 0) + (offset.days != 0);
    if (set > 1 || offset.hours || offset.minutes || offset.seconds) {
        throw PreconditionError("relative phrase needs a pure year, month or day offset");
    }
    auto unit_phrase = [](std::int64_t n, std::string_view unit) {
        const std::int64_t m = n < 0 ? -n : n;
        const std::string amount = m == 1 ? fmt::format("a {}", unit) : plural(m, unit);
        return fmt::format("{} {} today", amount, n < 0 ? "ago" : "from");
    };
    if (offset.years) return unit_phrase(offset.years, "year");
    if (offset.months) return unit_phrase(offset.months, "month");
    return day_phrase(offset.days);
}

std::string answer_absolute_offset(const CivilDateTime& anchor, const DateOffset& offset) {
    const auto target = add_offset(anchor, offset);
    return fmt::format("The time is {}, {}", month_abbreviation(target.month()), target.year());
}

std::string answer_relative_day(const CivilDateTime& today, const DateOffset& offset) {
    const bool past = offset.years + offset.months + offset.days < 0;
    return fmt::format("Today is {}, therefore {} {} {}.", format_compact_date(today), relative_phrase(offset),
                       past ? "should be" : "will be", format_compact_date(add_offset(today, offset)));
}

std::string answer_weekday_query(const CivilDateTime& today, std::int64_t days) {
    const auto target = add_offset(today, DateOffset::of_days(days));
    const std::string_view verb = days < 0 ? "was" : (days == 0 ? "is" : "will be");
    return fmt::format("{} {} {}.", capitalize(day_phrase(days)), verb, weekday_name(weekday_of(target)));
}

std::string answer_weekend_query(const CivilDateTime& today, std::int64_t days) {
    const auto target = add_offset(today, DateOffset::of_days(days));
    return fmt::format("{}, {} {} {}.", calendar::is_weekend(target) ? "Yes" : "No", day_phrase(days),
                       days < 0 ? "was" : "will be", long_date(target));
}

std::string answer_elapsed(const CivilDateTime& last_chat, const CivilDateTime& now) {
    const auto parts = elapsed_parts(last_chat, now);
    std::string span = plural(parts.front().first, parts.front().second);
    for (std::size_t i = 1; i < parts.size(); ++i) {
        span += (i + 1 == parts.size() ? " and " : ", ") + plural(parts[i].first, parts[i].second);
    }
    const std::int64_t gap = now.seconds_since_epoch() - last_chat.seconds_since_epoch();
    const std::string when =
        gap < 86'400
            ? fmt::format("at {:02}:{:02}:{:02}", last_chat.hour(), last_chat.minute(), last_chat.second())
            : "on " + format_timestamp(last_chat);
    return fmt::format("Our last conversation was {} ago, {}.", span, when);
}

std::string_view to_string(Horizon h) { return h == Horizon::Short ? "short" : "long"; }
std::string_view to_string(Family f) { return kFamilyNames[family_index(f)]; }

std::optional<Horizon> horizon_from_string(std::string_view s) {
    if (s == "short") return Horizon::Short;
    if (s == "long") return Horizon::Long;
    return std::nullopt;
}

std::optional<Family> family_from_string(std::string_view s) {
    for (Family f : kFamilies) {
        if (to_string(f) == s) return f;
    }
    return std::nullopt;
}

Horizon horizon_between(const CivilDateTime& observation, const CivilDateTime& queried) {
    const std::int64_t gap = std::llabs(queried.seconds_since_epoch() - observation.seconds_since_epoch());
    return gap <= kShortHorizonSeconds ? Horizon::Short : Horizon::Long;
}

int QAConfig::count(Family f, Horizon h) const { return counts[family_index(f)][horizon_index(h)]; }

void QAConfig::set(Family f, Horizon h, int n) { counts[family_index(f)][horizon_index(h)] = n; }

int QAConfig::total() const {
    int sum = 0;
    for (const auto& row : counts) sum += row[0] + row[1];
    return sum;
}

void QAConfig::validate() const {
    for (Family f : kFamilies) {
        for (Horizon h : {Horizon::Short, Horizon::Long}) {
            if (count(f, h) < 0) throw InfeasibleConfigError("item counts must be >= 0");
        }
    }
    if (count(Family::AbsoluteOffset, Horizon::Short) > 0) {
        throw InfeasibleConfigError("absolute_offset items reach back centuries and cannot be short-horizon");
    }
    if (year_range.first > year_range.second) throw InfeasibleConfigError("year_range is reversed");
    if (year_range.first < 1250 || year_range.second > 9000) {
        throw InfeasibleConfigError("year_range must lie within [1250, 9000]");
    }
}

QAConfig QAConfig::eval_preset() {
    QAConfig c;
    for (Family f : kFamilies) {
        if (f != Family::AbsoluteOffset) c.set(f, Horizon::Short, 8);
        c.set(f, Horizon::Long, 52);
    }
    return c;
}

QAConfig QAConfig::train_preset() {
    QAConfig c;
    for (Family f : kFamilies) {
        if (f == Family::AbsoluteOffset) {
            c.set(f, Horizon::Long, 1600);
        } else {
            c.set(f, Horizon::Short, 800);
            c.set(f, Horizon::Long, 800);
        }
    }
    return c;
}

QAConfig QAConfig::from_json(const nlohmann::json& j) {
    QAConfig c;
    const std::string preset = j.value("preset", "");
    if (preset == "eval") {
        c = eval_preset();
    } else if (preset == "train") {
        c = train_preset();
    } else if (!preset.empty()) {
        throw DataError(fmt::format("unknown temporal QA preset '{}'", preset));
    }
    if (j.contains("counts")) {
        c.counts = {};
        for (const auto& [name, per] : j["counts"].items()) {
            const auto f = family_from_string(name);
            if (!f) throw DataError(fmt::format("unknown temporal QA family '{}'", name));
            c.set(*f, Horizon::Short, per.value("short", 0));
            c.set(*f, Horizon::Long, per.value("long", 0));
        }
    }
    if (j.contains("year_range")) c.year_range = j["year_range"].get<std::pair<std::int64_t, std::int64_t>>();
    c.validate();
    return c;
}

std::vector<QAItem> synthesize(const QAConfig& config, std::uint64_t seed) {
    config.validate();
    std::vector<QAItem> items;
    items.reserve(static_cast<std::size_t>(config.total()));
    for (Family f : kFamilies) {
        for (Horizon h : {Horizon::Short, Horizon::Long}) {
            const int n = config.count(f, h);
            if (n == 0) continue;
            std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                              static_cast<std::uint32_t>(family_index(f)),
                              static_cast<std::uint32_t>(horizon_index(h))};
            Rng rng(seq);
            for (int i = 0; i < n; ++i) {
                Draft d = make_item(f, h, rng, config);
                QAItem item;
                item.id = fmt::format("tqa-{}-{}-{:05}", to_string(f), to_string(h), i);
                item.family = f;
                item.horizon = horizon_between(d.observation, d.derivation.queried);
                if (item.horizon != h) {
                    throw InvariantError(fmt::format("item {} landed in the wrong horizon", item.id));
                }
                item.turns = std::move(d.turns);
                item.observation = d.observation;
                item.answer = std::move(d.answer);
                item.keywords = std::move(d.keywords);
                item.derivation = d.derivation;
                items.push_back(std::move(item));
            }
        }
    }
    return items;
}

std::vector<KeywordGroup> keywords_for_date(const CivilDateTime& d, Granularity g) {
    const KeywordGroup year{{std::to_string(d.year())}};
    const KeywordGroup month{{std::to_string(d.month()), std::string(month_abbreviation(d.month())),
                              std::string(month_name(d.month()))}};
    const KeywordGroup day{{std::to_string(d.day())}};
    switch (g) {
        case Granularity::YMD: return {year, month, day};
        case Granularity::YM: return {year, month};
        case Granularity::Year: return {year};
        case Granularity::WeekdayOnly: return {KeywordGroup{{std::string(weekday_name(weekday_of(d)))}}};
    }
    return {};
}

bool matches_alternative(std::string_view response, std::string_view alternative) {
    if (alternative.empty()) return false;
    if (all_digits(alternative)) {
        for (auto pos = response.find(alternative); pos != std::string_view::npos;
             pos = response.find(alternative, pos + 1)) {
            const bool left_clear = pos == 0 || !is_digit_at(response, pos - 1);
            const bool right_clear = !is_digit_at(response, pos + alternative.size());
            if (left_clear && right_clear) return true;
        }
        return false;
    }
    if (alternative.size() >= 2 && has_letter(alternative)) {
        return lower(response).find(lower(alternative)) != std::string::npos;
    }
    return response.find(alternative) != std::string_view::npos;
}

bool grade(std::string_view response, const std::vector<KeywordGroup>& keywords) {
    return std::all_of(keywords.begin(), keywords.end(), [&](const KeywordGroup& g) {
        return std::any_of(g.alternatives.begin(), g.alternatives.end(),
                           [&](const std::string& alt) { return matches_alternative(response, alt); });
    });
}

bool grade(std::string_view response, const QAItem& item) { return grade(response, item.keywords); }

std::string keyword_text(const std::vector<KeywordGroup>& keywords) {
    std::string out;
    for (std::size_t i = 0; i < keywords.size(); ++i) {
        if (i) out += ", ";
        out += '"';
        for (std::size_t k = 0; k < keywords[i].alternatives.size(); ++k) {
            if (k) out += '|';
            out += keywords[i].alternatives[k];
        }
        out += '"';
    }
    return out;
}

OrderedJson QAItem::to_json() const {
    OrderedJson j;
    j["id"] = id;
    j["family"] = std::string(to_string(family));
    j["horizon"] = std::string(to_string(horizon));
    OrderedJson turns_json = OrderedJson::array();
    for (const auto& t : turns) {
        OrderedJson tj;
        tj["role"] = std::string(emkit::to_string(t.role));
        tj["content"] = t.content;
        turns_json.push_back(std::move(tj));
    }
    j["turns"] = std::move(turns_json);
    j["observation"] = format_timestamp(observation);
    j["answer"] = answer;
    OrderedJson kw = OrderedJson::array();
    for (const auto& g : keywords) kw.push_back(g.alternatives);
    j["keywords"] = std::move(kw);
    j["keyword_text"] = keyword_text(keywords);
    OrderedJson der;
    der["anchor"] = format_timestamp(derivation.anchor);
    der["offset"] = offset_to_json(derivation.offset);
    der["target"] = format_timestamp(derivation.target);
    der["queried"] = format_timestamp(derivation.queried);
    j["derivation"] = std::move(der);
    return j;
}

QAItem QAItem::from_json(const nlohmann::json& j) {
    QAItem item;
    item.id = j.value("id", "");
    const auto family = family_from_string(j.at("family").get<std::string>());
    const auto horizon = horizon_from_string(j.at("horizon").get<std::string>());
    if (!family || !horizon) throw DataError("temporal QA item has an unknown family or horizon");
    item.family = *family;
    item.horizon = *horizon;
    for (const auto& t : j.at("turns")) {
        const auto role = role_from_string(t.at("role").get<std::string>());
        if (!role) throw DataError("temporal QA turn has an unknown role");
        item.turns.push_back({*role, t.at("content").get<std::string>()});
    }
    if (item.turns.empty() || item.turns.back().role != Role::User) {
        throw DataError(fmt::format("temporal QA item '{}' must end with a user question", item.id));
    }
    item.observation = calendar::parse_timestamp(j.at("observation").get<std::string>());
    item.answer = j.at("answer").get<std::string>();
    for (const auto& g : j.at("keywords")) {
        item.keywords.push_back(KeywordGroup{g.get<std::vector<std::string>>()});
    }
    if (item.keywords.empty()) throw DataError(fmt::format("temporal QA item '{}' has no keywords", item.id));
    if (j.contains("derivation")) {
        const auto& der = j["derivation"];
        item.derivation.anchor = calendar::parse_timestamp(der.at("anchor").get<std::string>());
        item.derivation.offset = offset_from_json(der.at("offset"));
        item.derivation.target = calendar::parse_timestamp(der.at("target").get<std::string>());
        item.derivation.queried = calendar::parse_timestamp(der.at("queried").get<std::string>());
    }
    return item;
}

}  // namespace emkit::temporal_qa
