#pragma once

#include "emkit/calendar.hpp"
#include "emkit/jsonl.hpp"
#include "emkit/types.hpp"

#include <array>
#include <cstdint>
#include <random>
#include <string>
#include <utility>
#include <vector>

namespace emkit::temporal_qa {

using calendar::CivilDateTime;
using Rng = std::mt19937_64;

// Alternatives for one required fact ("9|Sep|September").
struct KeywordGroup {
    std::vector<std::string> alternatives;
    bool operator==(const KeywordGroup&) const = default;
};

enum class Horizon { Short, Long };
enum class Family { AbsoluteOffset, RelativeDay, WeekdayQuery, WeekendQuery, ElapsedSinceLastChat };

inline constexpr std::array<Family, 5> kFamilies = {
    Family::AbsoluteOffset, Family::RelativeDay, Family::WeekdayQuery, Family::WeekendQuery,
    Family::ElapsedSinceLastChat};

std::string_view to_string(Horizon h);
std::string_view to_string(Family f);
std::optional<Horizon> horizon_from_string(std::string_view s);
std::optional<Family> family_from_string(std::string_view s);

// Short iff the queried instant is within 7 days of the observation.
inline constexpr std::int64_t kShortHorizonSeconds = 7 * 86'400;
Horizon horizon_between(const CivilDateTime& observation, const CivilDateTime& queried);

struct QATurn {
    Role role = Role::User;
    std::string content;
    bool operator==(const QATurn&) const = default;
};

// How the answer was computed: target = add_offset(anchor, offset).
// `queried` is the instant the question asks about (the target, or the time
// of the last chat for ElapsedSinceLastChat).
struct Derivation {
    CivilDateTime anchor;
    calendar::DateOffset offset;
    CivilDateTime target;
    CivilDateTime queried;
};

struct QAItem {
    std::string id;
    Family family = Family::RelativeDay;
    Horizon horizon = Horizon::Short;
    std::vector<QATurn> turns;  // ends with the question
    CivilDateTime observation;  // time stamped on the question
    std::string answer;
    std::vector<KeywordGroup> keywords;
    Derivation derivation;

    const std::string& question() const { return turns.back().content; }

    OrderedJson to_json() const;
    static QAItem from_json(const nlohmann::json& j);
};

struct QAConfig {
    // counts[family][horizon]
    std::array<std::array<int, 2>, 5> counts{};
    std::pair<std::int64_t, std::int64_t> year_range{1990, 2060};

    int count(Family f, Horizon h) const;
    void set(Family f, Horizon h, int n);
    int total() const;
    void validate() const;

    // 292 items: 32 short (8 per short-capable family), 260 long (52 per family).
    static QAConfig eval_preset();
    // 8,000 items: 1,600 per family, split evenly by horizon where both exist.
    static QAConfig train_preset();
    static QAConfig from_json(const nlohmann::json& j);
};

class InfeasibleConfigError : public DataError {
public:
    using DataError::DataError;
};

// Items are emitted family by family, short before long, each from its own
// sub-seed of `seed`, so the dataset is independent of thread scheduling.
std::vector<QAItem> synthesize(const QAConfig& config, std::uint64_t seed);

enum class Granularity { YMD, YM, Year, WeekdayOnly };

std::vector<KeywordGroup> keywords_for_date(const CivilDateTime& d, Granularity g);

// True iff every group has an alternative present in the response.
// Digit-only alternatives must not touch another digit; alternatives with
// letters and length >= 2 match case-insensitively; anything else must
// match exactly.
bool matches_alternative(std::string_view response, std::string_view alternative);
bool grade(std::string_view response, const std::vector<KeywordGroup>& keywords);
bool grade(std::string_view response, const QAItem& item);

// Answer renderers used by synthesize().
// "a year ago today", "3 months from today", "the day before yesterday", "9 days ago".
std::string relative_phrase(const calendar::DateOffset& offset);
// "The time is Dec, 1866"
std::string answer_absolute_offset(const CivilDateTime& anchor, const calendar::DateOffset& offset);
// "Today is 2020-4-3, therefore a year ago today should be 2019-4-3."
std::string answer_relative_day(const CivilDateTime& today, const calendar::DateOffset& offset);
// "Yesterday was Thursday."
std::string answer_weekday_query(const CivilDateTime& today, std::int64_t days);
// "No, the day after tomorrow will be Monday, July 5th, 2027."
std::string answer_weekend_query(const CivilDateTime& today, std::int64_t days);
// "Our last conversation was 29 minutes ago, at 11:01:39."
std::string answer_elapsed(const CivilDateTime& last_chat, const CivilDateTime& now);

// "\"1581\", \"9|Sep|September\", \"3\""
std::string keyword_text(const std::vector<KeywordGroup>& keywords);

}  // namespace emkit::temporal_qa
