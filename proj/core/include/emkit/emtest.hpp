#pragma once

#include "emkit/calendar.hpp"
#include "emkit/dialogue.hpp"
#include "emkit/jsonl.hpp"

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace emkit::emtest {

using calendar::CivilDateTime;
using dialogue::Turn;

enum class SpanLabel { JustNow, OneDay, FewDays, OneMonth, FewMonths, OneYear, FewYears, SeveralDecades };
inline constexpr std::size_t kSpanCount = 8;
inline constexpr std::array<SpanLabel, kSpanCount> kSpans = {
    SpanLabel::JustNow,   SpanLabel::OneDay,  SpanLabel::FewDays,  SpanLabel::OneMonth,
    SpanLabel::FewMonths, SpanLabel::OneYear, SpanLabel::FewYears, SpanLabel::SeveralDecades};

enum class Difficulty { Easy, Hard };
inline constexpr std::array<Difficulty, 2> kDifficulties = {Difficulty::Easy, Difficulty::Hard};

enum class Variant { WithTime, WithoutTime };

std::string_view to_string(SpanLabel s);      // "just_now", ...
std::string_view display_name(SpanLabel s);   // "just now", ...
std::string_view abbreviation(SpanLabel s);   // "JN", ...
std::string_view to_string(Difficulty d);
std::string_view to_string(Variant v);
std::optional<SpanLabel> span_from_string(std::string_view s);
std::optional<Difficulty> difficulty_from_string(std::string_view s);
std::optional<Variant> variant_from_string(std::string_view s);

inline std::size_t index_of(SpanLabel s) { return static_cast<std::size_t>(s); }
inline std::size_t index_of(Difficulty d) { return static_cast<std::size_t>(d); }

struct TestPoint {
    std::string id;
    // Number of history turns that precede the question.
    std::size_t position = 0;
    std::string question;
    std::optional<CivilDateTime> observation;
    std::optional<SpanLabel> span;
    Difficulty difficulty = Difficulty::Easy;
    std::string reference_answer;
    // Optional annotation: history index of the turn the question is about.
    // Only the span linter reads it.
    std::optional<std::size_t> evidence;
};

struct TestInstance {
    std::string id;
    std::vector<Turn> history;
    std::vector<TestPoint> points;
};

struct EMTestDataset {
    Variant variant = Variant::WithTime;
    std::vector<TestInstance> instances;

    std::size_t point_count() const;
};

class DatasetError : public DataError {
public:
    using DataError::DataError;
};

// Throws InvariantError naming the instance (and point) at fault.
void validate_instance(const TestInstance& instance, Variant variant);

OrderedJson instance_to_json(const TestInstance& instance, Variant variant);
TestInstance instance_from_json(const nlohmann::json& j, Variant variant);

// Line-delimited instances. Parse errors carry the line number; invariant
// violations carry instance/point ids; mixed variants are rejected.
EMTestDataset parse_dataset(std::string_view jsonl);
EMTestDataset load_dataset(const std::filesystem::path& path);
std::string serialize_dataset(const EMTestDataset& dataset);
void save_dataset(const EMTestDataset& dataset, const std::filesystem::path& path);

struct CountTable {
    Variant variant = Variant::WithTime;
    // cells[span][difficulty]; WithoutTime leaves cells at zero.
    std::array<std::array<int, 2>, kSpanCount> cells{};
    std::array<int, 2> difficulty_totals{};

    int span_total(SpanLabel s) const;
    int total() const { return difficulty_totals[0] + difficulty_totals[1]; }
    std::string to_text() const;
    OrderedJson to_json() const;
};

CountTable stats(const EMTestDataset& dataset);

struct CorpusSummary {
    std::size_t records = 0;
    std::optional<double> mean_rounds;
    std::optional<double> mean_chars;  // Unicode code points over all turns

    std::string to_text() const;
    OrderedJson to_json() const;
};

CorpusSummary corpus_stats(const std::vector<dialogue::EMTrainRecord>& records);
std::size_t count_code_points(std::string_view utf8);

// Plausible [min, max] seconds between a point's observation and the
// timestamp of its evidence turn, per span. Configurable, not ground truth.
struct SpanWindows {
    std::array<std::pair<std::int64_t, std::int64_t>, kSpanCount> windows;
    static SpanWindows defaults();
};

struct LintWarning {
    std::string instance_id;
    std::string point_id;
    std::string message;
};

std::vector<LintWarning> lint_spans(const EMTestDataset& dataset,
                                    const SpanWindows& windows = SpanWindows::defaults());

}  // namespace emkit::emtest
