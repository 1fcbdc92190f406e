#pragma once

#include "emkit/backends.hpp"
#include "emkit/emtest.hpp"
#include "emkit/jsonl.hpp"
#include "emkit/temporal_qa.hpp"

#include <array>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace emkit::eval {

using backends::ChatMessage;
using backends::EmbeddingVector;
using emkit::emtest::Difficulty;
using emkit::emtest::SpanLabel;

class ZeroNormError : public DataError {
public:
    using DataError::DataError;
};

class ZeroVarianceError : public DataError {
public:
    using DataError::DataError;
};

class JoinError : public DataError {
public:
    using DataError::DataError;
};

// 100 * cos(angle(a, b)).
double cosine_score(const EmbeddingVector& a, const EmbeddingVector& b);

struct Similarity {
    double score = 0.0;
    bool flagged = false;  // set when the response was empty
};

// Empty (all-whitespace) responses score 0 and are flagged without calling
// the embedder.
Similarity similarity(std::string_view response, std::string_view reference,
                      backends::Embedder& embedder);

double pearson(std::span<const double> xs, std::span<const double> ys);

enum class CorrelationLabel { HighlyPositive, Other };
std::string_view to_string(CorrelationLabel label);

inline constexpr double kHighCorrelationThreshold = 0.8;

struct Correlation {
    double r = 0.0;
    CorrelationLabel label = CorrelationLabel::Other;
};

// HighlyPositive iff r > 0.8 (strict).
Correlation correlate(std::span<const double> human, std::span<const double> sim);

struct PointResult {
    std::string point_id;
    std::string instance_id;
    std::string model_output;
    double similarity = 0.0;
    bool flagged = false;
    std::optional<std::string> error;
    std::optional<bool> keyword_pass;
    std::optional<double> human_score;
    std::optional<SpanLabel> span;
    Difficulty difficulty = Difficulty::Easy;

    // Throws InvariantError for non-finite similarity or out-of-scale human score.
    void validate() const;
    OrderedJson to_json() const;
    static PointResult from_json(const nlohmann::json& j);
};

// The history before the point, then the question, then (WithTime only) the
// observation timestamp, matching the user-time-assistant order used in
// training data. The reference answer is never included.
std::vector<ChatMessage> build_context(const emtest::TestInstance& instance,
                                       const emtest::TestPoint& point, emtest::Variant variant);

struct RunOptions {
    int jobs = 1;
};

// Empty completions score 0 and are flagged. Other backend failures are
// recorded on the point (flagged, score 0, error set); embedder
// failures abort the run. Results are ordered by point id. Each point is
// sent with agent tag = point id.
std::vector<PointResult> run_eval(backends::ChatBackend& model, const emtest::EMTestDataset& dataset,
                                  backends::Embedder& embedder, const RunOptions& options = {});

double round_half_up(double value, int decimals = 1);

struct CellStats {
    int count = 0;
    double mean = 0.0;
    double min = 0.0;
    double max = 0.0;
};

struct Report {
    bool has_spans = false;
    std::array<std::array<CellStats, 2>, emtest::kSpanCount> cells{};
    std::array<CellStats, 2> overall{};
    int flagged = 0;

    const CellStats& cell(SpanLabel s, Difficulty d) const {
        return cells[emtest::index_of(s)][emtest::index_of(d)];
    }
    const CellStats& overall_for(Difficulty d) const { return overall[emtest::index_of(d)]; }

    OrderedJson to_json() const;
    // Span x difficulty layout with an Overall column, or Easy/Hard only
    // when there are no spans.
    std::string to_text(std::string_view model_name) const;
};

Report aggregate(const std::vector<PointResult>& results);

// Temporal-QA keyword evaluation.
struct KeywordResult {
    std::string item_id;
    temporal_qa::Family family = temporal_qa::Family::RelativeDay;
    temporal_qa::Horizon horizon = temporal_qa::Horizon::Short;
    std::string model_output;
    bool pass = false;
    std::optional<std::string> error;

    OrderedJson to_json() const;
};

// Turns before the question, the question, then the observation.
std::vector<ChatMessage> build_context(const temporal_qa::QAItem& item);

std::vector<KeywordResult> run_keyword_eval(backends::ChatBackend& model,
                                            const std::vector<temporal_qa::QAItem>& items,
                                            const RunOptions& options = {});

struct KeywordReport {
    std::array<int, 2> count{};   // [short, long]
    std::array<int, 2> passed{};

    std::optional<double> pass_rate(temporal_qa::Horizon h) const;  // percent
    OrderedJson to_json() const;
    std::string to_text(std::string_view model_name) const;
};

KeywordReport aggregate_keywords(const std::vector<KeywordResult>& results);

// Human scores: lines of {point_id, score}, score in [1, 10].
std::map<std::string, double> parse_human_scores(std::string_view jsonl);
std::map<std::string, double> load_human_scores(const std::filesystem::path& path);
std::vector<PointResult> parse_results(std::string_view jsonl);
std::vector<PointResult> load_results(const std::filesystem::path& path);

struct DifficultyCorrelation {
    Difficulty difficulty = Difficulty::Easy;
    std::size_t n = 0;
    Correlation correlation;
};

// Joins by point id (the id sets must match exactly) and correlates human
// scores with similarity per difficulty level that has any points.
std::vector<DifficultyCorrelation> correlate_by_difficulty(const std::map<std::string, double>& human,
                                                           const std::vector<PointResult>& results);

}  // namespace emkit::eval
