#include "emkit/eval.hpp"

#include "emkit/calendar.hpp"
#include "emkit/parallel.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cctype>
#include <cmath>
#include <numeric>
#include <set>

namespace emkit::eval {

namespace {

bool is_blank(std::string_view s) {
    return std::all_of(s.begin(), s.end(), [](unsigned char c) { return std::isspace(c) != 0; });
}

void accumulate(CellStats& cell, double v) {
    if (cell.count == 0) {
        cell.min = cell.max = v;
    } else {
        cell.min = std::min(cell.min, v);
        cell.max = std::max(cell.max, v);
    }
    // running sum kept in mean until finalize
    cell.mean += v;
    ++cell.count;
}

void finalize(CellStats& cell) {
    if (cell.count > 0) cell.mean /= cell.count;
}

OrderedJson cell_json(const CellStats& c) {
    OrderedJson j;
    j["count"] = c.count;
    if (c.count > 0) {
        j["mean"] = round_half_up(c.mean);
        j["min"] = round_half_up(c.min);
        j["max"] = round_half_up(c.max);
    } else {
        j["mean"] = nullptr;
    }
    return j;
}

std::string cell_text(const CellStats& c) {
    return c.count > 0 ? fmt::format("{:.1f}", round_half_up(c.mean)) : std::string("-");
}

}  // namespace

double cosine_score(const EmbeddingVector& a, const EmbeddingVector& b) {
    if (a.dimension() != b.dimension()) {
        throw PreconditionError(
            fmt::format("embedding dimensions differ: {} vs {}", a.dimension(), b.dimension()));
    }
    const double na = a.norm();
    const double nb = b.norm();
    if (na == 0.0 || nb == 0.0) throw ZeroNormError("embedding has zero norm");
    const double dot =
        std::inner_product(a.components.begin(), a.components.end(), b.components.begin(), 0.0);
    return 100.0 * std::clamp(dot / (na * nb), -1.0, 1.0);
}

Similarity similarity(std::string_view response, std::string_view reference,
                      backends::Embedder& embedder) {
    if (is_blank(reference)) throw PreconditionError("reference answer is empty");
    if (is_blank(response)) return {0.0, true};
    const auto r = embedder.embed(response);
    const auto g = embedder.embed(reference);
    return {cosine_score(r, g), false};
}

double pearson(std::span<const double> xs, std::span<const double> ys) {
    if (xs.size() != ys.size()) {
        throw PreconditionError(fmt::format("length mismatch: {} vs {}", xs.size(), ys.size()));
    }
    if (xs.size() < 2) throw PreconditionError("pearson needs at least two pairs");
    const double n = static_cast<double>(xs.size());
    const double mx = std::accumulate(xs.begin(), xs.end(), 0.0) / n;
    const double my = std::accumulate(ys.begin(), ys.end(), 0.0) / n;
    double sxy = 0.0, sxx = 0.0, syy = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        const double dx = xs[i] - mx;
        const double dy = ys[i] - my;
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if (sxx == 0.0 || syy == 0.0) throw ZeroVarianceError("pearson undefined for constant input");
    return std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
}

std::string_view to_string(CorrelationLabel label) {
    return label == CorrelationLabel::HighlyPositive ? "highly_positive" : "other";
}

Correlation correlate(std::span<const double> human, std::span<const double> sim) {
    const double r = pearson(human, sim);
    return {r, r > kHighCorrelationThreshold ? CorrelationLabel::HighlyPositive
                                             : CorrelationLabel::Other};
}

void PointResult::validate() const {
    if (!std::isfinite(similarity)) throw InvariantError(point_id + ": similarity is not finite");
    if (similarity < -100.0 || similarity > 100.0) {
        throw InvariantError(point_id + ": similarity outside [-100, 100]");
    }
    if (human_score && (*human_score < 1.0 || *human_score > 10.0)) {
        throw InvariantError(point_id + ": human score outside [1, 10]");
    }
}

OrderedJson PointResult::to_json() const {
    OrderedJson j;
    j["point_id"] = point_id;
    j["instance_id"] = instance_id;
    j["difficulty"] = emtest::to_string(difficulty);
    if (span) j["span"] = emtest::to_string(*span);
    j["model_output"] = model_output;
    j["similarity"] = similarity;
    j["flagged"] = flagged;
    if (error) j["error"] = *error;
    if (keyword_pass) j["keyword_pass"] = *keyword_pass;
    if (human_score) j["human_score"] = *human_score;
    return j;
}

PointResult PointResult::from_json(const nlohmann::json& j) {
    PointResult r;
    r.point_id = j.at("point_id").get<std::string>();
    r.instance_id = j.value("instance_id", std::string{});
    const auto d = emtest::difficulty_from_string(j.at("difficulty").get<std::string>());
    if (!d) throw DataError("unknown difficulty in result " + r.point_id);
    r.difficulty = *d;
    if (j.contains("span")) {
        const auto s = emtest::span_from_string(j.at("span").get<std::string>());
        if (!s) throw DataError("unknown span in result " + r.point_id);
        r.span = *s;
    }
    r.model_output = j.value("model_output", std::string{});
    r.similarity = j.at("similarity").get<double>();
    r.flagged = j.value("flagged", false);
    if (j.contains("error")) r.error = j.at("error").get<std::string>();
    if (j.contains("keyword_pass")) r.keyword_pass = j.at("keyword_pass").get<bool>();
    if (j.contains("human_score")) r.human_score = j.at("human_score").get<double>();
    r.validate();
    return r;
}

std::vector<ChatMessage> build_context(const emtest::TestInstance& instance,
                                       const emtest::TestPoint& point, emtest::Variant variant) {
    if (point.position > instance.history.size()) {
        throw PreconditionError(point.id + ": position beyond history");
    }
    std::vector<ChatMessage> messages;
    messages.reserve(point.position + 2);
    for (std::size_t i = 0; i < point.position; ++i) {
        messages.push_back({instance.history[i].role, instance.history[i].content});
    }
    messages.push_back({Role::User, point.question});
    if (variant == emtest::Variant::WithTime) {
        if (!point.observation) throw PreconditionError(point.id + ": missing observation");
        messages.push_back({Role::Observation, calendar::format_timestamp(*point.observation)});
    }
    return messages;
}

std::vector<PointResult> run_eval(backends::ChatBackend& model, const emtest::EMTestDataset& dataset,
                                  backends::Embedder& embedder, const RunOptions& options) {
    struct Job {
        const emtest::TestInstance* instance;
        const emtest::TestPoint* point;
    };
    std::vector<Job> jobs;
    for (const auto& inst : dataset.instances) {
        for (const auto& p : inst.points) jobs.push_back({&inst, &p});
    }
    std::vector<PointResult> results(jobs.size());
    parallel_for(jobs.size(), options.jobs, [&](std::size_t i) {
        const auto& [inst, point] = jobs[i];
        PointResult r;
        r.point_id = point->id;
        r.instance_id = inst->id;
        r.difficulty = point->difficulty;
        r.span = point->span;
        const auto messages = build_context(*inst, *point, dataset.variant);
        try {
            r.model_output = model.chat(point->id, messages);
        } catch (const backends::EmptyCompletionError&) {
            r.model_output.clear();  // scored by the empty-response rule below
        } catch (const BackendError& e) {
            r.error = e.what();
        }
        if (r.error) {
            r.flagged = true;
        } else {
            const auto s = similarity(r.model_output, point->reference_answer, embedder);
            r.similarity = s.score;
            r.flagged = s.flagged;
        }
        r.validate();
        results[i] = std::move(r);
    });
    std::sort(results.begin(), results.end(),
              [](const PointResult& a, const PointResult& b) { return a.point_id < b.point_id; });
    return results;
}

double round_half_up(double value, int decimals) {
    const double scale = std::pow(10.0, decimals);
    // the small bias absorbs representation error in values like 84.05
    return std::floor(value * scale + 0.5 + 1e-9) / scale;
}

Report aggregate(const std::vector<PointResult>& results) {
    Report rep;
    for (const auto& r : results) {
        r.validate();
        const auto d = emtest::index_of(r.difficulty);
        accumulate(rep.overall[d], r.similarity);
        if (r.span) {
            rep.has_spans = true;
            accumulate(rep.cells[emtest::index_of(*r.span)][d], r.similarity);
        }
        if (r.flagged) ++rep.flagged;
    }
    for (auto& row : rep.cells) {
        for (auto& c : row) finalize(c);
    }
    for (auto& c : rep.overall) finalize(c);
    return rep;
}

OrderedJson Report::to_json() const {
    OrderedJson j;
    j["flagged"] = flagged;
    for (auto d : {Difficulty::Easy, Difficulty::Hard}) {
        OrderedJson level;
        level["overall"] = cell_json(overall_for(d));
        if (has_spans) {
            OrderedJson spans;
            for (auto s : emtest::kSpans) spans[std::string(emtest::to_string(s))] = cell_json(cell(s, d));
            level["spans"] = std::move(spans);
        }
        j[std::string(emtest::to_string(d))] = std::move(level);
    }
    return j;
}

std::string Report::to_text(std::string_view model_name) const {
    const std::size_t w = std::max<std::size_t>(model_name.size(), 5);
    std::string out;
    if (!has_spans) {
        out += fmt::format("{:<{}}  {:>6}  {:>6}\n", "Model", w, "Easy", "Hard");
        out += fmt::format("{:<{}}  {:>6}  {:>6}\n", model_name, w,
                           cell_text(overall_for(Difficulty::Easy)),
                           cell_text(overall_for(Difficulty::Hard)));
        return out;
    }
    out += fmt::format("{:<{}}  {:>7}", "Model", w, "Overall");
    for (auto s : emtest::kSpans) out += fmt::format("  {:>5}", emtest::abbreviation(s));
    out += '\n';
    for (auto d : {Difficulty::Easy, Difficulty::Hard}) {
        out += d == Difficulty::Easy ? "Easy\n" : "Hard\n";
        out += fmt::format("{:<{}}  {:>7}", model_name, w, cell_text(overall_for(d)));
        for (auto s : emtest::kSpans) out += fmt::format("  {:>5}", cell_text(cell(s, d)));
        out += '\n';
    }
    return out;
}

OrderedJson KeywordResult::to_json() const {
    OrderedJson j;
    j["item_id"] = item_id;
    j["family"] = temporal_qa::to_string(family);
    j["horizon"] = temporal_qa::to_string(horizon);
    j["model_output"] = model_output;
    j["pass"] = pass;
    if (error) j["error"] = *error;
    return j;
}

std::vector<ChatMessage> build_context(const temporal_qa::QAItem& item) {
    if (item.turns.empty()) throw PreconditionError(item.id + ": no turns");
    std::vector<ChatMessage> messages;
    messages.reserve(item.turns.size() + 1);
    for (const auto& t : item.turns) messages.push_back({t.role, t.content});
    messages.push_back({Role::Observation, calendar::format_timestamp(item.observation)});
    return messages;
}

std::vector<KeywordResult> run_keyword_eval(backends::ChatBackend& model,
                                            const std::vector<temporal_qa::QAItem>& items,
                                            const RunOptions& options) {
    std::vector<KeywordResult> results(items.size());
    parallel_for(items.size(), options.jobs, [&](std::size_t i) {
        const auto& item = items[i];
        KeywordResult r;
        r.item_id = item.id;
        r.family = item.family;
        r.horizon = item.horizon;
        try {
            r.model_output = model.chat(item.id, build_context(item));
            r.pass = temporal_qa::grade(r.model_output, item);
        } catch (const backends::EmptyCompletionError&) {
            r.pass = false;
        } catch (const BackendError& e) {
            r.error = e.what();
        }
        results[i] = std::move(r);
    });
    std::sort(results.begin(), results.end(),
              [](const KeywordResult& a, const KeywordResult& b) { return a.item_id < b.item_id; });
    return results;
}

std::optional<double> KeywordReport::pass_rate(temporal_qa::Horizon h) const {
    const auto i = static_cast<std::size_t>(h);
    if (count[i] == 0) return std::nullopt;
    return 100.0 * passed[i] / count[i];
}

OrderedJson KeywordReport::to_json() const {
    OrderedJson j;
    for (auto h : {temporal_qa::Horizon::Short, temporal_qa::Horizon::Long}) {
        const auto i = static_cast<std::size_t>(h);
        OrderedJson e;
        e["count"] = count[i];
        e["passed"] = passed[i];
        const auto rate = pass_rate(h);
        e["pass_rate"] = rate ? OrderedJson(round_half_up(*rate)) : OrderedJson(nullptr);
        j[std::string(temporal_qa::to_string(h))] = std::move(e);
    }
    return j;
}

std::string KeywordReport::to_text(std::string_view model_name) const {
    const std::size_t w = std::max<std::size_t>(model_name.size(), 5);
    auto rate = [&](temporal_qa::Horizon h) {
        const auto r = pass_rate(h);
        return r ? fmt::format("{:.1f}", round_half_up(*r)) : std::string("-");
    };
    return fmt::format("{:<{}}  {:>10}  {:>9}\n{:<{}}  {:>10}  {:>9}\n", "Model", w, "Short-term",
                       "Long-term", model_name, w, rate(temporal_qa::Horizon::Short),
                       rate(temporal_qa::Horizon::Long));
}

KeywordReport aggregate_keywords(const std::vector<KeywordResult>& results) {
    KeywordReport rep;
    for (const auto& r : results) {
        const auto i = static_cast<std::size_t>(r.horizon);
        ++rep.count[i];
        if (r.pass) ++rep.passed[i];
    }
    return rep;
}

std::map<std::string, double> parse_human_scores(std::string_view jsonl) {
    std::map<std::string, double> scores;
    for_each_jsonl(jsonl, [&](std::size_t, const nlohmann::json& j) {
        const auto id = j.at("point_id").get<std::string>();
        const double score = j.at("score").get<double>();
        if (!std::isfinite(score) || score < 1.0 || score > 10.0) {
            throw DataError(fmt::format("{}: human score {} outside [1, 10]", id, score));
        }
        if (!scores.emplace(id, score).second) throw DataError("duplicate human score for " + id);
    });
    return scores;
}

std::map<std::string, double> load_human_scores(const std::filesystem::path& path) {
    return parse_human_scores(read_text(path));
}

std::vector<PointResult> parse_results(std::string_view jsonl) {
    std::vector<PointResult> out;
    for_each_jsonl(jsonl, [&](std::size_t, const nlohmann::json& j) { out.push_back(PointResult::from_json(j)); });
    return out;
}

std::vector<PointResult> load_results(const std::filesystem::path& path) {
    return parse_results(read_text(path));
}

std::vector<DifficultyCorrelation> correlate_by_difficulty(const std::map<std::string, double>& human,
                                                           const std::vector<PointResult>& results) {
    std::set<std::string> seen;
    std::array<std::vector<double>, 2> hs, ss;
    for (const auto& r : results) {
        const auto it = human.find(r.point_id);
        if (it == human.end()) throw JoinError("no human score for " + r.point_id);
        if (!seen.insert(r.point_id).second) throw JoinError("duplicate result for " + r.point_id);
        const auto d = emtest::index_of(r.difficulty);
        hs[d].push_back(it->second);
        ss[d].push_back(r.similarity);
    }
    for (const auto& [id, score] : human) {
        if (!seen.contains(id)) throw JoinError("no result for human-scored point " + id);
    }
    std::vector<DifficultyCorrelation> out;
    for (auto d : {Difficulty::Easy, Difficulty::Hard}) {
        const auto i = emtest::index_of(d);
        if (hs[i].empty()) continue;
        out.push_back({d, hs[i].size(), correlate(hs[i], ss[i])});
    }
    return out;
}

}  // namespace emkit::eval
