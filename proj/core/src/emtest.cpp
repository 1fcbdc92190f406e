#include "emkit/emtest.hpp"

#include <limits>
#include <set>
#include <sstream>

#include <fmt/format.h>

namespace emkit::emtest {
namespace {

constexpr std::string_view kSpanIds[] = {"just_now",   "one_day",  "few_days",  "one_month",
                                         "few_months", "one_year", "few_years", "several_decades"};
constexpr std::string_view kSpanNames[] = {"just now",   "one day",  "few days",  "one month",
                                           "few months", "one year", "few years", "several decades"};
constexpr std::string_view kSpanAbbrev[] = {"JN", "OD", "FD", "OM", "FM", "OY", "FY", "SD"};

std::size_t pattern_length(Variant v) { return v == Variant::WithTime ? 3 : 2; }

Role expected_role(Variant v, std::size_t i) {
    if (v == Variant::WithTime) {
        static constexpr Role kPattern[] = {Role::User, Role::Observation, Role::Assistant};
        return kPattern[i % 3];
    }
    return i % 2 == 0 ? Role::User : Role::Assistant;
}

}  // namespace

std::string_view to_string(SpanLabel s) { return kSpanIds[index_of(s)]; }
std::string_view display_name(SpanLabel s) { return kSpanNames[index_of(s)]; }
std::string_view abbreviation(SpanLabel s) { return kSpanAbbrev[index_of(s)]; }
std::string_view to_string(Difficulty d) { return d == Difficulty::Easy ? "easy" : "hard"; }
std::string_view to_string(Variant v) { return v == Variant::WithTime ? "with_time" : "without_time"; }

std::optional<SpanLabel> span_from_string(std::string_view s) {
    for (SpanLabel span : kSpans) {
        if (to_string(span) == s) return span;
    }
    return std::nullopt;
}

std::optional<Difficulty> difficulty_from_string(std::string_view s) {
    if (s == "easy") return Difficulty::Easy;
    if (s == "hard") return Difficulty::Hard;
    return std::nullopt;
}

std::optional<Variant> variant_from_string(std::string_view s) {
    if (s == "with_time") return Variant::WithTime;
    if (s == "without_time") return Variant::WithoutTime;
    return std::nullopt;
}

std::size_t EMTestDataset::point_count() const {
    std::size_t n = 0;
    for (const auto& i : instances) n += i.points.size();
    return n;
}

void validate_instance(const TestInstance& instance, Variant variant) {
    auto fail = [&](const std::string& why) {
        throw InvariantError(fmt::format("instance '{}': {}", instance.id, why));
    };
    auto fail_point = [&](const TestPoint& p, const std::string& why) {
        throw InvariantError(fmt::format("instance '{}' point '{}': {}", instance.id, p.id, why));
    };
    if (instance.id.empty()) fail("empty id");
    const std::size_t stride = pattern_length(variant);
    if (instance.history.size() % stride != 0) fail("history ends mid-exchange");

    // Timestamp of the exchange each history index belongs to (WithTime).
    std::vector<CivilDateTime> stamps;
    for (std::size_t i = 0; i < instance.history.size(); ++i) {
        const Turn& t = instance.history[i];
        if (t.role != expected_role(variant, i)) {
            fail(fmt::format("history turn {} has role {}, expected {}", i, to_string(t.role),
                             to_string(expected_role(variant, i))));
        }
        if (t.role != Role::Observation && t.content.empty()) fail(fmt::format("history turn {} is empty", i));
        if (t.role != Role::Observation) continue;
        CivilDateTime ts;
        try {
            ts = calendar::parse_timestamp(t.content);
        } catch (const calendar::CalendarError& e) {
            fail(fmt::format("history turn {}: {}", i, e.what()));
        }
        if (!stamps.empty() && !(stamps.back() < ts)) fail(fmt::format("history turn {} timestamp does not increase", i));
        stamps.push_back(ts);
    }

    std::set<std::string> ids;
    for (const TestPoint& p : instance.points) {
        if (p.id.empty()) fail("point with empty id");
        if (!ids.insert(p.id).second) fail_point(p, "duplicate point id");
        if (p.question.empty()) fail_point(p, "empty question");
        if (p.reference_answer.empty()) fail_point(p, "empty reference answer");
        if (p.position > instance.history.size()) fail_point(p, "position beyond history");
        if (p.position % stride != 0) fail_point(p, "position splits an exchange");
        if (p.evidence && *p.evidence >= p.position) fail_point(p, "evidence must precede the question");
        if (variant == Variant::WithTime) {
            if (!p.observation || !p.span) fail_point(p, "with-time points need observation and span");
            const std::size_t exchanges = p.position / stride;
            if (exchanges > 0 && *p.observation < stamps[exchanges - 1]) {
                fail_point(p, "observation is earlier than the preceding history");
            }
        } else if (p.observation || p.span) {
            fail_point(p, "without-time points must not carry observation or span");
        }
    }
}

OrderedJson instance_to_json(const TestInstance& instance, Variant variant) {
    OrderedJson j;
    j["id"] = instance.id;
    j["variant"] = std::string(to_string(variant));
    OrderedJson history = OrderedJson::array();
    for (const Turn& t : instance.history) {
        OrderedJson tj;
        tj["role"] = std::string(emkit::to_string(t.role));
        tj["content"] = t.content;
        history.push_back(std::move(tj));
    }
    j["history"] = std::move(history);
    OrderedJson points = OrderedJson::array();
    for (const TestPoint& p : instance.points) {
        OrderedJson pj;
        pj["id"] = p.id;
        pj["position"] = p.position;
        pj["question"] = p.question;
        if (p.observation) pj["observation"] = calendar::format_timestamp(*p.observation);
        if (p.span) pj["span"] = std::string(to_string(*p.span));
        pj["difficulty"] = std::string(to_string(p.difficulty));
        pj["reference_answer"] = p.reference_answer;
        if (p.evidence) pj["evidence"] = *p.evidence;
        points.push_back(std::move(pj));
    }
    j["points"] = std::move(points);
    return j;
}

TestInstance instance_from_json(const nlohmann::json& j, Variant variant) {
    TestInstance inst;
    inst.id = j.at("id").get<std::string>();
    for (const auto& t : j.at("history")) {
        const auto role = role_from_string(t.at("role").get<std::string>());
        if (!role) throw DatasetError(fmt::format("instance '{}': unknown role", inst.id));
        inst.history.push_back(Turn{*role, t.at("content").get<std::string>(), inst.history.size()});
    }
    for (const auto& pj : j.at("points")) {
        TestPoint p;
        p.id = pj.at("id").get<std::string>();
        p.position = pj.at("position").get<std::size_t>();
        p.question = pj.at("question").get<std::string>();
        if (pj.contains("observation")) p.observation = calendar::parse_timestamp(pj["observation"].get<std::string>());
        if (pj.contains("span")) {
            p.span = span_from_string(pj["span"].get<std::string>());
            if (!p.span) throw DatasetError(fmt::format("point '{}': unknown span", p.id));
        }
        const auto difficulty = difficulty_from_string(pj.at("difficulty").get<std::string>());
        if (!difficulty) throw DatasetError(fmt::format("point '{}': unknown difficulty", p.id));
        p.difficulty = *difficulty;
        p.reference_answer = pj.at("reference_answer").get<std::string>();
        if (pj.contains("evidence")) p.evidence = pj["evidence"].get<std::size_t>();
        inst.points.push_back(std::move(p));
    }
    validate_instance(inst, variant);
    return inst;
}

EMTestDataset parse_dataset(std::string_view jsonl) {
    EMTestDataset ds;
    bool first = true;
    std::set<std::string> instance_ids;
    std::set<std::string> point_ids;
    for_each_jsonl(jsonl, [&](std::size_t, const nlohmann::json& j) {
        const auto variant = variant_from_string(j.at("variant").get<std::string>());
        if (!variant) throw DatasetError("unknown variant");
        if (first) {
            ds.variant = *variant;
            first = false;
        } else if (*variant != ds.variant) {
            throw DatasetError("file mixes with_time and without_time instances");
        }
        TestInstance inst = instance_from_json(j, *variant);
        if (!instance_ids.insert(inst.id).second) {
            throw InvariantError(fmt::format("duplicate instance id '{}'", inst.id));
        }
        for (const auto& p : inst.points) {
            if (!point_ids.insert(p.id).second) throw InvariantError(fmt::format("duplicate point id '{}'", p.id));
        }
        ds.instances.push_back(std::move(inst));
    });
    return ds;
}

EMTestDataset load_dataset(const std::filesystem::path& path) { return parse_dataset(read_text(path)); }

std::string serialize_dataset(const EMTestDataset& dataset) {
    std::string out;
    for (const auto& inst : dataset.instances) {
        out += dump_line(instance_to_json(inst, dataset.variant));
        out += '\n';
    }
    return out;
}

void save_dataset(const EMTestDataset& dataset, const std::filesystem::path& path) {
    write_text(path, serialize_dataset(dataset));
}

int CountTable::span_total(SpanLabel s) const {
    const auto& row = cells[index_of(s)];
    return row[0] + row[1];
}

std::string CountTable::to_text() const {
    std::string out = fmt::format("{:<16}{:>6}{:>6}{:>7}\n", "Time Span", "Easy", "Hard", "Total");
    if (variant == Variant::WithTime) {
        for (SpanLabel s : kSpans) {
            const auto& row = cells[index_of(s)];
            out += fmt::format("{:<16}{:>6}{:>6}{:>7}\n", display_name(s), row[0], row[1], span_total(s));
        }
    }
    out += fmt::format("{:<16}{:>6}{:>6}{:>7}\n", "Overall Number", difficulty_totals[0], difficulty_totals[1],
                       total());
    return out;
}

OrderedJson CountTable::to_json() const {
    OrderedJson j;
    j["variant"] = std::string(to_string(variant));
    if (variant == Variant::WithTime) {
        OrderedJson rows = OrderedJson::object();
        for (SpanLabel s : kSpans) {
            const auto& row = cells[index_of(s)];
            OrderedJson r;
            r["easy"] = row[0];
            r["hard"] = row[1];
            r["total"] = span_total(s);
            rows[std::string(to_string(s))] = std::move(r);
        }
        j["spans"] = std::move(rows);
    }
    OrderedJson overall;
    overall["easy"] = difficulty_totals[0];
    overall["hard"] = difficulty_totals[1];
    overall["total"] = total();
    j["overall"] = std::move(overall);
    return j;
}

CountTable stats(const EMTestDataset& dataset) {
    CountTable t;
    t.variant = dataset.variant;
    for (const auto& inst : dataset.instances) {
        for (const auto& p : inst.points) {
            const std::size_t d = index_of(p.difficulty);
            ++t.difficulty_totals[d];
            if (dataset.variant == Variant::WithTime && p.span) ++t.cells[index_of(*p.span)][d];
        }
    }
    return t;
}

std::size_t count_code_points(std::string_view utf8) {
    std::size_t n = 0;
    for (char c : utf8) {
        if ((static_cast<unsigned char>(c) & 0xC0) != 0x80) ++n;
    }
    return n;
}

CorpusSummary corpus_stats(const std::vector<dialogue::EMTrainRecord>& records) {
    CorpusSummary s;
    s.records = records.size();
    if (records.empty()) return s;
    double rounds = 0.0;
    double chars = 0.0;
    for (const auto& r : records) {
        rounds += r.meta.round_count;
        for (const auto& t : r.turns) chars += static_cast<double>(count_code_points(t.content));
    }
    s.mean_rounds = rounds / static_cast<double>(records.size());
    s.mean_chars = chars / static_cast<double>(records.size());
    return s;
}

std::string CorpusSummary::to_text() const {
    auto show = [](const std::optional<double>& v) { return v ? fmt::format("{:.2f}", *v) : std::string("n/a"); };
    return fmt::format("records: {}\nmean rounds per record: {}\nmean characters per record: {}\n", records,
                       show(mean_rounds), show(mean_chars));
}

OrderedJson CorpusSummary::to_json() const {
    OrderedJson j;
    j["records"] = records;
    j["mean_rounds"] = mean_rounds ? OrderedJson(*mean_rounds) : OrderedJson(nullptr);
    j["mean_chars"] = mean_chars ? OrderedJson(*mean_chars) : OrderedJson(nullptr);
    return j;
}

SpanWindows SpanWindows::defaults() {
    constexpr std::int64_t hour = 3600;
    constexpr std::int64_t day = 86'400;
    constexpr std::int64_t year = 365 * day;
    return SpanWindows{{{{0, hour},
                         {hour, 2 * day},
                         {day, 14 * day},
                         {14 * day, 60 * day},
                         {30 * day, 330 * day},
                         {300 * day, 2 * year},
                         {year, 15 * year},
                         {15 * year, std::numeric_limits<std::int64_t>::max()}}}};
}

std::vector<LintWarning> lint_spans(const EMTestDataset& dataset, const SpanWindows& windows) {
    std::vector<LintWarning> out;
    if (dataset.variant != Variant::WithTime) return out;
    for (const auto& inst : dataset.instances) {
        for (const auto& p : inst.points) {
            if (!p.evidence || !p.span || !p.observation) continue;
            const std::size_t stamp_index = *p.evidence - *p.evidence % 3 + 1;
            const auto then = calendar::parse_timestamp(inst.history.at(stamp_index).content);
            const std::int64_t gap = p.observation->seconds_since_epoch() - then.seconds_since_epoch();
            const auto [lo, hi] = windows.windows[index_of(*p.span)];
            if (gap < lo || gap > hi) {
                out.push_back({inst.id, p.id,
                               fmt::format("gap of {} s is outside the '{}' window [{}, {}]", gap,
                                           display_name(*p.span), lo, hi)});
            }
        }
    }
    return out;
}

}  // namespace emkit::emtest
