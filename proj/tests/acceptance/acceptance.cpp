// Runs the nine acceptance criteria and prints one PASS/FAIL line each.
// Exit status is nonzero when any criterion fails.

#include "calendar_oracle.hpp"
#include "fixtures.hpp"
#include "generators.hpp"

#include "emkit/dialogue.hpp"
#include "emkit/eval.hpp"
#include "emkit/temporal_qa.hpp"

#include <fmt/format.h>
#include <sys/wait.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <functional>
#include <iostream>

using namespace emkit;
using calendar::CivilDateTime;
using calendar::DateOffset;
namespace fs = std::filesystem;

namespace {

struct Outcome {
    bool ok = true;
    std::string detail;

    void require(bool cond, const std::string& what) {
        if (!cond && ok) {
            ok = false;
            detail = what;
        }
    }
};

struct Criterion {
    int number;
    std::string name;
    double budget_seconds;  // 0 = no runtime bound
    std::function<Outcome()> body;
};

// ---------------------------------------------------------------- 1

Outcome pearson_reproduction() {
    Outcome o;
    const auto dir = fixtures::test_dir() / "published_overall";
    const auto corr = eval::correlate_by_difficulty(eval::load_human_scores(dir / "human_scores.jsonl"),
                                                    eval::load_results(dir / "results.jsonl"));
    o.require(corr.size() == 2, "expected easy and hard levels");
    if (!o.ok) return o;
    const double easy = corr[0].correlation.r, hard = corr[1].correlation.r;
    o.require(std::abs(easy - 0.935) <= 0.001, fmt::format("easy r = {:.4f}", easy));
    o.require(std::abs(hard - 0.842) <= 0.001, fmt::format("hard r = {:.4f}", hard));
    if (o.ok) o.detail = fmt::format("easy r={:.4f} hard r={:.4f}", easy, hard);
    return o;
}

// ---------------------------------------------------------------- 2

oracle::Ymd ymd(const CivilDateTime& d) { return {d.year(), d.month(), d.day()}; }

int seconds_of_day(const CivilDateTime& d) { return d.hour() * 3600 + d.minute() * 60 + d.second(); }

Outcome calendar_suite() {
    Outcome o;
    const oracle::DayTable table(1200, 2800);
    gen::Gen g(20240915);
    int cases = 0;
    for (int i = 0; i < 10'000 && o.ok; ++i, ++cases) {
        const auto a = g.datetime(1600, 2400);
        switch (i % 3) {
            case 0: {
                DateOffset off;
                off.years = g.between(-150, 150);
                off.months = g.between(-30, 30);
                off.days = g.between(-4000, 4000);
                const auto got = calendar::add_offset(a, off);
                const auto want = table.add_days(oracle::DayTable::add_months(ymd(a), off.years * 12 + off.months),
                                                 off.days);
                o.require(ymd(got) == want && seconds_of_day(got) == seconds_of_day(a),
                          fmt::format("offset case {} from {}", i, calendar::format_timestamp(a)));
                break;
            }
            case 1: {
                const auto n = g.between(-100'000, 100'000);
                const auto b = calendar::add_offset(a, DateOffset::of_days(n));
                const auto want = table.add_days(ymd(a), n);
                o.require(ymd(b) == want, fmt::format("day-step case {}", i));
                o.require(static_cast<int>(calendar::weekday_of(b)) == table.weekday(want),
                          fmt::format("weekday case {} at {}", i, calendar::format_timestamp(b)));
                break;
            }
            default: {
                const auto span_days = g.coin() ? g.between(0, 40) : g.between(0, 3650);
                const auto b = calendar::add_offset(
                    a, DateOffset{.days = span_days, .seconds = g.between(-86'399, 86'399)});
                const auto [lo, hi] = std::minmax(a, b);
                const auto d = calendar::diff(a, b);
                const auto s = oracle::split(table, {ymd(lo), seconds_of_day(lo)}, {ymd(hi), seconds_of_day(hi)});
                const std::int64_t months = d.years * 12 + d.months;
                const std::int64_t rest = d.days * 86'400 + d.hours * 3600 + d.minutes * 60 + d.seconds;
                o.require(months == s.months && rest == s.rest_seconds,
                          fmt::format("diff case {}: {} -> {}", i, calendar::format_timestamp(a),
                                      calendar::format_timestamp(b)));
                const auto expected_sign = a == b ? calendar::Sign::Zero
                                           : a < b ? calendar::Sign::Positive
                                                   : calendar::Sign::Negative;
                o.require(d.sign == expected_sign, fmt::format("diff sign case {}", i));
                break;
            }
        }
    }

    using temporal_qa::answer_absolute_offset;
    const auto parse = calendar::parse_timestamp;
    o.require(parse("Monday, September 9, 2024, 16:03:45").year() == 2024, "row 1 time");
    o.require(answer_absolute_offset(CivilDateTime::make(1856, 6, 1), DateOffset{.years = 10, .months = 6}) ==
                  "The time is Dec, 1866",
              "row 1 answer");
    o.require(temporal_qa::answer_relative_day(parse("Friday, April 3, 2020, 5:04:46"), DateOffset{.years = -1}) ==
                  "Today is 2020-4-3, therefore a year ago today should be 2019-4-3.",
              "row 2 answer");
    o.require(temporal_qa::answer_weekday_query(parse("Friday, April 23, 2049, 23:30:07"), -1) ==
                  "Yesterday was Thursday.",
              "row 3 answer");
    o.require(temporal_qa::answer_weekend_query(parse("Saturday, July 3, 2027, 19:17:33"), 2) ==
                  "No, the day after tomorrow will be Monday, July 5th, 2027.",
              "row 4 answer");
    // Row 5: both timestamps parse on the stated Tuesday, and the answer names
    // the earlier time and a minutes-level gap.
    const auto last = parse("Tuesday, June 22nd, 2038, 11: 01: 39");
    const auto now = parse("Tuesday, June 22nd, 2038, 11: 31: 7");
    const auto row5 = temporal_qa::answer_elapsed(last, now);
    o.require(calendar::weekday_of(now) == calendar::Weekday::Tuesday, "row 5 weekday");
    o.require(row5.find("minutes ago") != std::string::npos && row5.find("11:01:39") != std::string::npos,
              "row 5 answer: " + row5);
    const auto eval_now = parse("Tuesday, September 3, 2013, 23: 42: 54");
    const auto eval_answer = temporal_qa::answer_relative_day(eval_now, DateOffset{.years = -432});
    o.require(eval_answer.find("1581-9-3") != std::string::npos, "eval example: " + eval_answer);
    if (o.ok) o.detail = fmt::format("{} oracle cases, 6 worked examples", cases);
    return o;
}

// ---------------------------------------------------------------- 3

Outcome qa_presets() {
    Outcome o;
    const auto items = temporal_qa::synthesize(temporal_qa::QAConfig::eval_preset(), 20240915);
    int shorts = 0, longs = 0, passed = 0;
    for (const auto& it : items) {
        (it.horizon == temporal_qa::Horizon::Short ? shorts : longs)++;
        if (temporal_qa::grade(it.answer, it)) ++passed;
    }
    o.require(shorts == 32 && longs == 260 && items.size() == 292,
              fmt::format("{} short / {} long / {} total", shorts, longs, items.size()));
    o.require(passed == static_cast<int>(items.size()), fmt::format("{} of {} answers pass", passed, items.size()));
    const auto train = temporal_qa::synthesize(temporal_qa::QAConfig::train_preset(), 20240915);
    int train_passed = 0;
    for (const auto& it : train) train_passed += temporal_qa::grade(it.answer, it);
    o.require(train_passed == static_cast<int>(train.size()), "training answers fail their own grade");
    if (o.ok) o.detail = fmt::format("32/260/292, {} + {} answers sound", items.size(), train.size());
    return o;
}

// ---------------------------------------------------------------- 4

Outcome keyword_matrix() {
    Outcome o;
    const auto target = calendar::add_offset(calendar::parse_timestamp("Tuesday, September 3, 2013, 23:42:54"),
                                             DateOffset{.years = -432});
    const auto kw = temporal_qa::keywords_for_date(target, temporal_qa::Granularity::YMD);
    o.require(temporal_qa::keyword_text(kw) == "\"1581\", \"9|Sep|September\", \"3\"", "keyword groups");
    o.require(temporal_qa::grade("was 1581-9-3", kw), "'was 1581-9-3' should pass");
    o.require(temporal_qa::grade("It was September 3rd, 1581.", kw), "'It was September 3rd, 1581.' should pass");
    o.require(!temporal_qa::grade("15810-9-3", kw), "'15810-9-3' should fail");
    if (o.ok) o.detail = "true/true/false";
    return o;
}

// ---------------------------------------------------------------- 5, 6

backends::ReplyScript numbered_script(int rounds, int farewell_at) {
    std::vector<std::string> human, assistant;
    for (int i = 0; i < rounds; ++i) {
        human.push_back(i == farewell_at ? "Thanks, goodbye!" : fmt::format("user line {}", i));
        assistant.push_back(fmt::format("assistant line {}", i));
    }
    return backends::ReplyScript::from_json({{"human", human}, {"assistant", assistant}});
}

const persona::PromptPair kPrompts{"HUMAN SEED PROMPT: play Ana, a teacher.",
                                   "ASSISTANT SEED PROMPT: be helpful and remember."};

dialogue::EMTrainRecord generate(int cap, int farewell_at, std::uint64_t seed) {
    backends::ScriptedChatBackend chat(numbered_script(80, farewell_at));
    dialogue::GenLimits limits;
    limits.max_rounds = cap;
    dialogue::Rng rng(seed);
    return dialogue::generate_dialogue(chat, {fmt::format("d{}", seed), "c", "p"}, kPrompts,
                                       dialogue::TimePolicy{}, limits, rng);
}

void check_record(Outcome& o, const dialogue::EMTrainRecord& r, int cap) {
    dialogue::GenLimits limits;
    limits.max_rounds = cap;
    try {
        dialogue::validate_record(r, limits);
    } catch (const std::exception& e) {
        o.require(false, e.what());
        return;
    }
    std::optional<CivilDateTime> prev;
    for (std::size_t i = 0; i < r.turns.size(); ++i) {
        const auto& t = r.turns[i];
        const Role want = i % 3 == 0 ? Role::User : i % 3 == 1 ? Role::Observation : Role::Assistant;
        o.require(t.role == want, fmt::format("{} turn {} out of pattern", r.id, i));
        o.require(t.content.find("SEED PROMPT") == std::string::npos, fmt::format("{} leaks a seed prompt", r.id));
        if (t.role != Role::Observation) continue;
        const auto ts = calendar::parse_timestamp(t.content);
        o.require(calendar::format_timestamp(ts) == t.content, fmt::format("{} turn {} not canonical", r.id, i));
        o.require(!prev || *prev < ts, fmt::format("{} turn {} not increasing", r.id, i));
        prev = ts;
    }
}

Outcome generation_structure() {
    Outcome o;
    for (int cap : {5, 60}) {
        for (std::uint64_t seed = 1; seed <= 10; ++seed) {
            const auto r = generate(cap, -1, seed);
            check_record(o, r, cap);
            o.require(r.meta.round_count == cap, fmt::format("cap {} gave {} rounds", cap, r.meta.round_count));
            o.require(r.to_json().dump() == generate(cap, -1, seed).to_json().dump(),
                      fmt::format("rerun differs at cap {} seed {}", cap, seed));
        }
    }
    for (int at = 0; at < 8; ++at) {
        const auto r = generate(60, at, 100 + static_cast<std::uint64_t>(at));
        check_record(o, r, 60);
        o.require(r.meta.round_count == at + 1, fmt::format("farewell at round {} gave {} rounds", at + 1,
                                                             r.meta.round_count));
    }
    if (o.ok) o.detail = "caps 5/60, farewell stop, byte-identical reruns";
    return o;
}

Outcome training_samples() {
    Outcome o;
    int checked = 0;
    for (std::uint64_t seed = 1; seed <= 30; ++seed) {
        const auto r = generate(20, static_cast<int>(seed % 25) - 1, seed);
        const auto s = dialogue::to_training_sample(r);
        o.require(s.messages.size() == r.turns.size(), "sample length");
        for (const auto& m : s.messages) {
            o.require(m.loss == (m.role == Role::Assistant), "loss flag off an assistant turn");
            o.require(!(m.role == Role::Observation && m.loss), "observation carries loss");
            ++checked;
        }
        const auto back = dialogue::TrainingSample::from_json(nlohmann::json::parse(s.to_json().dump()));
        o.require(dialogue::turns_from_sample(back) == r.turns, "round trip lost turns");
    }
    if (o.ok) o.detail = fmt::format("{} messages checked", checked);
    return o;
}

// ---------------------------------------------------------------- 7

double cos_of(std::vector<double> a, std::vector<double> b) {
    return eval::cosine_score({std::move(a)}, {std::move(b)});
}

Outcome similarity_properties() {
    Outcome o;
    backends::HashEmbedder emb;
    const auto v = emb.embed("I planted tomatoes in the garden yesterday");
    const double self = eval::cosine_score(v, v);
    o.require(std::abs(self - 100.0) <= 1e-6, fmt::format("self similarity {}", self));
    gen::Gen g(7);
    for (int i = 0; i < 200; ++i) {
        auto a = g.reals(16, -1, 1), b = g.reals(16, -1, 1);
        a[0] += 3;
        b[0] += 3;
        auto scaled = a;
        const double k = g.real(1e-3, 1e3);
        for (auto& x : scaled) x *= k;
        const double s1 = cos_of(a, b), s2 = cos_of(scaled, b);
        o.require(std::abs(s1 - s2) <= 1e-9, fmt::format("scale invariance off by {}", std::abs(s1 - s2)));
    }
    // two single-token texts that hash to different buckets are orthogonal
    const auto x = backends::test_embed("tomato");
    std::optional<double> ortho;
    for (const char* w : {"bicycle", "harbor", "violet", "quartz", "lantern"}) {
        const auto y = backends::test_embed(w);
        double dot = 0;
        for (std::size_t i = 0; i < x.dimension(); ++i) dot += x.components[i] * y.components[i];
        if (dot == 0.0) {
            ortho = eval::cosine_score(x, y);
            break;
        }
    }
    o.require(ortho.has_value() && std::abs(*ortho) <= 1e-6, "orthogonal pair");
    const double hand = cos_of({1, 1, 0}, {1, 0, 0});
    o.require(std::abs(hand - 70.71) <= 0.01, fmt::format("hand vectors {}", hand));
    if (o.ok) o.detail = fmt::format("self={:.6f} hand={:.4f}", self, hand);
    return o;
}

// ---------------------------------------------------------------- 8

Outcome emtest_statistics() {
    Outcome o;
    const auto t = emtest::stats(emtest::load_dataset(fixtures::with_time_dataset()));
    const std::array<std::array<int, 2>, emtest::kSpanCount> want = {
        {{18, 7}, {5, 5}, {10, 8}, {4, 4}, {4, 7}, {5, 4}, {7, 9}, {4, 5}}};
    const std::array<int, emtest::kSpanCount> totals = {25, 10, 18, 8, 11, 9, 16, 9};
    for (auto s : emtest::kSpans) {
        const auto i = emtest::index_of(s);
        o.require(t.cells[i] == want[i] && t.span_total(s) == totals[i],
                  fmt::format("{} row {}/{}", emtest::display_name(s), t.cells[i][0], t.cells[i][1]));
    }
    o.require(t.difficulty_totals == std::array<int, 2>{57, 49} && t.total() == 106, "with-time overall");
    const auto w = emtest::stats(emtest::load_dataset(fixtures::without_time_dataset()));
    o.require(w.difficulty_totals == std::array<int, 2>{89, 34} && w.total() == 123, "without-time overall");
    if (o.ok) o.detail = "all 27 cells match";
    return o;
}

// ---------------------------------------------------------------- 9

int run_cli(const std::string& args, const fs::path& log) {
    const std::string cmd = fmt::format("\"{}\" {} >> \"{}\" 2>&1", EMKIT_CLI_PATH, args, log.string());
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string q(const fs::path& p) { return "\"" + p.string() + "\""; }

// Writes an echo fixture where every third point gets its question back
// instead of the reference, plus human scores that track the similarity.
void write_pipeline_inputs(const fs::path& dir) {
    const auto ds = emtest::load_dataset(fixtures::with_time_dataset());
    nlohmann::json replies = nlohmann::json::object();
    nlohmann::json dialogue_script = nlohmann::json::parse(
        read_text(fixtures::test_dir() / "scripts" / "dialogue.json"));
    std::size_t k = 0;
    for (const auto& inst : ds.instances) {
        for (const auto& p : inst.points) {
            replies[p.id] = nlohmann::json::array({k++ % 3 == 2 ? p.question : p.reference_answer});
        }
    }
    write_text(dir / "echo.json", replies.dump());
    write_text(dir / "dialogue.json", dialogue_script.dump());
}

void write_human_scores(const fs::path& results, const fs::path& out) {
    std::string lines;
    for (const auto& r : eval::load_results(results)) {
        const double score = std::clamp(1.0 + 9.0 * r.similarity / 100.0, 1.0, 10.0);
        lines += nlohmann::json{{"point_id", r.point_id}, {"score", score}}.dump() + "\n";
    }
    write_text(out, lines);
}

Outcome pipeline_once(const fs::path& dir, std::string& fingerprint) {
    Outcome o;
    fs::create_directories(dir);
    write_pipeline_inputs(dir);
    const auto log = dir / "log.txt";
    const auto out = dir / "out";
    const std::string common = fmt::format("--seed 20240915 --jobs 4 --out {}", q(out));
    o.require(run_cli("gen-personas --count 8 " + common, log) == 0, "gen-personas failed");
    o.require(run_cli("gen-dialogues --backend scripted:" + (dir / "dialogue.json").string() + " " + common, log) == 0,
              "gen-dialogues failed");
    o.require(run_cli("stats " + q(out / "em_train.jsonl"), log) == 0, "stats on EM-Train failed");
    o.require(run_cli("stats " + q(fixtures::with_time_dataset()) + " --out " + q(out), log) == 0,
              "stats on EM-Test failed");
    o.require(run_cli("eval --dataset " + q(fixtures::with_time_dataset()) + " --backend scripted:" +
                          (dir / "echo.json").string() + " " + common,
                      log) == 0,
              "eval failed");
    if (!o.ok) {
        o.detail += " (see " + log.string() + ")";
        return o;
    }
    write_human_scores(out / "results.jsonl", dir / "human.jsonl");
    o.require(run_cli("correlate --human " + q(dir / "human.jsonl") + " --results " + q(out / "results.jsonl") +
                          " --out " + q(out),
                      log) == 0,
              "correlate failed");
    for (const char* f : {"personas.jsonl", "em_train.jsonl", "training_samples.jsonl", "plots.jsonl",
                          "results.jsonl", "report.json", "stats.json", "correlation.json"}) {
        o.require(fs::exists(out / f), std::string("missing ") + f);
        if (fs::exists(out / f)) fingerprint += std::string(f) + "\n" + read_text(out / f);
    }
    return o;
}

Outcome end_to_end() {
    const auto base = fs::path(EMKIT_BINARY_DIR) / "scratch" / "acceptance_pipeline";
    fs::remove_all(base);
    std::string first, second;
    Outcome o = pipeline_once(base / "run1", first);
    if (!o.ok) return o;
    o = pipeline_once(base / "run2", second);
    if (!o.ok) return o;
    o.require(first == second, "reruns produced different outputs");
    if (o.ok) o.detail = fmt::format("5 commands, reruns identical ({} bytes)", first.size());
    return o;
}

}  // namespace

int main() {
    const std::vector<Criterion> criteria = {
        {1, "Pearson reproduction", 1.0, pearson_reproduction},
        {2, "Calendar oracle suite", 10.0, calendar_suite},
        {3, "Temporal-QA presets", 30.0, qa_presets},
        {4, "Keyword grading matrix", 0.0, keyword_matrix},
        {5, "Dialogue generation structure", 5.0, generation_structure},
        {6, "Training-sample serialization", 0.0, training_samples},
        {7, "Similarity metric properties", 0.0, similarity_properties},
        {8, "EM-Test statistics", 0.0, emtest_statistics},
        {9, "End-to-end offline pipeline", 60.0, end_to_end},
    };
    int failures = 0;
    for (const auto& c : criteria) {
        const auto start = std::chrono::steady_clock::now();
        Outcome o;
        try {
            o = c.body();
        } catch (const std::exception& e) {
            o.ok = false;
            o.detail = std::string("exception: ") + e.what();
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        if (o.ok && c.budget_seconds > 0 && secs >= c.budget_seconds) {
            o.ok = false;
            o.detail = fmt::format("took {:.2f} s, budget {:.0f} s", secs, c.budget_seconds);
        }
        failures += !o.ok;
        std::cout << fmt::format("{} [{}] {} ({}; {:.3f} s)\n", o.ok ? "PASS" : "FAIL", c.number, c.name,
                                 o.detail, secs)
                  << std::flush;
    }
    return failures == 0 ? 0 : 1;
}
