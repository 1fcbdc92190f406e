#include "fixtures.hpp"
#include "generators.hpp"

#include "emkit/emtest.hpp"

#include <doctest.h>

using namespace emkit;
using namespace emkit::emtest;
using emkit::calendar::CivilDateTime;

namespace {

TestInstance small_instance(const std::string& id = "i0") {
    TestInstance inst;
    inst.id = id;
    inst.history = {{Role::User, "I adopted a cat named Miso.", 0},
                    {Role::Observation, "Monday, March 1, 2021, 10:00:00", 1},
                    {Role::Assistant, "Congratulations!", 2},
                    {Role::User, "I start a new job tomorrow.", 3},
                    {Role::Observation, "Monday, March 1, 2021, 10:05:00", 4},
                    {Role::Assistant, "Good luck.", 5}};
    TestPoint p;
    p.id = id + "-p0";
    p.position = 6;
    p.question = "What is my cat called?";
    p.observation = CivilDateTime::make(2021, 3, 1, 10, 20);
    p.span = SpanLabel::JustNow;
    p.reference_answer = "Your cat is called Miso.";
    p.evidence = 0;
    inst.points.push_back(p);
    return inst;
}

}  // namespace

TEST_SUITE("emtest") {

TEST_CASE("with-time fixture reproduces the published counts") {
    const auto ds = load_dataset(fixtures::with_time_dataset());
    CHECK(ds.variant == Variant::WithTime);
    const auto t = stats(ds);
    const std::array<std::array<int, 2>, kSpanCount> want = {
        {{18, 7}, {5, 5}, {10, 8}, {4, 4}, {4, 7}, {5, 4}, {7, 9}, {4, 5}}};
    for (SpanLabel s : kSpans) {
        INFO(to_string(s));
        CHECK(t.cells[index_of(s)] == want[index_of(s)]);
    }
    CHECK(t.span_total(SpanLabel::JustNow) == 25);
    CHECK(t.difficulty_totals == std::array<int, 2>{57, 49});
    CHECK(t.total() == 106);
    CHECK(ds.point_count() == 106);
    CHECK(t.to_text().find("Overall Number      57    49    106") != std::string::npos);
}

TEST_CASE("without-time fixture reproduces the published counts") {
    const auto ds = load_dataset(fixtures::without_time_dataset());
    CHECK(ds.variant == Variant::WithoutTime);
    const auto t = stats(ds);
    CHECK(t.difficulty_totals == std::array<int, 2>{89, 34});
    CHECK(t.total() == 123);
    for (const auto& row : t.cells) CHECK(row == std::array<int, 2>{0, 0});
    CHECK(t.to_text().find("just now") == std::string::npos);
    CHECK_FALSE(t.to_json().contains("spans"));
}

TEST_CASE("fixtures pass the span linter") {
    CHECK(lint_spans(load_dataset(fixtures::with_time_dataset())).empty());
    CHECK(lint_spans(load_dataset(fixtures::without_time_dataset())).empty());
}

TEST_CASE("linter flags a gap outside its window") {
    EMTestDataset ds;
    auto inst = small_instance();
    inst.points[0].span = SpanLabel::FewYears;
    ds.instances.push_back(inst);
    const auto w = lint_spans(ds);
    REQUIRE(w.size() == 1);
    CHECK(w[0].point_id == "i0-p0");
    CHECK(w[0].message.find("few years") != std::string::npos);
}

TEST_CASE("fixture round-trips through serialization") {
    for (const auto& path : {fixtures::with_time_dataset(), fixtures::without_time_dataset()}) {
        const auto ds = load_dataset(path);
        const auto text = serialize_dataset(ds);
        const auto back = parse_dataset(text);
        CHECK(serialize_dataset(back) == text);
        CHECK(back.point_count() == ds.point_count());
    }
}

TEST_CASE("validation rejects broken instances") {
    CHECK_NOTHROW(validate_instance(small_instance(), Variant::WithTime));

    auto check_bad = [](TestInstance inst, Variant v = Variant::WithTime) {
        CHECK_THROWS_AS(validate_instance(inst, v), InvariantError);
    };
    auto inst = small_instance();
    inst.history.pop_back();
    check_bad(inst);

    inst = small_instance();
    std::swap(inst.history[1].content, inst.history[4].content);
    check_bad(inst);

    inst = small_instance();
    inst.history[0].role = Role::Assistant;
    check_bad(inst);

    inst = small_instance();
    inst.history[4].content = "not a time";
    check_bad(inst);

    inst = small_instance();
    inst.points[0].position = 4;
    check_bad(inst);

    inst = small_instance();
    inst.points[0].position = 9;
    check_bad(inst);

    inst = small_instance();
    inst.points[0].observation = CivilDateTime::make(2021, 3, 1, 9, 0);
    check_bad(inst);

    inst = small_instance();
    inst.points[0].span.reset();
    check_bad(inst);

    inst = small_instance();
    inst.points[0].reference_answer.clear();
    check_bad(inst);

    inst = small_instance();
    inst.points.push_back(inst.points[0]);
    check_bad(inst);

    inst = small_instance();
    inst.points[0].evidence = 6;
    check_bad(inst);

    // without-time points must not carry time labels
    check_bad(small_instance(), Variant::WithoutTime);
}

TEST_CASE("parser reports mixed variants and duplicates") {
    const auto a = dump_line(instance_to_json(small_instance("a"), Variant::WithTime));
    const auto b = dump_line(instance_to_json(small_instance("b"), Variant::WithTime));
    CHECK(parse_dataset(a + "\n" + b + "\n").instances.size() == 2);
    CHECK_THROWS_AS(parse_dataset(a + "\n" + a + "\n"), InvariantError);

    auto wo = small_instance("c");
    wo.history = {{Role::User, "hi", 0}, {Role::Assistant, "hello", 1}};
    wo.points[0].position = 2;
    wo.points[0].observation.reset();
    wo.points[0].span.reset();
    wo.points[0].evidence.reset();
    const auto c = dump_line(instance_to_json(wo, Variant::WithoutTime));
    CHECK(parse_dataset(c).variant == Variant::WithoutTime);
    CHECK_THROWS_AS(parse_dataset(a + "\n" + c + "\n"), DatasetError);
    CHECK_THROWS_AS(parse_dataset(a + "\n{broken\n"), DataError);
    CHECK(parse_dataset("").instances.empty());
}

TEST_CASE("code point counting") {
    CHECK(count_code_points("") == 0);
    CHECK(count_code_points("abc") == 3);
    CHECK(count_code_points("\xe4\xbd\xa0\xe5\xa5\xbd") == 2);  // two CJK characters
    CHECK(count_code_points("caf\xc3\xa9") == 4);
    CHECK(count_code_points("\xf0\x9f\x98\x80") == 1);
}

TEST_CASE("corpus summary") {
    CHECK_FALSE(corpus_stats({}).mean_rounds.has_value());
    CHECK(corpus_stats({}).to_text().find("n/a") != std::string::npos);

    dialogue::EMTrainRecord r1, r2;
    r1.meta.round_count = 2;
    r1.turns = {{Role::User, "abcd", 0}, {Role::Assistant, "ef", 1}};
    r2.meta.round_count = 4;
    r2.turns = {{Role::User, "\xe4\xbd\xa0", 0}, {Role::Assistant, "xyz", 1}};
    const auto s = corpus_stats({r1, r2});
    CHECK(s.records == 2);
    CHECK(*s.mean_rounds == doctest::Approx(3.0));
    CHECK(*s.mean_chars == doctest::Approx(5.0));
    CHECK(s.to_json()["records"] == 2);
}

TEST_CASE("label names round-trip") {
    for (SpanLabel s : kSpans) CHECK(span_from_string(to_string(s)) == s);
    for (Difficulty d : kDifficulties) CHECK(difficulty_from_string(to_string(d)) == d);
    CHECK(abbreviation(SpanLabel::SeveralDecades) == "SD");
    CHECK_FALSE(span_from_string("fortnight").has_value());
    CHECK(variant_from_string("without_time") == Variant::WithoutTime);
}

}  // TEST_SUITE
