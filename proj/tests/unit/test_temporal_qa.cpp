#include "calendar_oracle.hpp"
#include "generators.hpp"

#include "emkit/temporal_qa.hpp"

#include <doctest.h>

#include <set>

using namespace emkit;
using namespace emkit::temporal_qa;
using emkit::calendar::CivilDateTime;
using emkit::calendar::DateOffset;

namespace {

CivilDateTime at(std::int64_t y, int m, int d, int hh = 0, int mm = 0, int ss = 0) {
    return CivilDateTime::make(y, m, d, hh, mm, ss);
}

const oracle::DayTable& table() {
    static const oracle::DayTable t(900, 2200);
    return t;
}

oracle::Ymd ymd(const CivilDateTime& d) { return {d.year(), d.month(), d.day()}; }

}  // namespace

TEST_SUITE("temporal_qa") {

TEST_CASE("worked examples render the expected answers") {
    CHECK(answer_absolute_offset(at(1856, 6, 1), DateOffset{.years = 10, .months = 6}) ==
          "The time is Dec, 1866");
    CHECK(answer_relative_day(at(2020, 4, 3, 5, 4, 46), DateOffset{.years = -1}) ==
          "Today is 2020-4-3, therefore a year ago today should be 2019-4-3.");
    CHECK(answer_weekday_query(at(2049, 4, 23, 23, 30, 7), -1) == "Yesterday was Thursday.");
    CHECK(answer_weekend_query(at(2027, 7, 3, 19, 17, 33), 2) ==
          "No, the day after tomorrow will be Monday, July 5th, 2027.");
    // 29m28s floors to 29 minutes
    CHECK(answer_elapsed(at(2038, 6, 22, 11, 1, 39), at(2038, 6, 22, 11, 31, 7)) ==
          "Our last conversation was 29 minutes ago, at 11:01:39.");
}

TEST_CASE("centuries back keeps month and day") {
    const auto target = calendar::add_offset(at(2013, 9, 3, 23, 42, 54), DateOffset{.years = -432});
    CHECK(calendar::format_compact_date(target) == "1581-9-3");
    const auto kw = keywords_for_date(target, Granularity::YMD);
    CHECK(keyword_text(kw) == "\"1581\", \"9|Sep|September\", \"3\"");
    CHECK(grade("was 1581-9-3", kw));
    CHECK(grade("It was September 3rd, 1581.", kw));
    CHECK_FALSE(grade("15810-9-3", kw));
    CHECK_FALSE(grade("It was 1581.", kw));
}

TEST_CASE("matching rules per alternative kind") {
    CHECK(matches_alternative("on 3 May", "3"));
    CHECK_FALSE(matches_alternative("on 13 May", "3"));
    CHECK_FALSE(matches_alternative("on 31 May", "3"));
    CHECK(matches_alternative("on 3rd May", "3"));
    CHECK(matches_alternative("it is THURSDAY", "Thursday"));
    CHECK(matches_alternative("in sep.", "Sep"));
    CHECK_FALSE(matches_alternative("anything", ""));
    CHECK(grade("whatever", std::vector<KeywordGroup>{}));
}

TEST_CASE("keyword granularities") {
    const auto d = at(2027, 7, 5);
    CHECK(keywords_for_date(d, Granularity::YMD).size() == 3);
    CHECK(keywords_for_date(d, Granularity::YM).size() == 2);
    CHECK(keywords_for_date(d, Granularity::Year).size() == 1);
    const auto wd = keywords_for_date(d, Granularity::WeekdayOnly);
    REQUIRE(wd.size() == 1);
    CHECK(wd[0].alternatives == std::vector<std::string>{"Monday"});
}

TEST_CASE("relative phrases") {
    CHECK(relative_phrase(DateOffset{.years = -1}) == "a year ago today");
    CHECK(relative_phrase(DateOffset{.months = 3}) == "3 months from today");
    CHECK(relative_phrase(DateOffset::of_days(-2)) == "the day before yesterday");
    CHECK(relative_phrase(DateOffset::of_days(-9)) == "9 days ago");
    CHECK_THROWS_AS(relative_phrase(DateOffset{.years = 1, .days = 2}), PreconditionError);
}

TEST_CASE("horizon boundary at seven days") {
    const auto t = at(2024, 1, 10, 12);
    CHECK(horizon_between(t, calendar::add_offset(t, DateOffset::of_days(7))) == Horizon::Short);
    CHECK(horizon_between(t, calendar::add_offset(t, DateOffset::of_days(-7))) == Horizon::Short);
    CHECK(horizon_between(t, calendar::add_offset(t, DateOffset::of_seconds(7 * 86'400 + 1))) == Horizon::Long);
}

TEST_CASE("presets") {
    const auto ev = QAConfig::eval_preset();
    CHECK(ev.total() == 292);
    int shorts = 0, longs = 0;
    for (Family f : kFamilies) {
        shorts += ev.count(f, Horizon::Short);
        longs += ev.count(f, Horizon::Long);
    }
    CHECK(shorts == 32);
    CHECK(longs == 260);
    CHECK(ev.count(Family::AbsoluteOffset, Horizon::Short) == 0);
    CHECK(QAConfig::train_preset().total() == 8000);
    for (Family f : kFamilies) {
        const auto& tr = QAConfig::train_preset();
        CHECK(tr.count(f, Horizon::Short) + tr.count(f, Horizon::Long) == 1600);
    }
}

TEST_CASE("config parsing and feasibility") {
    CHECK(QAConfig::from_json({{"preset", "eval"}}).total() == 292);
    const auto c = QAConfig::from_json({{"counts", {{"relative_day", {{"short", 2}, {"long", 3}}}}}});
    CHECK(c.total() == 5);
    CHECK_THROWS_AS(QAConfig::from_json({{"preset", "huge"}}), DataError);
    CHECK_THROWS_AS(QAConfig::from_json({{"counts", {{"moon_phase", {{"short", 1}}}}}}), DataError);
    CHECK_THROWS_AS(QAConfig::from_json({{"counts", {{"absolute_offset", {{"short", 1}}}}}}),
                    InfeasibleConfigError);
    CHECK_THROWS_AS(QAConfig::from_json({{"year_range", {2060, 1990}}}), InfeasibleConfigError);
    QAConfig neg;
    neg.set(Family::WeekdayQuery, Horizon::Long, -1);
    CHECK_THROWS_AS(synthesize(neg, 1), InfeasibleConfigError);
    CHECK(synthesize(QAConfig{}, 1).empty());
}

TEST_CASE("property: eval set is sound and matches its derivations") {
    for (std::uint64_t seed : {1ULL, 42ULL, 20240915ULL}) {
        const auto items = synthesize(QAConfig::eval_preset(), seed);
        REQUIRE(items.size() == 292);
        std::set<std::string> ids;
        int shorts = 0;
        for (const auto& it : items) {
            INFO(it.id);
            ids.insert(it.id);
            if (it.horizon == Horizon::Short) ++shorts;
            CHECK(grade(it.answer, it));
            CHECK_FALSE(it.keywords.empty());
            CHECK(it.turns.back().role == Role::User);
            CHECK(calendar::add_offset(it.derivation.anchor, it.derivation.offset) == it.derivation.target);
            CHECK(horizon_between(it.observation, it.derivation.queried) == it.horizon);
            switch (it.family) {
                case Family::WeekdayQuery:
                case Family::WeekendQuery: {
                    const auto want = table().add_days(ymd(it.observation), it.derivation.offset.days);
                    CHECK(want == ymd(it.derivation.target));
                    const auto wd = static_cast<calendar::Weekday>(table().weekday(want));
                    CHECK(it.answer.find(calendar::weekday_name(wd)) != std::string::npos);
                    if (it.family == Family::WeekendQuery) {
                        const bool weekend = wd == calendar::Weekday::Saturday || wd == calendar::Weekday::Sunday;
                        CHECK(it.answer.rfind(weekend ? "Yes" : "No", 0) == 0);
                    }
                    break;
                }
                case Family::RelativeDay:
                    CHECK(it.answer.find(calendar::format_compact_date(it.derivation.target)) != std::string::npos);
                    CHECK(it.derivation.anchor == it.observation);
                    break;
                case Family::ElapsedSinceLastChat:
                    REQUIRE(it.turns.size() == 4);
                    CHECK(it.turns[1].role == Role::Observation);
                    CHECK(calendar::parse_timestamp(it.turns[1].content) == it.derivation.queried);
                    CHECK(it.observation.seconds_since_epoch() - it.derivation.queried.seconds_since_epoch() ==
                          it.derivation.offset.seconds);
                    break;
                case Family::AbsoluteOffset:
                    CHECK(it.horizon == Horizon::Long);
                    break;
            }
        }
        CHECK(ids.size() == items.size());
        CHECK(shorts == 32);
    }
}

TEST_CASE("property: answers for the wrong target fail the grade") {
    const auto items = synthesize(QAConfig::eval_preset(), 7);
    for (const auto& it : items) {
        if (it.family != Family::RelativeDay) continue;
        INFO(it.id);
        const auto other = calendar::add_offset(it.derivation.target, DateOffset{.years = 2});
        CHECK_FALSE(grade("It is " + calendar::format_compact_date(other) + ".", it));
    }
}

TEST_CASE("synthesis is deterministic per seed") {
    const auto a = synthesize(QAConfig::eval_preset(), 99);
    const auto b = synthesize(QAConfig::eval_preset(), 99);
    const auto c = synthesize(QAConfig::eval_preset(), 100);
    REQUIRE(a.size() == b.size());
    bool differs = false;
    for (std::size_t i = 0; i < a.size(); ++i) {
        CHECK(a[i].to_json().dump() == b[i].to_json().dump());
        differs |= a[i].to_json().dump() != c[i].to_json().dump();
    }
    CHECK(differs);
}

TEST_CASE("items round-trip through JSON") {
    for (const auto& it : synthesize(QAConfig::eval_preset(), 3)) {
        const auto back = QAItem::from_json(nlohmann::json::parse(it.to_json().dump()));
        CHECK(back.to_json().dump() == it.to_json().dump());
        CHECK(back.keywords == it.keywords);
        CHECK(back.turns == it.turns);
    }
}

TEST_CASE("malformed items are rejected") {
    auto j = nlohmann::json::parse(synthesize(QAConfig::eval_preset(), 3).front().to_json().dump());
    auto bad = j;
    bad["family"] = "moon_phase";
    CHECK_THROWS_AS(QAItem::from_json(bad), DataError);
    bad = j;
    bad.erase("keywords");
    CHECK_THROWS(QAItem::from_json(bad));
}

}  // TEST_SUITE
