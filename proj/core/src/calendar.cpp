#include "emkit/calendar.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <charconv>
#include <optional>
#include <regex>
#include <string>

#include <fmt/format.h>

namespace emkit::calendar {
namespace {

constexpr std::int64_t kSecondsPerDay = 86'400;

constexpr std::array<std::string_view, 12> kMonthNames = {
    "January", "February", "March",     "April",   "May",      "June",
    "July",    "August",   "September", "October", "November", "December"};
constexpr std::array<std::string_view, 12> kMonthAbbrev = {
    "Jan", "Feb", "Mar", "Apr", "May", "Jun", "Jul", "Aug", "Sep", "Oct", "Nov", "Dec"};
constexpr std::array<std::string_view, 7> kWeekdayNames = {
    "Monday", "Tuesday", "Wednesday", "Thursday", "Friday", "Saturday", "Sunday"};

constexpr std::int64_t floor_div(std::int64_t a, std::int64_t b) noexcept {
    std::int64_t q = a / b;
    if ((a % b != 0) && ((a < 0) != (b < 0))) --q;
    return q;
}

constexpr std::int64_t floor_mod(std::int64_t a, std::int64_t b) noexcept {
    return a - floor_div(a, b) * b;
}

// Howard Hinnant's days_from_civil / civil_from_days, widened to 64 bits.
constexpr std::int64_t days_from_civil(std::int64_t y, int m, int d) noexcept {
    y -= m <= 2 ? 1 : 0;
    const std::int64_t era = floor_div(y, 400);
    const std::int64_t yoe = y - era * 400;
    const std::int64_t mp = (m + 9) % 12;
    const std::int64_t doy = (153 * mp + 2) / 5 + d - 1;
    const std::int64_t doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
    return era * 146'097 + doe - 719'468;
}

struct YMD {
    std::int64_t y;
    int m;
    int d;
};

constexpr YMD civil_from_days(std::int64_t z) noexcept {
    z += 719'468;
    const std::int64_t era = floor_div(z, 146'097);
    const std::int64_t doe = z - era * 146'097;
    const std::int64_t yoe = (doe - doe / 1460 + doe / 36'524 - doe / 146'096) / 365;
    const std::int64_t doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
    const std::int64_t mp = (5 * doy + 2) / 153;
    const int d = static_cast<int>(doy - (153 * mp + 2) / 5 + 1);
    const int m = static_cast<int>(mp < 10 ? mp + 3 : mp - 9);
    return {yoe + era * 400 + (m <= 2 ? 1 : 0), m, d};
}

std::int64_t checked_add(std::int64_t a, std::int64_t b) {
    std::int64_t out = 0;
    if (__builtin_add_overflow(a, b, &out)) throw RangeError("date arithmetic overflow");
    return out;
}

std::int64_t checked_mul(std::int64_t a, std::int64_t b) {
    std::int64_t out = 0;
    if (__builtin_mul_overflow(a, b, &out)) throw RangeError("date arithmetic overflow");
    return out;
}

// Day range covered by [kMinYear, kMaxYear]; anything outside is rejected
// before conversion so intermediate values stay small.
const std::int64_t kMinDays = days_from_civil(kMinYear, 1, 1);
const std::int64_t kMaxDays = days_from_civil(kMaxYear, 12, 31);

std::string lower(std::string_view s) {
    std::string out(s);
    for (auto& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    return out;
}

int parse_int(const std::string& s) {
    int v = 0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || ptr != s.data() + s.size())
        throw TimestampParseError(fmt::format("bad number '{}'", s));
    return v;
}

int month_from_word(const std::string& word) {
    const std::string w = lower(word);
    if (w == "sept") return 9;
    for (int i = 0; i < 12; ++i) {
        if (w == lower(kMonthNames[i]) || w == lower(kMonthAbbrev[i])) return i + 1;
    }
    return 0;
}

std::optional<Weekday> weekday_from_word(const std::string& word) {
    const std::string w = lower(word);
    for (int i = 0; i < 7; ++i) {
        const std::string full = lower(kWeekdayNames[i]);
        if (w == full || w == full.substr(0, 3)) return static_cast<Weekday>(i);
    }
    return std::nullopt;
}

}  // namespace

bool is_leap_year(std::int64_t year) noexcept {
    return (year % 4 == 0 && year % 100 != 0) || year % 400 == 0;
}

int days_in_month(std::int64_t year, int month) noexcept {
    static constexpr std::array<int, 12> kDays = {31, 28, 31, 30, 31, 30, 31, 31, 30, 31, 30, 31};
    if (month == 2 && is_leap_year(year)) return 29;
    return kDays[static_cast<std::size_t>(month - 1)];
}

bool CivilDateTime::valid(std::int64_t year, int month, int day, int hour, int minute,
                          int second) noexcept {
    if (year < kMinYear || year > kMaxYear) return false;
    if (month < 1 || month > 12) return false;
    if (day < 1 || day > days_in_month(year, month)) return false;
    return hour >= 0 && hour < 24 && minute >= 0 && minute < 60 && second >= 0 && second < 60;
}

CivilDateTime CivilDateTime::make(std::int64_t year, int month, int day, int hour, int minute,
                                  int second) {
    if (!valid(year, month, day, hour, minute, second)) {
        throw CalendarError(fmt::format("invalid date-time {}-{}-{} {}:{}:{}", year, month, day,
                                        hour, minute, second));
    }
    CivilDateTime d;
    d.year_ = year;
    d.month_ = month;
    d.day_ = day;
    d.hour_ = hour;
    d.minute_ = minute;
    d.second_ = second;
    return d;
}

std::int64_t CivilDateTime::days_since_epoch() const noexcept {
    return days_from_civil(year_, month_, day_);
}

std::int64_t CivilDateTime::seconds_since_epoch() const noexcept {
    return days_since_epoch() * kSecondsPerDay + hour_ * 3600 + minute_ * 60 + second_;
}

CivilDateTime CivilDateTime::from_days(std::int64_t days, int hour, int minute, int second) {
    if (days < kMinDays || days > kMaxDays) throw RangeError("date outside supported year range");
    const YMD ymd = civil_from_days(days);
    return make(ymd.y, ymd.m, ymd.d, hour, minute, second);
}

CivilDateTime CivilDateTime::from_seconds(std::int64_t seconds) {
    const std::int64_t days = floor_div(seconds, kSecondsPerDay);
    const std::int64_t sod = floor_mod(seconds, kSecondsPerDay);
    return from_days(days, static_cast<int>(sod / 3600), static_cast<int>(sod / 60 % 60),
                     static_cast<int>(sod % 60));
}

Weekday successor(Weekday w) noexcept {
    return static_cast<Weekday>((static_cast<int>(w) + 1) % 7);
}

std::string_view weekday_name(Weekday w) noexcept {
    return kWeekdayNames[static_cast<std::size_t>(w)];
}

std::string_view month_name(int month) {
    if (month < 1 || month > 12) throw CalendarError(fmt::format("month {} out of range", month));
    return kMonthNames[static_cast<std::size_t>(month - 1)];
}

std::string_view month_abbreviation(int month) {
    if (month < 1 || month > 12) throw CalendarError(fmt::format("month {} out of range", month));
    return kMonthAbbrev[static_cast<std::size_t>(month - 1)];
}

Weekday weekday_of(const CivilDateTime& d) noexcept {
    // 1970-01-01 was a Thursday (index 3).
    return static_cast<Weekday>(floor_mod(d.days_since_epoch() + 3, 7));
}

bool is_weekend(const CivilDateTime& d) noexcept {
    const Weekday w = weekday_of(d);
    return w == Weekday::Saturday || w == Weekday::Sunday;
}

bool is_working_day(const CivilDateTime& d) noexcept { return !is_weekend(d); }

CivilDateTime add_offset(const CivilDateTime& d, const DateOffset& offset) {
    std::int64_t month_index = checked_add(checked_mul(d.year(), 12), d.month() - 1);
    month_index = checked_add(month_index, checked_mul(offset.years, 12));
    month_index = checked_add(month_index, offset.months);
    const std::int64_t year = floor_div(month_index, 12);
    const int month = static_cast<int>(floor_mod(month_index, 12)) + 1;
    if (year < kMinYear || year > kMaxYear) throw RangeError("date outside supported year range");
    const int day = std::min(d.day(), days_in_month(year, month));

    std::int64_t days = checked_add(days_from_civil(year, month, day), offset.days);
    std::int64_t sod = d.hour() * 3600 + d.minute() * 60 + d.second();
    sod = checked_add(sod, checked_mul(offset.hours, 3600));
    sod = checked_add(sod, checked_mul(offset.minutes, 60));
    sod = checked_add(sod, offset.seconds);
    days = checked_add(days, floor_div(sod, kSecondsPerDay));
    sod = floor_mod(sod, kSecondsPerDay);
    return CivilDateTime::from_days(days, static_cast<int>(sod / 3600),
                                    static_cast<int>(sod / 60 % 60), static_cast<int>(sod % 60));
}

DateOffset ElapsedBreakdown::as_offset() const noexcept {
    return DateOffset{years, months, days, hours, minutes, seconds};
}

ElapsedBreakdown diff(const CivilDateTime& from, const CivilDateTime& to) {
    ElapsedBreakdown out;
    if (from == to) return out;
    out.sign = from < to ? Sign::Positive : Sign::Negative;
    const CivilDateTime& lo = from < to ? from : to;
    const CivilDateTime& hi = from < to ? to : from;

    // Largest whole-month step from lo that does not pass hi. The candidate
    // shares hi's year and month, so at most one step back is needed.
    std::int64_t months = (hi.year() * 12 + hi.month()) - (lo.year() * 12 + lo.month());
    CivilDateTime mid = add_offset(lo, DateOffset{.months = months});
    if (mid > hi) {
        --months;
        mid = add_offset(lo, DateOffset{.months = months});
    }
    const std::int64_t rest = hi.seconds_since_epoch() - mid.seconds_since_epoch();

    out.years = months / 12;
    out.months = static_cast<int>(months % 12);
    out.days = rest / kSecondsPerDay;
    out.hours = static_cast<int>(rest % kSecondsPerDay / 3600);
    out.minutes = static_cast<int>(rest % 3600 / 60);
    out.seconds = static_cast<int>(rest % 60);
    out.total_seconds = hi.seconds_since_epoch() - lo.seconds_since_epoch();
    return out;
}

std::string format_timestamp(const CivilDateTime& d) {
    return fmt::format("{}, {} {}, {}, {:02}:{:02}:{:02}", weekday_name(weekday_of(d)),
                       month_name(d.month()), d.day(), d.year(), d.hour(), d.minute(),
                       d.second());
}

std::string format_compact_date(const CivilDateTime& d) {
    return fmt::format("{}-{}-{}", d.year(), d.month(), d.day());
}

CivilDateTime parse_timestamp(std::string_view text) {
    static const std::regex kPattern(
        R"(^\s*(?:([A-Za-z]+)\.?\s*,\s*)?([A-Za-z]+)\.?\s+(\d{1,2})(?:st|nd|rd|th)?)"
        R"((?:\s*,\s*|\s+)(-?\d{1,7}))"
        R"((?:(?:\s*,\s*|\s+)(\d{1,2})\s*:\s*(\d{1,2})\s*:\s*(\d{1,2}))?\s*$)",
        std::regex::ECMAScript | std::regex::icase | std::regex::optimize);

    const std::string s(text);
    if (s.empty()) throw TimestampParseError("empty timestamp");
    std::smatch m;
    if (!std::regex_match(s, m, kPattern)) {
        throw TimestampParseError(fmt::format("unrecognized timestamp '{}'", s));
    }
    const int month = month_from_word(m[2].str());
    if (month == 0) throw TimestampParseError(fmt::format("unknown month in '{}'", s));

    std::int64_t year = 0;
    {
        const std::string y = m[4].str();
        auto [ptr, ec] = std::from_chars(y.data(), y.data() + y.size(), year);
        if (ec != std::errc{} || ptr != y.data() + y.size())
            throw TimestampParseError(fmt::format("bad year in '{}'", s));
    }
    const int day = parse_int(m[3].str());
    int hour = 0, minute = 0, second = 0;
    if (m[5].matched) {
        hour = parse_int(m[5].str());
        minute = parse_int(m[6].str());
        second = parse_int(m[7].str());
    }
    if (!CivilDateTime::valid(year, month, day, hour, minute, second)) {
        throw TimestampParseError(fmt::format("out-of-range field in '{}'", s));
    }
    const CivilDateTime result = CivilDateTime::make(year, month, day, hour, minute, second);

    if (m[1].matched) {
        const auto stated = weekday_from_word(m[1].str());
        if (!stated) throw TimestampParseError(fmt::format("unknown weekday in '{}'", s));
        const Weekday actual = weekday_of(result);
        if (*stated != actual) {
            throw WeekdayMismatchError(fmt::format("'{}' names {} but the date is a {}", s,
                                                   weekday_name(*stated), weekday_name(actual)));
        }
    }
    return result;
}

}  // namespace emkit::calendar
