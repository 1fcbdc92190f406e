#pragma once

#include "emkit/error.hpp"

#include <compare>
#include <cstdint>
#include <string>
#include <string_view>

// Proleptic-Gregorian civil date-time arithmetic. No time zones, no leap
// seconds. All functions are pure.
namespace emkit::calendar {

class CalendarError : public DataError {
public:
    using DataError::DataError;
};

// Text did not match any accepted timestamp layout.
class TimestampParseError : public CalendarError {
public:
    using CalendarError::CalendarError;
};

// Text parsed, but the stated weekday disagrees with the date.
class WeekdayMismatchError : public CalendarError {
public:
    using CalendarError::CalendarError;
};

// Arithmetic left the supported year range.
class RangeError : public CalendarError {
public:
    using CalendarError::CalendarError;
};

inline constexpr std::int64_t kMinYear = -999'999;
inline constexpr std::int64_t kMaxYear = 999'999;

bool is_leap_year(std::int64_t year) noexcept;
int days_in_month(std::int64_t year, int month) noexcept;

// A validated wall-clock instant. Construct through make(); the default value
// is 1970-01-01 00:00:00. Member order makes the defaulted comparison
// chronological.
class CivilDateTime {
public:
    CivilDateTime() = default;

    static CivilDateTime make(std::int64_t year, int month, int day, int hour = 0,
                              int minute = 0, int second = 0);
    static bool valid(std::int64_t year, int month, int day, int hour, int minute,
                      int second) noexcept;

    std::int64_t year() const noexcept { return year_; }
    int month() const noexcept { return month_; }
    int day() const noexcept { return day_; }
    int hour() const noexcept { return hour_; }
    int minute() const noexcept { return minute_; }
    int second() const noexcept { return second_; }

    // Days since 1970-01-01 and seconds since 1970-01-01T00:00:00.
    std::int64_t days_since_epoch() const noexcept;
    std::int64_t seconds_since_epoch() const noexcept;
    static CivilDateTime from_days(std::int64_t days, int hour = 0, int minute = 0,
                                   int second = 0);
    static CivilDateTime from_seconds(std::int64_t seconds);

    auto operator<=>(const CivilDateTime&) const = default;

private:
    std::int64_t year_ = 1970;
    int month_ = 1;
    int day_ = 1;
    int hour_ = 0;
    int minute_ = 0;
    int second_ = 0;
};

enum class Weekday { Monday, Tuesday, Wednesday, Thursday, Friday, Saturday, Sunday };

Weekday successor(Weekday w) noexcept;
std::string_view weekday_name(Weekday w) noexcept;
std::string_view month_name(int month);
std::string_view month_abbreviation(int month);

Weekday weekday_of(const CivilDateTime& d) noexcept;
bool is_weekend(const CivilDateTime& d) noexcept;
// Monday through Friday; there is no holiday calendar.
bool is_working_day(const CivilDateTime& d) noexcept;

struct DateOffset {
    std::int64_t years = 0;
    std::int64_t months = 0;
    std::int64_t days = 0;
    std::int64_t hours = 0;
    std::int64_t minutes = 0;
    std::int64_t seconds = 0;

    static DateOffset of_days(std::int64_t n) { return DateOffset{.days = n}; }
    static DateOffset of_seconds(std::int64_t n) { return DateOffset{.seconds = n}; }
    bool operator==(const DateOffset&) const = default;
};

// Applies years and months first (clamping the day to the target month's
// length), then days, then the time-of-day components.
CivilDateTime add_offset(const CivilDateTime& d, const DateOffset& offset);

enum class Sign { Negative = -1, Zero = 0, Positive = 1 };

// Normalized distance between two instants. Applying the components with
// add_offset to the earlier instant reproduces the later one exactly.
struct ElapsedBreakdown {
    Sign sign = Sign::Zero;
    std::int64_t years = 0;
    int months = 0;
    std::int64_t days = 0;
    int hours = 0;
    int minutes = 0;
    int seconds = 0;
    // |b - a| in seconds, independent of the calendar split above.
    std::int64_t total_seconds = 0;

    bool is_zero() const noexcept { return sign == Sign::Zero; }
    DateOffset as_offset() const noexcept;
    bool operator==(const ElapsedBreakdown&) const = default;
};

ElapsedBreakdown diff(const CivilDateTime& from, const CivilDateTime& to);

// Canonical layout: "Monday, September 4, 2006, 21:42:56".
std::string format_timestamp(const CivilDateTime& d);

// Accepts the canonical layout plus lenient variants seen in hand-written
// data: optional weekday, month abbreviations, ordinal day suffixes,
// unpadded fields, spaces around colons, and an optional time (midnight).
CivilDateTime parse_timestamp(std::string_view text);

// "2020-4-3" style, no zero padding.
std::string format_compact_date(const CivilDateTime& d);

}  // namespace emkit::calendar
