#pragma once

#include <chrono>
#include <compare>
#include <cstdint>
#include <string>

namespace eerec {

using Duration = std::chrono::seconds;

inline constexpr std::int64_t kSecondsPerDay = 86400;
inline constexpr std::int64_t kSecondsPerWeek = 7 * kSecondsPerDay;
inline constexpr std::int64_t kSlotSeconds = 300;
inline constexpr int kSlotsPerDay = 288;
inline constexpr int kDaysPerWeek = 7;

enum class Weekday : int { Monday = 0, Tuesday, Wednesday, Thursday, Friday, Saturday, Sunday };

/// Simulated wall-clock instant with 1 s resolution.
///
/// The simulated epoch (seconds == 0) is Monday 00:00:00 of week 0.
/// Negative values are not used.
struct Timestamp {
  std::int64_t seconds = 0;

  constexpr Timestamp() = default;
  constexpr explicit Timestamp(std::int64_t s) : seconds(s) {}

  static constexpr Timestamp at(int week, Weekday day, int hour, int minute = 0, int second = 0) {
    return Timestamp{week * kSecondsPerWeek + static_cast<int>(day) * kSecondsPerDay +
                     hour * 3600 + minute * 60 + second};
  }

  constexpr Weekday day_of_week() const {
    return static_cast<Weekday>((seconds / kSecondsPerDay) % kDaysPerWeek);
  }
  constexpr std::int64_t week() const { return seconds / kSecondsPerWeek; }
  constexpr std::int64_t seconds_of_day() const { return seconds % kSecondsPerDay; }
  /// Start of the simulated day containing this instant.
  constexpr Timestamp day_start() const { return Timestamp{seconds - seconds_of_day()}; }

  constexpr auto operator<=>(const Timestamp&) const = default;

  constexpr Timestamp operator+(Duration d) const { return Timestamp{seconds + d.count()}; }
  constexpr Timestamp operator-(Duration d) const { return Timestamp{seconds - d.count()}; }
  constexpr Duration operator-(Timestamp other) const { return Duration{seconds - other.seconds}; }
  constexpr Timestamp& operator+=(Duration d) {
    seconds += d.count();
    return *this;
  }
};

/// 5-minute slot of the day, 0..287.
constexpr int slot_of(Timestamp t) { return static_cast<int>(t.seconds_of_day() / kSlotSeconds); }

constexpr double hours(Duration d) { return static_cast<double>(d.count()) / 3600.0; }

std::string weekday_name(Weekday d);

/// "Mon 09:07:30" style rendering used in messages and transcripts.
std::string format_timestamp(Timestamp t);

}  // namespace eerec
