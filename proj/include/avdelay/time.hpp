#pragma once

#include <chrono>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

namespace avdelay {

// All timestamps are UTC seconds since the Unix epoch.
using Timestamp = std::chrono::sys_seconds;
using Seconds = std::chrono::seconds;
using Minutes = std::chrono::minutes;

inline constexpr std::int64_t kBinSeconds = 600;

// Parses `YYYY-MM-DDTHH:MM:SS` with an optional trailing `Z`.
std::optional<Timestamp> parse_timestamp(std::string_view text);

// Formats as `YYYY-MM-DDTHH:MM:SSZ`.
std::string format_timestamp(Timestamp ts);

inline std::int64_t epoch_seconds(Timestamp ts) { return ts.time_since_epoch().count(); }
inline Timestamp from_epoch(std::int64_t s) { return Timestamp{Seconds{s}}; }

// Start of the 10-minute bin containing `ts`.
inline Timestamp bin_floor(Timestamp ts) {
  const std::int64_t s = epoch_seconds(ts);
  std::int64_t q = s / kBinSeconds;
  if (s % kBinSeconds < 0) --q;
  return from_epoch(q * kBinSeconds);
}

// UTC calendar day index (days since epoch).
inline std::int64_t day_index(Timestamp ts) {
  return std::chrono::floor<std::chrono::days>(ts).time_since_epoch().count();
}

// Signed minute difference a - b, truncated toward zero.
inline std::int64_t minutes_between(Timestamp a, Timestamp b) {
  return std::chrono::duration_cast<Minutes>(a - b).count();
}

}  // namespace avdelay
