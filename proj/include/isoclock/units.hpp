#pragma once

#include <optional>
#include <string>
#include <string_view>

namespace isoclock::units {

inline constexpr double kSecondsPerMinute = 60.0;
inline constexpr double kSecondsPerHour = 3600.0;
inline constexpr double kSecondsPerDay = 86400.0;
// Julian year.
inline constexpr double kSecondsPerYear = 365.25 * kSecondsPerDay;
inline constexpr double kAvogadro = 6.02214076e23;
inline constexpr double kBarnCm2 = 1.0e-24;

// Strict full-string number parse; nullopt on any trailing garbage.
std::optional<double> parse_real(std::string_view text);
std::optional<long long> parse_integer(std::string_view text);

// "<number><unit>" with unit in {ns, us, ms, s, m, h, d, y}; "m" is minutes.
// Returns seconds, or nullopt when the number or unit is not recognised.
std::optional<double> parse_duration(std::string_view text);

// Formats a double with the shortest representation that reparses exactly.
std::string format_double(double value);

}  // namespace isoclock::units
