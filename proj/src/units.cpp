#include "isoclock/units.hpp"

#include <array>
#include <charconv>
#include <utility>

namespace isoclock::units {

std::optional<double> parse_real(std::string_view text) {
    if (text.empty()) return std::nullopt;
    // from_chars rejects a leading '+', which users write for exponents and fluxes alike.
    if (text.front() == '+') text.remove_prefix(1);
    double value = 0.0;
    const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
    if (ec != std::errc{} || ptr != text.data() + text.size()) return std::nullopt;
    return value;
}

std::optional<long long> parse_integer(std::string_view text) {
    if (text.empty()) return std::nullopt;
    if (text.front() == '+') text.remove_prefix(1);
    long long value = 0;
    const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
    if (ec != std::errc{} || ptr != text.data() + text.size()) return std::nullopt;
    return value;
}

std::optional<double> parse_duration(std::string_view text) {
    static constexpr std::array<std::pair<std::string_view, double>, 8> kUnits{{
        {"ns", 1e-9},
        {"us", 1e-6},
        {"ms", 1e-3},
        {"s", 1.0},
        {"m", kSecondsPerMinute},
        {"h", kSecondsPerHour},
        {"d", kSecondsPerDay},
        {"y", kSecondsPerYear},
    }};
    for (const auto& [suffix, scale] : kUnits) {
        if (text.size() <= suffix.size() || !text.ends_with(suffix)) continue;
        // Two-letter suffixes come first so "5ms" is not read as "5m" + "s".
        auto number = text.substr(0, text.size() - suffix.size());
        if (auto v = parse_real(number)) return *v * scale;
        return std::nullopt;
    }
    return std::nullopt;
}

std::string format_double(double value) {
    std::array<char, 32> buf{};
    const auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), value);
    (void)ec;
    return std::string(buf.data(), ptr);
}

}  // namespace isoclock::units
