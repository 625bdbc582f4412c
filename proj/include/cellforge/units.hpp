#pragma once

// SPICE-style engineering numbers ("4u", "10f", "1meg") and the fixed-point
// renderers used by the report tables.

#include <array>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <optional>
#include <string>
#include <string_view>

namespace cellforge {

struct UnitSuffix {
    std::string_view text;
    int exponent;
};

// "meg" must be tried before "m".
inline constexpr std::array<UnitSuffix, 7> kUnitSuffixes{{
    {"meg", 6}, {"k", 3}, {"m", -3}, {"u", -6}, {"n", -9}, {"p", -12}, {"f", -15},
}};

namespace detail {

inline bool iequals_prefix(std::string_view s, std::string_view prefix) {
    if (s.size() < prefix.size()) return false;
    for (std::size_t i = 0; i < prefix.size(); ++i)
        if (std::tolower(static_cast<unsigned char>(s[i])) != prefix[i]) return false;
    return true;
}

}  // namespace detail

/// Parses a decimal number with an optional scale suffix (case-insensitive).
/// Trailing alphabetic unit letters after the suffix are ignored ("10fF", "1.8V").
/// Returns nullopt on malformed input.
inline std::optional<double> parse_number(std::string_view s) {
    std::size_t i = 0;
    if (i < s.size() && (s[i] == '+' || s[i] == '-')) ++i;
    std::size_t digits = 0;
    while (i < s.size() && std::isdigit(static_cast<unsigned char>(s[i]))) ++i, ++digits;
    if (i < s.size() && s[i] == '.') {
        ++i;
        while (i < s.size() && std::isdigit(static_cast<unsigned char>(s[i]))) ++i, ++digits;
    }
    if (digits == 0) return std::nullopt;
    // Exponent only if followed by a digit (or sign + digit); "1e" is not a number.
    if (i < s.size() && (s[i] == 'e' || s[i] == 'E')) {
        std::size_t j = i + 1;
        if (j < s.size() && (s[j] == '+' || s[j] == '-')) ++j;
        if (j < s.size() && std::isdigit(static_cast<unsigned char>(s[j]))) {
            while (j < s.size() && std::isdigit(static_cast<unsigned char>(s[j]))) ++j;
            i = j;
        }
    }
    std::string mantissa(s.substr(0, i));
    std::string_view rest = s.substr(i);

    int exponent = 0;
    for (const auto& suf : kUnitSuffixes) {
        if (detail::iequals_prefix(rest, suf.text)) {
            exponent = suf.exponent;
            rest.remove_prefix(suf.text.size());
            break;
        }
    }
    for (char c : rest)
        if (!std::isalpha(static_cast<unsigned char>(c))) return std::nullopt;

    // Fold the suffix into the decimal exponent so strtod rounds once.
    bool has_exp = mantissa.find_first_of("eE") != std::string::npos;
    double value;
    if (!has_exp) {
        if (exponent != 0) mantissa += "e" + std::to_string(exponent);
        value = std::strtod(mantissa.c_str(), nullptr);
    } else {
        value = std::strtod(mantissa.c_str(), nullptr) * std::pow(10.0, exponent);
    }
    if (!std::isfinite(value)) return std::nullopt;
    return value;
}

/// Shortest suffixed rendering that parses back to exactly `v`.
inline std::string format_number(double v) {
    if (v == 0.0) return "0";
    char buf[64];
    double mag = std::fabs(v);
    const UnitSuffix* pick = nullptr;
    static constexpr std::array<UnitSuffix, 8> order{{
        {"meg", 6}, {"k", 3}, {"", 0}, {"m", -3}, {"u", -6}, {"n", -9}, {"p", -12}, {"f", -15},
    }};
    for (const auto& suf : order) {
        if (mag >= std::pow(10.0, suf.exponent) * (1.0 - 1e-12)) {
            pick = &suf;
            break;
        }
    }
    if (pick != nullptr && mag < 1e9) {
        double m = v / std::pow(10.0, pick->exponent);
        for (int prec = 6; prec <= 17; ++prec) {
            std::snprintf(buf, sizeof buf, "%.*g", prec, m);
            std::string s = std::string(buf) + std::string(pick->text);
            if (s.find_first_of("eE") != std::string::npos) break;
            auto back = parse_number(s);
            if (back && *back == v) return s;
        }
    }
    for (int prec = 6; prec <= 17; ++prec) {
        std::snprintf(buf, sizeof buf, "%.*g", prec, v);
        auto back = parse_number(buf);
        if (back && *back == v) return buf;
    }
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

/// Fixed-point text carrying at least `sig` significant figures and at least
/// `min_decimals` decimals; zeros past `min_decimals` are trimmed.
inline std::string format_sig(double v, int sig, int min_decimals) {
    int decimals = min_decimals;
    if (v != 0.0 && std::isfinite(v)) {
        int lead = static_cast<int>(std::floor(std::log10(std::fabs(v))));
        decimals = std::max(decimals, sig - 1 - lead);
    }
    decimals = std::min(decimals, 20);
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*f", decimals, v);
    std::string s(buf);
    if (auto dot = s.find('.'); dot != std::string::npos) {
        std::size_t keep = dot + 1 + static_cast<std::size_t>(min_decimals);
        while (s.size() > keep && s.back() == '0') s.pop_back();
        if (s.back() == '.') s.pop_back();
    }
    return s;
}

/// Delay in picoseconds, as tabulated ("19.39 ps").
inline std::string render_delay(double seconds) { return format_sig(seconds * 1e12, 3, 2) + " ps"; }

/// Power in µW, nW or pW depending on magnitude.
inline std::string render_power(double watts) {
    double mag = std::fabs(watts);
    if (mag >= 1e-6 || mag == 0.0) return format_sig(watts * 1e6, 3, 3) + " uW";
    if (mag >= 1e-9) return format_sig(watts * 1e9, 3, 2) + " nW";
    return format_sig(watts * 1e12, 3, 1) + " pW";
}

/// Energy in fJ, falling back to zJ below 0.001 fJ.
inline std::string render_energy(double joules) {
    double fj = joules * 1e15;
    if (std::fabs(fj) >= 1e-3 || fj == 0.0) return format_sig(fj, 3, 3) + " fJ";
    return format_sig(joules * 1e21, 3, 1) + " zJ";
}

/// Inverse of the render_* helpers; returns SI value.
inline std::optional<double> parse_rendered(std::string_view text) {
    auto sp = text.find(' ');
    if (sp == std::string_view::npos) return std::nullopt;
    std::string num(text.substr(0, sp));
    std::string_view unit = text.substr(sp + 1);
    char* end = nullptr;
    double v = std::strtod(num.c_str(), &end);
    if (end == num.c_str()) return std::nullopt;
    struct U { std::string_view name; double scale; };
    static constexpr std::array<U, 7> units{{
        {"ps", 1e-12}, {"uW", 1e-6}, {"nW", 1e-9}, {"pW", 1e-12}, {"fJ", 1e-15}, {"zJ", 1e-21}, {"ns", 1e-9},
    }};
    for (const auto& u : units)
        if (unit == u.name) return v * u.scale;
    return std::nullopt;
}

}  // namespace cellforge
