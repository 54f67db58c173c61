#pragma once

#include <cstdint>
#include <numeric>
#include <string>

#include "forgesim/errors.hpp"

namespace forgesim {

/// Exact rational on int64 numerator/denominator, normalized so that the
/// denominator is positive and gcd(|num|, den) == 1. Intermediate products go
/// through __int128; a result that cannot be reduced back into int64 throws
/// OutOfRangeError. Scores and config ratios in this codebase keep
/// denominators <= 1e9, which keeps every reachable operation in range.
class Rational {
public:
    constexpr Rational() : num_(0), den_(1) {}
    constexpr Rational(std::int64_t whole) : num_(whole), den_(1) {}

    Rational(std::int64_t num, std::int64_t den) {
        if (den == 0) throw OutOfRangeError("rational: zero denominator");
        __int128 n = num;
        __int128 d = den;
        if (d < 0) { n = -n; d = -d; }
        const __int128 g = gcd128(n < 0 ? -n : n, d);
        assign_checked(g ? n / g : n, g ? d / g : d);
    }

    std::int64_t num() const { return num_; }
    std::int64_t den() const { return den_; }

    bool is_zero() const { return num_ == 0; }

    double to_double() const {
        return static_cast<double>(num_) / static_cast<double>(den_);
    }

    /// Canonical form: "7/3", or just "7" when the denominator is 1.
    std::string to_string() const {
        if (den_ == 1) return std::to_string(num_);
        return std::to_string(num_) + "/" + std::to_string(den_);
    }

    /// Accepts "n", "n/d", or a decimal like "0.35" (at most 18 significant
    /// digits). Used for config values and wire payloads.
    static Rational parse(const std::string& text);

    /// Quantize a double onto the 1e-9 grid. Wire scores arriving as JSON
    /// numbers go through this so downstream arithmetic stays in range.
    static Rational from_double_quantized(double value) {
        if (value != value) throw OutOfRangeError("rational: NaN");
        const double scaled = value * 1e9;
        if (scaled > 9.0e18 || scaled < -9.0e18)
            throw OutOfRangeError("rational: double out of range");
        return Rational(static_cast<std::int64_t>(scaled < 0 ? scaled - 0.5 : scaled + 0.5),
                        1000000000LL);
    }

    friend Rational operator+(const Rational& a, const Rational& b) {
        const __int128 n = static_cast<__int128>(a.num_) * b.den_ +
                           static_cast<__int128>(b.num_) * a.den_;
        const __int128 d = static_cast<__int128>(a.den_) * b.den_;
        return from128(n, d);
    }

    friend Rational operator-(const Rational& a, const Rational& b) {
        const __int128 n = static_cast<__int128>(a.num_) * b.den_ -
                           static_cast<__int128>(b.num_) * a.den_;
        const __int128 d = static_cast<__int128>(a.den_) * b.den_;
        return from128(n, d);
    }

    friend Rational operator*(const Rational& a, const Rational& b) {
        const __int128 n = static_cast<__int128>(a.num_) * b.num_;
        const __int128 d = static_cast<__int128>(a.den_) * b.den_;
        return from128(n, d);
    }

    friend Rational operator/(const Rational& a, const Rational& b) {
        if (b.num_ == 0) throw OutOfRangeError("rational: division by zero");
        const __int128 n = static_cast<__int128>(a.num_) * b.den_;
        const __int128 d = static_cast<__int128>(a.den_) * b.num_;
        return from128(n, d);
    }

    friend bool operator==(const Rational& a, const Rational& b) {
        return a.num_ == b.num_ && a.den_ == b.den_;
    }
    friend bool operator!=(const Rational& a, const Rational& b) { return !(a == b); }
    friend bool operator<(const Rational& a, const Rational& b) {
        return static_cast<__int128>(a.num_) * b.den_ <
               static_cast<__int128>(b.num_) * a.den_;
    }
    friend bool operator>(const Rational& a, const Rational& b) { return b < a; }
    friend bool operator<=(const Rational& a, const Rational& b) { return !(b < a); }
    friend bool operator>=(const Rational& a, const Rational& b) { return !(a < b); }

private:
    static __int128 gcd128(__int128 a, __int128 b) {
        while (b != 0) {
            const __int128 t = a % b;
            a = b;
            b = t;
        }
        return a;
    }

    static Rational from128(__int128 n, __int128 d) {
        if (d == 0) throw OutOfRangeError("rational: zero denominator");
        if (d < 0) { n = -n; d = -d; }
        const __int128 g = gcd128(n < 0 ? -n : n, d);
        Rational r;
        r.assign_checked(g ? n / g : n, g ? d / g : d);
        return r;
    }

    void assign_checked(__int128 n, __int128 d) {
        constexpr __int128 lo = INT64_MIN;
        constexpr __int128 hi = INT64_MAX;
        if (n < lo || n > hi || d > hi)
            throw OutOfRangeError("rational: overflow after reduction");
        num_ = static_cast<std::int64_t>(n);
        den_ = static_cast<std::int64_t>(d);
        if (num_ == 0) den_ = 1;
    }

    std::int64_t num_;
    std::int64_t den_;
};

inline Rational Rational::parse(const std::string& text) {
    if (text.empty()) throw OutOfRangeError("rational: empty string");
    const auto slash = text.find('/');
    try {
        if (slash != std::string::npos) {
            const std::int64_t n = std::stoll(text.substr(0, slash));
            const std::int64_t d = std::stoll(text.substr(slash + 1));
            return Rational(n, d);
        }
        const auto dot = text.find('.');
        if (dot == std::string::npos) {
            return Rational(std::stoll(text));
        }
        std::string digits = text.substr(0, dot) + text.substr(dot + 1);
        const std::size_t frac_digits = text.size() - dot - 1;
        if (frac_digits == 0 || frac_digits > 18 || digits.size() > 18)
            throw OutOfRangeError("rational: too many digits in '" + text + "'");
        std::int64_t den = 1;
        for (std::size_t i = 0; i < frac_digits; ++i) den *= 10;
        return Rational(std::stoll(digits), den);
    } catch (const std::invalid_argument&) {
        throw OutOfRangeError("rational: cannot parse '" + text + "'");
    } catch (const std::out_of_range&) {
        throw OutOfRangeError("rational: cannot parse '" + text + "'");
    }
}

}  // namespace forgesim
