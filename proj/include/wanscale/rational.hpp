// Exact rational arithmetic for bandwidth, time and CPU quantities.
//
// Every quantity that feeds a trace is kept as a normalized int64 fraction so
// that runs are bit-reproducible regardless of platform floating point.
// Intermediate products use 128-bit integers; results that do not fit in
// int64 throw std::overflow_error instead of silently wrapping.
#pragma once

#include <charconv>
#include <compare>
#include <cstdint>
#include <numeric>
#include <ostream>
#include <stdexcept>
#include <string>
#include <string_view>

namespace wanscale {

class Rational {
public:
    constexpr Rational() = default;
    constexpr Rational(std::int64_t value) : num_(value) {}  // NOLINT: implicit from integers is intended
    Rational(std::int64_t num, std::int64_t den) { assign(num, den); }

    [[nodiscard]] constexpr std::int64_t num() const noexcept { return num_; }
    [[nodiscard]] constexpr std::int64_t den() const noexcept { return den_; }

    [[nodiscard]] double to_double() const noexcept {
        return static_cast<double>(num_) / static_cast<double>(den_);
    }

    [[nodiscard]] bool is_integer() const noexcept { return den_ == 1; }

    // Largest integer not greater than the value.
    [[nodiscard]] std::int64_t floor() const noexcept {
        std::int64_t q = num_ / den_;
        if (num_ % den_ != 0 && num_ < 0) --q;
        return q;
    }

    // Smallest integer not less than the value.
    [[nodiscard]] std::int64_t ceil() const noexcept {
        std::int64_t q = num_ / den_;
        if (num_ % den_ != 0 && num_ > 0) ++q;
        return q;
    }

    [[nodiscard]] Rational abs() const noexcept {
        Rational r = *this;
        if (r.num_ < 0) r.num_ = -r.num_;
        return r;
    }

    friend Rational operator+(const Rational& a, const Rational& b) {
        return from_wide(static_cast<__int128>(a.num_) * b.den_ + static_cast<__int128>(b.num_) * a.den_,
                         static_cast<__int128>(a.den_) * b.den_);
    }
    friend Rational operator-(const Rational& a, const Rational& b) {
        return from_wide(static_cast<__int128>(a.num_) * b.den_ - static_cast<__int128>(b.num_) * a.den_,
                         static_cast<__int128>(a.den_) * b.den_);
    }
    friend Rational operator*(const Rational& a, const Rational& b) {
        return from_wide(static_cast<__int128>(a.num_) * b.num_, static_cast<__int128>(a.den_) * b.den_);
    }
    friend Rational operator/(const Rational& a, const Rational& b) {
        if (b.num_ == 0) throw std::domain_error("rational division by zero");
        return from_wide(static_cast<__int128>(a.num_) * b.den_, static_cast<__int128>(a.den_) * b.num_);
    }
    Rational operator-() const { return from_wide(-static_cast<__int128>(num_), den_); }

    Rational& operator+=(const Rational& o) { return *this = *this + o; }
    Rational& operator-=(const Rational& o) { return *this = *this - o; }
    Rational& operator*=(const Rational& o) { return *this = *this * o; }
    Rational& operator/=(const Rational& o) { return *this = *this / o; }

    friend bool operator==(const Rational& a, const Rational& b) noexcept {
        return a.num_ == b.num_ && a.den_ == b.den_;
    }
    friend std::strong_ordering operator<=>(const Rational& a, const Rational& b) noexcept {
        const __int128 lhs = static_cast<__int128>(a.num_) * b.den_;
        const __int128 rhs = static_cast<__int128>(b.num_) * a.den_;
        if (lhs < rhs) return std::strong_ordering::less;
        if (lhs > rhs) return std::strong_ordering::greater;
        return std::strong_ordering::equal;
    }

    // Parses "3", "-2", "0.03", "4/3", "1e3" style text. Throws std::invalid_argument.
    static Rational parse(std::string_view text);

    // Converts a double through its shortest round-trip decimal form, so that a
    // JSON literal 0.03 becomes exactly 3/100.
    static Rational from_double(double value);

    // Rounds to the nearest multiple of 1/scale (ties away from zero).
    [[nodiscard]] Rational round_to(std::int64_t scale) const;

    // Rounds up to the next multiple of `quantum` (quantum > 0).
    [[nodiscard]] Rational ceil_to(const Rational& quantum) const;

    // Exact decimal when the expansion terminates within 9 digits, otherwise
    // rounded to 6 fractional digits. Trailing zeros are trimmed.
    [[nodiscard]] std::string to_string() const;

private:
    void assign(std::int64_t num, std::int64_t den) {
        if (den == 0) throw std::domain_error("rational with zero denominator");
        *this = from_wide(num, den);
    }

    static Rational from_wide(__int128 num, __int128 den) {
        if (den == 0) throw std::domain_error("rational with zero denominator");
        if (den < 0) {
            num = -num;
            den = -den;
        }
        __int128 a = num < 0 ? -num : num;
        __int128 b = den;
        while (b != 0) {
            const __int128 t = a % b;
            a = b;
            b = t;
        }
        const __int128 g = a == 0 ? 1 : a;
        num /= g;
        den /= g;
        constexpr __int128 lo = INT64_MIN;
        constexpr __int128 hi = INT64_MAX;
        if (num < lo || num > hi || den > hi) throw std::overflow_error("rational overflow");
        Rational r;
        r.num_ = static_cast<std::int64_t>(num);
        r.den_ = static_cast<std::int64_t>(den);
        return r;
    }

    std::int64_t num_ = 0;
    std::int64_t den_ = 1;
};

inline Rational Rational::parse(std::string_view text) {
    auto fail = [&]() -> Rational {
        throw std::invalid_argument("not a number: '" + std::string(text) + "'");
    };
    while (!text.empty() && text.front() == ' ') text.remove_prefix(1);
    while (!text.empty() && text.back() == ' ') text.remove_suffix(1);
    if (text.empty()) return fail();

    if (const auto slash = text.find('/'); slash != std::string_view::npos) {
        const Rational n = parse(text.substr(0, slash));
        const Rational d = parse(text.substr(slash + 1));
        if (d.num() == 0) return fail();
        return n / d;
    }

    std::int64_t exponent = 0;
    if (const auto e = text.find_first_of("eE"); e != std::string_view::npos) {
        const auto exp_text = text.substr(e + 1);
        const char* first = exp_text.data();
        const char* last = first + exp_text.size();
        if (first != last && *first == '+') ++first;
        auto [ptr, ec] = std::from_chars(first, last, exponent);
        if (ec != std::errc{} || ptr != last || exponent > 18 || exponent < -18) return fail();
        text = text.substr(0, e);
    }

    bool negative = false;
    if (!text.empty() && (text.front() == '-' || text.front() == '+')) {
        negative = text.front() == '-';
        text.remove_prefix(1);
    }
    __int128 digits = 0;
    std::int64_t frac_digits = 0;
    bool seen_point = false;
    bool seen_digit = false;
    for (const char c : text) {
        if (c == '.') {
            if (seen_point) return fail();
            seen_point = true;
            continue;
        }
        if (c < '0' || c > '9') return fail();
        seen_digit = true;
        if (digits > static_cast<__int128>(INT64_MAX)) throw std::overflow_error("rational overflow");
        digits = digits * 10 + (c - '0');
        if (seen_point) ++frac_digits;
    }
    if (!seen_digit) return fail();
    exponent -= frac_digits;
    __int128 den = 1;
    while (exponent > 0) {
        digits *= 10;
        --exponent;
    }
    while (exponent < 0) {
        den *= 10;
        ++exponent;
    }
    return from_wide(negative ? -digits : digits, den);
}

inline Rational Rational::from_double(double value) {
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, value);
    if (ec != std::errc{}) throw std::invalid_argument("unrepresentable number");
    return parse(std::string_view(buf, static_cast<std::size_t>(ptr - buf)));
}

inline Rational Rational::round_to(std::int64_t scale) const {
    const __int128 scaled = static_cast<__int128>(num_) * scale;
    __int128 q = scaled / den_;
    const __int128 r = scaled % den_;
    const __int128 twice = (r < 0 ? -r : r) * 2;
    if (twice >= den_) q += (scaled < 0 ? -1 : 1);
    return from_wide(q, scale);
}

inline Rational Rational::ceil_to(const Rational& quantum) const {
    if (quantum.num_ <= 0) throw std::domain_error("quantum must be positive");
    const Rational steps = *this / quantum;
    return Rational(steps.ceil()) * quantum;
}

inline std::string Rational::to_string() const {
    // Terminating expansions have a denominator of the form 2^a * 5^b.
    std::int64_t d = den_;
    int twos = 0;
    int fives = 0;
    while (d % 2 == 0) {
        d /= 2;
        ++twos;
    }
    while (d % 5 == 0) {
        d /= 5;
        ++fives;
    }
    int places = std::max(twos, fives);
    Rational v = *this;
    if (d != 1 || places > 9) {
        places = 6;
        v = round_to(1'000'000);
    }
    __int128 scale = 1;
    for (int i = 0; i < places; ++i) scale *= 10;
    __int128 scaled = static_cast<__int128>(v.num_) * (scale / v.den_);
    const bool negative = scaled < 0;
    if (negative) scaled = -scaled;
    const auto int_part = static_cast<std::uint64_t>(scaled / scale);
    auto frac_part = static_cast<std::uint64_t>(scaled % scale);

    std::string out = negative ? "-" : "";
    out += std::to_string(int_part);
    if (places > 0 && frac_part != 0) {
        std::string frac(static_cast<std::size_t>(places), '0');
        for (int i = places - 1; i >= 0; --i) {
            frac[static_cast<std::size_t>(i)] = static_cast<char>('0' + frac_part % 10);
            frac_part /= 10;
        }
        while (!frac.empty() && frac.back() == '0') frac.pop_back();
        out += '.';
        out += frac;
    }
    return out;
}

inline std::ostream& operator<<(std::ostream& os, const Rational& r) { return os << r.to_string(); }

inline Rational min(const Rational& a, const Rational& b) { return b < a ? b : a; }
inline Rational max(const Rational& a, const Rational& b) { return a < b ? b : a; }

// Bandwidth in Mbps and time in seconds share the exact representation.
using Mbps = Rational;
using Seconds = Rational;

}  // namespace wanscale
