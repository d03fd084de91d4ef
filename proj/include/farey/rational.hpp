#pragma once

#include <compare>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>

namespace farey {

using i64 = std::int64_t;
using u64 = std::uint64_t;
using i128 = __int128;
using u128 = unsigned __int128;

inline u128 abs_u128(i128 x) { return x < 0 ? u128(-x) : u128(x); }

inline u128 gcd_u128(u128 a, u128 b) {
    while (b != 0) {
        u128 t = a % b;
        a = b;
        b = t;
    }
    return a;
}

/**
 * @brief Exact rational p/q on int64, always reduced, q > 0.
 *
 * All arithmetic goes through 128-bit intermediates and is reduced before
 * narrowing back to 64 bits; a result that does not fit after reduction
 * throws std::overflow_error. Comparisons are exact (cross-multiplied in
 * 128 bits, never through floating point).
 */
struct Rat {
    i64 num = 0;
    i64 den = 1;

    constexpr Rat() = default;
    constexpr Rat(i64 n) : num(n), den(1) {}
    Rat(i64 n, i64 d) { *this = make(i128(n), i128(d)); }

    static Rat make(i128 n, i128 d) {
        if (d == 0) throw std::domain_error("Rat: zero denominator");
        if (d < 0) {
            n = -n;
            d = -d;
        }
        if (n == 0) return Rat{};
        u128 g = gcd_u128(abs_u128(n), u128(d));
        n /= i128(g);
        d /= i128(g);
        constexpr i128 lo = std::numeric_limits<i64>::min();
        constexpr i128 hi = std::numeric_limits<i64>::max();
        if (n < lo || n > hi || d > hi)
            throw std::overflow_error("Rat: value does not fit in 64 bits after reduction");
        Rat r;
        r.num = i64(n);
        r.den = i64(d);
        return r;
    }

    double value() const { return double(num) / double(den); }

    Rat operator-() const {
        Rat r;
        r.num = -num;
        r.den = den;
        return r;
    }
    friend Rat operator+(const Rat& a, const Rat& b) {
        return make(i128(a.num) * b.den + i128(b.num) * a.den, i128(a.den) * b.den);
    }
    friend Rat operator-(const Rat& a, const Rat& b) {
        return make(i128(a.num) * b.den - i128(b.num) * a.den, i128(a.den) * b.den);
    }
    friend Rat operator*(const Rat& a, const Rat& b) {
        return make(i128(a.num) * b.num, i128(a.den) * b.den);
    }
    friend Rat operator/(const Rat& a, const Rat& b) {
        if (b.num == 0) throw std::domain_error("Rat: division by zero");
        return make(i128(a.num) * b.den, i128(a.den) * b.num);
    }
    Rat& operator+=(const Rat& b) { return *this = *this + b; }
    Rat& operator-=(const Rat& b) { return *this = *this - b; }
    Rat& operator*=(const Rat& b) { return *this = *this * b; }

    friend bool operator==(const Rat& a, const Rat& b) {
        return a.num == b.num && a.den == b.den;
    }
    friend std::strong_ordering operator<=>(const Rat& a, const Rat& b) {
        i128 l = i128(a.num) * b.den;
        i128 r = i128(b.num) * a.den;
        if (l < r) return std::strong_ordering::less;
        if (l > r) return std::strong_ordering::greater;
        return std::strong_ordering::equal;
    }

    std::string str() const {
        if (den == 1) return std::to_string(num);
        return std::to_string(num) + "/" + std::to_string(den);
    }
};

inline Rat rat_min(const Rat& a, const Rat& b) { return a <= b ? a : b; }
inline Rat rat_max(const Rat& a, const Rat& b) { return a >= b ? a : b; }
inline Rat rat_abs(const Rat& a) { return a.num < 0 ? -a : a; }

/// Parses "p/q", "p", or a plain decimal like "0.25" into an exact Rat.
inline Rat rat_parse(const std::string& s) {
    if (s.empty()) throw std::domain_error("rat_parse: empty string");
    auto slash = s.find('/');
    if (slash != std::string::npos) {
        i64 n = std::stoll(s.substr(0, slash));
        i64 d = std::stoll(s.substr(slash + 1));
        return Rat(n, d);
    }
    auto dot = s.find('.');
    if (dot != std::string::npos) {
        std::string head = s.substr(0, dot), tail = s.substr(dot + 1);
        if (tail.size() > 18) throw std::domain_error("rat_parse: too many decimal digits");
        bool neg = !head.empty() && head[0] == '-';
        i64 ip = head.empty() || head == "-" ? 0 : std::stoll(head);
        i128 den = 1;
        for (std::size_t i = 0; i < tail.size(); ++i) den *= 10;
        i128 frac = tail.empty() ? 0 : i128(std::stoll(tail));
        i128 num = abs_u128(ip) * den + frac;
        if (neg || ip < 0) num = -num;
        return Rat::make(num, den);
    }
    return Rat(std::stoll(s), 1);
}

}  // namespace farey
