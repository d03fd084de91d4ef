#pragma once

#include <cmath>
#include <optional>
#include <utility>

#include "farey/rational.hpp"

namespace farey {

/// Reduced fraction in [0,1]; an alias of Rat whose invariants (0 <= num <= den,
/// gcd = 1) hold by construction everywhere the streaming code produces one.
using Fraction = Rat;

constexpr i64 kMaxOrder = i64(1) << 31;

/**
 * @brief Consecutive pair a/q < a2/q2 in F(Q); the streaming cursor.
 *
 * Invariants: a2*q - a*q2 = 1, 1 <= q, q2 <= Q, q + q2 > Q.
 * At the tail the pair saturates to (1/1, (Q+1)/Q), which still satisfies all
 * three invariants and lets the recurrence run past 1 without special cases.
 */
struct FareyPairState {
    i64 a = 0, q = 1;    // current fraction a/q
    i64 a2 = 1, q2 = 1;  // successor a2/q2 in F(Q)
    i64 Q = 1;

    Fraction frac() const { return Rat(a, q); }
    Fraction frac_next() const { return Rat(a2, q2); }

    bool valid() const {
        if (Q < 1 || q < 1 || q2 < 1 || q > Q || q2 > Q) return false;
        if (q + q2 <= Q) return false;
        if (i128(a2) * q - i128(a) * q2 != 1) return false;
        return i128(a) * q2 < i128(a2) * q;  // a/q < a2/q2
    }
};

/// Next consecutive pair: (a2/q2, (K*a2-a)/(K*q2-q)) with K = floor((Q+q)/q2).
inline FareyPairState farey_next(const FareyPairState& s) {
    i64 k = (s.Q + s.q) / s.q2;
    return FareyPairState{s.a2, s.q2, k * s.a2 - s.a, k * s.q2 - s.q, s.Q};
}

namespace detail {

// Inverse of a modulo q, result in [0, q). Requires gcd(a, q) = 1.
inline i64 mod_inverse(i64 a, i64 q) {
    if (q == 1) return 0;
    i64 r0 = q, r1 = a % q;
    i64 t0 = 0, t1 = 1;
    while (r1 != 0) {
        i64 k = r0 / r1;
        i64 r2 = r0 - k * r1;
        i64 t2 = t0 - k * t1;
        r0 = r1;
        r1 = r2;
        t0 = t1;
        t1 = t2;
    }
    if (r0 != 1) throw std::domain_error("mod_inverse: arguments not coprime");
    return ((t0 % q) + q) % q;
}

// Successor of a/q in F(Q): the unique q2 in (Q-q, Q] with q2 = -a^{-1} (mod q),
// a2 = (1 + a*q2)/q. For q = 1 this yields (a*Q + 1)/Q, covering 0/1 and the
// saturated successor of 1/1.
inline std::pair<i64, i64> farey_successor(i64 a, i64 q, i64 Q) {
    if (q == 1) return {a * Q + 1, Q};
    i64 r = (q - mod_inverse(a % q, q)) % q;
    i64 q2 = Q - (Q - r) % q;
    i64 a2 = i64((i128(a) * q2 + 1) / q);
    return {a2, q2};
}

}  // namespace detail

/**
 * @brief Positions a stream at the smallest element of F(Q) that is >= x0.
 *
 * Exact-hit inputs (den(x0) <= Q) start at x0 itself; otherwise the pair of
 * Farey neighbors of x0 is located by a batched Stern-Brocot descent and the
 * stream starts at the upper neighbor.
 */
inline FareyPairState farey_start(i64 Q, const Rat& x0) {
    if (Q < 1 || Q > kMaxOrder) throw std::domain_error("farey_start: order out of range");
    if (x0.num < 0 || x0 > Rat(1)) throw std::domain_error("farey_start: x0 outside [0,1]");

    if (x0.den <= Q) {
        auto [a2, q2] = detail::farey_successor(x0.num, x0.den, Q);
        return FareyPairState{x0.num, x0.den, a2, q2, Q};
    }

    // 0 < x0 < 1 and x0 not representable in F(Q). Walk mediants toward x0,
    // taking all same-side steps at once.
    i64 lon = 0, lod = 1, hin = 1, hid = 1;
    const i64 p0 = x0.num, q0 = x0.den;
    while (lod + hid <= Q) {
        i128 n_lo = i128(p0) * lod - i128(lon) * q0;  // > 0: lo < x0
        i128 d_hi = i128(hin) * q0 - i128(hid) * p0;  // > 0: hi > x0
        if (n_lo > d_hi) {
            // mediant < x0: push lo toward x0
            i64 k = i64((n_lo - 1) / d_hi);
            if (k > (Q - lod) / hid) k = (Q - lod) / hid;
            lon += k * hin;
            lod += k * hid;
        } else {
            i64 k = i64((d_hi - 1) / n_lo);
            if (k > (Q - hid) / lod) k = (Q - hid) / lod;
            hin += k * lon;
            hid += k * lod;
        }
    }
    return farey_next(FareyPairState{lon, lod, hin, hid, Q});
}

/// Point of the Farey triangle: 0 < a, b <= 1, a + b > 1.
struct TrianglePoint {
    double a = 1.0;
    double b = 1.0;
};

/// BCZ map T(a,b) = (b, floor((1+a)/b)*b - a) in binary64. The exact path
/// (bcz_exact) is the authority wherever the two are cross-checked.
inline TrianglePoint bcz(const TrianglePoint& p) {
    double k = std::floor((1.0 + p.a) / p.b);
    double b2 = k * p.b - p.a;
    if (b2 > 1.0) b2 = 1.0;  // one-ulp guard; exact value never exceeds 1
    return TrianglePoint{p.b, b2};
}

/// Denominator step of the BCZ map at Farey points (q_i/Q, q_{i+1}/Q), in
/// exact integer arithmetic: (q_{i+1}, K*q_{i+1} - q_i), K = floor((Q+q_i)/q_{i+1}).
inline std::pair<i64, i64> bcz_exact(i64 q_i, i64 q_next, i64 Q) {
    if (Q < 1 || Q > kMaxOrder) throw std::overflow_error("bcz_exact: order out of range");
    i64 k = (Q + q_i) / q_next;
    return {q_next, k * q_next - q_i};
}

/**
 * @brief Pull-stream over F(Q) restricted to a closed interval [x1, x2].
 *
 * Yields one FareyPairState per fraction, in increasing order, endpoints
 * included. A full sweep is [0, 1]; it ends after yielding 1/1.
 */
class FareyStream {
public:
    FareyStream(i64 Q, const Rat& x1, const Rat& x2)
        : state_(farey_start(Q, x1)), x2_(x2) {
        if (x2 < x1) throw std::domain_error("FareyStream: empty interval");
    }

    std::optional<FareyPairState> next() {
        if (done_) return std::nullopt;
        if (i128(state_.a) * x2_.den > i128(x2_.num) * state_.q) {
            done_ = true;
            return std::nullopt;
        }
        FareyPairState out = state_;
        state_ = farey_next(state_);
        return out;
    }

    i64 order() const { return state_.Q; }

private:
    FareyPairState state_;
    Rat x2_;
    bool done_ = false;
};

}  // namespace farey
