#pragma once

#include <atomic>
#include <cmath>
#include <functional>
#include <span>
#include <thread>
#include <vector>

#include "farey/congruence.hpp"
#include "farey/gap_stats.hpp"
#include "farey/rng.hpp"

namespace farey {

/// An orbit exceeded its step budget before returning to the subset.
class truncation_error : public std::runtime_error {
public:
    truncation_error(const std::string& what, double partial_time, i64 steps)
        : std::runtime_error(what), partial_time(partial_time), steps(steps) {}
    double partial_time;
    i64 steps;
};

constexpr i64 kDefaultMaxSteps = 1'000'000;
constexpr double kFloorGuard = 1e-12;  // distance to a floor discontinuity that forces a resample

/// Point of the lifted section: triangle coordinates plus the coset label.
struct SectionPoint {
    double a = 1.0;
    double b = 1.0;
    ModMatrix coset;
};

/// First-return time of the base section, 1/(ab).
inline double roof(double a, double b) { return 1.0 / (a * b); }

enum class ReturnStatus { ok, truncated, unstable };

struct StepResult {
    SectionPoint p;
    bool unstable = false;
};

/// One step of the coset-tracked return map: the BCZ map on (a,b) together
/// with coset -> [[K,1],[-1,0]] * coset, K = floor((1+a)/b). Flags points that
/// sit within kFloorGuard of a floor discontinuity; callers resample those.
inline StepResult step_rprime(const SectionPoint& p) {
    double x = (1.0 + p.a) / p.b;
    double k = std::floor(x);
    // near-miss of a floor jump is ambiguous under rounding; an exact hit is not
    bool unstable = (x - k < kFloorGuard && x != k) || (k + 1.0 - x < kFloorGuard);
    double b2 = k * p.b - p.a;
    if (b2 > 1.0) b2 = 1.0;
    ModMatrix km = ModMatrix::reduce(p.coset.m, i64(k), 1, -1, 0);
    return StepResult{SectionPoint{p.b, b2, mat_mul(km, p.coset)}, unstable};
}

struct ReturnSample {
    double time = 0.0;   // accumulated roof values along the visited orbit
    i64 steps = 0;       // number of base-map iterates
    SectionPoint landing;
    ReturnStatus status = ReturnStatus::ok;
};

/// Iterates step_rprime from a point of the sub-section until the coset
/// re-enters M; truncates at max_steps with the partial sum.
inline ReturnSample first_return(const SectionPoint& start, const CosetSubset& M,
                                 i64 max_steps = kDefaultMaxSteps) {
    if (!M.contains(start.coset))
        throw std::domain_error("first_return: start coset not in the subset");
    ReturnSample out;
    SectionPoint cur = start;
    for (;;) {
        out.time += roof(cur.a, cur.b);
        StepResult st = step_rprime(cur);
        ++out.steps;
        cur = st.p;
        if (st.unstable) {
            out.landing = cur;
            out.status = ReturnStatus::unstable;
            return out;
        }
        if (M.contains(cur.coset)) {
            out.landing = cur;
            return out;
        }
        if (out.steps >= max_steps) {
            out.landing = cur;
            out.status = ReturnStatus::truncated;
            return out;
        }
    }
}

/// Uniform point of the Farey triangle: fold the unit square across u+v = 1.
inline std::pair<double, double> sample_omega(Xoshiro256pp& rng) {
    double u = rng.uniform();
    double v = rng.uniform();
    if (u + v <= 1.0) return {1.0 - u, 1.0 - v};
    return {u, v};
}

/// Uniform point of the lifted sub-section: triangle point plus a coset drawn
/// uniformly from M.
inline SectionPoint sample_section(const CosetSubset& M, Xoshiro256pp& rng) {
    auto [a, b] = sample_omega(rng);
    return SectionPoint{a, b, M.matrix_at(std::size_t(rng.uniform_index(u64(M.count()))))};
}

// ---------------------------------------------------------------------------
// Chunked Monte Carlo driver: fixed 65536-sample chunks, one RNG stream per
// chunk, merged in chunk order. Results do not depend on the thread count.

constexpr i64 kMcChunk = 65536;

template <typename Acc, typename PerChunk, typename Merge>
Acc run_chunked(i64 n_samples, u64 seed, int threads, PerChunk per_chunk, Merge merge) {
    i64 n_chunks = (n_samples + kMcChunk - 1) / kMcChunk;
    std::vector<Acc> parts(static_cast<std::size_t>(n_chunks));
    auto run_chunk = [&](i64 c) {
        i64 count = std::min(kMcChunk, n_samples - c * kMcChunk);
        parts[std::size_t(c)] = per_chunk(stream_seed(seed, u64(c)), count);
    };
    if (threads <= 1 || n_chunks == 1) {
        for (i64 c = 0; c < n_chunks; ++c) run_chunk(c);
    } else {
        std::atomic<i64> next{0};
        std::vector<std::thread> pool;
        int nw = std::min<i64>(threads, n_chunks);
        pool.reserve(std::size_t(nw));
        for (int t = 0; t < nw; ++t)
            pool.emplace_back([&] {
                for (;;) {
                    i64 c = next.fetch_add(1);
                    if (c >= n_chunks) return;
                    run_chunk(c);
                }
            });
        for (auto& th : pool) th.join();
    }
    Acc total{};
    for (auto& p : parts) merge(total, p);
    return total;
}

struct McReturnCdf {
    EmpiricalCDF cdf;
    i64 samples = 0;
    i64 truncated = 0;
    i64 resampled = 0;
};

/**
 * @brief Monte Carlo law of the first-return time over the sub-section.
 *
 * On the Q^2-scale its CDF at c is the predicted revised gap CDF at c; in the
 * mean-gap normalization the prediction at c is this CDF at
 * (pi^2 [G:H] / (3 #M)) * c. Truncated orbits are counted and excluded; more
 * than 0.01% of them is a hard error.
 */
inline McReturnCdf mc_return_cdf(const CosetSubset& M, i64 n_samples, u64 seed, int threads = 1,
                                 i64 max_steps = kDefaultMaxSteps) {
    if (n_samples < 1) throw std::domain_error("mc_return_cdf: need at least one sample");
    struct Part {
        std::vector<double> times;
        i64 truncated = 0;
        i64 resampled = 0;
    };
    Part all = run_chunked<Part>(
        n_samples, seed, threads,
        [&](u64 chunk_seed, i64 count) {
            Part part;
            part.times.reserve(std::size_t(count));
            Xoshiro256pp rng(chunk_seed);
            for (i64 i = 0; i < count; ++i) {
                for (int attempt = 0;; ++attempt) {
                    ReturnSample r = first_return(sample_section(M, rng), M, max_steps);
                    if (r.status == ReturnStatus::ok) {
                        part.times.push_back(r.time);
                        break;
                    }
                    if (r.status == ReturnStatus::truncated || attempt >= 64) {
                        part.truncated++;
                        break;
                    }
                    part.resampled++;
                }
            }
            return part;
        },
        [](Part& total, Part& part) {
            total.times.insert(total.times.end(), part.times.begin(), part.times.end());
            total.truncated += part.truncated;
            total.resampled += part.resampled;
        });
    if (double(all.truncated) > 1e-4 * double(n_samples))
        throw truncation_error("mc_return_cdf: truncation budget exceeded", 0.0, all.truncated);
    if (all.times.empty()) throw truncation_error("mc_return_cdf: no completed orbits", 0.0, all.truncated);
    McReturnCdf out;
    out.cdf = EmpiricalCDF::from_doubles(std::move(all.times));
    out.samples = n_samples;
    out.truncated = all.truncated;
    out.resampled = all.resampled;
    return out;
}

/// Empirical stand-in for the support infimum of the return-time law: the
/// 10^-4 quantile of the sampled times.
inline double support_threshold(const CosetSubset& M, i64 n_samples, u64 seed, int threads = 1,
                                i64 max_steps = kDefaultMaxSteps) {
    return mc_return_cdf(M, n_samples, seed, threads, max_steps).cdf.quantile(1e-4);
}

// ---------------------------------------------------------------------------
// Return-map orbits and the inclusion-exclusion integrand.

/// Iterates x, r_M(x), ..., r_M^k(x) with the cumulative return times
/// T_j = R_M^{(j)}(x); each iterate computed once and reused.
struct Orbit {
    std::vector<double> a_coord;   // a-coordinate of r_M^j, j = 0..k
    std::vector<double> cum_time;  // T_0 = 0, T_j = sum of first j return times
    ReturnStatus status = ReturnStatus::ok;
};

inline Orbit compute_orbit(const SectionPoint& start, const CosetSubset& M, int k,
                           i64 max_steps = kDefaultMaxSteps) {
    Orbit orb;
    orb.a_coord.reserve(std::size_t(k) + 1);
    orb.cum_time.reserve(std::size_t(k) + 1);
    orb.a_coord.push_back(start.a);
    orb.cum_time.push_back(0.0);
    SectionPoint cur = start;
    for (int j = 0; j < k; ++j) {
        ReturnSample r = first_return(cur, M, max_steps);
        if (r.status != ReturnStatus::ok) {
            orb.status = r.status;
            return orb;
        }
        cur = r.landing;
        orb.a_coord.push_back(cur.a);
        orb.cum_time.push_back(orb.cum_time.back() + r.time);
    }
    return orb;
}

namespace detail {
inline void check_js(std::span<const int> js) {
    if (js.empty() || js.front() != 0)
        throw std::domain_error("index list must start at 0");
    for (std::size_t i = 1; i < js.size(); ++i)
        if (js[i] <= js[i - 1]) throw std::domain_error("index list must be strictly increasing");
}
}  // namespace detail

/// True iff the a-coordinate of r_M^{j}(p) is >= t for every j in js.
inline bool h_region_member(const SectionPoint& p, std::span<const int> js, double t,
                            const CosetSubset& M, i64 max_steps = kDefaultMaxSteps) {
    detail::check_js(js);
    Orbit orb = compute_orbit(p, M, js.back(), max_steps);
    if (orb.status != ReturnStatus::ok)
        throw truncation_error("h_region_member: orbit truncated", orb.cum_time.back(),
                               i64(orb.a_coord.size()));
    for (int j : js)
        if (orb.a_coord[std::size_t(j)] < t) return false;
    return true;
}

inline double f_alpha_on_orbit(const Orbit& orb, std::span<const int> js, double alpha) {
    double mn = std::numeric_limits<double>::infinity();
    for (std::size_t s = 0; s < js.size(); ++s) {
        double as = orb.a_coord[std::size_t(js[s])];
        for (std::size_t sp = s; sp < js.size(); ++sp) {
            double asp = orb.a_coord[std::size_t(js[sp])];
            double term = alpha * (1.0 / (as * as) + 1.0 / (asp * asp)) -
                          (orb.cum_time[std::size_t(js[sp])] - orb.cum_time[std::size_t(js[s])]);
            mn = std::min(mn, term);
        }
    }
    return std::max(0.0, mn);
}

/// Inclusion-exclusion integrand: max{0, min over pairs s <= s' in js of
/// alpha * (a_{j_s}^{-2} + a_{j_s'}^{-2}) - (T_{j_s'} - T_{j_s})}.
inline double f_alpha(const SectionPoint& p, std::span<const int> js, double alpha,
                      const CosetSubset& M, i64 max_steps = kDefaultMaxSteps) {
    detail::check_js(js);
    if (!(alpha > 0)) throw std::domain_error("f_alpha: alpha must be positive");
    Orbit orb = compute_orbit(p, M, js.back(), max_steps);
    if (orb.status != ReturnStatus::ok)
        throw truncation_error("f_alpha: orbit truncated", orb.cum_time.back(),
                               i64(orb.a_coord.size()));
    return f_alpha_on_orbit(orb, js, alpha);
}

// ---------------------------------------------------------------------------
// Exact twin of the return map at Farey points, used to anchor the float path.

/// Section point with exact triangle coordinates (qa/Q, qb/Q).
struct SectionPointExact {
    i64 qa = 1;
    i64 qb = 1;
    ModMatrix coset;
};

/// W-point of a consecutive Farey pair: (q/Q, q2/Q) with the attached coset.
inline SectionPointExact w_point(const FareyPairState& s, i64 m) {
    return SectionPointExact{s.q, s.q2, w_matrix(s, m)};
}

struct ReturnSampleExact {
    Rat time{0};
    i64 steps = 0;
    SectionPointExact landing;
};

/// Exact-rational first return: accumulates Q^2/(qa*qb) along the orbit until
/// the coset re-enters M. At W-points the result equals the Q^2-scaled gap to
/// the next retained fraction, as an identity of rationals.
inline ReturnSampleExact first_return_exact(const SectionPointExact& start, const CosetSubset& M,
                                            i64 Q, i64 max_steps = kDefaultMaxSteps) {
    if (!M.contains(start.coset))
        throw std::domain_error("first_return_exact: start coset not in the subset");
    ReturnSampleExact out;
    SectionPointExact cur = start;
    for (;;) {
        out.time += Rat::make(i128(Q) * Q, i128(cur.qa) * cur.qb);
        i64 k = (Q + cur.qa) / cur.qb;
        ModMatrix km = ModMatrix::reduce(cur.coset.m, k, 1, -1, 0);
        cur = SectionPointExact{cur.qb, k * cur.qb - cur.qa, mat_mul(km, cur.coset)};
        ++out.steps;
        if (M.contains(cur.coset)) {
            out.landing = cur;
            return out;
        }
        if (out.steps >= max_steps)
            throw truncation_error("first_return_exact: step budget exceeded", out.time.value(),
                                   out.steps);
    }
}

}  // namespace farey
