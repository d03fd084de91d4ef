#pragma once

#include <deque>
#include <span>
#include <vector>

#include "farey/section_dynamics.hpp"
#include "farey/subset_stream.hpp"

namespace farey {

struct Interval {
    Rat lo{0};
    Rat hi{0};
    Rat length() const { return hi - lo; }
};

/**
 * @brief Sorted union of pairwise-disjoint closed intervals; touching
 * intervals are merged on insertion. Carrier of the approximation sets.
 */
class IntervalUnion {
public:
    void insert(Interval j) {
        if (j.hi < j.lo) throw std::domain_error("IntervalUnion: inverted interval");
        auto pos = std::lower_bound(parts_.begin(), parts_.end(), j,
                                    [](const Interval& a, const Interval& b) { return a.lo < b.lo; });
        // absorb overlapping/touching neighbors on both sides
        auto first = pos;
        while (first != parts_.begin() && std::prev(first)->hi >= j.lo) --first;
        auto last = pos;
        while (last != parts_.end() && last->lo <= j.hi) ++last;
        if (first != last) {
            j.lo = rat_min(j.lo, first->lo);
            j.hi = rat_max(j.hi, std::prev(last)->hi);
        }
        auto at = parts_.erase(first, last);
        parts_.insert(at, j);
    }

    void intersect(const Interval& window) {
        std::vector<Interval> out;
        out.reserve(parts_.size());
        for (const auto& p : parts_) {
            Rat lo = rat_max(p.lo, window.lo);
            Rat hi = rat_min(p.hi, window.hi);
            if (lo <= hi) out.push_back(Interval{lo, hi});
        }
        parts_ = std::move(out);
    }

    Rat measure() const {
        Rat total{0};
        for (const auto& p : parts_) total += p.hi - p.lo;
        return total;
    }

    /// Sum of exactly-computed part lengths, one float conversion per part.
    /// Usable at scales where the reduced exact total no longer fits 64 bits.
    double measure_value() const {
        double total = 0.0;
        for (const auto& p : parts_) total += (p.hi - p.lo).value();
        return total;
    }

    std::span<const Interval> parts() const { return parts_; }
    bool empty() const { return parts_.empty(); }
    std::size_t size() const { return parts_.size(); }

    friend bool operator==(const IntervalUnion& a, const IntervalUnion& b) {
        if (a.parts_.size() != b.parts_.size()) return false;
        for (std::size_t i = 0; i < a.parts_.size(); ++i)
            if (!(a.parts_[i].lo == b.parts_[i].lo && a.parts_[i].hi == b.parts_[i].hi)) return false;
        return true;
    }

private:
    std::vector<Interval> parts_;
};

inline Rat measure(const IntervalUnion& u) { return u.measure(); }

/**
 * @brief Parameters of one approximation set: fractions of F_M(floor(n*c))
 * with q >= n, each contributing [a/q - alpha/q^2, a/q + alpha/q^2].
 */
struct ESTConfig {
    i64 n = 1;
    Rat alpha{1, 100};
    Rat c{2};
    const CosetSubset* M = nullptr;
    Interval I{Rat(0), Rat(1)};

    i64 order() const {  // Q = floor(n * c)
        return i64((i128(c.num) * n) / c.den);
    }

    void validate() const {
        if (n < 1) throw std::domain_error("ESTConfig: n must be >= 1");
        if (!(alpha > Rat(0))) throw std::domain_error("ESTConfig: alpha must be positive");
        if (c < Rat(1)) throw std::domain_error("ESTConfig: c must be >= 1");
        if (M == nullptr) throw std::domain_error("ESTConfig: missing subset");
        if (I.lo < Rat(0) || I.hi > Rat(1) || I.hi < I.lo)
            throw std::domain_error("ESTConfig: I must be a subinterval of [0,1]");
        if (order() < 1) throw std::domain_error("ESTConfig: floor(n*c) < 1");
    }
};

namespace detail {

inline Interval approx_interval(const Fraction& beta, const Rat& alpha) {
    Rat half = Rat::make(i128(alpha.num), i128(alpha.den) * beta.den * beta.den);
    Rat lo = beta - half;
    Rat hi = beta + half;
    if (lo < Rat(0)) lo = Rat(0);
    if (hi > Rat(1)) hi = Rat(1);
    return Interval{lo, hi};
}

}  // namespace detail

/// Exact union of the approximation intervals over [0,1], intersected with I.
/// Prefer est_lambda for large n; this materializes every merged run.
inline IntervalUnion build_est_union(const ESTConfig& cfg) {
    cfg.validate();
    const i64 Q = cfg.order();
    SubsetStream stream(Q, Rat(0), Rat(1), *cfg.M);
    IntervalUnion u;
    while (auto r = stream.next()) {
        if (r->beta.den < cfg.n) continue;
        u.insert(detail::approx_interval(r->beta, cfg.alpha));
    }
    u.intersect(cfg.I);
    return u;
}

struct EstLambda {
    double lambda = 0.0;       // Lebesgue measure of I ∩ S
    double lambda_full = 0.0;  // measure of the full set S over [0,1]
    i64 retained = 0;
};

/**
 * @brief Streaming measure of the approximation set.
 *
 * Merged runs are sealed once no future interval can reach them (every
 * half-width is at most alpha/n^2), their lengths computed exactly and
 * converted to binary64 only when added to the accumulator. Memory stays
 * bounded regardless of n.
 */
inline EstLambda est_lambda(const ESTConfig& cfg) {
    cfg.validate();
    const i64 Q = cfg.order();
    const Rat reach = Rat::make(i128(cfg.alpha.num), i128(cfg.alpha.den) * cfg.n * cfg.n);
    SubsetStream stream(Q, Rat(0), Rat(1), *cfg.M);
    std::deque<Interval> open;
    EstLambda out;

    auto seal = [&](const Interval& run) {
        out.lambda_full += run.length().value();
        Rat lo = rat_max(run.lo, cfg.I.lo);
        Rat hi = rat_min(run.hi, cfg.I.hi);
        if (lo < hi) out.lambda += (hi - lo).value();
    };

    while (auto r = stream.next()) {
        if (r->beta.den < cfg.n) continue;
        ++out.retained;
        Interval j = detail::approx_interval(r->beta, cfg.alpha);
        while (!open.empty() && open.back().hi >= j.lo) {
            j.lo = rat_min(j.lo, open.back().lo);
            j.hi = rat_max(j.hi, open.back().hi);
            open.pop_back();
        }
        open.push_back(j);
        Rat horizon = r->beta - reach;
        while (open.size() > 1 && open.front().hi < horizon) {
            seal(open.front());
            open.pop_front();
        }
    }
    for (const auto& run : open) seal(run);
    return out;
}

struct ConvergenceRow {
    i64 n = 0;
    double lambda = 0.0;
    double delta = 0.0;  // |lambda - previous lambda|
};

struct ConvergenceTable {
    std::vector<ConvergenceRow> rows;
    double limit_estimate = 0.0;  // value at the largest n
    double last_delta = 0.0;
};

inline ConvergenceTable est_convergence(const Rat& alpha, const Rat& c, const CosetSubset& M,
                                        const Interval& I, std::span<const i64> n_grid) {
    if (n_grid.empty()) throw std::domain_error("est_convergence: empty n grid");
    ConvergenceTable table;
    double prev = 0.0;
    for (std::size_t i = 0; i < n_grid.size(); ++i) {
        ESTConfig cfg{n_grid[i], alpha, c, &M, I};
        double lam = est_lambda(cfg).lambda;
        table.rows.push_back({n_grid[i], lam, i == 0 ? 0.0 : std::abs(lam - prev)});
        prev = lam;
    }
    table.limit_estimate = table.rows.back().lambda;
    table.last_delta = table.rows.back().delta;
    return table;
}

/**
 * @brief Largest observed index separation j such that the approximation
 * intervals of beta_i and beta_{i+j} (both with q >= n) intersect; the
 * empirical overlap depth used to cut off the inclusion-exclusion sum.
 */
inline i64 detect_overlap_depth(const Rat& alpha, const Rat& c, const CosetSubset& M, i64 n) {
    ESTConfig cfg{n, alpha, c, &M, Interval{Rat(0), Rat(1)}};
    cfg.validate();
    const i64 Q = cfg.order();
    const Rat reach = Rat::make(i128(alpha.num), i128(alpha.den) * n * n);
    SubsetStream stream(Q, Rat(0), Rat(1), M);
    struct Entry {
        i64 idx;
        Rat hi;
    };
    std::deque<Entry> window;
    i64 idx = 0;
    i64 depth = 0;
    while (auto r = stream.next()) {
        if (r->beta.den < n) continue;
        Interval j = detail::approx_interval(r->beta, alpha);
        Rat horizon = r->beta - reach;
        while (!window.empty() && window.front().hi < horizon) window.pop_front();
        for (const auto& e : window)
            if (e.hi >= j.lo) {
                depth = std::max(depth, idx - e.idx);
                break;  // entries are ordered by idx; the first hit is the farthest
            }
        window.push_back({idx, j.hi});
        ++idx;
    }
    return depth;
}

struct SectionMcEstimate {
    double value = 0.0;
    double stderr_ = 0.0;
    i64 truncated = 0;
    i64 samples = 0;
};

/**
 * @brief Monte Carlo evaluation of the limiting measure via the section
 * formula: sample the sub-section uniformly, evaluate the signed
 * inclusion-exclusion sum over index subsets {0} ∪ S, S ⊆ {1..K}, restricted
 * to the region where every visited a-coordinate is >= 1/c, and scale by
 * 3 #M / (pi^2 [G:H]).
 */
inline SectionMcEstimate est_limit_section_mc(const Rat& alpha, const Rat& c, const CosetSubset& M,
                                              int K, i64 n_samples, u64 seed, int threads = 1,
                                              i64 max_steps = kDefaultMaxSteps) {
    if (K < 0 || K > 20) throw std::domain_error("est_limit_section_mc: K out of range");
    if (n_samples < 2) throw std::domain_error("est_limit_section_mc: need at least two samples");
    if (!(alpha > Rat(0)) || c < Rat(1))
        throw std::domain_error("est_limit_section_mc: need alpha > 0 and c >= 1");
    const double a = alpha.value();
    const double t = 1.0 / c.value();

    // index subsets {0} ∪ S as sorted lists, fixed order
    std::vector<std::vector<int>> subsets;
    std::vector<int> signs;
    for (u64 mask = 0; mask < (u64(1) << K); ++mask) {
        std::vector<int> js{0};
        for (int b = 0; b < K; ++b)
            if (mask & (u64(1) << b)) js.push_back(b + 1);
        subsets.push_back(std::move(js));
        signs.push_back(__builtin_popcountll(mask) % 2 == 0 ? 1 : -1);
    }

    struct Part {
        double sum = 0.0;
        double sumsq = 0.0;
        i64 count = 0;
        i64 truncated = 0;
    };
    Part all = run_chunked<Part>(
        n_samples, seed, threads,
        [&](u64 chunk_seed, i64 count) {
            Part part;
            Xoshiro256pp rng(chunk_seed);
            for (i64 i = 0; i < count; ++i) {
                Orbit orb;
                bool have = false;
                for (int attempt = 0; attempt < 64; ++attempt) {
                    orb = compute_orbit(sample_section(M, rng), M, K, max_steps);
                    if (orb.status == ReturnStatus::ok) {
                        have = true;
                        break;
                    }
                    if (orb.status == ReturnStatus::truncated) break;
                }
                if (!have) {
                    part.truncated++;
                    continue;
                }
                double g = 0.0;
                for (std::size_t s = 0; s < subsets.size(); ++s) {
                    const auto& js = subsets[s];
                    bool in_region = true;
                    for (int j : js)
                        if (orb.a_coord[std::size_t(j)] < t) {
                            in_region = false;
                            break;
                        }
                    if (!in_region) continue;
                    g += double(signs[s]) * f_alpha_on_orbit(orb, js, a);
                }
                part.sum += g;
                part.sumsq += g * g;
                part.count++;
            }
            return part;
        },
        [](Part& total, Part& p) {
            total.sum += p.sum;
            total.sumsq += p.sumsq;
            total.count += p.count;
            total.truncated += p.truncated;
        });

    if (double(all.truncated) > 1e-4 * double(n_samples))
        throw truncation_error("est_limit_section_mc: truncation budget exceeded", 0.0,
                               all.truncated);
    const double scale = 3.0 * double(M.count()) / (kPi2 * double(index_gamma(M.m)));
    const double nn = double(all.count);
    const double mean = all.sum / nn;
    const double var = std::max(0.0, (all.sumsq - all.sum * all.sum / nn) / (nn - 1.0));
    SectionMcEstimate out;
    out.value = scale * mean;
    out.stderr_ = scale * std::sqrt(var / nn);
    out.truncated = all.truncated;
    out.samples = all.count;
    return out;
}

}  // namespace farey
