#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <optional>
#include <span>
#include <vector>

#include "farey/subset_stream.hpp"

namespace farey {

constexpr double kPi2 = 9.869604401089358;  // pi^2

/**
 * @brief Empirical CDF over a sorted sample buffer.
 *
 * eval(x) = #{v <= x} / N, right-continuous and non-decreasing with
 * eval(max sample) = 1. Samples arriving as exact rationals are sorted
 * exactly before the one conversion to binary64.
 */
class EmpiricalCDF {
public:
    EmpiricalCDF() = default;  // empty; populate via from_rats / from_doubles

    static EmpiricalCDF from_rats(std::vector<Rat> samples) {
        if (samples.empty()) throw std::domain_error("EmpiricalCDF: empty sample set");
        std::sort(samples.begin(), samples.end());
        EmpiricalCDF c;
        c.values_.reserve(samples.size());
        for (const auto& r : samples) c.values_.push_back(r.value());
        return c;
    }

    static EmpiricalCDF from_doubles(std::vector<double> samples) {
        if (samples.empty()) throw std::domain_error("EmpiricalCDF: empty sample set");
        std::sort(samples.begin(), samples.end());
        EmpiricalCDF c;
        c.values_ = std::move(samples);
        return c;
    }

    i64 n() const { return i64(values_.size()); }
    double min() const { return values_.front(); }
    double max() const { return values_.back(); }

    double eval(double x) const {
        auto it = std::upper_bound(values_.begin(), values_.end(), x);
        return double(it - values_.begin()) / double(values_.size());
    }

    /// Smallest sample v with eval(v) >= p.
    double quantile(double p) const {
        if (p <= 0) return values_.front();
        auto idx = std::size_t(std::ceil(p * double(values_.size()))) - 1;
        if (idx >= values_.size()) idx = values_.size() - 1;
        return values_[idx];
    }

    const std::vector<double>& values() const { return values_; }

private:
    std::vector<double> values_;
};

struct Histogram {
    enum class Norm { count, probability, density };

    std::vector<double> edges;  // bins+1 increasing edges
    std::vector<i64> counts;

    static Histogram uniform(double lo, double hi, int bins) {
        if (bins < 1 || !(hi > lo)) throw std::domain_error("Histogram: bad bin spec");
        Histogram h;
        h.edges.resize(std::size_t(bins) + 1);
        for (int i = 0; i <= bins; ++i)
            h.edges[std::size_t(i)] = lo + (hi - lo) * double(i) / double(bins);
        h.counts.assign(std::size_t(bins), 0);
        return h;
    }

    void add(double x) {
        if (x < edges.front() || x > edges.back()) return;
        auto it = std::upper_bound(edges.begin(), edges.end(), x);
        std::size_t i = std::size_t(it - edges.begin());
        if (i > 0) --i;
        if (i >= counts.size()) i = counts.size() - 1;
        counts[i]++;
    }

    i64 total() const {
        i64 t = 0;
        for (auto c : counts) t += c;
        return t;
    }

    double bin_value(std::size_t i, Norm norm) const {
        double t = double(total());
        double w = edges[i + 1] - edges[i];
        switch (norm) {
            case Norm::count: return double(counts[i]);
            case Norm::probability: return t > 0 ? double(counts[i]) / t : 0.0;
            case Norm::density: return t > 0 ? double(counts[i]) / (t * w) : 0.0;
        }
        return 0.0;
    }
};

/// Unrevised gap CDF: samples N * (beta_{i+1} - beta_i) / span, the classical
/// mean-gap normalization with span = x_N - x_0.
inline EmpiricalCDF gap_distribution(std::span<const SubsetGapRecord> records, const Rat& span) {
    if (records.empty()) throw std::domain_error("gap_distribution: no gap records");
    if (!(span > Rat(0))) throw std::domain_error("gap_distribution: span must be positive");
    const Rat n{i64(records.size())};
    std::vector<Rat> samples;
    samples.reserve(records.size());
    for (const auto& r : records) samples.push_back((r.beta_next - r.beta) * n / span);
    return EmpiricalCDF::from_rats(std::move(samples));
}

/// Revised gap CDF: samples Q^2 (beta_{i+1} - beta_i), the scale on which the
/// support of the limit law starts at the repulsion constant.
inline EmpiricalCDF revised_gap_cdf(std::span<const SubsetGapRecord> records, i64 /*Q*/) {
    if (records.empty()) throw std::domain_error("revised_gap_cdf: no gap records");
    std::vector<Rat> samples;
    samples.reserve(records.size());
    for (const auto& r : records) samples.push_back(r.scaled_gap);
    return EmpiricalCDF::from_rats(std::move(samples));
}

/// Closed-form smallest normalized gap of the q = 1 (mod m) family, in the
/// mean-gap normalization: 3 / (pi^2 m prod_{p|m} (1 - 1/p^2)).
inline double predicted_repulsion_unrevised(i64 m) {
    // m * prod(1 - 1/p^2) = index_gamma(m) / m^2, exactly
    return 3.0 * double(m) * double(m) / (kPi2 * double(index_gamma(m)));
}

struct RepulsionEstimate {
    double min_revised_gap = 0.0;
    std::optional<double> predicted;  // unrevised scale; set for the q=1 (mod m) family
};

inline RepulsionEstimate repulsion_estimate(std::span<const SubsetGapRecord> records, i64 /*Q*/,
                                            const CosetSubset& M) {
    if (records.empty()) throw std::domain_error("repulsion_estimate: no gap records");
    Rat mn = records.front().scaled_gap;
    for (const auto& r : records) mn = rat_min(mn, r.scaled_gap);
    RepulsionEstimate out;
    out.min_revised_gap = mn.value();
    if (M.den1_family() || M.m == 1) out.predicted = predicted_repulsion_unrevised(M.m);
    return out;
}

inline RepulsionEstimate repulsion_from_stream(i64 Q, const Rat& x1, const Rat& x2,
                                               const CosetSubset& M) {
    SubsetStream s(Q, x1, x2, M);
    GapRecordStream g(s);
    std::optional<Rat> mn;
    while (auto r = g.next()) mn = mn ? rat_min(*mn, r->scaled_gap) : r->scaled_gap;
    if (!mn) throw std::domain_error("repulsion_from_stream: no gap records");
    RepulsionEstimate out;
    out.min_revised_gap = mn->value();
    if (M.den1_family() || M.m == 1) out.predicted = predicted_repulsion_unrevised(M.m);
    return out;
}

/**
 * @brief Consecutive-difference vectors (x_{i+1}-x_i, ..., x_{i+h}-x_{i+h-1})
 * scaled by Q^2, one per window; h = 1 reduces to the revised gap samples.
 */
struct HSpacings {
    int h = 1;
    std::vector<double> flat;  // row-major, rows of length h
    std::size_t rows() const { return h > 0 ? flat.size() / std::size_t(h) : 0; }
    std::span<const double> row(std::size_t i) const {
        return {flat.data() + i * std::size_t(h), std::size_t(h)};
    }
};

inline HSpacings h_spacings(std::span<const Fraction> fractions, int h, i64 Q) {
    if (h < 1) throw std::domain_error("h_spacings: h must be >= 1");
    HSpacings out;
    out.h = h;
    if (i64(fractions.size()) < h + 1) return out;  // too few points: empty
    const Rat scale{Q * Q};
    std::vector<Rat> diffs(fractions.size() - 1);
    for (std::size_t i = 0; i + 1 < fractions.size(); ++i)
        diffs[i] = (fractions[i + 1] - fractions[i]) * scale;
    out.flat.reserve((diffs.size() - std::size_t(h) + 1) * std::size_t(h));
    for (std::size_t i = 0; i + std::size_t(h) <= diffs.size(); ++i)
        for (int j = 0; j < h; ++j) out.flat.push_back(diffs[i + std::size_t(j)].value());
    return out;
}

/// Frequencies of the numerator statistic b*q - a*p over consecutive retained
/// pairs; integer counts accumulated exactly, one division at the end.
inline std::map<i64, double> numerator_histogram(std::span<const SubsetGapRecord> records) {
    if (records.empty()) throw std::domain_error("numerator_histogram: no gap records");
    std::map<i64, i64> counts;
    for (const auto& r : records) counts[r.numerator_diff]++;
    std::map<i64, double> freq;
    for (auto [k, c] : counts) freq[k] = double(c) / double(records.size());
    return freq;
}

struct EquidistReport {
    std::vector<i64> counts;
    double max_rel_deviation = 0.0;
};

/// Counts of the retained fractions in `bins` equal subintervals of [0,1]
/// (last bin closed), plus the largest relative deviation from the mean.
inline EquidistReport equidistribution_report(i64 Q, const CosetSubset& M, int bins) {
    if (bins < 1) throw std::domain_error("equidistribution_report: bins must be >= 1");
    EquidistReport rep;
    rep.counts.assign(std::size_t(bins), 0);
    SubsetStream s(Q, Rat(0), Rat(1), M);
    while (auto r = s.next()) {
        i64 bin = i64((i128(r->beta.num) * bins) / r->beta.den);
        if (bin >= bins) bin = bins - 1;
        rep.counts[std::size_t(bin)]++;
    }
    i64 total = 0;
    for (auto c : rep.counts) total += c;
    double mean = double(total) / double(bins);
    if (mean > 0)
        for (auto c : rep.counts)
            rep.max_rel_deviation = std::max(rep.max_rel_deviation, std::abs(double(c) - mean) / mean);
    return rep;
}

}  // namespace farey
