#pragma once

#include <optional>
#include <vector>

#include "farey/congruence.hpp"
#include "farey/farey_core.hpp"

namespace farey {

struct RetainedFraction {
    Fraction beta;
    FareyPairState state;  // successor in F(Q) and the attached coset are recoverable
};

/**
 * @brief Streams the fractions of F(Q) in [x1, x2] retained by the coset
 * subset, in increasing order.
 */
class SubsetStream {
public:
    SubsetStream(i64 Q, const Rat& x1, const Rat& x2, const CosetSubset& M)
        : stream_(Q, x1, x2), subset_(&M) {}

    std::optional<RetainedFraction> next() {
        while (auto s = stream_.next()) {
            if (membership(*s, *subset_)) return RetainedFraction{s->frac(), *s};
        }
        return std::nullopt;
    }

    i64 order() const { return stream_.order(); }

private:
    FareyStream stream_;
    const CosetSubset* subset_;
};

/**
 * @brief One consecutive retained pair beta < beta_next with its exact
 * Q^2-scaled gap and the numerator difference b*q - a*p.
 */
struct SubsetGapRecord {
    Fraction beta;
    Fraction beta_next;
    Rat scaled_gap;       // Q^2 (beta_next - beta), exact
    i64 numerator_diff;   // b*q - a*p >= 1
};

inline SubsetGapRecord make_gap_record(const Fraction& beta, const Fraction& beta_next, i64 Q) {
    i128 c3 = i128(beta_next.num) * beta.den - i128(beta.num) * beta_next.den;
    Rat scaled = Rat::make(i128(Q) * Q * c3, i128(beta.den) * beta_next.den);
    return SubsetGapRecord{beta, beta_next, scaled, i64(c3)};
}

/// Pairs up consecutive retained fractions; N records for N+1 fractions.
class GapRecordStream {
public:
    explicit GapRecordStream(SubsetStream& src) : src_(&src) { prev_ = src_->next(); }

    std::optional<SubsetGapRecord> next() {
        if (!prev_) return std::nullopt;
        auto cur = src_->next();
        if (!cur) return std::nullopt;
        SubsetGapRecord rec = make_gap_record(prev_->beta, cur->beta, src_->order());
        prev_ = cur;
        return rec;
    }

private:
    SubsetStream* src_;
    std::optional<RetainedFraction> prev_;
};

inline std::vector<RetainedFraction> collect_subset(i64 Q, const Rat& x1, const Rat& x2,
                                                    const CosetSubset& M) {
    SubsetStream s(Q, x1, x2, M);
    std::vector<RetainedFraction> out;
    while (auto r = s.next()) out.push_back(*r);
    return out;
}

inline std::vector<SubsetGapRecord> collect_gap_records(i64 Q, const Rat& x1, const Rat& x2,
                                                        const CosetSubset& M) {
    SubsetStream s(Q, x1, x2, M);
    GapRecordStream g(s);
    std::vector<SubsetGapRecord> out;
    while (auto r = g.next()) out.push_back(*r);
    return out;
}

struct SubsetCount {
    i64 count = 0;
    Rat max_gap{0};  // largest unscaled gap between consecutive retained fractions
};

inline SubsetCount count_subset(i64 Q, const Rat& x1, const Rat& x2, const CosetSubset& M) {
    SubsetStream s(Q, x1, x2, M);
    SubsetCount out;
    std::optional<RetainedFraction> prev;
    while (auto r = s.next()) {
        ++out.count;
        if (prev) out.max_gap = rat_max(out.max_gap, r->beta - prev->beta);
        prev = r;
    }
    return out;
}

}  // namespace farey
