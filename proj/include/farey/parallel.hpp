#pragma once

#include <atomic>
#include <thread>
#include <vector>

#include "farey/subset_stream.hpp"

namespace farey {

// Interval-partitioned sweeps. The shard grid is fixed (independent of the
// worker count), workers pull shards, and partial results are merged in shard
// order, so results are identical for any --threads value.

constexpr int kSweepShards = 64;

/// Cut points x1 + (x2-x1) * k / shards, exact.
inline std::vector<Rat> shard_cuts(const Rat& x1, const Rat& x2, int shards) {
    std::vector<Rat> cuts;
    cuts.reserve(std::size_t(shards) + 1);
    Rat width = x2 - x1;
    for (int k = 0; k <= shards; ++k)
        cuts.push_back(x1 + Rat::make(i128(width.num) * k, i128(width.den) * shards));
    return cuts;
}

template <typename Acc, typename ShardFn>
std::vector<Acc> run_interval_shards(const Rat& x1, const Rat& x2, int threads, ShardFn fn,
                                     int shards = kSweepShards) {
    if (threads <= 1) shards = 1;
    std::vector<Rat> cuts = shard_cuts(x1, x2, shards);
    std::vector<Acc> parts(static_cast<std::size_t>(shards));
    auto run = [&](int k) { parts[std::size_t(k)] = fn(cuts[std::size_t(k)], cuts[std::size_t(k) + 1], k + 1 == shards); };
    if (threads <= 1) {
        run(0);
    } else {
        std::atomic<int> next{0};
        std::vector<std::thread> pool;
        int nw = std::min(threads, shards);
        pool.reserve(std::size_t(nw));
        for (int t = 0; t < nw; ++t)
            pool.emplace_back([&] {
                for (;;) {
                    int k = next.fetch_add(1);
                    if (k >= shards) return;
                    run(k);
                }
            });
        for (auto& th : pool) th.join();
    }
    return parts;
}

/// count_subset over interval shards: fractions counted in [lo, hi) (last
/// shard closed), gap records assigned to the shard of their left fraction.
inline SubsetCount parallel_count_subset(i64 Q, const Rat& x1, const Rat& x2, const CosetSubset& M,
                                         int threads) {
    auto parts = run_interval_shards<SubsetCount>(
        x1, x2, threads, [&](const Rat& lo, const Rat& hi, bool last) {
            SubsetCount acc;
            SubsetStream s(Q, lo, x2, M);
            std::optional<RetainedFraction> prev;
            while (auto r = s.next()) {
                if (r->beta < hi || (last && r->beta == hi)) ++acc.count;
                if (prev) acc.max_gap = rat_max(acc.max_gap, r->beta - prev->beta);
                if (r->beta >= hi) break;  // one lookahead past the cut closes the boundary pair
                prev = r;
            }
            return acc;
        });
    SubsetCount total;
    for (auto& p : parts) {
        total.count += p.count;
        total.max_gap = rat_max(total.max_gap, p.max_gap);
    }
    return total;
}

/// Revised-scale gap samples (Q^2 * gap) over interval shards, concatenated in
/// shard order; exactly one sample per consecutive retained pair.
inline std::vector<Rat> parallel_collect_revised(i64 Q, const Rat& x1, const Rat& x2,
                                                 const CosetSubset& M, int threads) {
    using Samples = std::vector<Rat>;
    auto parts = run_interval_shards<Samples>(
        x1, x2, threads, [&](const Rat& lo, const Rat& hi, bool) {
            Samples acc;
            SubsetStream s(Q, lo, x2, M);
            std::optional<RetainedFraction> prev;
            while (auto r = s.next()) {
                if (prev) acc.push_back(make_gap_record(prev->beta, r->beta, Q).scaled_gap);
                if (r->beta >= hi) break;
                prev = r;
            }
            return acc;
        });
    std::size_t n = 0;
    for (auto& p : parts) n += p.size();
    std::vector<Rat> all;
    all.reserve(n);
    for (auto& p : parts) all.insert(all.end(), p.begin(), p.end());
    return all;
}

}  // namespace farey
