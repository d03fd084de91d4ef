#include <cmath>

#include "doctest.h"
#include "farey/gap_stats.hpp"
#include "farey/rng.hpp"
#include "support/oracles.hpp"

using namespace farey;

namespace {

CosetSubset den1(i64 m) {
    std::vector<std::pair<i64, i64>> ps;
    for (i64 a = 0; a < m; ++a) ps.emplace_back(a, 1 % m);
    return from_residue_pairs(ResiduePairSet(m, std::move(ps)), "den=1");
}

std::vector<SubsetGapRecord> records_of(std::vector<Rat> points, i64 Q) {
    std::vector<SubsetGapRecord> recs;
    for (std::size_t i = 0; i + 1 < points.size(); ++i)
        recs.push_back(make_gap_record(points[i], points[i + 1], Q));
    return recs;
}

}  // namespace

TEST_CASE("gap_distribution on tiny point sets") {
    auto recs = records_of({Rat(0), Rat(1, 2), Rat(1)}, 1);
    auto cdf = gap_distribution(recs, Rat(1));
    CHECK(cdf.eval(0.999) == 0.0);
    CHECK(cdf.eval(1.0) == 1.0);  // both normalized gaps equal 1

    recs = records_of({Rat(0), Rat(1, 4), Rat(1)}, 1);
    cdf = gap_distribution(recs, Rat(1));
    CHECK(cdf.eval(1.0) == 0.5);  // normalized gaps 1/2 and 3/2
    CHECK(cdf.eval(1.5) == 1.0);

    CHECK_THROWS_AS(gap_distribution({}, Rat(1)), std::domain_error);
}

TEST_CASE("gap_distribution of the full F(5)") {
    auto all1 = parse_subset_spec("all", 1);
    auto recs = collect_gap_records(5, Rat(0), Rat(1), all1);
    auto cdf = gap_distribution(recs, Rat(1));
    CHECK(cdf.n() == 10);
    CHECK(cdf.min() == doctest::Approx(0.5));  // 10 * (1/20) / 1
}

TEST_CASE("revised gap cdf stores exact Q^2-scaled gaps") {
    auto all1 = parse_subset_spec("all", 1);
    auto recs = collect_gap_records(5, Rat(0), Rat(1), all1);
    auto cdf = revised_gap_cdf(recs, 5);
    CHECK(cdf.min() == doctest::Approx(1.25));

    auto recs3 = collect_gap_records(5, Rat(0), Rat(1), den1(3));
    auto cdf3 = revised_gap_cdf(recs3, 5);
    CHECK(cdf3.min() == doctest::Approx(25.0 / 4));
    CHECK(cdf3.max() == doctest::Approx(25.0 / 2));
}

TEST_CASE("revised gaps never fall below 1; strictly above for Q >= 2") {
    auto all1 = parse_subset_spec("all", 1);
    for (i64 Q : {1, 2, 3, 10, 100}) {
        i64 bad = 0;
        for (const auto& r : collect_gap_records(Q, Rat(0), Rat(1), all1)) {
            if (r.scaled_gap < Rat(1)) ++bad;
            if (Q >= 2 && !(r.scaled_gap > Rat(1))) ++bad;
        }
        CHECK(bad == 0);
    }
}

TEST_CASE("revised and unrevised normalizations agree through the scale map") {
    auto odd = from_residue_pairs(ResiduePairSet(2, {{0, 1}, {1, 1}}), "odd den");
    const i64 Q = 60;
    auto recs = collect_gap_records(Q, Rat(0), Rat(1), odd);
    Rat span = recs.back().beta_next - recs.front().beta;
    auto unrevised = gap_distribution(recs, span);
    auto revised = revised_gap_cdf(recs, Q);
    double n = double(recs.size());
    for (double xi : {0.3, 0.7, 1.0, 1.4, 2.5}) {
        double mapped = xi * span.value() * double(Q) * double(Q) / n;
        CHECK(unrevised.eval(xi) == doctest::Approx(revised.eval(mapped)).epsilon(1e-12));
    }
}

TEST_CASE("empirical CDF is monotone with unit mass at the top sample") {
    Xoshiro256pp rng(7);
    std::vector<Rat> samples;
    for (int i = 0; i < 500; ++i) samples.emplace_back(i64(rng.uniform_index(1000)), i64(1 + rng.uniform_index(60)));
    auto cdf = EmpiricalCDF::from_rats(samples);
    CHECK(cdf.eval(cdf.max()) == 1.0);
    double prev = -1.0;
    for (double x = 0.0; x < 20.0; x += 0.37) {
        double v = cdf.eval(x);
        CHECK(v >= prev);
        CHECK(v >= 0.0);
        CHECK(v <= 1.0);
        prev = v;
    }
}

TEST_CASE("repulsion predictions for the q = 1 (mod m) family") {
    CHECK(predicted_repulsion_unrevised(1) == doctest::Approx(0.30396).epsilon(1e-4));
    CHECK(predicted_repulsion_unrevised(3) == doctest::Approx(0.11398).epsilon(1e-4));
    CHECK(predicted_repulsion_unrevised(6) == doctest::Approx(0.07599).epsilon(1e-4));

    auto est = repulsion_from_stream(500, Rat(0), Rat(1), parse_subset_spec("all", 1));
    CHECK(est.predicted.has_value());
    CHECK(est.min_revised_gap == doctest::Approx(500.0 / 499.0));

    auto est3 = repulsion_from_stream(500, Rat(0), Rat(1), den1(3));
    CHECK(est3.predicted.has_value());
    CHECK(*est3.predicted == doctest::Approx(0.11398).epsilon(1e-4));
    CHECK(est3.min_revised_gap >= 1.0);

    auto estn = repulsion_from_stream(200, Rat(0), Rat(1), parse_subset_spec("num!=0", 3));
    CHECK_FALSE(estn.predicted.has_value());
}

TEST_CASE("minimum revised gap settles toward 1 for the full sequence") {
    double prev = repulsion_from_stream(100, Rat(0), Rat(1), parse_subset_spec("all", 1)).min_revised_gap;
    for (i64 Q : {200, 400, 800}) {
        double cur = repulsion_from_stream(Q, Rat(0), Rat(1), parse_subset_spec("all", 1)).min_revised_gap;
        CHECK(cur <= prev + 1.0 / double(Q / 2));
        prev = cur;
    }
    CHECK(std::abs(repulsion_from_stream(2000, Rat(0), Rat(1), parse_subset_spec("all", 1)).min_revised_gap - 1.0) < 0.05);
}

TEST_CASE("h-spacings windows") {
    auto all1 = parse_subset_spec("all", 1);
    auto fracs = collect_subset(5, Rat(0), Rat(1), all1);
    std::vector<Fraction> points;
    for (auto& r : fracs) points.push_back(r.beta);

    auto h2 = h_spacings(points, 2, 5);
    REQUIRE(h2.rows() == 9);
    CHECK(h2.row(0)[0] == doctest::Approx(5.0));
    CHECK(h2.row(0)[1] == doctest::Approx(1.25));

    // h = 1 reduces to the revised gap samples
    auto h1 = h_spacings(points, 1, 5);
    auto recs = collect_gap_records(5, Rat(0), Rat(1), all1);
    REQUIRE(h1.rows() == recs.size());
    for (std::size_t i = 0; i < recs.size(); ++i)
        CHECK(h1.row(i)[0] == doctest::Approx(recs[i].scaled_gap.value()));

    // generic three-point set at Q = 1
    std::vector<Fraction> tiny{Rat(0), Rat(1, 2), Rat(1)};
    auto ht = h_spacings(tiny, 2, 1);
    REQUIRE(ht.rows() == 1);
    CHECK(ht.row(0)[0] == doctest::Approx(0.5));
    CHECK(ht.row(0)[1] == doctest::Approx(0.5));

    // too few points: empty
    CHECK(h_spacings(tiny, 3, 1).rows() == 0);
}

TEST_CASE("numerator histogram frequencies") {
    auto all1 = parse_subset_spec("all", 1);
    auto recs = collect_gap_records(40, Rat(0), Rat(1), all1);
    auto freq = numerator_histogram(recs);
    REQUIRE(freq.size() == 1);
    CHECK(freq.at(1) == 1.0);

    auto recs3 = collect_gap_records(5, Rat(0), Rat(1), den1(3));
    auto freq3 = numerator_histogram(recs3);
    CHECK(freq3.at(1) == doctest::Approx(2.0 / 3));
    CHECK(freq3.at(8) == doctest::Approx(1.0 / 3));

    // odd-denominator subset at Q = 12: every key >= 1, mass sums to 1;
    // both parities occur (1/11 -> 1/9 skips only 1/10, giving c3 = 2)
    auto odd = from_residue_pairs(ResiduePairSet(2, {{0, 1}, {1, 1}}), "odd den");
    auto recso = collect_gap_records(12, Rat(0), Rat(1), odd);
    auto freqo = numerator_histogram(recso);
    double total = 0.0;
    for (auto [k, f] : freqo) {
        CHECK(k >= 1);
        total += f;
    }
    CHECK(freqo.count(2) == 1);
    CHECK(total == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("equidistribution reports") {
    auto all1 = parse_subset_spec("all", 1);
    auto rep = equidistribution_report(1, all1, 2);
    CHECK(rep.counts == std::vector<i64>{1, 1});

    rep = equidistribution_report(1000, all1, 10);
    CHECK(rep.max_rel_deviation < 0.01);

    auto rep3 = equidistribution_report(2000, den1(3), 4);
    CHECK(rep3.max_rel_deviation < 0.05);
}

TEST_CASE("histogram normalizations") {
    auto h = Histogram::uniform(0.0, 10.0, 20);
    Xoshiro256pp rng(99);
    for (int i = 0; i < 10000; ++i) h.add(10.0 * rng.uniform());
    CHECK(h.total() == 10000);
    double mass = 0.0, density_integral = 0.0;
    for (std::size_t i = 0; i < h.counts.size(); ++i) {
        mass += h.bin_value(i, Histogram::Norm::probability);
        density_integral += h.bin_value(i, Histogram::Norm::density) * (h.edges[i + 1] - h.edges[i]);
    }
    CHECK(mass == doctest::Approx(1.0));
    CHECK(density_integral == doctest::Approx(1.0));
}
