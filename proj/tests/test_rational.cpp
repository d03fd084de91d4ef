#include "doctest.h"
#include "farey/rational.hpp"

using farey::Rat;
using farey::i128;

TEST_CASE("Rat reduces and normalizes sign") {
    CHECK(Rat(2, 4) == Rat(1, 2));
    CHECK(Rat(-2, -4) == Rat(1, 2));
    CHECK(Rat(2, -4) == Rat(-1, 2));
    CHECK(Rat(0, 7) == Rat(0));
    CHECK(Rat(0, -7).den == 1);
}

TEST_CASE("Rat arithmetic is exact") {
    CHECK(Rat(1, 3) + Rat(1, 6) == Rat(1, 2));
    CHECK(Rat(1, 2) - Rat(1, 3) == Rat(1, 6));
    CHECK(Rat(2, 3) * Rat(3, 4) == Rat(1, 2));
    CHECK(Rat(1, 2) / Rat(1, 4) == Rat(2));
    CHECK((-Rat(1, 2)).num == -1);
    // denominators that would overflow naive 64-bit cross products
    Rat a(1, 3037000493LL), b(1, 3037000399LL);
    Rat s = a + b;
    CHECK(s == Rat::make(i128(3037000493LL) + 3037000399LL,
                         i128(3037000493LL) * 3037000399LL));
}

TEST_CASE("Rat comparison is exact near equal values") {
    Rat a(667, 1000), b(2, 3);
    CHECK(b < a);
    CHECK(a > b);
    CHECK(Rat(1, 3) <= Rat(1, 3));
    CHECK(farey::rat_min(a, b) == b);
    CHECK(farey::rat_max(a, b) == a);
}

TEST_CASE("Rat overflow and domain errors") {
    CHECK_THROWS_AS(Rat(1, 0), std::domain_error);
    CHECK_THROWS_AS(Rat(1, 2) / Rat(0), std::domain_error);
    i128 big = i128(1) << 100;
    CHECK_THROWS_AS(Rat::make(1, big), std::overflow_error);
    CHECK_NOTHROW(Rat::make(big, big));  // reduces to 1
}

TEST_CASE("rat_parse accepts p/q, integers and decimals") {
    CHECK(farey::rat_parse("3/10") == Rat(3, 10));
    CHECK(farey::rat_parse("-3/10") == Rat(-3, 10));
    CHECK(farey::rat_parse("2") == Rat(2));
    CHECK(farey::rat_parse("0.25") == Rat(1, 4));
    CHECK(farey::rat_parse("0.5") == Rat(1, 2));
    CHECK(farey::rat_parse("1.0") == Rat(1));
    CHECK_THROWS(farey::rat_parse(""));
}

TEST_CASE("Rat::str prints p/q only when needed") {
    CHECK(Rat(1, 2).str() == "1/2");
    CHECK(Rat(3).str() == "3");
    CHECK(Rat(-1, 2).str() == "-1/2");
}

TEST_CASE("Rat field algebra on random values") {
    farey::u64 state = 0x243f6a8885a308d3ULL;
    auto next = [&state] {
        state ^= state << 13;
        state ^= state >> 7;
        state ^= state << 17;
        return farey::i64(state % 2000) - 1000;
    };
    for (int i = 0; i < 2000; ++i) {
        Rat a(next(), 1 + std::abs(next())), b(next(), 1 + std::abs(next()));
        CHECK((a + b) - b == a);
        CHECK(a + b == b + a);
        CHECK(a * b == b * a);
        if (b.num != 0) CHECK((a / b) * b == a);
        CHECK(a - a == Rat(0));
    }
}
