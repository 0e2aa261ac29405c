#include <algorithm>
#include <random>
#include <string>
#include <vector>

#include "doctest.h"
#include "mra/feedback.hpp"

using namespace mra;
using namespace mra::feedback;

namespace {

ConstantWeightMessage make_msg(int n, const std::vector<int>& ones) {
    ConstantWeightMessage m;
    m.n = n;
    m.w = static_cast<int>(ones.size());
    m.bits.assign(n, 0);
    for (int i : ones) m.bits[i] = 1;
    return m;
}

}  // namespace

TEST_CASE("rank boundary sequences") {
    // smallest: ones packed at the end; largest: ones first
    auto smallest = make_msg(12, {8, 9, 10, 11});
    auto largest = make_msg(12, {0, 1, 2, 3});
    CHECK(rank(smallest) == 0);
    mpz_class total;
    mpz_bin_uiui(total.get_mpz_t(), 12, 4);
    CHECK(rank(largest) == total - 1);
}

TEST_CASE("exhaustive roundtrip over all C(12,4) sequences") {
    // enumerate-and-sort oracle: lexicographic order of the bit strings
    std::vector<std::string> all;
    for (int mask = 0; mask < (1 << 12); ++mask) {
        if (std::popcount(static_cast<unsigned>(mask)) != 4) continue;
        std::string s(12, '0');
        for (int i = 0; i < 12; ++i) {
            if ((mask >> i) & 1) s[i] = '1';
        }
        all.push_back(s);
    }
    std::sort(all.begin(), all.end());
    REQUIRE(all.size() == 495);
    for (size_t r = 0; r < all.size(); ++r) {
        ConstantWeightMessage m;
        m.n = 12;
        m.w = 4;
        m.bits.assign(12, 0);
        for (int i = 0; i < 12; ++i) m.bits[i] = all[r][i] == '1';
        CHECK(rank(m) == static_cast<long>(r));
        auto back = unrank(12, 4, static_cast<long>(r));
        CHECK(back.bits == m.bits);
    }
}

TEST_CASE("random large roundtrips") {
    std::mt19937_64 rng(99);
    mpz_class total;
    mpz_bin_uiui(total.get_mpz_t(), 6300, 100);
    gmp_randclass grng(gmp_randinit_mt);
    grng.seed(12345u);
    for (int trial = 0; trial < 200; ++trial) {
        mpz_class r = grng.get_z_range(total);
        auto msg = unrank(6300, 100, r);
        CHECK(msg.w == 100);
        CHECK(rank(msg) == r);
    }
}

TEST_CASE("unrank rejects out-of-range ranks") {
    mpz_class total;
    mpz_bin_uiui(total.get_mpz_t(), 10, 3);
    CHECK_THROWS_AS(unrank(10, 3, total), std::out_of_range);
    CHECK_THROWS_AS(unrank(10, 3, mpz_class(-1)), std::out_of_range);
    CHECK_NOTHROW(unrank(10, 3, total - 1));
}

TEST_CASE("feedback_bits") {
    CHECK(feedback_bits(2, 2, 2) == 3);   // C(4,2) = 6 -> 3 bits
    CHECK(feedback_bits(2, 2, 4) == 0);   // single sequence
    CHECK(feedback_bits(4, 4, 0) == 0);
    CHECK(feedback_bits(8, 2, 8) == 14);  // 2^13 < C(16,8) = 12870 <= 2^14
    CHECK_THROWS_AS(feedback_bits(2, 2, 5), std::invalid_argument);
}

TEST_CASE("feedback_bits matches the arbitrary-precision binomial") {
    struct Row {
        int V, n_p, Ka;
    };
    for (const Row row : {Row{448, 15, 50}, Row{420, 15, 100}, Row{488, 15, 150},
                          Row{518, 15, 200}, Row{548, 15, 250}, Row{362, 31, 300}}) {
        mpz_class binom;
        mpz_bin_uiui(binom.get_mpz_t(), static_cast<long>(row.V) * row.n_p, row.Ka);
        const int kf = feedback_bits(row.V, row.n_p, row.Ka);
        // 2^(kf-1) < C <= 2^kf
        mpz_class hi = 1;
        hi <<= kf;
        mpz_class lo = 1;
        lo <<= kf - 1;
        CHECK(binom <= hi);
        CHECK(binom > lo);
        // smooth surrogate is close in relative terms
        const double relaxed =
            feedback_bits_relaxed(static_cast<double>(row.V) * row.n_p, row.Ka);
        CHECK(std::abs(relaxed - kf) < 1.0);
    }
}

TEST_CASE("user_find_slot") {
    op::OccupancyEstimate est;
    est.V = 4;
    est.n_p = 3;
    est.s_hat.assign(12, 0);

    SUBCASE("single occupied position gets slot 1") {
        est.s_hat[op::flatten({2, 2}, 4) - 1] = 1;
        est.assignment = {op::flatten({2, 2}, 4)};
        CHECK(user_find_slot(est, {2, 2}).value() == 1);
        CHECK_FALSE(user_find_slot(est, {1, 1}).has_value());
    }

    SUBCASE("slot index equals one plus the count of smaller occupied s") {
        std::mt19937_64 rng(3);
        for (int trial = 0; trial < 50; ++trial) {
            std::fill(est.s_hat.begin(), est.s_hat.end(), 0);
            est.assignment.clear();
            for (long pos = 0; pos < 12; ++pos) {
                if (rng() & 1) {
                    est.s_hat[pos] = 1;
                    est.assignment.push_back(pos + 1);
                }
            }
            for (long pos = 0; pos < 12; ++pos) {
                op::Identity id = op::unflatten(pos + 1, 4);
                auto slot = user_find_slot(est, id);
                if (!est.s_hat[pos]) {
                    CHECK_FALSE(slot.has_value());
                    continue;
                }
                int smaller = 0;
                for (long q = 0; q < pos; ++q) smaller += est.s_hat[q];
                CHECK(slot.value() == smaller + 1);
            }
        }
    }
}

TEST_CASE("payload bytes roundtrip") {
    mpz_class r("123456789012345678901234567890");
    const int kf = 100;
    auto bytes = payload_bytes(r, kf);
    CHECK(bytes.size() == (100 + 7) / 8);
    CHECK(payload_value(bytes) == r);
    CHECK_THROWS_AS(payload_bytes(r, 8), std::invalid_argument);
}
