#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <set>

#include "doctest.h"
#include "mra/op_phase.hpp"
#include "mra/rng.hpp"

using namespace mra;
using namespace mra::op;

namespace {

SchemeParams small_params(double P = 0.05, int V = 6) {
    SchemeParams p;
    p.k_p = 5;
    p.n_p = 15;
    p.d = 7;
    p.T = 3;
    p.n_c1 = 16;
    p.n_c2 = 50;
    p.V = V;
    p.N_f = 100;
    p.P1 = P;
    p.P2 = P;
    p.P_f = P * 10;
    p.icr = true;
    p.omt = true;
    p.code_seed = 77;
    return p;
}

Scheme make_scheme(double P = 0.05, int V = 6) {
    return Scheme::build(small_params(P, V));
}

// Sum of signals for a multiset of indices, no noise.
std::vector<double> clean_observation(const Scheme& scheme,
                                      const std::vector<int>& indices) {
    std::vector<double> y(scheme.params().n_c1, 0.0);
    for (int u : indices) {
        auto x = scheme.signal(u);
        for (size_t t = 0; t < y.size(); ++t) y[t] += x[t];
    }
    return y;
}

// 1% upper critical value of chi-square via the Wilson-Hilferty cube.
double chi2_crit_1pct(int dof) {
    const double z = 2.3263478740408408;
    const double a = 2.0 / (9.0 * dof);
    const double c = 1.0 - a + z * std::sqrt(a);
    return dof * c * c * c;
}

}  // namespace

TEST_CASE("uniform identity selection") {
    auto rng = make_rng(1, 2, 3);
    SUBCASE("V = 1 pins the sub-block") {
        for (int i = 0; i < 100; ++i) {
            CHECK(select_identity_uniform(1, 9, rng).v == 1);
        }
    }
    SUBCASE("chi-square uniformity over the pair alphabet") {
        const int V = 4, n_p = 15;
        std::vector<long> counts(V * n_p, 0);
        const long draws = 1000000;
        for (long i = 0; i < draws; ++i) {
            auto id = select_identity_uniform(V, n_p, rng);
            counts[flatten(id, V) - 1]++;
        }
        const double expect = static_cast<double>(draws) / (V * n_p);
        double chi2 = 0.0;
        for (long c : counts) chi2 += (c - expect) * (c - expect) / expect;
        CHECK(chi2 < chi2_crit_1pct(V * n_p - 1));
        // empirical sub-block marginal within 3 sigma of 1/V
        long v1 = 0;
        for (int u = 1; u <= n_p; ++u) v1 += counts[flatten({1, u}, V) - 1];
        const double p = 1.0 / V;
        const double sigma = std::sqrt(p * (1 - p) * draws);
        CHECK(std::abs(v1 - draws * p) < 3.0 * sigma);
    }
}

TEST_CASE("omt identity selection") {
    SUBCASE("exact mass function for the 3 x 4 alphabet") {
        auto mass = omt_mass(3, 4);
        const double a = 1.0 / 16.0, b = 1.0 / 8.0;
        const std::vector<std::vector<double>> want = {
            {a, a, b, a}, {a, b, b, a}, {a, b, a, a}};
        CHECK(mass == want);
    }
    SUBCASE("power-of-two alphabet is uniform and deterministic") {
        const int V = 4, n_p = 8;  // V*n_p = 32 = 2^5
        auto rng = make_rng(9, 9);
        for (uint32_t prefix = 0; prefix < 32; ++prefix) {
            auto id1 = select_identity_omt(prefix, V, n_p, rng);
            auto id2 = select_identity_omt(prefix, V, n_p, rng);
            CHECK(flatten(id1, V) == flatten(id2, V));
            CHECK(flatten(id1, V) == prefix + 1);
        }
        auto mass = omt_mass(V, n_p);
        for (const auto& row : mass) {
            for (double m : row) CHECK(m == doctest::Approx(1.0 / 32).epsilon(1e-15));
        }
    }
    SUBCASE("prefix roundtrip across both branches") {
        const int V = 3, n_p = 4;
        auto rng = make_rng(5, 6);
        for (uint32_t prefix = 0; prefix < 8; ++prefix) {
            std::set<long> seen;
            for (int rep = 0; rep < 200; ++rep) {
                auto id = select_identity_omt(prefix, V, n_p, rng);
                seen.insert(flatten(id, V));
                CHECK(omt_prefix_of(id, V, n_p) == prefix);
            }
            const long s_prime = prefix + 1;
            CHECK(seen.size() == (s_prime <= 12 - 8 ? 2u : 1u));
        }
    }
    SUBCASE("empirical mass matches the exact matrix") {
        const int V = 3, n_p = 4;
        auto rng = make_rng(11, 3);
        auto mass = omt_mass(V, n_p);
        std::vector<long> counts(12, 0);
        const long draws = 400000;
        for (long i = 0; i < draws; ++i) {
            const uint32_t prefix = static_cast<uint32_t>(rng() & 7);
            counts[flatten(select_identity_omt(prefix, V, n_p, rng), V) - 1]++;
        }
        for (int v = 1; v <= V; ++v) {
            for (int u = 1; u <= n_p; ++u) {
                const double p = mass[v - 1][u - 1];
                const double got = counts[flatten({v, u}, V) - 1] /
                                   static_cast<double>(draws);
                CHECK(std::abs(got - p) < 4.0 * std::sqrt(p * (1 - p) / draws));
            }
        }
    }
}

TEST_CASE("modulation energy and support") {
    auto scheme = make_scheme();
    const auto& p = scheme.params();
    const double mag = std::sqrt(p.P1 * p.V);
    for (int u = 1; u <= p.n_p; ++u) {
        auto x = modulate(scheme, u);
        double norm2 = 0.0;
        for (double v : x) {
            CHECK(std::abs(std::abs(v) - mag) < 1e-12);
            norm2 += v * v;
        }
        CHECK(norm2 == doctest::Approx(p.P1 * p.V * p.n_c1).epsilon(1e-12));
    }
    // difference of two signals vanishes exactly where the codewords agree
    auto xa = modulate(scheme, 2);
    auto xb = modulate(scheme, 9);
    const uint64_t ca = scheme.inner().encode_mask(scheme.aux().column(2));
    const uint64_t cb = scheme.inner().encode_mask(scheme.aux().column(9));
    for (int t = 0; t < p.n_c1; ++t) {
        const bool same = ((ca >> t) & 1u) == ((cb >> t) & 1u);
        CHECK((std::abs(xa[t] - xb[t]) < 1e-12) == same);
    }
    CHECK_THROWS_AS(modulate(scheme, 0), std::invalid_argument);
    CHECK_THROWS_AS(modulate(scheme, 16), std::invalid_argument);
}

TEST_CASE("subblock channel") {
    auto scheme = make_scheme();
    SUBCASE("pure noise has unit variance") {
        auto rng = make_rng(3, 1);
        double acc = 0.0;
        long n = 0;
        for (int rep = 0; rep < 4000; ++rep) {
            auto y = subblock_channel({}, 16, rng);
            for (double v : y) {
                acc += v * v;
                ++n;
            }
        }
        CHECK(std::abs(acc / n - 1.0) < 0.03);
    }
    SUBCASE("two identical signals add coherently") {
        auto rng = make_rng(3, 2);
        auto x = modulate(scheme, 5);
        std::vector<double> mean(16, 0.0);
        const int reps = 20000;
        for (int rep = 0; rep < reps; ++rep) {
            auto y = subblock_channel({x, x}, 16, rng);
            for (int t = 0; t < 16; ++t) mean[t] += y[t] / reps;
        }
        for (int t = 0; t < 16; ++t) CHECK(std::abs(mean[t] - 2 * x[t]) < 0.05);
    }
    SUBCASE("fixed seed reproduces the draw bit-exactly") {
        auto r1 = make_rng(42, 7);
        auto r2 = make_rng(42, 7);
        auto y1 = subblock_channel({modulate(scheme, 1)}, 16, r1);
        auto y2 = subblock_channel({modulate(scheme, 1)}, 16, r2);
        CHECK(y1 == y2);
    }
}

TEST_CASE("single-shot decoding") {
    auto scheme = make_scheme();
    SUBCASE("one user, zero noise") {
        for (int u = 1; u <= 15; ++u) {
            auto y = clean_observation(scheme, {u});
            auto got = op_decode_single(y, 1, scheme, scheme.base_sigma2());
            REQUIRE(got.has_value());
            CHECK(*got == std::vector<int>{u});
        }
    }
    SUBCASE("distinct sets up to T, zero noise, syndrome oracle") {
        auto rng = make_rng(17, 1);
        for (int trial = 0; trial < 300; ++trial) {
            const int t = 1 + static_cast<int>(rng() % 3);
            std::set<int> set;
            while (static_cast<int>(set.size()) < t) {
                set.insert(1 + static_cast<int>(rng() % 15));
            }
            std::vector<int> idx(set.begin(), set.end());
            auto y = clean_observation(scheme, idx);
            auto got = op_decode_single(y, t, scheme, scheme.base_sigma2());
            REQUIRE(got.has_value());
            CHECK(*got == idx);
            // reconstruction oracle: the recovered syndrome matches the sum
            uint64_t syn = 0;
            for (int u : idx) syn ^= scheme.aux().column(u);
            uint64_t got_syn = 0;
            for (int u : *got) got_syn ^= scheme.aux().column(u);
            CHECK(syn == got_syn);
        }
    }
    SUBCASE("odd count mismatch corrupts the dither") {
        auto rng = make_rng(17, 2);
        int never_true = 0, cases = 0;
        for (int trial = 0; trial < 100; ++trial) {
            const int t = 1 + static_cast<int>(rng() % 3);
            std::set<int> set;
            while (static_cast<int>(set.size()) < t) {
                set.insert(1 + static_cast<int>(rng() % 15));
            }
            std::vector<int> idx(set.begin(), set.end());
            auto y = clean_observation(scheme, idx);
            auto got = op_decode_single(y, t + 1, scheme, scheme.base_sigma2());
            ++cases;
            if (!got || *got != idx) ++never_true;
        }
        CHECK(never_true == cases);
    }
}

TEST_CASE("collision-resolving decoder") {
    auto scheme = make_scheme();
    SUBCASE("worked example: multiplicities 3, 4, 1") {
        const int u1 = 2, u2 = 7, u3 = 11;
        std::vector<int> tx = {u1, u1, u1, u2, u2, u2, u2, u3};
        auto y = clean_observation(scheme, tx);
        auto lists = icr_decode(y, 8, scheme);
        REQUIRE(lists.has_value());
        REQUIRE(lists->size() == 3);
        CHECK((*lists)[0] == std::vector<int>{u1, u3});
        CHECK((*lists)[1] == std::vector<int>{u1});
        CHECK((*lists)[2] == std::vector<int>{u2});
        auto fin = finalize_lists(*lists, y, scheme);
        CHECK(fin.singles == std::vector<int>{u3});
        for (double r : fin.residual) CHECK(std::abs(r) < 1e-9);
    }
    SUBCASE("all-distinct resolves in one level") {
        auto y = clean_observation(scheme, {3, 8, 14});
        auto lists = icr_decode(y, 3, scheme);
        REQUIRE(lists.has_value());
        CHECK(lists->size() == 1);
        CHECK((*lists)[0] == std::vector<int>{3, 8, 14});
        auto fin = finalize_lists(*lists, y, scheme);
        CHECK(fin.singles == std::vector<int>{3, 8, 14});
        // level-1 residual equals y minus the plain sum
        auto direct = clean_observation(scheme, {3, 8, 14});
        for (size_t t = 0; t < direct.size(); ++t) {
            CHECK(fin.residual[t] == doctest::Approx(y[t] - direct[t]).epsilon(1e-12));
        }
    }
    SUBCASE("one pair collides: level 2 recovers it") {
        auto y = clean_observation(scheme, {4, 4, 9});
        auto lists = icr_decode(y, 3, scheme);
        REQUIRE(lists.has_value());
        REQUIRE(lists->size() == 2);
        CHECK((*lists)[0] == std::vector<int>{9});
        CHECK((*lists)[1] == std::vector<int>{4});
        auto fin = finalize_lists(*lists, y, scheme);
        CHECK(fin.singles == std::vector<int>{9});
    }
    SUBCASE("level count never exceeds floor(log2 t) + 1") {
        auto rng = make_rng(23, 5);
        for (int trial = 0; trial < 2000; ++trial) {
            const int t = static_cast<int>(rng() % 4);
            std::vector<int> tx;
            for (int i = 0; i < t; ++i) {
                tx.push_back(1 + static_cast<int>(rng() % 15));
            }
            auto y = clean_observation(scheme, tx);
            auto lists = icr_decode(y, t, scheme);
            if (!lists) continue;
            const int bound =
                t >= 1 ? static_cast<int>(std::floor(std::log2(t))) + 1 : 1;
            CHECK(static_cast<int>(lists->size()) <= bound);
        }
    }
    SUBCASE("noiseless multiplicity property on random multisets") {
        auto rng = make_rng(23, 6);
        for (int trial = 0; trial < 1500; ++trial) {
            const int t = static_cast<int>(rng() % 4);
            std::vector<int> tx;
            for (int i = 0; i < t; ++i) {
                tx.push_back(1 + static_cast<int>(rng() % 15));
            }
            auto y = clean_observation(scheme, tx);
            auto lists = icr_decode(y, t, scheme);
            REQUIRE(lists.has_value());
            auto fin = finalize_lists(*lists, y, scheme);
            std::map<int, int> mult;
            for (int u : tx) mult[u]++;
            std::vector<int> want;
            for (auto [u, m] : mult) {
                if (m == 1) want.push_back(u);
            }
            CHECK(fin.singles == want);
            for (double r : fin.residual) CHECK(std::abs(r) < 1e-9);
        }
    }
}

TEST_CASE("sub-block decoding with the residual-norm test") {
    auto scheme = make_scheme();
    SUBCASE("empty sub-block under noise picks zero users almost always") {
        auto strong = make_scheme(0.7, 6);  // operating-strength sub-block SNR
        auto rng = make_rng(31, 1);
        NormalDraw normal;
        int good = 0;
        const int reps = 300;
        for (int rep = 0; rep < reps; ++rep) {
            std::vector<double> y(16);
            for (auto& v : y) v = normal(rng);
            auto dec = decode_subblock(y, strong);
            if (dec.decoded && dec.t_star == 0 && dec.singles.empty()) ++good;
        }
        CHECK(good >= static_cast<int>(0.95 * reps));
    }
    SUBCASE("distinct users, zero noise: exact recovery") {
        auto y = clean_observation(scheme, {1, 6, 13});
        auto dec = decode_subblock(y, scheme);
        CHECK(dec.decoded);
        CHECK(dec.t_star == 3);
        CHECK(dec.singles == std::vector<int>{1, 6, 13});
        CHECK(dec.collided.empty());
        CHECK(dec.residual_norm2 < 1e-12);
    }
    SUBCASE("collision pair flagged as collided") {
        auto y = clean_observation(scheme, {5, 5, 12});
        auto dec = decode_subblock(y, scheme);
        CHECK(dec.decoded);
        CHECK(dec.t_star == 3);
        CHECK(dec.singles == std::vector<int>{12});
        CHECK(dec.collided == std::vector<int>{5});
    }
    SUBCASE("plain decoding path without collision resolution") {
        auto params = small_params();
        params.icr = false;
        auto scheme2 = Scheme::build(params);
        auto y = clean_observation(scheme2, {2, 10});
        auto dec = decode_subblock(y, scheme2);
        CHECK(dec.decoded);
        CHECK(dec.t_star == 2);
        CHECK(dec.singles == std::vector<int>{2, 10});
        CHECK(dec.collided.empty());
    }
}

TEST_CASE("occupancy estimate balancing") {
    auto scheme = make_scheme();  // V = 6, n_p = 15, 90 positions
    const int V = 6;
    auto mk_results = [&](const std::vector<std::vector<int>>& singles,
                          const std::vector<std::vector<int>>& collided) {
        std::vector<SubblockDecode> res(V);
        for (int v = 0; v < V; ++v) {
            res[v].decoded = true;
            res[v].singles = singles[v];
            res[v].collided = collided[v];
        }
        return res;
    };

    SUBCASE("exactly Ka ones: untouched") {
        auto rng = make_rng(41, 1);
        auto res = mk_results({{1, 2}, {3}, {}, {4}, {}, {5}},
                              {{}, {}, {}, {}, {}, {}});
        auto est = build_occupancy_estimate(res, 6, scheme, rng);
        CHECK(est.padded.empty());
        CHECK(est.erased.empty());
        CHECK(est.assignment.size() == 6);
        CHECK(est.occupied({1, 1}));
        CHECK(est.occupied({2, 3}));
        CHECK_FALSE(est.occupied({3, 3}));
    }
    SUBCASE("two extra ones get erased") {
        auto rng = make_rng(41, 2);
        auto res = mk_results({{1, 2, 3}, {4, 5}, {6}, {7}, {8}, {9}},
                              {{}, {}, {}, {}, {}, {}});
        auto est = build_occupancy_estimate(res, 7, scheme, rng);
        CHECK(est.erased.size() == 2);
        CHECK(est.assignment.size() == 7);
        CHECK(est.padded.empty());
    }
    SUBCASE("padding avoids collided positions") {
        auto rng = make_rng(41, 3);
        std::vector<std::vector<int>> collided(6);
        collided[2] = {1, 2, 3, 4, 5, 6, 7, 8, 9, 10, 11, 12, 13, 14, 15};
        auto res = mk_results({{1}, {2}, {}, {}, {}, {}}, collided);
        for (int rep = 0; rep < 20; ++rep) {
            auto est = build_occupancy_estimate(res, 5, scheme, rng);
            CHECK(est.padded.size() == 3);
            CHECK(est.assignment.size() == 5);
            for (long pos : est.padded) {
                CHECK(unflatten(pos, V).v != 3);  // flagged sub-block excluded
            }
        }
    }
}

TEST_CASE("observation dump roundtrip") {
    std::vector<double> y = {0.5, -1.25, 3.75, 1e-9};
    const std::string path = "obs_test.bin";
    write_observation(path, y);
    CHECK(read_observation(path) == y);
    std::remove(path.c_str());
}
