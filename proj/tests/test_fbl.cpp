#include <cmath>
#include <random>

#include "doctest.h"
#include "mra/fbl.hpp"
#include "mra/rng.hpp"

using namespace mra;

namespace {

// Independent oracle: tail of the standard normal by Simpson integration.
double q_oracle(double x) {
    const double hi = 40.0;
    const int steps = 400000;  // even
    const double h = (hi - x) / steps;
    auto phi = [](double t) {
        return std::exp(-0.5 * t * t) / std::sqrt(2.0 * M_PI);
    };
    double acc = phi(x) + phi(hi);
    for (int i = 1; i < steps; ++i) {
        acc += phi(x + i * h) * (i % 2 ? 4.0 : 2.0);
    }
    return acc * h / 3.0;
}

// Trapezoid integral of f over [0, 2) using the periodic grid.
template <typename F>
double integrate_period(F f, int n) {
    double acc = 0.0;
    for (int i = 0; i < n; ++i) acc += f(2.0 * i / n);
    return acc * 2.0 / n;
}

}  // namespace

TEST_CASE("q_func basics") {
    CHECK(fbl::q_func(0.0) == doctest::Approx(0.5).epsilon(1e-14));
    CHECK(fbl::q_func(50.0) < 1e-300);
    CHECK(fbl::q_func(-50.0) == doctest::Approx(1.0).epsilon(1e-14));
    // strictly decreasing on a grid
    double prev = fbl::q_func(-8.0);
    for (double x = -7.5; x <= 8.0; x += 0.5) {
        double cur = fbl::q_func(x);
        CHECK(cur < prev);
        prev = cur;
    }
    CHECK(fbl::q_func(1.6449) == doctest::Approx(q_oracle(1.6449)).epsilon(1e-9));
    CHECK(std::abs(fbl::q_func(1.6449) - 0.05) < 1e-4);
}

TEST_CASE("q_inv roundtrip and anchors") {
    CHECK(fbl::q_inv(0.5) == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(fbl::q_inv(fbl::q_func(2.0)) == doctest::Approx(2.0).epsilon(1e-9));
    for (double x = -6.0; x <= 6.0; x += 0.25) {
        CHECK(fbl::q_inv(fbl::q_func(x)) == doctest::Approx(x).epsilon(1e-9));
    }
    // bisection on the Simpson oracle gives the 5% point
    double lo = 0.0, hi = 4.0;
    for (int i = 0; i < 60; ++i) {
        double mid = 0.5 * (lo + hi);
        (q_oracle(mid) > 0.05 ? lo : hi) = mid;
    }
    CHECK(std::abs(fbl::q_inv(0.05) - 0.5 * (lo + hi)) < 1e-6);
    CHECK(std::abs(fbl::q_inv(0.05) - 1.6449) < 1e-3);
    CHECK_THROWS_AS(fbl::q_inv(0.0), std::domain_error);
    CHECK_THROWS_AS(fbl::q_inv(1.0), std::domain_error);
    CHECK_THROWS_AS(fbl::q_inv(-0.2), std::domain_error);
}

TEST_CASE("awgn_stats closed forms") {
    CHECK(fbl::awgn_stats(1.0).capacity == doctest::Approx(0.5).epsilon(1e-14));
    CHECK(fbl::awgn_stats(3.0).capacity == doctest::Approx(1.0).epsilon(1e-14));
    // independent long-double evaluation of the dispersion expression
    for (double p : {0.05, 0.5, 1.0, 3.0, 10.0, 250.0}) {
        long double l2e = std::log2l(std::expl(1.0L));
        long double want = (static_cast<long double>(p) / 2.0L) *
                           (p + 2.0L) / ((p + 1.0L) * (p + 1.0L)) * l2e * l2e;
        CHECK(std::abs(fbl::awgn_stats(p).dispersion -
                       static_cast<double>(want)) < 1e-12);
    }
    CHECK(fbl::awgn_stats(1.0).dispersion == doctest::Approx(0.7805133679).epsilon(1e-9));
    CHECK_THROWS_AS(fbl::awgn_stats(0.0), std::domain_error);
    CHECK_THROWS_AS(fbl::awgn_stats(-1.0), std::domain_error);
}

TEST_CASE("awgn_error_prob composition and limits") {
    const double cap = fbl::awgn_stats(2.5).capacity;
    CHECK(fbl::awgn_error_prob(2.5, 120, cap) == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(fbl::awgn_error_prob(2.5, 120, 1e-9) < 1e-10);
    const double v = fbl::awgn_stats(1.0).dispersion;
    CHECK(fbl::awgn_error_prob(1.0, 400, 0.25) ==
          doctest::Approx(fbl::q_func((0.5 - 0.25) * std::sqrt(400.0 / v)))
              .epsilon(1e-12));
    // monotone: decreasing in n, increasing in rate
    for (double n : {50.0, 100.0, 200.0, 400.0}) {
        CHECK(fbl::awgn_error_prob(1.0, n, 0.3) >
              fbl::awgn_error_prob(1.0, 2 * n, 0.3));
    }
    double prev = 0.0;
    for (double rate = 0.05; rate < 0.5; rate += 0.05) {
        double cur = fbl::awgn_error_prob(1.0, 200, rate);
        CHECK(cur > prev);
        prev = cur;
    }
}

TEST_CASE("wrapped_gauss_pdf normalization, symmetry, long-sum oracle") {
    for (double s2 : {1e-3, 1e-1, 1.0, 10.0}) {
        double mass = integrate_period(
            [&](double z) { return fbl::wrapped_gauss_pdf(z, s2); }, 1 << 15);
        CHECK(mass == doctest::Approx(1.0).epsilon(1e-9));
    }
    for (double z : {0.1, 0.4, 0.9, 1.3, 1.9}) {
        CHECK(fbl::wrapped_gauss_pdf(z, 0.3) ==
              doctest::Approx(fbl::wrapped_gauss_pdf(2.0 - z, 0.3)).epsilon(1e-13));
    }
    {
        // brute-force 21-term reference at sigma2 = 0.01, z = 0
        const double s2 = 0.01;
        long double acc = 0.0L;
        for (int m = -10; m <= 10; ++m) {
            long double t = 2.0L * m;
            acc += std::expl(-0.5L * t * t / s2);
        }
        acc /= std::sqrtl(2.0L * M_PI * s2);
        CHECK(std::abs(fbl::wrapped_gauss_pdf(0.0, s2) -
                       static_cast<double>(acc)) < 1e-10);
    }
    CHECK_THROWS_AS(fbl::wrapped_gauss_pdf(-0.1, 1.0), std::domain_error);
    CHECK_THROWS_AS(fbl::wrapped_gauss_pdf(2.0, 1.0), std::domain_error);
    CHECK_THROWS_AS(fbl::wrapped_gauss_pdf(0.5, 0.0), std::domain_error);
}

TEST_CASE("wrapped_gauss_logpdf agrees with pdf") {
    for (double s2 : {5e-3, 0.05, 0.4, 3.0}) {
        for (double z = 0.0; z < 2.0; z += 0.0625) {
            const double p = fbl::wrapped_gauss_pdf(z, s2);
            if (p > 1e-280) {
                CHECK(fbl::wrapped_gauss_logpdf(z, s2) ==
                      doctest::Approx(std::log(p)).epsilon(1e-11));
            }
        }
    }
}

namespace {

// Monte Carlo estimate of the information-density mean for the mod-2
// channel, independent of the quadrature path.
double mod2_capacity_mc(double p_eff, long samples, uint64_t seed) {
    const double sigma2 = 1.0 / (4.0 * p_eff);
    std::mt19937_64 rng(seed);
    NormalDraw normal;
    const double sigma = std::sqrt(sigma2);
    double acc = 0.0;
    for (long i = 0; i < samples; ++i) {
        double z = std::fmod(normal(rng) * sigma, 2.0);
        if (z < 0.0) z += 2.0;
        const double pz = fbl::wrapped_gauss_pdf(z, sigma2);
        const double pz1 = fbl::wrapped_gauss_pdf(z >= 1.0 ? z - 1.0 : z + 1.0, sigma2);
        acc += std::log2(pz / (0.5 * pz + 0.5 * pz1));
    }
    return acc / samples;
}

}  // namespace

TEST_CASE("mod2_stats limits, range, monotonicity") {
    CHECK(fbl::mod2_stats(100.0).capacity > 0.99);
    CHECK(std::abs(fbl::mod2_stats(100.0).capacity -
                   mod2_capacity_mc(100.0, 1000000, 7)) < 1e-2);
    CHECK(fbl::mod2_stats(0.001).capacity < 1e-2);
    double prev = -1.0;
    for (double p : {0.01, 0.1, 0.5, 1.0, 2.0, 5.0, 10.0, 50.0, 1000.0}) {
        auto s = fbl::mod2_stats(p);
        CHECK(s.capacity >= 0.0);
        CHECK(s.capacity <= 1.0);
        CHECK(s.capacity >= prev);
        prev = s.capacity;
    }
    // mid-SNR cross-check against the Monte Carlo oracle
    const double mc = mod2_capacity_mc(4.7754, 2000000, 11);
    CHECK(std::abs(fbl::mod2_stats(4.7754).capacity - mc) < 2e-3);
}

TEST_CASE("mod2_error_prob anchors") {
    auto s = fbl::mod2_stats(3.0);
    CHECK(fbl::mod2_error_prob(3.0, 17, s.capacity) == doctest::Approx(0.5).epsilon(1e-9));
    CHECK(fbl::mod2_error_prob(3.0, 17, 0.0) == 0.0);
    // the operating point of a mid-size design: finite, reproducible
    const double p = 0.01137 * 420;
    const double e1 = fbl::mod2_error_prob(p, 17, 10.0 / 17.0);
    const double e2 = fbl::mod2_error_prob(p, 17, 10.0 / 17.0);
    CHECK(e1 > 0.0);
    CHECK(e1 < 1.0);
    CHECK(e1 == doctest::Approx(e2).epsilon(1e-9));
    // decreasing in n, increasing in rate
    CHECK(fbl::mod2_error_prob(p, 17, 0.6) > fbl::mod2_error_prob(p, 34, 0.6));
    CHECK(fbl::mod2_error_prob(p, 17, 0.7) > fbl::mod2_error_prob(p, 17, 0.5));
}
