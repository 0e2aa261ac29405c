#include "mra/fbl.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

namespace mra::fbl {

namespace {

constexpr double kLog2E = 1.4426950408889634;  // log2(e)
constexpr double kSqrt2 = 1.4142135623730951;

}  // namespace

double q_func(double x) {
    // Q(x) = erfc(x / sqrt 2) / 2; erfc keeps precision deep in the tail.
    return 0.5 * std::erfc(x / kSqrt2);
}

double q_inv(double p) {
    if (!(p > 0.0 && p < 1.0)) {
        throw std::domain_error("q_inv: p must be in (0, 1)");
    }
    // Bracketing bisection followed by Newton polish. Q is strictly
    // decreasing, so [lo, hi] with Q(lo) >= p >= Q(hi) always brackets.
    double lo = -40.0, hi = 40.0;
    for (int i = 0; i < 200; ++i) {
        double mid = 0.5 * (lo + hi);
        if (q_func(mid) > p) {
            lo = mid;
        } else {
            hi = mid;
        }
        if (hi - lo < 1e-12 * std::max(1.0, std::abs(lo))) break;
    }
    double x = 0.5 * (lo + hi);
    for (int i = 0; i < 4; ++i) {
        double f = q_func(x) - p;
        double pdf = std::exp(-0.5 * x * x) / std::sqrt(2.0 * M_PI);
        if (pdf <= 0.0) break;
        x += f / pdf;  // Q' = -pdf
    }
    return x;
}

ChannelStats awgn_stats(double p_lin) {
    if (!(p_lin > 0.0)) {
        throw std::domain_error("awgn_stats: SNR must be positive");
    }
    ChannelStats s;
    s.capacity = 0.5 * std::log2(1.0 + p_lin);
    s.dispersion = (p_lin / 2.0) * (p_lin + 2.0) /
                   ((p_lin + 1.0) * (p_lin + 1.0)) * kLog2E * kLog2E;
    return s;
}

double awgn_error_prob(double p_lin, double n, double rate) {
    if (!(n > 0.0)) {
        throw std::domain_error("awgn_error_prob: n must be positive");
    }
    ChannelStats s = awgn_stats(p_lin);
    if (rate <= 0.0) return 0.0;
    return q_func((s.capacity - rate) * std::sqrt(n / s.dispersion));
}

namespace {

int wrap_terms(double sigma) {
    // Gaussian tails past 5 sigma are below double-precision relevance.
    return std::max(3, static_cast<int>(std::ceil(2.5 * sigma)) + 1);
}

}  // namespace

double wrapped_gauss_pdf(double z, double sigma2) {
    if (!(sigma2 > 0.0)) {
        throw std::domain_error("wrapped_gauss_pdf: sigma2 must be positive");
    }
    if (!(z >= 0.0 && z < 2.0)) {
        throw std::domain_error("wrapped_gauss_pdf: z must be in [0, 2)");
    }
    const double sigma = std::sqrt(sigma2);
    const int mmax = wrap_terms(sigma);
    const double norm = 1.0 / (sigma * std::sqrt(2.0 * M_PI));
    double acc = 0.0;
    for (int m = -mmax; m <= mmax; ++m) {
        double t = z + 2.0 * m;
        acc += std::exp(-0.5 * t * t / sigma2);
    }
    return norm * acc;
}

double wrapped_gauss_logpdf(double z, double sigma2) {
    const double sigma = std::sqrt(sigma2);
    const int mmax = wrap_terms(sigma);
    // log-sum-exp over the image points, anchored at the largest term.
    double best = -std::numeric_limits<double>::infinity();
    for (int m = -mmax; m <= mmax; ++m) {
        double t = z + 2.0 * m;
        best = std::max(best, -0.5 * t * t / sigma2);
    }
    double acc = 0.0;
    for (int m = -mmax; m <= mmax; ++m) {
        double t = z + 2.0 * m;
        acc += std::exp(-0.5 * t * t / sigma2 - best);
    }
    return best + std::log(acc) -
           std::log(sigma * std::sqrt(2.0 * M_PI));
}

namespace {

// Single quadrature pass with `panels` uniform panels over [0, 2).
// The integrand is periodic, so the rectangle rule is spectrally accurate
// once the density is resolved.
ChannelStats mod2_stats_pass(double p_eff, int panels) {
    const double sigma2 = 1.0 / (4.0 * p_eff);
    const double dz = 2.0 / panels;
    std::vector<double> logp(panels);
    for (int i = 0; i < panels; ++i) {
        logp[i] = wrapped_gauss_logpdf(i * dz, sigma2);
    }
    const int half = panels / 2;
    double mean = 0.0, second = 0.0;
    for (int i = 0; i < panels; ++i) {
        const double lp = logp[i];
        const double lq = logp[(i + half) % panels];  // density at z-1 mod 2
        double p = std::exp(lp);
        if (p <= 0.0) continue;
        // i(z) = 1 - log2(1 + p(z-1)/p(z)), evaluated via log1p(exp(...))
        double info;
        double diff = lq - lp;
        if (diff < 700.0) {
            info = 1.0 - std::log1p(std::exp(diff)) * kLog2E;
        } else {
            info = 1.0 - diff * kLog2E;
        }
        mean += p * info;
        second += p * info * info;
    }
    mean *= dz;
    second *= dz;
    ChannelStats s;
    s.capacity = mean;
    s.dispersion = std::max(0.0, second - mean * mean);
    return s;
}

}  // namespace

ChannelStats mod2_stats(double p_eff) {
    if (!(p_eff > 0.0)) {
        throw std::domain_error("mod2_stats: SNR must be positive");
    }
    const double sigma = 0.5 / std::sqrt(p_eff);
    // At vanishing noise the information density is 1 almost surely.
    if (sigma < 2e-4) return ChannelStats{1.0, 0.0};
    int panels = 1 << 14;
    // keep >= ~24 samples per sigma so narrow densities stay resolved
    while (panels * sigma < 48.0 && panels < (1 << 22)) panels <<= 1;
    ChannelStats coarse = mod2_stats_pass(p_eff, panels / 2);
    ChannelStats fine = mod2_stats_pass(p_eff, panels);
    if (std::abs(fine.capacity - coarse.capacity) > 1e-8 ||
        std::abs(fine.dispersion - coarse.dispersion) > 1e-7) {
        ChannelStats finer = mod2_stats_pass(p_eff, panels * 2);
        if (std::abs(finer.capacity - fine.capacity) > 1e-8) {
            throw std::runtime_error("mod2_stats: quadrature did not settle");
        }
        return finer;
    }
    return fine;
}

double mod2_error_prob(double p_eff, double n, double rate) {
    if (!(n > 0.0)) {
        throw std::domain_error("mod2_error_prob: n must be positive");
    }
    ChannelStats s = mod2_stats(p_eff);
    if (rate <= 0.0) return 0.0;
    if (s.dispersion < 1e-300) {
        if (rate < s.capacity) return 0.0;
        if (rate > s.capacity) return 1.0;
        return 0.5;
    }
    return q_func((s.capacity - rate) * std::sqrt(n / s.dispersion));
}

}  // namespace mra::fbl
