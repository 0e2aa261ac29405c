#pragma once

// Finite-blocklength normal approximations for the point-to-point AWGN
// channel and for the binary-input AWGN channel reduced modulo 2.

#include <stdexcept>

namespace mra::fbl {

// Capacity (bits per channel use) and dispersion (bits^2 per channel use)
// of a memoryless channel at a given SNR.
struct ChannelStats {
    double capacity = 0.0;
    double dispersion = 0.0;
};

// Gaussian tail probability Pr[N(0,1) > x].
double q_func(double x);

// Inverse of q_func on (0, 1). Throws std::domain_error outside.
double q_inv(double p);

// Real AWGN channel, unit noise variance, SNR p_lin > 0.
ChannelStats awgn_stats(double p_lin);

// Block error probability of an ideal rate-`rate` code of length n on the
// AWGN channel at SNR p_lin: Q((C - rate) * sqrt(n / V)).
double awgn_error_prob(double p_lin, double n, double rate);

// Density of (N(0, sigma2) mod 2) at z in [0, 2).
double wrapped_gauss_pdf(double z, double sigma2);

// log of wrapped_gauss_pdf, safe for very small densities.
double wrapped_gauss_logpdf(double z, double sigma2);

// Mod-2 channel y = (c + z) mod 2 with z ~ N(0, 1/(4 p_eff)).
// Capacity/dispersion of the information density, by deterministic
// quadrature over [0, 2) with a step-doubling accuracy check.
ChannelStats mod2_stats(double p_eff);

// Same shape as awgn_error_prob, for the mod-2 channel.
double mod2_error_prob(double p_eff, double n, double rate);

}  // namespace mra::fbl
