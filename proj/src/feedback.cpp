#include "mra/feedback.hpp"

#include <cmath>
#include <numeric>
#include <stdexcept>

namespace mra::feedback {

ConstantWeightMessage ConstantWeightMessage::from_occupancy(
    const op::OccupancyEstimate& est) {
    ConstantWeightMessage msg;
    msg.n = static_cast<int>(est.s_hat.size());
    msg.bits.assign(est.s_hat.begin(), est.s_hat.end());
    msg.w = static_cast<int>(
        std::accumulate(msg.bits.begin(), msg.bits.end(), 0L));
    return msg;
}

void ConstantWeightMessage::validate() const {
    if (n < 1 || w < 0 || w > n || static_cast<int>(bits.size()) != n) {
        throw std::invalid_argument("ConstantWeightMessage: bad shape");
    }
    long ones = std::accumulate(bits.begin(), bits.end(), 0L);
    if (ones != w) {
        throw std::invalid_argument("ConstantWeightMessage: weight mismatch");
    }
}

mpz_class rank(const ConstantWeightMessage& msg) {
    msg.validate();
    // Walk positions most-significant first, keeping C(remaining, w_left)
    // updated with one small multiply/divide per step.
    mpz_class r = 0;
    mpz_class binom;
    int left = msg.n - 1;   // positions after the current one
    int w_left = msg.w;
    mpz_bin_uiui(binom.get_mpz_t(), left, w_left);  // C(n-1, w)
    for (int i = 0; i < msg.n; ++i) {
        // binom == C(left, w_left)
        if (msg.bits[i]) {
            r += binom;
            // next: C(left-1, w_left-1) = C * w_left / left
            if (left > 0) {
                binom *= w_left;
                mpz_divexact_ui(binom.get_mpz_t(), binom.get_mpz_t(), left);
            }
            --w_left;
        } else if (left > 0) {
            // next: C(left-1, w_left) = C * (left - w_left) / left
            binom *= (left - w_left);
            mpz_divexact_ui(binom.get_mpz_t(), binom.get_mpz_t(), left);
        }
        --left;
    }
    return r;
}

ConstantWeightMessage unrank(int n, int w, const mpz_class& r) {
    if (n < 1 || w < 0 || w > n) {
        throw std::invalid_argument("unrank: bad shape");
    }
    mpz_class total;
    mpz_bin_uiui(total.get_mpz_t(), n, w);
    if (r < 0 || r >= total) {
        throw std::out_of_range("unrank: rank out of range");
    }
    ConstantWeightMessage msg;
    msg.n = n;
    msg.w = w;
    msg.bits.assign(n, 0);
    mpz_class rem = r;
    mpz_class binom;
    int left = n - 1;
    int w_left = w;
    mpz_bin_uiui(binom.get_mpz_t(), left, w_left);
    for (int i = 0; i < n; ++i) {
        if (w_left > 0 && rem >= binom) {
            msg.bits[i] = 1;
            rem -= binom;
            if (left > 0) {
                binom *= w_left;
                mpz_divexact_ui(binom.get_mpz_t(), binom.get_mpz_t(), left);
            }
            --w_left;
        } else if (left > 0) {
            binom *= (left - w_left);
            mpz_divexact_ui(binom.get_mpz_t(), binom.get_mpz_t(), left);
        }
        --left;
    }
    return msg;
}

int feedback_bits(int V, int n_p, int Ka) {
    const long n = static_cast<long>(V) * n_p;
    if (Ka < 0 || Ka > n) {
        throw std::invalid_argument("feedback_bits: need 0 <= Ka <= V*n_p");
    }
    mpz_class binom;
    mpz_bin_uiui(binom.get_mpz_t(), n, Ka);
    if (binom == 1) return 0;
    const size_t floor_log2_plus1 = mpz_sizeinbase(binom.get_mpz_t(), 2);
    const bool power_of_two = mpz_popcount(binom.get_mpz_t()) == 1;
    return static_cast<int>(power_of_two ? floor_log2_plus1 - 1
                                         : floor_log2_plus1);
}

double feedback_bits_relaxed(double n, double w) {
    if (!(n >= w) || !(w >= 0.0)) {
        throw std::invalid_argument("feedback_bits_relaxed: need 0 <= w <= n");
    }
    constexpr double kLog2E = 1.4426950408889634;
    return (std::lgamma(n + 1.0) - std::lgamma(w + 1.0) -
            std::lgamma(n - w + 1.0)) * kLog2E;
}

std::optional<int> user_find_slot(const op::OccupancyEstimate& est,
                                  const op::Identity& id) {
    if (!est.occupied(id)) return std::nullopt;
    const long s = op::flatten(id, est.V);
    const auto it =
        std::lower_bound(est.assignment.begin(), est.assignment.end(), s);
    return static_cast<int>(it - est.assignment.begin()) + 1;
}

std::vector<uint8_t> payload_bytes(const mpz_class& r, int k_f) {
    if (r < 0) throw std::invalid_argument("payload_bytes: negative rank");
    const int nbytes = (k_f + 7) / 8;
    std::vector<uint8_t> out(nbytes, 0);
    mpz_class rem = r;
    for (int i = nbytes - 1; i >= 0 && rem != 0; --i) {
        out[i] = static_cast<uint8_t>(mpz_class(rem & 0xff).get_ui());
        rem >>= 8;
    }
    if (rem != 0) throw std::invalid_argument("payload_bytes: rank exceeds k_f bits");
    return out;
}

mpz_class payload_value(const std::vector<uint8_t>& bytes) {
    mpz_class v = 0;
    for (uint8_t b : bytes) {
        v <<= 8;
        v += b;
    }
    return v;
}

}  // namespace mra::feedback
