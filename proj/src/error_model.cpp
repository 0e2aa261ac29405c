#include "mra/error_model.hpp"

#include <cmath>
#include <mutex>
#include <unordered_map>

#include "mra/feedback.hpp"

namespace mra::err {

namespace {

// memoized exact integration; profiles show repeated P values dominate
class ExactMod2 final : public Mod2Source {
  public:
    fbl::ChannelStats stats(double p_eff) const override {
        const uint64_t key = std::bit_cast<uint64_t>(p_eff);
        {
            std::lock_guard<std::mutex> lock(mu_);
            auto it = cache_.find(key);
            if (it != cache_.end()) return it->second;
        }
        fbl::ChannelStats s = fbl::mod2_stats(p_eff);
        std::lock_guard<std::mutex> lock(mu_);
        cache_.emplace(key, s);
        return s;
    }

  private:
    mutable std::mutex mu_;
    mutable std::unordered_map<uint64_t, fbl::ChannelStats> cache_;
};

double q_of_stats(const fbl::ChannelStats& s, double n, double rate) {
    if (rate <= 0.0) return 0.0;
    if (s.dispersion < 1e-300) {
        if (rate < s.capacity) return 0.0;
        if (rate > s.capacity) return 1.0;
        return 0.5;
    }
    return fbl::q_func((s.capacity - rate) * std::sqrt(n / s.dispersion));
}

}  // namespace

fbl::ChannelStats Mod2Source::stats(double p_eff) const {
    return fbl::mod2_stats(p_eff);
}

const Mod2Source& Mod2Source::exact() {
    static const ExactMod2 src;
    return src;
}

RealParams RealParams::from(const op::SchemeParams& p) {
    RealParams r;
    r.k_p = p.k_p;
    r.n_p = p.n_p;
    r.T = p.T;
    r.n_c1 = p.n_c1;
    r.n_c2 = p.n_c2;
    r.V = p.V;
    r.N_f = p.N_f;
    r.P1 = p.P1;
    r.P2 = p.P2;
    r.P_f = p.P_f;
    r.icr = p.icr;
    r.omt = p.omt;
    return r;
}

double p_vstar(double V, int n_p) {
    const double total = V * n_p;
    if (!(total >= 2.0)) {
        throw std::invalid_argument("p_vstar: V*n_p must be >= 2");
    }
    const double k1 = std::floor(std::log2(total));
    const double pow2 = std::exp2(k1);
    const double dup = total - pow2;
    double fl = std::floor(2.0 * dup / V);
    if (fl > n_p) fl = n_p;
    return (n_p - fl) / pow2 + fl / (2.0 * pow2);
}

double eps1(double Ka, int T, double V, int n_p, bool omt) {
    if (T < 1) return Ka > 1 ? 1.0 : 0.0;
    if (Ka <= 1.0) return 0.0;
    const double p = omt ? p_vstar(V, n_p) : 1.0 / V;
    if (p <= 0.0) return 0.0;
    if (p >= 1.0) return T >= Ka ? 0.0 : 1.0;
    const double m = Ka - 1.0;
    const double lp = std::log(p);
    const double lq = std::log1p(-p);
    double sum = 0.0;
    for (int t = 0; t <= T - 1; ++t) {
        if (t > m) break;
        const double lc = std::lgamma(m + 1.0) - std::lgamma(t + 1.0) -
                          std::lgamma(m - t + 1.0);
        sum += std::exp(lc + t * lp + (m - t) * lq);
    }
    return std::clamp(1.0 - sum, 0.0, 1.0);
}

double eps2(double P1, double V, double n_c1, double m_p, int T, bool icr,
            const Mod2Source& mod2) {
    if (!(P1 > 0.0) || !(V > 0.0) || !(n_c1 > 0.0)) {
        throw std::invalid_argument("eps2: bad arguments");
    }
    const double rate = m_p / n_c1;
    const int levels =
        icr ? (T >= 1 ? static_cast<int>(std::floor(std::log2(T))) + 1 : 1) : 1;
    double sum = 0.0;
    double power = P1 * V;
    for (int l = 0; l < levels; ++l) {
        sum += q_of_stats(mod2.stats(power), n_c1, rate);
        power *= 2.0;
    }
    return std::min(1.0, sum);
}

double eps3(double Ka, double V, int n_p, int T, Eps3Variant variant) {
    switch (variant) {
        case Eps3Variant::op:
            return static_cast<double>(T) * (T - 1) / (2.0 * n_p);
        case Eps3Variant::icr: {
            if (Ka <= 1.0) return 0.0;
            const double q = 1.0 / (V * n_p);
            return -std::expm1((Ka - 1.0) * std::log1p(-q));
        }
        case Eps3Variant::omt: {
            if (Ka <= 1.0) return 0.0;
            const double total = V * n_p;
            const double pow2 = std::exp2(std::floor(std::log2(total)));
            const double w_dup = (total - pow2) / pow2;
            const double w_solo = (2.0 * pow2 - total) / pow2;
            const double hit_dup =
                -std::expm1((Ka - 1.0) * std::log1p(-1.0 / (2.0 * pow2)));
            const double hit_solo =
                -std::expm1((Ka - 1.0) * std::log1p(-1.0 / pow2));
            return w_dup * hit_dup + w_solo * hit_solo;
        }
    }
    throw std::logic_error("eps3: bad variant");
}

double eps_f(double P_f, double N_f, double k_f) {
    if (!(N_f > 0.0)) {
        // no feedback resources: only the degenerate zero-rate case is fine
        return k_f <= 0.0 ? 0.0 : 1.0;
    }
    return fbl::awgn_error_prob(P_f, N_f, k_f / N_f);
}

double eps4(double P2, double Ka, double n_c2, double k_bits) {
    if (!(n_c2 > 0.0)) return k_bits <= 0.0 ? 0.0 : 1.0;
    return fbl::awgn_error_prob(P2 * Ka, n_c2, k_bits / n_c2);
}

ErrorBudget budget(const RealParams& p, const op::SessionConfig& config,
                   const BudgetOptions& opts) {
    const Mod2Source& mod2 = opts.mod2 ? *opts.mod2 : Mod2Source::exact();
    ErrorBudget b;
    b.eps1 = eps1(config.Ka, p.T, p.V, p.n_p, p.omt);
    b.eps2 = eps2(p.P1, p.V, p.n_c1, p.m_p(), p.T, p.icr, mod2);
    const Eps3Variant variant = p.omt   ? Eps3Variant::omt
                                : p.icr ? Eps3Variant::icr
                                        : Eps3Variant::op;
    b.eps3 = eps3(config.Ka, p.V, p.n_p, p.T, variant);

    double k_f;
    if (opts.exact_kf) {
        k_f = feedback::feedback_bits(static_cast<int>(std::llround(p.V)),
                                      p.n_p, config.Ka);
    } else {
        k_f = feedback::feedback_bits_relaxed(p.V * p.n_p, config.Ka);
    }
    b.eps_f = eps_f(p.P_f, p.N_f, k_f);
    b.eps_f2 = eps_f2(b.eps_f);

    double k_bits = config.k;
    if (p.omt) {
        k_bits -= std::floor(std::log2(p.V * p.n_p));
        if (k_bits < 0.0) k_bits = 0.0;
    }
    b.eps4 = eps4(p.P2, config.Ka, p.n_c2, k_bits);

    b.total = std::min(
        1.0, b.eps1 + b.eps2 + b.eps3 + b.eps4 + b.eps_f + b.eps_f2);
    return b;
}

}  // namespace mra::err
