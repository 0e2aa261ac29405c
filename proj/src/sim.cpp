#include "mra/sim.hpp"

#include <algorithm>
#include <array>
#include <atomic>
#include <cmath>
#include <mutex>
#include <thread>

#include "mra/feedback.hpp"

namespace mra::sim {

namespace {

uint64_t bounded(std::mt19937_64& rng, uint64_t n) {
    const uint64_t lim = ~uint64_t{0} - ~uint64_t{0} % n;
    uint64_t x;
    do {
        x = rng();
    } while (x >= lim);
    return x % n;
}

// stream labels for the per-trial seed fan-out
enum : uint64_t { kIdentity = 1, kNoise = 2, kBalance = 3, kPhase23 = 4 };

struct PhaseRates {
    double eps_f = 0.0;
    double eps4 = 0.0;
};

PhaseRates phase_rates(const op::Scheme& scheme,
                       const op::SessionConfig& config,
                       const SimOptions& opt) {
    PhaseRates r;
    const auto& p = scheme.params();
    if (opt.phase23) {
        const int k_f = feedback::feedback_bits(p.V, p.n_p, config.Ka);
        r.eps_f = err::eps_f(p.P_f, p.N_f, k_f);
        double k_bits = config.k;
        if (p.omt) k_bits -= op::omt_prefix_bits(p.V, p.n_p);
        r.eps4 = err::eps4(p.P2, config.Ka, p.n_c2, std::max(0.0, k_bits));
    }
    if (opt.eps_f_override) r.eps_f = *opt.eps_f_override;
    if (opt.eps4_override) r.eps4 = *opt.eps4_override;
    return r;
}

}  // namespace

Tallies& Tallies::operator+=(const Tallies& o) {
    subblock_loss += o.subblock_loss;
    collision += o.collision;
    erasure += o.erasure;
    misselect += o.misselect;
    feedback += o.feedback;
    data += o.data;
    return *this;
}

SessionOutcome run_session(const op::Scheme& scheme,
                           const op::SessionConfig& config, uint64_t seed,
                           uint64_t trial, const SimOptions& opt) {
    const auto& p = scheme.params();
    p.validate_against(config);
    const int Ka = config.Ka;
    const int V = p.V;
    const int n_p = p.n_p;
    const PhaseRates rates = phase_rates(scheme, config, opt);

    // ------------------------------------------------------------------ ids
    std::vector<op::Identity> ids(Ka);
    const int k1 = p.omt ? op::omt_prefix_bits(V, n_p) : 0;
    for (int i = 0; i < Ka; ++i) {
        auto rng = make_rng(seed, trial, kIdentity, i);
        if (p.omt) {
            const uint32_t prefix =
                static_cast<uint32_t>(bounded(rng, uint64_t{1} << k1));
            ids[i] = op::select_identity_omt(prefix, V, n_p, rng);
        } else {
            ids[i] = op::select_identity_uniform(V, n_p, rng);
        }
    }
    std::vector<int> s_count(static_cast<size_t>(V) * n_p, 0);
    std::vector<std::vector<int>> users_in(V + 1);
    for (int i = 0; i < Ka; ++i) {
        s_count[op::flatten(ids[i], V) - 1]++;
        users_in[ids[i].v].push_back(i);
    }

    // --------------------------------------------------------- sub-blocks
    std::vector<op::SubblockDecode> results(V);
    std::vector<uint8_t> subblock_g(V + 1, 0);  // misselection with clean truth
    const int n = p.n_c1;
    std::vector<double> y(n);
    for (int v = 1; v <= V; ++v) {
        std::fill(y.begin(), y.end(), 0.0);
        for (int i : users_in[v]) {
            auto x = scheme.signal(ids[i].u);
            for (int t = 0; t < n; ++t) y[t] += x[t];
        }
        if (!opt.zero_noise) {
            auto rng = make_rng(seed, trial, kNoise, v);
            NormalDraw normal;
            for (int t = 0; t < n; ++t) y[t] += normal(rng);
        }
        results[v - 1] = op::decode_subblock(y, scheme);

        const int t_v = static_cast<int>(users_in[v].size());
        if (t_v <= p.T) {
            std::vector<int> truth;
            for (int i : users_in[v]) {
                const int u = ids[i].u;
                if (s_count[op::flatten({v, u}, V) - 1] == 1) truth.push_back(u);
            }
            std::sort(truth.begin(), truth.end());
            const auto& cand = results[v - 1].candidates[t_v];
            if (cand.ok && cand.singles == truth && results[v - 1].decoded &&
                results[v - 1].t_star != t_v) {
                subblock_g[v] = 1;
            }
        }
    }

    // ------------------------------------------------------------ balance
    auto balance_rng = make_rng(seed, trial, kBalance, 0);
    op::OccupancyEstimate est =
        op::build_occupancy_estimate(results, Ka, scheme, balance_rng);
    std::vector<uint8_t> erased(static_cast<size_t>(V) * n_p, 0);
    for (long pos : est.erased) erased[pos - 1] = 1;

    // --------------------------------------------------------- phases 2-3
    std::vector<int> slot_load(Ka + 1, 0);
    std::vector<int> own_slot(Ka, 0);  // 0: not transmitting in own slot
    std::vector<uint8_t> fb_fail(Ka, 0);
    std::vector<double> data_draw(Ka, 1.0);
    for (int i = 0; i < Ka; ++i) {
        auto rng = make_rng(seed, trial, kPhase23, i);
        const double fb_u = uniform01(rng);
        fb_fail[i] = fb_u < rates.eps_f;
        uint64_t interferer_slot = 0;
        if (fb_fail[i]) {
            interferer_slot = 1 + bounded(rng, Ka);
        }
        data_draw[i] = uniform01(rng);
        if (fb_fail[i]) {
            if (opt.feedback_model == SimOptions::FeedbackModel::pessimistic) {
                slot_load[interferer_slot]++;
            }
            continue;
        }
        auto slot = feedback::user_find_slot(est, ids[i]);
        if (slot) {
            own_slot[i] = *slot;
            slot_load[*slot]++;
        }
    }

    // ------------------------------------------------------------- verdict
    SessionOutcome out;
    for (int i = 0; i < Ka; ++i) {
        const long pos = op::flatten(ids[i], V) - 1;
        const int v = ids[i].v;
        const int others = static_cast<int>(users_in[v].size()) - 1;
        const bool collided = s_count[pos] >= 2;
        const bool was_erased = erased[pos] != 0;
        const bool alone =
            own_slot[i] > 0 && slot_load[own_slot[i]] == 1;
        const bool data_ok = data_draw[i] >= rates.eps4;
        const bool recovered = !fb_fail[i] && alone && data_ok;
        if (recovered) continue;

        out.user_errors++;
        if (others >= p.T || !results[v - 1].decoded) out.tallies.subblock_loss++;
        if (collided) out.tallies.collision++;
        if (was_erased) out.tallies.erasure++;
        if (subblock_g[v]) out.tallies.misselect++;
        if (fb_fail[i] ||
            (own_slot[i] > 0 && slot_load[own_slot[i]] > 1)) {
            out.tallies.feedback++;
        }
        if (own_slot[i] > 0 && slot_load[own_slot[i]] == 1 && !data_ok) {
            out.tallies.data++;
        }
        if (subblock_g[v] && !collided && !was_erased && others < p.T &&
            s_count[pos] == 1) {
            out.eg_users++;
        }
        if (was_erased && s_count[pos] == 1) out.ee_users++;
    }
    return out;
}

SessionReport estimate_pupe(const op::Scheme& scheme,
                            const op::SessionConfig& config, long trials,
                            uint64_t seed, const SimOptions& opt) {
    if (trials < 1) throw std::invalid_argument("estimate_pupe: trials must be >= 1");
    scheme.params().validate_against(config);

    const int threads = opt.threads > 0
                            ? opt.threads
                            : std::max(1u, std::thread::hardware_concurrency());
    std::atomic<long> next{0};
    std::mutex merge_mu;
    long total_errors = 0;
    unsigned long long total_err_sq = 0;
    long total_eg = 0, total_ee = 0;
    Tallies tallies;

    auto worker = [&] {
        long errors = 0, eg = 0, ee = 0;
        unsigned long long err_sq = 0;
        Tallies local;
        for (long t = next.fetch_add(1); t < trials; t = next.fetch_add(1)) {
            SessionOutcome o = run_session(scheme, config, seed,
                                           static_cast<uint64_t>(t), opt);
            errors += o.user_errors;
            err_sq += static_cast<unsigned long long>(o.user_errors) *
                      o.user_errors;
            eg += o.eg_users;
            ee += o.ee_users;
            local += o.tallies;
        }
        std::lock_guard<std::mutex> lock(merge_mu);
        total_errors += errors;
        total_err_sq += err_sq;
        total_eg += eg;
        total_ee += ee;
        tallies += local;
    };
    if (threads <= 1 || trials < 4) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (int t = 0; t < threads; ++t) pool.emplace_back(worker);
        for (auto& th : pool) th.join();
    }

    SessionReport rep;
    rep.trials = trials;
    rep.Ka = config.Ka;
    rep.user_errors = total_errors;
    rep.tallies = tallies;
    const double ka = config.Ka;
    const double users = static_cast<double>(trials) * ka;
    rep.pupe = total_errors / users;
    if (trials >= 2) {
        const double mean = rep.pupe;
        const double sum_f2 = static_cast<double>(total_err_sq) / (ka * ka);
        const double var =
            std::max(0.0, (sum_f2 - trials * mean * mean) / (trials - 1.0));
        rep.ci95 = 1.96 * std::sqrt(var / trials);
    } else {
        rep.ci95 = 1.0;
    }
    rep.eps_g_hat = total_eg / users;
    rep.eps_e_hat = total_ee / users;
    const PhaseRates rates = phase_rates(scheme, config, opt);
    rep.eps_f_used = rates.eps_f;
    rep.eps4_used = rates.eps4;
    return rep;
}

double calibrate_p2(const op::Scheme& scheme, const op::SessionConfig& config,
                    double target, long trials, uint64_t seed,
                    const SimOptions& opt) {
    if (!(target > 0.0 && target < 1.0)) {
        throw std::invalid_argument("calibrate_p2: target must be in (0, 1)");
    }
    const auto& p = scheme.params();
    double k_bits = config.k;
    if (p.omt) k_bits -= op::omt_prefix_bits(p.V, p.n_p);
    k_bits = std::max(0.0, k_bits);

    auto probe = [&](double p2) {
        SimOptions o = opt;
        o.eps4_override = err::eps4(p2, config.Ka, p.n_c2, k_bits);
        return estimate_pupe(scheme, config, trials, seed, o);
    };

    double p2 = p.P2;
    SessionReport rep = probe(p2);
    if (std::abs(rep.pupe - target) <= rep.ci95) return p2;

    // bracket: higher power can only reduce the common-random-number rate
    double lo = p2, hi = p2;
    if (rep.pupe > target) {
        for (int i = 0; i < 40 && probe(hi).pupe > target; ++i) hi *= 2.0;
    } else {
        for (int i = 0; i < 40; ++i) {
            lo /= 2.0;
            if (probe(lo).pupe >= target) break;
        }
    }
    for (int i = 0; i < 40; ++i) {
        const double mid = std::sqrt(lo * hi);
        rep = probe(mid);
        if (std::abs(rep.pupe - target) <= rep.ci95 || (hi - lo) < 1e-9 * hi) {
            return mid;
        }
        if (rep.pupe > target) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    return std::sqrt(lo * hi);
}

}  // namespace mra::sim
