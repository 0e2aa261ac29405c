#include "mra/op_phase.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <cstdio>
#include <stdexcept>

namespace mra::op {

namespace {

double mod2_into(double x) {
    double m = std::fmod(x, 2.0);
    if (m < 0.0) m += 2.0;
    if (m >= 2.0) m = 0.0;
    return m;
}

uint64_t bounded(std::mt19937_64& rng, uint64_t n) {
    // rejection keeps the draw exactly uniform
    const uint64_t lim = ~uint64_t{0} - ~uint64_t{0} % n;
    uint64_t x;
    do {
        x = rng();
    } while (x >= lim);
    return x % n;
}

}  // namespace

void SessionConfig::validate() const {
    if (Ka < 1) throw std::invalid_argument("SessionConfig: Ka must be >= 1");
    if (k < 1) throw std::invalid_argument("SessionConfig: k must be >= 1");
    if (N < 1) throw std::invalid_argument("SessionConfig: N must be >= 1");
    if (!(eps_target > 0.0 && eps_target < 1.0)) {
        throw std::invalid_argument("SessionConfig: eps_target must be in (0, 1)");
    }
}

void SchemeParams::validate() const {
    if (k_p < 1 || n_p <= k_p) throw std::invalid_argument("SchemeParams: need 1 <= k_p < n_p");
    if (n_p > 63) throw std::invalid_argument("SchemeParams: n_p too large");
    if (d < 1) throw std::invalid_argument("SchemeParams: bad d");
    if (T != (d - 1) / 2) throw std::invalid_argument("SchemeParams: T must be floor((d-1)/2)");
    if (n_c1 < 1 || n_c1 > 64) throw std::invalid_argument("SchemeParams: bad n_c1");
    if (n_c2 < 1) throw std::invalid_argument("SchemeParams: bad n_c2");
    if (V < 1) throw std::invalid_argument("SchemeParams: bad V");
    if (N_f < 0) throw std::invalid_argument("SchemeParams: bad N_f");
    if (!(P1 > 0.0) || !(P2 > 0.0) || !(P_f > 0.0)) {
        throw std::invalid_argument("SchemeParams: powers must be positive");
    }
    if (m_p() > n_c1) throw std::invalid_argument("SchemeParams: m_p exceeds n_c1");
}

void SchemeParams::validate_against(const SessionConfig& config) const {
    validate();
    config.validate();
    const long used = static_cast<long>(V) * n_c1 + N_f +
                      static_cast<long>(config.Ka) * n_c2;
    if (used != config.N) {
        throw std::invalid_argument("SchemeParams: V*n_c1 + N_f + Ka*n_c2 != N");
    }
    if (static_cast<long>(V) * n_p < config.Ka) {
        throw std::invalid_argument("SchemeParams: V*n_p must cover Ka users");
    }
}

Identity select_identity_uniform(int V, int n_p, std::mt19937_64& rng) {
    return Identity{static_cast<int>(bounded(rng, V)) + 1,
                    static_cast<int>(bounded(rng, n_p)) + 1};
}

int omt_prefix_bits(int V, int n_p) {
    const long total = static_cast<long>(V) * n_p;
    if (total < 2) throw std::invalid_argument("omt_prefix_bits: V*n_p must be >= 2");
    return std::bit_width(static_cast<uint64_t>(total)) - 1;
}

Identity select_identity_omt(uint32_t prefix, int V, int n_p,
                             std::mt19937_64& rng) {
    const int k1 = omt_prefix_bits(V, n_p);
    const long pow2 = 1L << k1;
    const long total = static_cast<long>(V) * n_p;
    if (prefix >= static_cast<uint64_t>(pow2)) {
        throw std::invalid_argument("select_identity_omt: prefix out of range");
    }
    long s = static_cast<long>(prefix) + 1;
    if (s <= total - pow2 && (rng() & 1u)) s += pow2;
    return unflatten(s, V);
}

uint32_t omt_prefix_of(const Identity& id, int V, int n_p) {
    const int k1 = omt_prefix_bits(V, n_p);
    const long pow2 = 1L << k1;
    long s = flatten(id, V);
    if (s > pow2) s -= pow2;
    return static_cast<uint32_t>(s - 1);
}

std::vector<std::vector<double>> omt_mass(int V, int n_p) {
    const int k1 = omt_prefix_bits(V, n_p);
    const long pow2 = 1L << k1;
    const long total = static_cast<long>(V) * n_p;
    const double lo = 1.0 / static_cast<double>(2 * pow2);
    const double hi = 1.0 / static_cast<double>(pow2);
    std::vector<std::vector<double>> mass(V, std::vector<double>(n_p));
    for (int v = 1; v <= V; ++v) {
        for (int u = 1; u <= n_p; ++u) {
            const long s = flatten(Identity{v, u}, V);
            const bool duplicated = s <= total - pow2 || s > pow2;
            mass[v - 1][u - 1] = duplicated ? lo : hi;
        }
    }
    return mass;
}

Scheme::Scheme(SchemeParams params, codes::AuxCode aux, codes::InnerCode inner)
    : params_(params),
      aux_(std::move(aux)),
      inner_(std::move(inner)),
      table_(aux_) {
    params_.validate();
    if (aux_.n_p != params_.n_p || aux_.k_p != params_.k_p ||
        aux_.d != params_.d || aux_.t_cap != params_.T) {
        throw std::invalid_argument("Scheme: auxiliary code disagrees with params");
    }
    if (inner_.dimension() != params_.m_p() || inner_.length() != params_.n_c1) {
        throw std::invalid_argument("Scheme: inner code disagrees with params");
    }
    amp_ = 2.0 * std::sqrt(params_.P1 * params_.V);
    sigma2_ = 1.0 / (4.0 * params_.P1 * params_.V);
    signals_.resize(static_cast<size_t>(params_.n_p) * params_.n_c1);
    for (int u = 1; u <= params_.n_p; ++u) {
        const uint64_t cw = inner_.encode_mask(aux_.column(u));
        double* x = &signals_[static_cast<size_t>(u - 1) * params_.n_c1];
        for (int t = 0; t < params_.n_c1; ++t) {
            x[t] = amp_ * ((((cw >> t) & 1u) ? 1.0 : 0.0) - 0.5);
        }
    }
}

Scheme Scheme::build(const SchemeParams& params) {
    codes::AuxCode aux = codes::aux_from_catalog(params.n_p, params.k_p);
    if (aux.d != params.d) {
        throw std::invalid_argument("Scheme::build: catalog distance differs from params.d");
    }
    codes::InnerCode inner =
        codes::InnerCode::random(params.m_p(), params.n_c1, params.code_seed);
    return Scheme(params, std::move(aux), std::move(inner));
}

std::span<const double> Scheme::signal(int u) const {
    return {&signals_[static_cast<size_t>(u - 1) * params_.n_c1],
            static_cast<size_t>(params_.n_c1)};
}

std::vector<double> modulate(const Scheme& scheme, int u) {
    if (u < 1 || u > scheme.params().n_p) {
        throw std::invalid_argument("modulate: index out of range");
    }
    auto s = scheme.signal(u);
    return {s.begin(), s.end()};
}

std::vector<double> subblock_channel(
    const std::vector<std::vector<double>>& signals, int n_c1,
    std::mt19937_64& rng) {
    std::vector<double> y(n_c1, 0.0);
    for (const auto& x : signals) {
        if (static_cast<int>(x.size()) != n_c1) {
            throw std::invalid_argument("subblock_channel: signal length mismatch");
        }
        for (int t = 0; t < n_c1; ++t) y[t] += x[t];
    }
    NormalDraw normal;
    for (int t = 0; t < n_c1; ++t) y[t] += normal(rng);
    return y;
}

std::optional<std::vector<int>> op_decode_single(std::span<const double> y,
                                                 int t_hat,
                                                 const Scheme& scheme,
                                                 double sigma2) {
    const int n = scheme.params().n_c1;
    if (static_cast<int>(y.size()) != n) {
        throw std::invalid_argument("op_decode_single: length mismatch");
    }
    if (t_hat < 0) throw std::invalid_argument("op_decode_single: bad t_hat");
    std::array<double, 64> folded;
    const double scale = 1.0 / scheme.amplitude();
    const double dither = 0.5 * t_hat;
    for (int t = 0; t < n; ++t) {
        folded[t] = mod2_into(y[t] * scale + dither);
    }
    const uint64_t syndrome =
        scheme.inner().ml_decode_mod2({folded.data(), static_cast<size_t>(n)},
                                      sigma2);
    const auto support = scheme.table().decode(syndrome);
    if (!support) return std::nullopt;
    std::vector<int> list;
    uint64_t mask = *support;
    while (mask) {
        list.push_back(std::countr_zero(mask) + 1);
        mask &= mask - 1;
    }
    return list;
}

std::optional<std::vector<std::vector<int>>> icr_decode(
    std::span<const double> y, int t_hat, const Scheme& scheme) {
    const int n = scheme.params().n_c1;
    if (t_hat < 0) throw std::invalid_argument("icr_decode: bad t_hat");
    std::array<double, 64> cur;
    std::copy(y.begin(), y.end(), cur.begin());
    double sigma2 = scheme.base_sigma2();
    int cur_t = t_hat;
    std::vector<std::vector<int>> lists;
    for (int level = 0; level < 64; ++level) {
        auto list = op_decode_single({cur.data(), static_cast<size_t>(n)},
                                     cur_t, scheme, sigma2);
        if (!list) return std::nullopt;
        const int got = static_cast<int>(list->size());
        lists.push_back(std::move(*list));
        if (got == cur_t) return lists;
        if (got > cur_t) return std::nullopt;
        const int diff = cur_t - got;
        if (diff % 2 != 0) return std::nullopt;
        cur_t = diff / 2;
        for (int u : lists.back()) {
            auto x = scheme.signal(u);
            for (int t = 0; t < n; ++t) cur[t] -= x[t];
        }
        for (int t = 0; t < n; ++t) cur[t] *= 0.5;
        sigma2 *= 0.25;  // halving the residual halves the noise amplitude
    }
    return std::nullopt;
}

namespace {

void residual_into(const std::vector<std::vector<int>>& lists,
                   std::span<const double> y, const Scheme& scheme,
                   double* out) {
    const int n = scheme.params().n_c1;
    std::copy(y.begin(), y.end(), out);
    double weight = 1.0;
    for (const auto& list : lists) {
        for (int u : list) {
            auto x = scheme.signal(u);
            for (int t = 0; t < n; ++t) out[t] -= weight * x[t];
        }
        weight *= 2.0;
    }
}

}  // namespace

FinalizedLists finalize_lists(const std::vector<std::vector<int>>& lists,
                              std::span<const double> y,
                              const Scheme& scheme) {
    if (lists.empty()) throw std::invalid_argument("finalize_lists: no lists");
    FinalizedLists out;
    uint64_t later = 0;
    for (size_t l = 1; l < lists.size(); ++l) {
        for (int u : lists[l]) later |= uint64_t{1} << (u - 1);
    }
    for (int u : lists[0]) {
        if (!((later >> (u - 1)) & 1u)) out.singles.push_back(u);
    }
    std::sort(out.singles.begin(), out.singles.end());
    out.residual.resize(y.size());
    residual_into(lists, y, scheme, out.residual.data());
    return out;
}

SubblockDecode decode_subblock(std::span<const double> y, const Scheme& scheme) {
    const auto& p = scheme.params();
    const int n = p.n_c1;
    SubblockDecode best;
    best.candidates.resize(p.T + 1);
    double best_norm = 0.0;
    std::array<double, 64> res;
    for (int t_hat = 0; t_hat <= p.T; ++t_hat) {
        std::vector<std::vector<int>> lists;
        if (p.icr) {
            auto got = icr_decode(y, t_hat, scheme);
            if (!got) continue;
            lists = std::move(*got);
        } else {
            auto got = op_decode_single(y, t_hat, scheme, scheme.base_sigma2());
            if (!got) continue;
            lists.push_back(std::move(*got));
        }
        residual_into(lists, y, scheme, res.data());
        double norm = 0.0;
        for (int t = 0; t < n; ++t) norm += res[t] * res[t];
        {
            auto& cand = best.candidates[t_hat];
            cand.ok = true;
            uint64_t later = 0;
            for (size_t l = 1; l < lists.size(); ++l) {
                for (int u : lists[l]) later |= uint64_t{1} << (u - 1);
            }
            for (int u : lists[0]) {
                if (!((later >> (u - 1)) & 1u)) cand.singles.push_back(u);
            }
            std::sort(cand.singles.begin(), cand.singles.end());
        }
        if (!best.decoded || norm < best_norm) {
            best.decoded = true;
            best_norm = norm;
            best.t_star = t_hat;
            best.residual_norm2 = norm;
            uint64_t later = 0;
            for (size_t l = 1; l < lists.size(); ++l) {
                for (int u : lists[l]) later |= uint64_t{1} << (u - 1);
            }
            best.singles.clear();
            for (int u : lists[0]) {
                if (!((later >> (u - 1)) & 1u)) best.singles.push_back(u);
            }
            std::sort(best.singles.begin(), best.singles.end());
            best.collided.clear();
            while (later) {
                best.collided.push_back(std::countr_zero(later) + 1);
                later &= later - 1;
            }
        }
    }
    return best;
}

OccupancyEstimate build_occupancy_estimate(
    const std::vector<SubblockDecode>& per_subblock, int Ka,
    const Scheme& scheme, std::mt19937_64& rng) {
    const auto& p = scheme.params();
    if (static_cast<int>(per_subblock.size()) != p.V) {
        throw std::invalid_argument("build_occupancy_estimate: need V results");
    }
    const long total = static_cast<long>(p.V) * p.n_p;
    if (total < Ka) {
        throw std::invalid_argument("build_occupancy_estimate: V*n_p < Ka");
    }
    OccupancyEstimate est;
    est.V = p.V;
    est.n_p = p.n_p;
    est.s_hat.assign(total, 0);
    std::vector<uint8_t> is_collided(total, 0);
    for (int v = 1; v <= p.V; ++v) {
        const auto& r = per_subblock[v - 1];
        for (int u : r.singles) {
            est.s_hat[flatten(Identity{v, u}, p.V) - 1] = 1;
        }
        for (int u : r.collided) {
            const long pos = flatten(Identity{v, u}, p.V) - 1;
            is_collided[pos] = 1;
            est.collided.push_back(pos + 1);
        }
    }
    long ones = std::count(est.s_hat.begin(), est.s_hat.end(), uint8_t{1});
    if (ones < Ka) {
        std::vector<long> eligible;
        std::vector<long> flagged;
        for (long pos = 0; pos < total; ++pos) {
            if (est.s_hat[pos]) continue;
            (is_collided[pos] ? flagged : eligible).push_back(pos);
        }
        long need = Ka - ones;
        auto draw_from = [&](std::vector<long>& pool) {
            while (need > 0 && !pool.empty()) {
                const size_t i = bounded(rng, pool.size());
                const long pos = pool[i];
                pool[i] = pool.back();
                pool.pop_back();
                est.s_hat[pos] = 1;
                est.padded.push_back(pos + 1);
                --need;
            }
        };
        draw_from(eligible);
        draw_from(flagged);  // unreachable unless flags exceed V*n_p - Ka
    } else if (ones > Ka) {
        std::vector<long> pool;
        for (long pos = 0; pos < total; ++pos) {
            if (est.s_hat[pos]) pool.push_back(pos);
        }
        long drop = ones - Ka;
        while (drop > 0) {
            const size_t i = bounded(rng, pool.size());
            const long pos = pool[i];
            pool[i] = pool.back();
            pool.pop_back();
            est.s_hat[pos] = 0;
            est.erased.push_back(pos + 1);
            --drop;
        }
    }
    est.assignment.reserve(Ka);
    for (long pos = 0; pos < total; ++pos) {
        if (est.s_hat[pos]) est.assignment.push_back(pos + 1);
    }
    std::sort(est.collided.begin(), est.collided.end());
    std::sort(est.padded.begin(), est.padded.end());
    std::sort(est.erased.begin(), est.erased.end());
    return est;
}

void write_observation(const std::string& path, std::span<const double> y) {
    std::FILE* f = std::fopen(path.c_str(), "wb");
    if (!f) throw std::runtime_error("write_observation: cannot open " + path);
    // native x86-64 doubles are little-endian IEEE 754
    const size_t n = std::fwrite(y.data(), sizeof(double), y.size(), f);
    std::fclose(f);
    if (n != y.size()) throw std::runtime_error("write_observation: short write");
}

std::vector<double> read_observation(const std::string& path) {
    std::FILE* f = std::fopen(path.c_str(), "rb");
    if (!f) throw std::runtime_error("read_observation: cannot open " + path);
    std::fseek(f, 0, SEEK_END);
    const long bytes = std::ftell(f);
    std::fseek(f, 0, SEEK_SET);
    std::vector<double> out(bytes / sizeof(double));
    const size_t n = std::fread(out.data(), sizeof(double), out.size(), f);
    std::fclose(f);
    if (n != out.size()) throw std::runtime_error("read_observation: short read");
    return out;
}

}  // namespace mra::op
