#include "mra/codes.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <fstream>
#include <random>
#include <sstream>

#include "mra/fbl.hpp"

namespace mra::codes {

InnerCode::InnerCode(BitMatrix generator) : gen_(std::move(generator)) {
    if (gen_.rows() < 1 || gen_.rows() > gen_.cols()) {
        throw std::invalid_argument("InnerCode: need 1 <= m_p <= n_c1");
    }
    if (gen_.rank() != gen_.rows()) {
        throw std::invalid_argument("InnerCode: generator not full rank");
    }
    row_support_.resize(gen_.rows());
    for (int r = 0; r < gen_.rows(); ++r) {
        for (int c = 0; c < gen_.cols(); ++c) {
            if (gen_.get(r, c)) row_support_[r].push_back(static_cast<uint8_t>(c));
        }
    }
}

InnerCode InnerCode::random(int m_p, int n_c1, uint64_t seed) {
    if (m_p < 1 || m_p > n_c1 || n_c1 > 64) {
        throw std::invalid_argument("InnerCode::random: bad shape");
    }
    std::mt19937_64 rng(seed ^ 0x9e3779b97f4a7c15ull);
    const uint64_t colmask =
        n_c1 == 64 ? ~uint64_t{0} : ((uint64_t{1} << n_c1) - 1);
    for (int attempt = 0; attempt < 4096; ++attempt) {
        BitMatrix g(m_p, n_c1);
        for (int r = 0; r < m_p; ++r) g.row(r) = rng() & colmask;
        if (g.rank() == m_p) return InnerCode(std::move(g));
    }
    throw std::runtime_error("InnerCode::random: rejection failed");
}

uint64_t InnerCode::encode_mask(uint64_t msg) const {
    uint64_t cw = 0;
    while (msg) {
        int r = std::countr_zero(msg);
        cw ^= gen_.row(r);
        msg &= msg - 1;
    }
    return cw;
}

uint64_t InnerCode::ml_decode_mod2(std::span<const double> y,
                                   double sigma2) const {
    const int n = length();
    const int m = dimension();
    if (static_cast<int>(y.size()) != n) {
        throw std::invalid_argument("ml_decode_mod2: length mismatch");
    }
    if (m > 26) {
        throw std::invalid_argument("ml_decode_mod2: dimension too large for "
                                    "exhaustive decoding");
    }
    std::array<double, 64> delta{};
    double base = 0.0;
    for (int t = 0; t < n; ++t) {
        const double z0 = y[t];
        const double z1 = z0 >= 1.0 ? z0 - 1.0 : z0 + 1.0;
        const double lp0 = fbl::wrapped_gauss_logpdf(z0, sigma2);
        const double lp1 = fbl::wrapped_gauss_logpdf(z1, sigma2);
        base += lp0;
        delta[t] = lp1 - lp0;
    }
    // Gray-code walk over all messages: step i flips generator row
    // countr_zero(i), so the running score needs only the support of that
    // row. The message reached after step i is i ^ (i >> 1).
    double best = base, score = base;
    uint64_t best_msg = 0, cw = 0;
    const uint64_t total = uint64_t{1} << m;
    for (uint64_t i = 1; i < total; ++i) {
        const int r = std::countr_zero(i);
        for (uint8_t t : row_support_[r]) {
            score += ((cw >> t) & 1u) ? -delta[t] : delta[t];
        }
        cw ^= gen_.row(r);
        const uint64_t msg = i ^ (i >> 1);
        if (score > best || (score == best && msg < best_msg)) {
            best = score;
            best_msg = msg;
        }
    }
    return best_msg;
}

std::vector<uint8_t> encode_inner(const InnerCode& code,
                                  const std::vector<uint8_t>& msg_bits) {
    if (static_cast<int>(msg_bits.size()) != code.dimension()) {
        throw std::invalid_argument("encode_inner: message length mismatch");
    }
    uint64_t msg = 0;
    for (size_t r = 0; r < msg_bits.size(); ++r) {
        if (msg_bits[r]) msg |= uint64_t{1} << r;
    }
    const uint64_t cw = code.encode_mask(msg);
    std::vector<uint8_t> out(code.length());
    for (int c = 0; c < code.length(); ++c) out[c] = (cw >> c) & 1u;
    return out;
}

AuxCode::AuxCode(BitMatrix pc, int min_distance)
    : parity_check(std::move(pc)), d(min_distance) {
    n_p = parity_check.cols();
    m_p = parity_check.rows();
    k_p = n_p - m_p;
    if (k_p < 1) throw std::invalid_argument("AuxCode: k_p must be >= 1");
    if (d < 1) throw std::invalid_argument("AuxCode: bad distance");
    t_cap = (d - 1) / 2;
    columns_.resize(n_p);
    for (int u = 0; u < n_p; ++u) {
        uint64_t col = 0;
        for (int r = 0; r < m_p; ++r) {
            if (parity_check.get(r, u)) col |= uint64_t{1} << r;
        }
        columns_[u] = col;
    }
    for (int u = 0; u < n_p; ++u) {
        if (columns_[u] == 0) {
            throw std::invalid_argument("AuxCode: zero parity-check column");
        }
        for (int v = u + 1; v < n_p; ++v) {
            if (columns_[u] == columns_[v]) {
                throw std::invalid_argument("AuxCode: repeated parity-check column");
            }
        }
    }
}

uint64_t AuxCode::syndrome_of_mask(uint64_t indicator) const {
    uint64_t syn = 0;
    while (indicator) {
        int u = std::countr_zero(indicator);
        if (u >= n_p) throw std::invalid_argument("syndrome_of: index out of range");
        syn ^= columns_[u];
        indicator &= indicator - 1;
    }
    return syn;
}

uint64_t syndrome_of(const AuxCode& aux, const std::vector<uint8_t>& indicator) {
    if (static_cast<int>(indicator.size()) != aux.n_p) {
        throw std::invalid_argument("syndrome_of: indicator length mismatch");
    }
    uint64_t mask = 0;
    for (size_t u = 0; u < indicator.size(); ++u) {
        if (indicator[u]) mask |= uint64_t{1} << u;
    }
    return aux.syndrome_of_mask(mask);
}

SyndromeTable::SyndromeTable(const AuxCode& aux, int t_max) {
    const int T = t_max < 0 ? aux.t_cap : t_max;
    size_t expected = 0;
    {
        double acc = 0.0;
        for (int w = 0; w <= T; ++w) {
            double c = 1.0;
            for (int i = 0; i < w; ++i) c = c * (aux.n_p - i) / (i + 1);
            acc += c;
        }
        expected = static_cast<size_t>(acc + 0.5);
    }
    map_.reserve(expected * 2);
    map_.emplace(0, 0);
    // lexicographic combinations of each weight
    std::array<int, 64> idx{};
    for (int w = 1; w <= T; ++w) {
        for (int i = 0; i < w; ++i) idx[i] = i;
        while (true) {
            uint64_t mask = 0, syn = 0;
            for (int i = 0; i < w; ++i) {
                mask |= uint64_t{1} << idx[i];
                syn ^= aux.column(idx[i] + 1);
            }
            auto [it, inserted] = map_.emplace(syn, mask);
            if (!inserted) {
                throw std::logic_error(
                    "SyndromeTable: syndromes of weight <= T not distinct");
            }
            int pos = w - 1;
            while (pos >= 0 && idx[pos] == aux.n_p - w + pos) --pos;
            if (pos < 0) break;
            ++idx[pos];
            for (int i = pos + 1; i < w; ++i) idx[i] = idx[i - 1] + 1;
        }
    }
    if (map_.size() != expected) {
        throw std::logic_error("SyndromeTable: unexpected table size");
    }
}

std::optional<uint64_t> SyndromeTable::decode(uint64_t syndrome) const {
    auto it = map_.find(syndrome);
    if (it == map_.end()) return std::nullopt;
    return it->second;
}

// ---------------------------------------------------------------------------

namespace {

BitMatrix repetition_parity(int n) {
    // rows e_i + e_{n-1}: unit columns plus one all-ones column
    BitMatrix h(n - 1, n);
    for (int r = 0; r < n - 1; ++r) {
        h.set(r, r, true);
        h.set(r, n - 1, true);
    }
    return h;
}

}  // namespace

Catalog Catalog::parse(std::string_view text) {
    Catalog cat;
    std::istringstream in{std::string(text)};
    std::string line;
    while (std::getline(in, line)) {
        auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        std::istringstream row(line);
        int n, k, d;
        if (!(row >> n >> k >> d)) continue;
        if (n < 2 || k < 1 || k >= n || d < 1) {
            throw std::invalid_argument("Catalog: bad row: " + line);
        }
        CatalogEntry e{n, k, d, std::nullopt};
        std::string tok;
        if (row >> tok) {
            if (tok == "rep") {
                e.parity = repetition_parity(n);
            } else if (tok.rfind("hex:", 0) == 0) {
                e.parity = BitMatrix::from_hex(n - k, n, tok.substr(4));
            } else {
                throw std::invalid_argument("Catalog: unknown construction: " + tok);
            }
        }
        const uint32_t key = static_cast<uint32_t>(n) << 8 | static_cast<uint32_t>(k);
        auto it = cat.index_.find(key);
        if (it != cat.index_.end()) {
            // keep the larger distance; prefer constructive on ties
            CatalogEntry& old = cat.entries_[it->second];
            if (e.d > old.d || (e.d == old.d && !old.parity && e.parity)) {
                old = std::move(e);
            }
        } else {
            cat.index_.emplace(key, cat.entries_.size());
            cat.entries_.push_back(std::move(e));
        }
    }
    return cat;
}

Catalog Catalog::load(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw std::runtime_error("Catalog::load: cannot open " + path);
    std::ostringstream ss;
    ss << f.rdbuf();
    return parse(ss.str());
}

const Catalog& Catalog::builtin() {
    static const Catalog cat = [] {
#include "catalog_data.inc"
        return parse(kCatalogText);
    }();
    return cat;
}

const CatalogEntry* Catalog::find(int n, int k) const {
    if (n < 2 || n > 255 || k < 1 || k > 255) return nullptr;
    auto it = index_.find(static_cast<uint32_t>(n) << 8 | static_cast<uint32_t>(k));
    if (it == index_.end()) return nullptr;
    return &entries_[it->second];
}

BestDistance best_min_distance(int n_p, int k_p, const Catalog& catalog) {
    const CatalogEntry* e = catalog.find(n_p, k_p);
    if (!e) throw NotInCatalog(n_p, k_p);
    return BestDistance{e->d, e->parity};
}

AuxCode aux_from_catalog(int n_p, int k_p, const Catalog& catalog) {
    const CatalogEntry* e = catalog.find(n_p, k_p);
    if (!e || !e->parity) throw NotInCatalog(n_p, k_p);
    return AuxCode(*e->parity, e->d);
}

}  // namespace mra::codes
