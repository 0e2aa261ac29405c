#pragma once

// Binary linear code machinery for the scheduling-request phase: the inner
// code C carrying parity-check columns over a sub-block (ML-decoded on the
// mod-2 channel) and the auxiliary code whose parity-check columns form the
// index alphabet (bounded-distance syndrome decoding).

#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

#include "mra/bitmat.hpp"

namespace mra::codes {

class NotInCatalog : public std::runtime_error {
  public:
    NotInCatalog(int n, int k)
        : std::runtime_error("no catalog entry for (" + std::to_string(n) +
                             ", " + std::to_string(k) + ")") {}
};

// Inner code C: generator G of shape m_p x n_c1, full row rank.
class InnerCode {
  public:
    explicit InnerCode(BitMatrix generator);

    // Uniformly random full-rank generator, rejection-sampled from `seed`.
    static InnerCode random(int m_p, int n_c1, uint64_t seed);

    int dimension() const { return gen_.rows(); }
    int length() const { return gen_.cols(); }
    const BitMatrix& generator() const { return gen_; }

    // Codeword of the message whose bit r multiplies generator row r.
    uint64_t encode_mask(uint64_t msg) const;

    // Exhaustive ML decoding over the mod-2 channel with noise variance
    // sigma2; y is componentwise in [0, 2). Returns the message mask.
    // Ties break toward the numerically smallest message.
    uint64_t ml_decode_mod2(std::span<const double> y, double sigma2) const;

  private:
    BitMatrix gen_;
    std::vector<std::vector<uint8_t>> row_support_;
};

std::vector<uint8_t> encode_inner(const InnerCode& code,
                                  const std::vector<uint8_t>& msg_bits);

// Auxiliary code given by its parity-check matrix H (m_p x n_p). Columns
// must be distinct and nonzero so single indices are recoverable.
struct AuxCode {
    AuxCode(BitMatrix parity_check, int min_distance);

    BitMatrix parity_check;  // m_p x n_p
    int n_p = 0;
    int k_p = 0;
    int m_p = 0;
    int d = 0;
    int t_cap = 0;  // floor((d-1)/2)

    // Column u (1-based index) as an m_p-bit mask.
    uint64_t column(int u) const { return columns_[u - 1]; }

    // H * indicator over GF(2); indicator bit u-1 selects column u.
    uint64_t syndrome_of_mask(uint64_t indicator) const;

  private:
    std::vector<uint64_t> columns_;
};

uint64_t syndrome_of(const AuxCode& aux, const std::vector<uint8_t>& indicator);

// Eager table mapping each syndrome of a weight <= T error pattern to its
// unique support. Construction fails if two patterns share a syndrome.
class SyndromeTable {
  public:
    explicit SyndromeTable(const AuxCode& aux, int t_max = -1);

    // Support mask for the syndrome, or nullopt (detected failure).
    std::optional<uint64_t> decode(uint64_t syndrome) const;

    size_t size() const { return map_.size(); }

  private:
    std::unordered_map<uint64_t, uint64_t> map_;
};

// ---------------------------------------------------------------------------
// Catalog of achievable minimum distances, with explicit parity-check
// matrices where a construction ships with the library.

struct CatalogEntry {
    int n = 0;
    int k = 0;
    int d = 0;
    std::optional<BitMatrix> parity;  // present when constructive
};

class Catalog {
  public:
    // Parse "n k d [construction]" rows; '#' starts a comment.
    static Catalog parse(std::string_view text);
    static Catalog load(const std::string& path);
    static const Catalog& builtin();

    const CatalogEntry* find(int n, int k) const;
    const std::vector<CatalogEntry>& entries() const { return entries_; }

  private:
    std::vector<CatalogEntry> entries_;
    std::unordered_map<uint32_t, size_t> index_;
};

struct BestDistance {
    int d = 0;
    std::optional<BitMatrix> parity;
};

// Largest catalog distance for an [n_p, k_p] auxiliary code, plus the
// parity-check matrix when the catalog carries one. Throws NotInCatalog.
BestDistance best_min_distance(int n_p, int k_p,
                               const Catalog& catalog = Catalog::builtin());

// Constructs the auxiliary code; throws NotInCatalog when the entry lacks
// an explicit matrix.
AuxCode aux_from_catalog(int n_p, int k_p,
                         const Catalog& catalog = Catalog::builtin());

}  // namespace mra::codes
