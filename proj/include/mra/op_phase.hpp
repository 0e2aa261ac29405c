#pragma once

// Scheduling-request phase: identity selection (uniform or opportunistic),
// sub-block modulation and channel, the per-sub-block decoder with index
// collision resolution, the residual-norm user-count test, and assembly of
// the occupancy estimate broadcast in the feedback phase.

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "mra/codes.hpp"
#include "mra/rng.hpp"

namespace mra::op {

struct SessionConfig {
    int Ka = 0;          // active users
    int k = 0;           // payload bits per user
    long N = 0;          // channel uses per session
    double eps_target = 0.05;

    void validate() const;
};

struct SchemeParams {
    int k_p = 0, n_p = 0, d = 0, T = 0;  // auxiliary code
    int n_c1 = 0;                        // sub-block length
    int n_c2 = 0;                        // data slot length
    int V = 0;                           // number of sub-blocks
    int N_f = 0;                         // feedback length
    double P1 = 0.0, P2 = 0.0, P_f = 0.0;
    bool icr = true;
    bool omt = true;
    uint64_t code_seed = 0x6d7261u;  // inner generator draw

    int m_p() const { return n_p - k_p; }
    void validate() const;
    // V*n_c1 + N_f + Ka*n_c2 == N and V*n_p >= Ka
    void validate_against(const SessionConfig& config) const;
};

// A user's identity: sub-block v in 1..V and column index u in 1..n_p,
// flattened as s = v + V*(u-1).
struct Identity {
    int v = 0;
    int u = 0;
};

inline long flatten(const Identity& id, int V) {
    return id.v + static_cast<long>(V) * (id.u - 1);
}
inline Identity unflatten(long s, int V) {
    return Identity{static_cast<int>((s - 1) % V + 1),
                    static_cast<int>((s - 1) / V + 1)};
}

Identity select_identity_uniform(int V, int n_p, std::mt19937_64& rng);

// Number of message bits carried by the identity choice.
int omt_prefix_bits(int V, int n_p);

// Maps a k1-bit prefix to an identity; the duplicated low range picks one
// of two flattened positions at random.
Identity select_identity_omt(uint32_t prefix, int V, int n_p,
                             std::mt19937_64& rng);

// Recovers the prefix from an identity (total on all positions).
uint32_t omt_prefix_of(const Identity& id, int V, int n_p);

// Exact identity mass function under OMT, indexed [v-1][u-1].
std::vector<std::vector<double>> omt_mass(int V, int n_p);

// The scheme bound to concrete codes; signals x(u) are cached.
class Scheme {
  public:
    Scheme(SchemeParams params, codes::AuxCode aux, codes::InnerCode inner);

    // Auxiliary code from the catalog, inner code drawn from params.code_seed.
    static Scheme build(const SchemeParams& params);

    const SchemeParams& params() const { return params_; }
    const codes::AuxCode& aux() const { return aux_; }
    const codes::InnerCode& inner() const { return inner_; }
    const codes::SyndromeTable& table() const { return table_; }

    // Antipodal sub-block signal for index u (1-based), length n_c1.
    std::span<const double> signal(int u) const;

    double amplitude() const { return amp_; }          // 2 sqrt(P1 V)
    double base_sigma2() const { return sigma2_; }     // 1 / (4 P1 V)

  private:
    SchemeParams params_;
    codes::AuxCode aux_;
    codes::InnerCode inner_;
    codes::SyndromeTable table_;
    double amp_ = 0.0;
    double sigma2_ = 0.0;
    std::vector<double> signals_;  // n_p consecutive blocks of n_c1
};

std::vector<double> modulate(const Scheme& scheme, int u);

// Componentwise sum of signals plus unit-variance Gaussian noise.
std::vector<double> subblock_channel(
    const std::vector<std::vector<double>>& signals, int n_c1,
    std::mt19937_64& rng);

// One pass of the original decoder at candidate count t_hat: dither
// correction, mod-2 reduction, ML decoding of the inner code, syndrome
// decoding of the result. nullopt signals a detected failure. sigma2 is
// the mod-2 noise variance for the ML step.
std::optional<std::vector<int>> op_decode_single(std::span<const double> y,
                                                 int t_hat,
                                                 const Scheme& scheme,
                                                 double sigma2);

// Recursive collision-resolving decoder; returns the per-level index lists.
// Each level halves the residual, so the ML noise variance shrinks by 4.
std::optional<std::vector<std::vector<int>>> icr_decode(
    std::span<const double> y, int t_hat, const Scheme& scheme);

struct FinalizedLists {
    std::vector<int> singles;      // sorted indices kept from level 1
    std::vector<double> residual;  // y minus the weighted reconstruction
};

FinalizedLists finalize_lists(const std::vector<std::vector<int>>& lists,
                              std::span<const double> y, const Scheme& scheme);

struct SubblockDecode {
    bool decoded = false;  // at least one candidate count survived
    int t_star = 0;
    std::vector<int> singles;
    std::vector<int> collided;  // indices seen at levels >= 2
    double residual_norm2 = 0.0;

    // Per-candidate outcomes, indexed by t_hat; diagnostics for the
    // simulator's misselection accounting.
    struct Candidate {
        bool ok = false;
        std::vector<int> singles;
    };
    std::vector<Candidate> candidates;
};

// Runs the decoder for every candidate count 0..T and keeps the candidate
// with the smallest residual squared norm (ties toward smaller t_hat).
SubblockDecode decode_subblock(std::span<const double> y, const Scheme& scheme);

struct OccupancyEstimate {
    int V = 0, n_p = 0;
    std::vector<uint8_t> s_hat;        // V*n_p entries, index (v-1) + V*(u-1)
    std::vector<long> assignment;      // flattened positions with s_hat = 1,
                                       // increasing; slot j = assignment[j-1]
    std::vector<long> collided;        // positions flagged multiplicity > 1
    std::vector<long> padded;          // zeros promoted to reach Ka ones
    std::vector<long> erased;          // ones demoted to reach Ka ones

    bool occupied(const Identity& id) const {
        return s_hat[(id.v - 1) + static_cast<size_t>(V) * (id.u - 1)] != 0;
    }
};

// Balances the raw per-sub-block results to exactly Ka ones. Padding avoids
// positions flagged as collided; erasures pick uniformly among ones.
OccupancyEstimate build_occupancy_estimate(
    const std::vector<SubblockDecode>& per_subblock, int Ka,
    const Scheme& scheme, std::mt19937_64& rng);

// Debug dump: raw little-endian float64 samples.
void write_observation(const std::string& path, std::span<const double> y);
std::vector<double> read_observation(const std::string& path);

}  // namespace mra::op
