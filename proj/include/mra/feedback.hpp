#pragma once

// Resource-distribution phase helpers: enumerative coding of the
// constant-weight occupancy matrix, feedback size accounting, and the
// user-side slot lookup.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <gmpxx.h>

#include "mra/op_phase.hpp"

namespace mra::feedback {

// Length-n binary sequence of weight w; bit index 0 is position s = 1 and
// is the most significant position of the lexicographic order.
struct ConstantWeightMessage {
    int n = 0;
    int w = 0;
    std::vector<uint8_t> bits;

    static ConstantWeightMessage from_occupancy(const op::OccupancyEstimate& est);
    void validate() const;
};

// Lexicographic index of the sequence among all weight-w length-n ones.
mpz_class rank(const ConstantWeightMessage& msg);

// Inverse of rank; r must lie in [0, C(n, w)).
ConstantWeightMessage unrank(int n, int w, const mpz_class& r);

// ceil(log2 C(V*n_p, Ka)), exact.
int feedback_bits(int V, int n_p, int Ka);

// log2 C(n, w) via lgamma, the smooth surrogate used while the design
// variables are still real-valued.
double feedback_bits_relaxed(double n, double w);

// Slot (1-based) assigned to the identity, or nullopt when the user's
// position is not listed in the estimate.
std::optional<int> user_find_slot(const op::OccupancyEstimate& est,
                                  const op::Identity& id);

// Payload serialization used by tests: k_f bits, zero-padded on the left,
// big-endian bytes.
std::vector<uint8_t> payload_bytes(const mpz_class& r, int k_f);
mpz_class payload_value(const std::vector<uint8_t>& bytes);

}  // namespace mra::feedback
