#pragma once

// Closed-form per-user error terms for the three-phase scheme and their
// union-bound total. Everything accepts real-valued block lengths and
// sub-block counts so the design optimizer can relax integrality; T, n_p
// and the user counts stay integral.

#include <functional>

#include "mra/fbl.hpp"
#include "mra/op_phase.hpp"

namespace mra::err {

// Pluggable source of mod-2 channel statistics; the optimizer swaps in a
// tabulated version to keep the inner loop cheap.
class Mod2Source {
  public:
    virtual ~Mod2Source() = default;
    virtual fbl::ChannelStats stats(double p_eff) const;

    static const Mod2Source& exact();
};

// Real-relaxed scheme parameters used by the analytic model.
struct RealParams {
    int k_p = 0, n_p = 0, T = 0;
    double n_c1 = 0, n_c2 = 0, V = 0, N_f = 0;
    double P1 = 0, P2 = 0, P_f = 0;
    bool icr = true;
    bool omt = true;

    double m_p() const { return n_p - k_p; }

    static RealParams from(const op::SchemeParams& p);
};

struct ErrorBudget {
    double eps1 = 0, eps2 = 0, eps3 = 0, eps4 = 0, eps_f = 0, eps_f2 = 0;
    double total = 0;  // min(1, sum); excludes the unmodelled residual
                       // user-count-test and erasure contributions
};

// Probability that T or more of the remaining Ka-1 users pick the user's
// sub-block. p_sub is 1/V without OMT, p_vstar(V, n_p) with it.
double eps1(double Ka, int T, double V, int n_p, bool omt);

// Largest per-sub-block selection probability under OMT.
double p_vstar(double V, int n_p);

// Inner-code decoding failure; with ICR the union runs over the
// floor(log2 T) + 1 residual levels at power 2^(l-1) * P1 * V.
double eps2(double P1, double V, double n_c1, double m_p, int T, bool icr,
            const Mod2Source& mod2 = Mod2Source::exact());

// Same-index collision. op: whole sub-block lost; icr: only the collided
// position; omt: collision under the nonuniform identity masses.
enum class Eps3Variant { op, icr, omt };
double eps3(double Ka, double V, int n_p, int T, Eps3Variant variant);

// Feedback decoding failure at rate k_f / N_f.
double eps_f(double P_f, double N_f, double k_f);

// Data-slot decoding failure; k_bits = k, or k - k1 with OMT.
double eps4(double P2, double Ka, double n_c2, double k_bits);

inline double eps_f2(double epsf) { return epsf; }

struct BudgetOptions {
    bool exact_kf = true;  // integer ceiling vs lgamma surrogate
    const Mod2Source* mod2 = nullptr;
};

ErrorBudget budget(const RealParams& params, const op::SessionConfig& config,
                   const BudgetOptions& opts = {});

}  // namespace mra::err
