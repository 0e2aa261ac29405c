#pragma once

// Parameter design: outer grid over the auxiliary-code shape, continuous
// power minimization under the error-budget constraint with relaxed
// integrality, sequential rounding, and energy-per-bit reporting.

#include <optional>

#include "mra/error_model.hpp"
#include "mra/op_phase.hpp"

namespace mra::opt {

class Infeasible : public std::runtime_error {
  public:
    explicit Infeasible(const std::string& what) : std::runtime_error(what) {}
};

struct DesignProblem {
    op::SessionConfig config;
    bool icr = true;
    bool omt = true;
    int k_p_max = 16;
    int n_p_max = 63;
    int n_c1_min = 10;
    int threads = 0;  // 0 => hardware concurrency
};

// Partial integer assignments made between relaxation stages.
struct PartialFix {
    std::optional<double> n_c1;
    std::optional<double> n_c2;
    std::optional<double> V;
};

struct RelaxedResult {
    bool feasible = false;
    double P = 0.0;
    double n_c1 = 0.0, n_c2 = 0.0, V = 0.0, N_f = 0.0;
};

// Locally optimal continuous design for a fixed auxiliary code. The
// budget constraint is met with equality by construction (the minimal
// feasible power is solved by bisection inside the objective).
RelaxedResult relaxed_solve(const DesignProblem& problem, int k_p, int n_p,
                            int d, const PartialFix& fixed,
                            const err::Mod2Source& mod2);

struct DesignResult {
    op::SchemeParams params;
    double P = 0.0;           // final power, budget.total == eps_target
    double relaxed_P = 0.0;   // fully relaxed lower bound at the same shape
    double eb_n0_db = 0.0;
    err::ErrorBudget budget;
};

// Full heuristic: per-shape relaxed solve, sequential rounding of n_c1,
// n_c2, V, then the exact-formula power. Throws Infeasible when no grid
// point admits the target.
DesignResult design(const DesignProblem& problem);

// 10 log10(P N / (2k)).
double eb_n0_db(double P, double N, double k);

// Tabulated mod-2 statistics used inside the search loops (exact
// integration is swapped back in for the reported result).
const err::Mod2Source& mod2_table();

}  // namespace mra::opt
