#pragma once

// Seeded Monte Carlo evaluation of full sessions: the scheduling-request
// phase is simulated sample by sample; feedback and data outcomes are drawn
// as independent events from the achievability bounds.

#include <cstdint>
#include <optional>

#include "mra/error_model.hpp"
#include "mra/op_phase.hpp"

namespace mra::sim {

struct SimOptions {
    enum class FeedbackModel { pessimistic, silent };
    FeedbackModel feedback_model = FeedbackModel::pessimistic;

    bool phase23 = true;      // false: eps_f = eps4 = 0 (phase-1 study)
    bool zero_noise = false;  // disable the phase-1 channel noise
    std::optional<double> eps_f_override;
    std::optional<double> eps4_override;
    int threads = 0;  // 0 => hardware concurrency
};

// Per-user error causes; a user can appear under several causes.
struct Tallies {
    long subblock_loss = 0;  // all candidate counts failed in the sub-block
    long collision = 0;      // another user picked the same (v, u)
    long erasure = 0;        // balancing erased the user's position
    long misselect = 0;      // residual-norm test picked the wrong count
    long feedback = 0;       // feedback decode failure (own or interferer)
    long data = 0;           // data-slot decode failure

    Tallies& operator+=(const Tallies& o);
};

struct SessionOutcome {
    int user_errors = 0;
    Tallies tallies;
    int eg_users = 0;  // errors attributable to count misselection alone
    int ee_users = 0;  // errors attributable to erasure alone
};

struct SessionReport {
    long trials = 0;
    int Ka = 0;
    long user_errors = 0;
    double pupe = 0.0;
    double ci95 = 0.0;
    Tallies tallies;
    double eps_g_hat = 0.0;
    double eps_e_hat = 0.0;
    double eps_f_used = 0.0;
    double eps4_used = 0.0;
};

// One session; the per-trial seed fans out into independent streams for
// identities, per-sub-block noise, balancing, and phase-2/3 draws.
SessionOutcome run_session(const op::Scheme& scheme,
                           const op::SessionConfig& config, uint64_t seed,
                           uint64_t trial, const SimOptions& options = {});

// Aggregates run_session over `trials` sessions. Deterministic for a fixed
// seed regardless of the thread count.
SessionReport estimate_pupe(const op::Scheme& scheme,
                            const op::SessionConfig& config, long trials,
                            uint64_t seed, const SimOptions& options = {});

// Monotone bisection on the data-phase power against the simulated rate
// with common random numbers; stops once the target sits inside the
// confidence interval or the bracket collapses.
double calibrate_p2(const op::Scheme& scheme, const op::SessionConfig& config,
                    double target, long trials, uint64_t seed,
                    const SimOptions& options = {});

}  // namespace mra::sim
