#pragma once

#include "genrelay/errors.hpp"
#include "genrelay/rational.hpp"

#include <cstdint>
#include <set>
#include <vector>

namespace genrelay {

enum class BudgetKind { fixed_count, communication, time, hybrid };

/// Pre-allocated learning budget. Exactly the fields belonging to the kind
/// are meaningful. Budgets are evaluated in exact arithmetic so floor and
/// ceiling results never suffer binary-float off-by-ones.
struct BudgetPlan {
    BudgetKind kind = BudgetKind::fixed_count;
    std::int64_t fixed_n = 0;   // fixed-count
    Rational comm_bits;         // B_c, communication and hybrid
    Rational time_seconds;      // B_T, time
};

/// N_L = floor(B_c / kappa).
std::int64_t points_from_comm_budget(const Rational &b_c, const Rational &kappa);

/// N_L = floor(B_T / T_L).
std::int64_t points_from_time_budget(const Rational &b_t, const Rational &t_l);

/// Step-wise hybrid check: proceed only while spent + projected stays
/// within the budget. `projected` is the caller's running mean of observed
/// per-point costs (or the a-priori estimate before any observation).
bool hybrid_should_continue(const Rational &spent, const BudgetPlan &plan,
                            const Rational &projected);

enum class PilotPolicy { none, periodic, exponential };

/// Post-learning refresh schedule. The paper defers the concrete policy;
/// these are simple configurable placeholders.
struct PilotSchedule {
    PilotPolicy policy = PilotPolicy::none;
    std::int64_t period = 0;   // periodic: every `period`-th point
    double base = 2.0;         // exponential: points ceil(base^k)
    double forgetting = 1.0;   // factor handed to update_with_pilot
};

/// 1-based stream indices that run a pilot loop instead of a plain
/// transmission. Strictly increasing, within [1, n_stream].
std::set<std::int64_t> pilot_slots(const PilotSchedule &schedule, std::int64_t n_stream);

} // namespace genrelay
