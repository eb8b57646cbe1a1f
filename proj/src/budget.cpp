#include "genrelay/budget.hpp"

#include <cmath>

namespace genrelay {

std::int64_t points_from_comm_budget(const Rational &b_c, const Rational &kappa) {
    if (!kappa.is_positive()) raise(Errc::zero_cost, "per-point cost must be positive");
    if (b_c.is_negative()) return 0;
    return floor_div(b_c, kappa);
}

std::int64_t points_from_time_budget(const Rational &b_t, const Rational &t_l) {
    if (!t_l.is_positive()) raise(Errc::zero_latency, "per-point latency must be positive");
    if (b_t.is_negative()) return 0;
    return floor_div(b_t, t_l);
}

bool hybrid_should_continue(const Rational &spent, const BudgetPlan &plan,
                            const Rational &projected) {
    return spent + projected <= plan.comm_bits;
}

std::set<std::int64_t> pilot_slots(const PilotSchedule &schedule, std::int64_t n_stream) {
    std::set<std::int64_t> slots;
    if (n_stream <= 0) return slots;
    switch (schedule.policy) {
    case PilotPolicy::none:
        break;
    case PilotPolicy::periodic: {
        if (schedule.period < 1) throw std::invalid_argument("pilot period must be >= 1");
        for (std::int64_t i = schedule.period; i <= n_stream; i += schedule.period) {
            slots.insert(i);
        }
        break;
    }
    case PilotPolicy::exponential: {
        if (!(schedule.base > 1.0)) throw std::invalid_argument("pilot base must be > 1");
        for (double power = schedule.base;; power *= schedule.base) {
            std::int64_t slot = static_cast<std::int64_t>(std::ceil(power));
            if (slot > n_stream) break;
            slots.insert(slot); // set handles duplicate ceilings
        }
        break;
    }
    }
    return slots;
}

} // namespace genrelay
