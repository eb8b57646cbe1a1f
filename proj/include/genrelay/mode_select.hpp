#pragma once

#include "genrelay/rq_estimate.hpp"
#include "genrelay/topology.hpp"

#include <optional>
#include <string>
#include <vector>

namespace genrelay {

enum class CommMode { quality_constrained, rate_constrained, unconstrained };

const char *mode_name(CommMode mode);

/// Inputs of the three prompt-size optimization problems.
struct ModeConfig {
    CommMode mode = CommMode::quality_constrained;
    std::vector<double> grid;  // candidate prompt sizes, strictly increasing

    // quality-constrained
    double q_min = 0.0;
    double alpha_star = 0.95;
    bool inflate = true;

    // rate-constrained / unconstrained
    double w_weight = 0.0;       // Eq. 3/4 quality-importance scalar
    double lambda = 1.0;         // data points per second
    double l_bits = 0.0;         // original data-point size, bits
    double grid_unit_bits = 1.0; // bits represented by one grid unit
};

struct CandidateDiag {
    double l_p = 0.0;
    double value = 0.0; // lower bound (quality mode) or objective
    bool feasible = false;
    std::string note;
};

/// Result of a prompt-size selection. An empty chosen_l_p means the
/// FULL_DATA fallback: transmit the original data point.
struct Selection {
    std::optional<double> chosen_l_p;
    double objective_value = 0.0;
    bool feasible = false;
    std::vector<CandidateDiag> diagnostics;

    bool full_data() const { return !chosen_l_p.has_value(); }
};

/// Smallest grid size whose one-sided lower quality bound clears q_min with
/// probability alpha_star; FULL_DATA when none does.
Selection select_quality_constrained(const RQEstimate &est, const ModeConfig &cfg);

/// Maximizes y_g (1 - w/Q(L_p)) with y_g = lambda (L - L_p) subject to the
/// flow constraints lambda L_p <= c_sg and lambda L <= c_gd. Raises
/// Infeasible when even the smallest candidate (or the full data on the
/// g->d segment) cannot be carried.
Selection select_rate_constrained(const RQEstimate &est, const ModeConfig &cfg,
                                  const Topology &topo, const std::string &s,
                                  const std::string &g, const std::string &d);

/// Same objective without the rate constraints; every candidate at or above
/// the grid minimum is admissible.
Selection select_unconstrained(const RQEstimate &est, const ModeConfig &cfg);

} // namespace genrelay
