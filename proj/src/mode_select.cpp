#include "genrelay/mode_select.hpp"

#include <cmath>

namespace genrelay {

const char *mode_name(CommMode mode) {
    switch (mode) {
    case CommMode::quality_constrained: return "quality-constrained";
    case CommMode::rate_constrained: return "rate-constrained";
    case CommMode::unconstrained: return "unconstrained";
    }
    return "?";
}

namespace {

void check_grid(const std::vector<double> &grid) {
    if (grid.empty()) raise(Errc::grid_not_covered, "candidate grid is empty");
    for (std::size_t i = 1; i < grid.size(); ++i) {
        if (!(grid[i] > grid[i - 1])) {
            raise(Errc::grid_not_covered, "candidate grid is not strictly increasing");
        }
    }
}

} // namespace

Selection select_quality_constrained(const RQEstimate &est, const ModeConfig &cfg) {
    check_grid(cfg.grid);
    Selection sel;
    for (double l_p : cfg.grid) {
        if (!est.covers(l_p)) {
            raise(Errc::grid_not_covered,
                  "estimate lacks grid point " + std::to_string(l_p));
        }
        CandidateDiag diag;
        diag.l_p = l_p;
        diag.value = lower_quality_bound(est, l_p, cfg.alpha_star, cfg.inflate);
        diag.feasible = diag.value >= cfg.q_min;
        diag.note = diag.feasible ? "bound >= q_min" : "bound < q_min";
        sel.diagnostics.push_back(diag);
        if (diag.feasible && !sel.chosen_l_p.has_value()) {
            sel.chosen_l_p = l_p;
            sel.objective_value = diag.value;
            sel.feasible = true;
        }
    }
    return sel; // no candidate: FULL_DATA fallback, guaranteed to meet q_min
}

namespace {

Selection scan_weighted_objective(const RQEstimate &est, const ModeConfig &cfg,
                                  double c_sg, bool enforce_rate) {
    check_grid(cfg.grid);
    Selection sel;
    for (double l_p : cfg.grid) {
        CandidateDiag diag;
        diag.l_p = l_p;
        const double bits = l_p * cfg.grid_unit_bits;
        const double y_g = cfg.lambda * (cfg.l_bits - bits);
        if (enforce_rate && cfg.lambda * bits > c_sg) {
            diag.feasible = false;
            diag.note = "lambda*L_p exceeds c_sg";
            sel.diagnostics.push_back(diag);
            continue;
        }
        if (y_g < 0.0) {
            diag.feasible = false;
            diag.note = "negative divergence at g";
            sel.diagnostics.push_back(diag);
            continue;
        }
        double q_hat = interpolate(est, l_p, Statistic::mean);
        diag.value = y_g * (1.0 - cfg.w_weight / q_hat);
        diag.feasible = true;
        sel.diagnostics.push_back(diag);
        // Strict improvement keeps ties on the smaller (earlier) candidate.
        if (!sel.feasible || diag.value > sel.objective_value) {
            sel.chosen_l_p = l_p;
            sel.objective_value = diag.value;
            sel.feasible = true;
        }
    }
    return sel;
}

} // namespace

Selection select_rate_constrained(const RQEstimate &est, const ModeConfig &cfg,
                                  const Topology &topo, const std::string &s,
                                  const std::string &g, const std::string &d) {
    check_grid(cfg.grid);
    const double c_sg = min_cut(topo, s, g);
    const double c_gd = min_cut(topo, g, d);
    const double l_min_bits = cfg.grid.front() * cfg.grid_unit_bits;
    if (cfg.lambda * l_min_bits > c_sg) {
        raise(Errc::infeasible, "lambda*L_min exceeds the s->g cut");
    }
    if (cfg.lambda * cfg.l_bits > c_gd) {
        raise(Errc::infeasible, "lambda*L exceeds the g->d cut");
    }
    return scan_weighted_objective(est, cfg, c_sg, /*enforce_rate=*/true);
}

Selection select_unconstrained(const RQEstimate &est, const ModeConfig &cfg) {
    return scan_weighted_objective(est, cfg, 0.0, /*enforce_rate=*/false);
}

} // namespace genrelay
