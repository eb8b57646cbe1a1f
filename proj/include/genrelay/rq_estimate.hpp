#pragma once

#include "genrelay/core.hpp"
#include "genrelay/errors.hpp"

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace genrelay {

enum class MeasurementSite { source, node, destination };

/// One quality observation at a prompt size on the session grid.
struct QualitySample {
    std::int64_t data_point_id = 0;
    double l_p = 0.0;
    QualityValue quality;
    MeasurementSite site = MeasurementSite::source;
};

/// Saturating-exponential curve Q = a * (1 - exp(-b L)) + c fitted to the
/// per-grid-point means; used for interpolation and extrapolation only.
struct CurveFit {
    double a = 0.0;
    double b = 1.0;
    double c = 0.0;
    double ssr = 0.0;

    double eval(double l_p) const { return a * (1.0 - std::exp(-b * l_p)) + c; }
};

/// Per-grid-point statistics of the rate-quality estimate.
struct GridPointStat {
    double mean = 0.0;       // mu_Lp
    double variance = 0.0;   // Var[e_Lp], unbiased; 0 with a single sample
    double weight = 0.0;     // effective N_L (sample count, or EWMA mass)
    // Internal accumulator: weighted sum of squared deviations, kept so
    // pilot updates can continue the recursion exactly.
    double sum_sq_dev = 0.0;
};

/// Two-sided prediction band at one grid point.
struct PredictionBand {
    double l_p = 0.0;
    double lower = 0.0;
    double upper = 0.0;
    double alpha = 0.0;
    double dof = 0.0;

    double width() const { return upper - lower; }
};

/// Estimated rate-quality function: per-grid-point mean/variance plus a
/// parametric curve over the grid means.
struct RQEstimate {
    std::vector<double> grid;          // strictly increasing prompt sizes
    std::vector<GridPointStat> stats;  // one per grid point
    int k = 1;                         // unknown parameters per grid point
    CurveFit curve;
    bool allow_extrapolation = true;

    std::size_t index_of(double l_p) const; // raises GridNotCovered
    bool covers(double l_p) const;
};

enum class Statistic { mean, lower };

/// Fits per-grid-point means and unbiased variances from samples, then the
/// parametric curve over the grid means. Grid is the sorted set of distinct
/// sample sizes. Deterministic and permutation-invariant.
RQEstimate fit_rq(std::span<const QualitySample> samples);

/// Two-sided band mu +- t_{alpha/2}(N-k) * sqrt(Var) * sqrt(1 + 1/N).
/// The sqrt(1 + 1/N) inflation is on by default; disable for the exact
/// textbook-formula band without the finite-sample term.
PredictionBand prediction_interval(const RQEstimate &est, double l_p, double alpha,
                                   bool inflate = true);

/// One-sided bound exceeded with estimated probability alpha_star:
/// mu - t_{alpha_star}(N-k) * sqrt(Var) * sqrt(1 + 1/N).
double lower_quality_bound(const RQEstimate &est, double l_p, double alpha_star,
                           bool inflate = true);

/// Requested statistic at an arbitrary prompt size: piecewise linear within
/// the grid span; above it, parametric-curve extrapolation when enabled
/// (clamped to the last grid point otherwise). Below the grid raises.
double interpolate(const RQEstimate &est, double l_p, Statistic which,
                   double alpha_star = 0.5, bool inflate = true);

/// Folds pilot samples into the estimate with an exponential forgetting
/// factor; forgetting = 1 reproduces exact pooled statistics. Returns the
/// updated estimate with the curve refitted.
RQEstimate update_with_pilot(const RQEstimate &est, std::span<const QualitySample> pilots,
                             double forgetting);

/// JSON round-trip so estimates can ride in RETURN-ESTIMATE messages.
std::string rq_to_json(const RQEstimate &est);
RQEstimate rq_from_json(const std::string &text);

/// Deterministic least-squares fit of the saturating curve to (grid, mean)
/// pairs: coarse log-spaced scan over b with a closed-form solve for (a, c),
/// then golden-section refinement.
CurveFit fit_curve(std::span<const double> grid, std::span<const double> means);

} // namespace genrelay
