#pragma once

#include "genrelay/core.hpp"
#include "genrelay/mode_select.hpp"
#include "genrelay/rational.hpp"
#include "genrelay/rq_estimate.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace genrelay {

/// Shared knobs of the statistical experiments.
struct ExperimentOptions {
    bool inflate = true;                 // sqrt(1 + 1/N) term in bands
    bool count_full_data_adherent = true;
    int workers = 1;
};

struct WidthRow {
    double l_p = 0.0;
    std::int64_t n_l = 0;
    double mean_width = 0.0;
    double p10 = 0.0;
    double p90 = 0.0;
    std::int64_t realizations = 0;
};

/// Distribution of two-sided prediction-interval widths across seeded
/// realizations, for every (grid point, budget) pair.
std::vector<WidthRow> width_distribution(const SyntheticRQLaw &law, const std::vector<double> &grid,
                                         const std::vector<std::int64_t> &budgets,
                                         std::int64_t realizations, double alpha,
                                         std::uint64_t seed, const ExperimentOptions &opts = {});

struct AdherenceRow {
    double q_min = 0.0;
    double alpha_star = 0.0;
    std::int64_t n_l = 0;
    double adherence = 0.0;
    std::int64_t realizations = 0;
    std::int64_t test_size = 0;
};

/// Empirical probability that data transmitted at the selected prompt size
/// meets Q >= q_min, for one budget. Training draws, selection, and fresh
/// test draws per realization; FULL_DATA selections count as adherent.
double quality_adherence(const SyntheticRQLaw &law, const std::vector<double> &grid,
                         std::int64_t n_l, double q_min, double alpha_star,
                         std::int64_t realizations, std::int64_t test_size, std::uint64_t seed,
                         const ExperimentOptions &opts = {});

/// Adherence across a list of budgets with common random numbers: each
/// realization draws one training stream per grid point and one test-z
/// block, shared by every budget level.
std::vector<AdherenceRow> adherence_curve(const SyntheticRQLaw &law,
                                          const std::vector<double> &grid,
                                          const std::vector<std::int64_t> &budgets, double q_min,
                                          double alpha_star, std::int64_t realizations,
                                          std::int64_t test_size, std::uint64_t seed,
                                          const ExperimentOptions &opts = {});

struct OptimalBudgetResult {
    std::optional<std::int64_t> n_l_opt; // nullopt: NOT_FOUND
    std::vector<AdherenceRow> curve;
};

/// Smallest budget in the range whose adherence reaches alpha_star; every
/// budget is evaluated (no early exit) under common random numbers.
OptimalBudgetResult optimal_budget(const SyntheticRQLaw &law, const std::vector<double> &grid,
                                   double q_min, double alpha_star,
                                   const std::vector<std::int64_t> &budget_range,
                                   std::int64_t realizations, std::int64_t test_size,
                                   std::uint64_t seed, const ExperimentOptions &opts = {});

/// Viability point N_V = ceil(K_L / w) for w > 0; nullopt (NOT_VIABLE)
/// otherwise. Exact arithmetic.
std::optional<std::int64_t> viability(const Rational &k_l, const Rational &w);

struct ViabilityRecord {
    std::string method;
    double q_min = 0.0;
    std::int64_t n_l_opt = 0;
    Rational k_l;
    Rational w;
    std::optional<std::int64_t> n_v;
};

// --- learning-cost table ------------------------------------------------

struct CostTableRow {
    std::string variant;
    int n_p = 0;
    Rational cost_mbits;
};

struct CostTableConstants {
    Rational x_mbits = Rational::from_decimal("1.482");
    Rational xhat_mbits = Rational::from_decimal("1.482");
    Rational l_min_mbits = Rational::from_decimal("0.092");
    Rational l_avg_mbits = Rational::from_decimal("0.787");
};

/// Per-point learning cost of all five variants for N_p in [1, n_p_max],
/// evaluated from the VGA image-size constants.
std::vector<CostTableRow> learning_cost_table(int n_p_max = 5,
                                              const CostTableConstants &constants = {});

// --- published-results cross-check ---------------------------------------

enum class CrosscheckStatus { match, flagged, mismatch };
const char *crosscheck_status_name(CrosscheckStatus s);

struct PublishedViabilityRow {
    std::string method;    // "PE" or "PS"
    std::string q_min;     // printed quality requirement
    std::int64_t budget = 0;
    Rational k_l_mbits;
    Rational w_png_mbits;
    std::optional<std::int64_t> published_png; // nullopt: printed N/A
    Rational w_jpeg_mbits;
    std::optional<std::int64_t> published_jpeg;
};

struct CrosscheckEntry {
    std::string method;
    std::string q_min;
    std::string column; // "png" or "jpeg"
    std::optional<std::int64_t> recomputed;
    std::optional<std::int64_t> published;
    CrosscheckStatus status = CrosscheckStatus::match;
    std::string note;
};

/// Parses the bundled transcription of the published viability table.
std::vector<PublishedViabilityRow> load_viability_table(const std::string &path);

/// Recomputes every viability entry from the printed K_L and w columns.
/// A recomputed/published disagreement is `flagged` (not failed) when a
/// +-0.0005 perturbation of the 3-decimal w can change the ceiling to the
/// published value, `mismatch` otherwise.
std::vector<CrosscheckEntry> crosscheck_viability(const std::vector<PublishedViabilityRow> &rows);

// --- CSV emission --------------------------------------------------------

std::string widths_csv(const std::vector<WidthRow> &rows);
std::string adherence_csv(const std::vector<AdherenceRow> &rows);
std::string viability_csv(const std::vector<ViabilityRecord> &rows);
std::string cost_table_csv(const std::vector<CostTableRow> &rows);
std::string crosscheck_csv(const std::vector<CrosscheckEntry> &rows);

} // namespace genrelay
