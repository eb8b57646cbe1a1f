#include "genrelay/experiments.hpp"

#include "genrelay/format.hpp"
#include "genrelay/parallel.hpp"
#include "genrelay/protocol.hpp"
#include "genrelay/rng.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

namespace genrelay {

namespace {

double percentile(std::vector<double> sorted, double q) {
    if (sorted.empty()) return 0.0;
    double pos = q * static_cast<double>(sorted.size() - 1);
    std::size_t lo = static_cast<std::size_t>(pos);
    if (lo + 1 >= sorted.size()) return sorted.back();
    double frac = pos - static_cast<double>(lo);
    return sorted[lo] + frac * (sorted[lo + 1] - sorted[lo]);
}

RQEstimate estimate_from_draws(const std::vector<double> &grid,
                               const std::vector<std::vector<double>> &draws, std::size_t take) {
    std::vector<QualitySample> samples;
    samples.reserve(grid.size() * take);
    for (std::size_t j = 0; j < grid.size(); ++j) {
        for (std::size_t i = 0; i < take; ++i) {
            QualitySample s;
            s.data_point_id = static_cast<std::int64_t>(i);
            s.l_p = grid[j];
            s.quality.value = draws[j][i];
            samples.push_back(s);
        }
    }
    return fit_rq(samples);
}

} // namespace

std::vector<WidthRow> width_distribution(const SyntheticRQLaw &law, const std::vector<double> &grid,
                                         const std::vector<std::int64_t> &budgets,
                                         std::int64_t realizations, double alpha,
                                         std::uint64_t seed, const ExperimentOptions &opts) {
    if (realizations < 2) throw std::invalid_argument("need at least two realizations");
    for (std::int64_t b : budgets) {
        if (b < 2) throw std::invalid_argument("budgets need at least two samples each");
    }
    std::vector<WidthRow> rows;
    for (std::size_t bi = 0; bi < budgets.size(); ++bi) {
        const std::int64_t n_l = budgets[bi];
        // widths[r * grid.size() + j]
        std::vector<double> widths(static_cast<std::size_t>(realizations) * grid.size(), 0.0);
        parallel_for_index(realizations, opts.workers, [&](std::int64_t r) {
            std::vector<std::vector<double>> draws(grid.size());
            for (std::size_t j = 0; j < grid.size(); ++j) {
                Rng rng(derive_seed(seed, {0x31d7ULL, bi, static_cast<std::uint64_t>(r), j}));
                draws[j].resize(static_cast<std::size_t>(n_l));
                for (auto &v : draws[j]) v = law.sample(grid[j], rng);
            }
            RQEstimate est = estimate_from_draws(grid, draws, static_cast<std::size_t>(n_l));
            for (std::size_t j = 0; j < grid.size(); ++j) {
                PredictionBand band = prediction_interval(est, grid[j], alpha, opts.inflate);
                widths[static_cast<std::size_t>(r) * grid.size() + j] = band.width();
            }
        });
        for (std::size_t j = 0; j < grid.size(); ++j) {
            std::vector<double> per_point;
            per_point.reserve(static_cast<std::size_t>(realizations));
            double sum = 0.0;
            for (std::int64_t r = 0; r < realizations; ++r) {
                double w = widths[static_cast<std::size_t>(r) * grid.size() + j];
                per_point.push_back(w);
                sum += w;
            }
            std::sort(per_point.begin(), per_point.end());
            WidthRow row;
            row.l_p = grid[j];
            row.n_l = n_l;
            row.mean_width = sum / static_cast<double>(realizations);
            row.p10 = percentile(per_point, 0.10);
            row.p90 = percentile(per_point, 0.90);
            row.realizations = realizations;
            rows.push_back(row);
        }
    }
    return rows;
}

std::vector<AdherenceRow> adherence_curve(const SyntheticRQLaw &law,
                                          const std::vector<double> &grid,
                                          const std::vector<std::int64_t> &budgets, double q_min,
                                          double alpha_star, std::int64_t realizations,
                                          std::int64_t test_size, std::uint64_t seed,
                                          const ExperimentOptions &opts) {
    if (budgets.empty() || realizations < 1 || test_size < 1) {
        throw std::invalid_argument("adherence needs budgets, realizations and a test size");
    }
    std::int64_t max_budget = *std::max_element(budgets.begin(), budgets.end());
    if (*std::min_element(budgets.begin(), budgets.end()) < 2) {
        throw std::invalid_argument("adherence budgets need N_L >= 2");
    }

    ModeConfig mode;
    mode.mode = CommMode::quality_constrained;
    mode.grid = grid;
    mode.q_min = q_min;
    mode.alpha_star = alpha_star;
    mode.inflate = opts.inflate;

    // adh[r * budgets.size() + b]
    std::vector<double> adh(static_cast<std::size_t>(realizations) * budgets.size(), 0.0);
    parallel_for_index(realizations, opts.workers, [&](std::int64_t r) {
        // Common random numbers: one training stream per grid point and one
        // test-z block, shared across every budget level.
        std::vector<std::vector<double>> draws(grid.size());
        for (std::size_t j = 0; j < grid.size(); ++j) {
            Rng rng(derive_seed(seed, {0xadde7ULL, static_cast<std::uint64_t>(r), j}));
            draws[j].resize(static_cast<std::size_t>(max_budget));
            for (auto &v : draws[j]) v = law.sample(grid[j], rng);
        }
        std::vector<double> test_z(static_cast<std::size_t>(test_size));
        Rng rng_t(derive_seed(seed, {0x7e57ULL, static_cast<std::uint64_t>(r)}));
        for (auto &z : test_z) z = rng_t.normal();

        for (std::size_t b = 0; b < budgets.size(); ++b) {
            RQEstimate est = estimate_from_draws(grid, draws, static_cast<std::size_t>(budgets[b]));
            Selection sel = select_quality_constrained(est, mode);
            double fraction;
            if (sel.full_data()) {
                // Transmitting the original trivially meets any requirement.
                fraction = opts.count_full_data_adherent ? 1.0 : 0.0;
            } else {
                std::int64_t hits = 0;
                for (double z : test_z) {
                    if (law.sample_with_z(*sel.chosen_l_p, z) >= q_min) ++hits;
                }
                fraction = static_cast<double>(hits) / static_cast<double>(test_size);
            }
            adh[static_cast<std::size_t>(r) * budgets.size() + b] = fraction;
        }
    });

    std::vector<AdherenceRow> rows;
    for (std::size_t b = 0; b < budgets.size(); ++b) {
        double sum = 0.0;
        for (std::int64_t r = 0; r < realizations; ++r) {
            sum += adh[static_cast<std::size_t>(r) * budgets.size() + b];
        }
        AdherenceRow row;
        row.q_min = q_min;
        row.alpha_star = alpha_star;
        row.n_l = budgets[b];
        row.adherence = sum / static_cast<double>(realizations);
        row.realizations = realizations;
        row.test_size = test_size;
        rows.push_back(row);
    }
    return rows;
}

double quality_adherence(const SyntheticRQLaw &law, const std::vector<double> &grid,
                         std::int64_t n_l, double q_min, double alpha_star,
                         std::int64_t realizations, std::int64_t test_size, std::uint64_t seed,
                         const ExperimentOptions &opts) {
    return adherence_curve(law, grid, {n_l}, q_min, alpha_star, realizations, test_size, seed, opts)
        .front()
        .adherence;
}

OptimalBudgetResult optimal_budget(const SyntheticRQLaw &law, const std::vector<double> &grid,
                                   double q_min, double alpha_star,
                                   const std::vector<std::int64_t> &budget_range,
                                   std::int64_t realizations, std::int64_t test_size,
                                   std::uint64_t seed, const ExperimentOptions &opts) {
    if (budget_range.empty()) throw std::invalid_argument("empty budget range");
    for (std::size_t i = 1; i < budget_range.size(); ++i) {
        if (!(budget_range[i] > budget_range[i - 1])) {
            throw std::invalid_argument("budget range must be increasing");
        }
    }
    OptimalBudgetResult result;
    result.curve = adherence_curve(law, grid, budget_range, q_min, alpha_star, realizations,
                                   test_size, seed, opts);
    for (const auto &row : result.curve) {
        if (row.adherence >= alpha_star) {
            result.n_l_opt = row.n_l;
            break;
        }
    }
    return result;
}

std::optional<std::int64_t> viability(const Rational &k_l, const Rational &w) {
    if (k_l.is_negative()) throw std::invalid_argument("learning cost must be >= 0");
    if (!w.is_positive()) return std::nullopt; // NOT_VIABLE
    return ceil_div(k_l, w);
}

std::vector<CostTableRow> learning_cost_table(int n_p_max, const CostTableConstants &constants) {
    std::vector<CostTableRow> rows;
    const LearningVariant variants[] = {
        LearningVariant::source_oriented, LearningVariant::node_augmented,
        LearningVariant::node_standard, LearningVariant::destination_goal,
        LearningVariant::destination_deviation};
    for (int np = 1; np <= n_p_max; ++np) {
        for (LearningVariant v : variants) {
            // Representative grid realizing the published averages: the
            // augmented option only uses the minimum size, the others only
            // the sum N_p * L_avg.
            std::vector<Rational> grid;
            if (v == LearningVariant::node_augmented) {
                grid.push_back(constants.l_min_mbits);
                for (int i = 1; i < np; ++i) grid.push_back(constants.l_avg_mbits);
            } else {
                for (int i = 0; i < np; ++i) grid.push_back(constants.l_avg_mbits);
            }
            CostTableRow row;
            row.variant = variant_name(v);
            row.n_p = np;
            row.cost_mbits = per_point_cost(v, grid, constants.x_mbits, constants.xhat_mbits);
            rows.push_back(row);
        }
    }
    return rows;
}

const char *crosscheck_status_name(CrosscheckStatus s) {
    switch (s) {
    case CrosscheckStatus::match: return "match";
    case CrosscheckStatus::flagged: return "flagged";
    case CrosscheckStatus::mismatch: return "mismatch";
    }
    return "?";
}

std::vector<PublishedViabilityRow> load_viability_table(const std::string &path) {
    std::ifstream in(path);
    if (!in) raise(Errc::file_unreadable, path);
    std::vector<PublishedViabilityRow> rows;
    std::string line;
    bool header_seen = false;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty() || line[0] == '#') continue;
        if (!header_seen) {
            header_seen = true; // column header
            continue;
        }
        std::vector<std::string> fields;
        std::stringstream ss(line);
        std::string field;
        while (std::getline(ss, field, ',')) fields.push_back(field);
        if (fields.size() != 8) {
            raise(Errc::malformed_row, path + ":" + std::to_string(lineno) + " expected 8 fields");
        }
        try {
            PublishedViabilityRow row;
            row.method = fields[0];
            row.q_min = fields[1];
            row.budget = std::stoll(fields[2]);
            row.k_l_mbits = Rational::from_decimal(fields[3]);
            row.w_png_mbits = Rational::from_decimal(fields[4]);
            if (fields[5] != "N/A") row.published_png = std::stoll(fields[5]);
            row.w_jpeg_mbits = Rational::from_decimal(fields[6]);
            if (fields[7] != "N/A") row.published_jpeg = std::stoll(fields[7]);
            rows.push_back(std::move(row));
        } catch (const std::exception &e) {
            raise(Errc::malformed_row, path + ":" + std::to_string(lineno) + " " + e.what());
        }
    }
    return rows;
}

namespace {

CrosscheckEntry check_one(const std::string &method, const std::string &q_min,
                          const std::string &column, const Rational &k_l, const Rational &w,
                          const std::optional<std::int64_t> &published) {
    CrosscheckEntry entry;
    entry.method = method;
    entry.q_min = q_min;
    entry.column = column;
    entry.published = published;
    entry.recomputed = viability(k_l, w);
    if (entry.recomputed == published) {
        entry.status = CrosscheckStatus::match;
        return entry;
    }
    if (!entry.recomputed.has_value() || !published.has_value()) {
        entry.status = CrosscheckStatus::mismatch;
        entry.note = "viable/not-viable disagreement";
        return entry;
    }
    // The printed w has three decimals; check whether the true value within
    // +-0.0005 of it could produce the published ceiling.
    const Rational half_ulp(1, 2000);
    Rational w_lo = w - half_ulp;
    Rational w_hi = w + half_ulp;
    std::int64_t n_max = w_lo.is_positive() ? ceil_div(k_l, w_lo) : INT64_MAX;
    std::int64_t n_min = ceil_div(k_l, w_hi);
    if (*published >= n_min && *published <= n_max) {
        entry.status = CrosscheckStatus::flagged;
        entry.note = "explainable by rounding of w in its 4th decimal";
    } else {
        entry.status = CrosscheckStatus::mismatch;
        entry.note = "outside the w rounding window";
    }
    return entry;
}

} // namespace

std::vector<CrosscheckEntry> crosscheck_viability(const std::vector<PublishedViabilityRow> &rows) {
    std::vector<CrosscheckEntry> out;
    for (const auto &row : rows) {
        out.push_back(check_one(row.method, row.q_min, "png", row.k_l_mbits, row.w_png_mbits,
                                row.published_png));
        out.push_back(check_one(row.method, row.q_min, "jpeg", row.k_l_mbits, row.w_jpeg_mbits,
                                row.published_jpeg));
    }
    return out;
}

std::string widths_csv(const std::vector<WidthRow> &rows) {
    std::ostringstream out;
    out << "l_p,n_l,mean_width,p10,p90,realizations\n";
    for (const auto &r : rows) {
        out << fmt_double(r.l_p) << "," << r.n_l << "," << fmt_double(r.mean_width) << ","
            << fmt_double(r.p10) << "," << fmt_double(r.p90) << "," << r.realizations << "\n";
    }
    return out.str();
}

std::string adherence_csv(const std::vector<AdherenceRow> &rows) {
    std::ostringstream out;
    out << "q_min,alpha_star,n_l,adherence,realizations,test_size\n";
    for (const auto &r : rows) {
        out << fmt_double(r.q_min) << "," << fmt_double(r.alpha_star) << "," << r.n_l << ","
            << fmt_double(r.adherence) << "," << r.realizations << "," << r.test_size << "\n";
    }
    return out.str();
}

std::string viability_csv(const std::vector<ViabilityRecord> &rows) {
    std::ostringstream out;
    out << "method,q_min,n_l_opt,k_l_bits,w_bits,n_v\n";
    for (const auto &r : rows) {
        out << r.method << "," << fmt_double(r.q_min) << "," << r.n_l_opt << ","
            << fmt_double(r.k_l.to_double()) << "," << fmt_double(r.w.to_double()) << ","
            << (r.n_v.has_value() ? std::to_string(*r.n_v) : std::string("NOT_VIABLE")) << "\n";
    }
    return out.str();
}

std::string cost_table_csv(const std::vector<CostTableRow> &rows) {
    std::ostringstream out;
    out << "variant,n_p,cost_mbits\n";
    for (const auto &r : rows) {
        out << r.variant << "," << r.n_p << "," << fmt_fixed(r.cost_mbits.to_double(), 3) << "\n";
    }
    return out.str();
}

std::string crosscheck_csv(const std::vector<CrosscheckEntry> &rows) {
    std::ostringstream out;
    out << "method,q_min,column,recomputed,published,status,note\n";
    auto opt_str = [](const std::optional<std::int64_t> &v) {
        return v.has_value() ? std::to_string(*v) : std::string("NOT_VIABLE");
    };
    for (const auto &r : rows) {
        out << r.method << "," << r.q_min << "," << r.column << "," << opt_str(r.recomputed) << ","
            << opt_str(r.published) << "," << crosscheck_status_name(r.status) << "," << r.note
            << "\n";
    }
    return out.str();
}

} // namespace genrelay
