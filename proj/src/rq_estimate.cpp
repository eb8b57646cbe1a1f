#include "genrelay/rq_estimate.hpp"

#include "genrelay/student_t.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>
#include <map>

using nlohmann::json;

namespace genrelay {

namespace {

constexpr double kGridEps = 1e-9;

} // namespace

std::size_t RQEstimate::index_of(double l_p) const {
    for (std::size_t i = 0; i < grid.size(); ++i) {
        if (std::abs(grid[i] - l_p) <= kGridEps * std::max(1.0, std::abs(grid[i]))) return i;
    }
    raise(Errc::grid_not_covered, "L_p " + std::to_string(l_p) + " is not a grid point");
}

bool RQEstimate::covers(double l_p) const {
    for (double g : grid) {
        if (std::abs(g - l_p) <= kGridEps * std::max(1.0, std::abs(g))) return true;
    }
    return false;
}

CurveFit fit_curve(std::span<const double> grid, std::span<const double> means) {
    CurveFit best;
    const std::size_t n = grid.size();
    if (n == 0) return best;

    double mean_sum = 0.0;
    for (double m : means) mean_sum += m;
    const double mean_avg = mean_sum / static_cast<double>(n);

    // (a, c) solve for fixed b; returns SSR, or nullopt when the normal
    // matrix is singular (single point or constant basis).
    auto solve_ac = [&](double b, CurveFit &out) -> bool {
        double su = 0, suu = 0, sy = 0, suy = 0;
        for (std::size_t i = 0; i < n; ++i) {
            double u = 1.0 - std::exp(-b * grid[i]);
            su += u;
            suu += u * u;
            sy += means[i];
            suy += u * means[i];
        }
        double det = suu * static_cast<double>(n) - su * su;
        if (std::abs(det) < 1e-12) return false;
        double a = (suy * static_cast<double>(n) - su * sy) / det;
        double c = (sy - a * su) / static_cast<double>(n);
        double ssr = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            double u = 1.0 - std::exp(-b * grid[i]);
            double r = means[i] - (a * u + c);
            ssr += r * r;
        }
        out.a = a;
        out.b = b;
        out.c = c;
        out.ssr = ssr;
        return true;
    };

    double l_scale = std::max(grid.back(), kGridEps);
    best.a = 0.0;
    best.b = 1.0 / l_scale;
    best.c = mean_avg;
    best.ssr = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        double r = means[i] - mean_avg;
        best.ssr += r * r;
    }

    const int kScan = 96;
    const double b_lo = 1e-2 / l_scale;
    const double b_hi = 1e2 / l_scale;
    const double log_lo = std::log(b_lo);
    const double log_hi = std::log(b_hi);
    int best_idx = -1;
    for (int i = 0; i < kScan; ++i) {
        double b = std::exp(log_lo + (log_hi - log_lo) * i / (kScan - 1));
        CurveFit cand;
        if (solve_ac(b, cand) && cand.ssr < best.ssr) {
            best = cand;
            best_idx = i;
        }
    }
    if (best_idx >= 0) {
        // Golden-section refinement of b between the scan neighbors.
        auto b_at = [&](int i) {
            return std::exp(log_lo + (log_hi - log_lo) * std::clamp(i, 0, kScan - 1) / (kScan - 1));
        };
        double lo = b_at(best_idx - 1), hi = b_at(best_idx + 1);
        const double phi = (std::sqrt(5.0) - 1.0) / 2.0;
        double x1 = hi - phi * (hi - lo), x2 = lo + phi * (hi - lo);
        CurveFit f1, f2;
        bool ok1 = solve_ac(x1, f1), ok2 = solve_ac(x2, f2);
        for (int it = 0; it < 48 && ok1 && ok2; ++it) {
            if (f1.ssr < f2.ssr) {
                hi = x2;
                x2 = x1;
                f2 = f1;
                x1 = hi - phi * (hi - lo);
                ok1 = solve_ac(x1, f1);
            } else {
                lo = x1;
                x1 = x2;
                f1 = f2;
                x2 = lo + phi * (hi - lo);
                ok2 = solve_ac(x2, f2);
            }
        }
        if (ok1 && f1.ssr < best.ssr) best = f1;
        if (ok2 && f2.ssr < best.ssr) best = f2;
    }
    return best;
}

RQEstimate fit_rq(std::span<const QualitySample> samples) {
    if (samples.empty()) raise(Errc::empty_input, "fit_rq needs at least one sample");
    // Bucket by prompt size; map keys give the sorted grid directly and make
    // the fit permutation-invariant.
    std::map<double, std::vector<double>> buckets;
    for (const auto &s : samples) {
        if (!std::isfinite(s.quality.value)) {
            raise(Errc::non_finite_quality, "sample at L_p " + std::to_string(s.l_p));
        }
        buckets[s.l_p].push_back(s.quality.value);
    }
    RQEstimate est;
    for (auto &[l_p, values] : buckets) {
        std::sort(values.begin(), values.end());
        const double n = static_cast<double>(values.size());
        double mean, ss;
        if (values.front() == values.back()) {
            // identical samples: exactly zero spread, no summation noise
            mean = values.front();
            ss = 0.0;
        } else {
            double sum = 0.0;
            for (double v : values) sum += v;
            mean = sum / n;
            ss = 0.0;
            for (double v : values) {
                double d = v - mean;
                ss += d * d;
            }
        }
        GridPointStat stat;
        stat.mean = mean;
        stat.weight = n;
        stat.sum_sq_dev = ss;
        stat.variance = values.size() > 1 ? ss / (n - 1.0) : 0.0;
        est.grid.push_back(l_p);
        est.stats.push_back(stat);
    }
    std::vector<double> means;
    means.reserve(est.stats.size());
    for (const auto &s : est.stats) means.push_back(s.mean);
    est.curve = fit_curve(est.grid, means);
    return est;
}

namespace {

double band_halfwidth(const GridPointStat &stat, int k, double upper_prob, bool inflate) {
    if (stat.weight <= static_cast<double>(k)) {
        raise(Errc::insufficient_samples,
              "need more than k=" + std::to_string(k) + " samples, have weight " +
                  std::to_string(stat.weight));
    }
    if (stat.variance <= 0.0) return 0.0;
    double dof = stat.weight - static_cast<double>(k);
    double t = t_quantile(upper_prob, dof);
    double sd = std::sqrt(stat.variance);
    double infl = inflate ? std::sqrt(1.0 + 1.0 / stat.weight) : 1.0;
    return t * sd * infl;
}

} // namespace

PredictionBand prediction_interval(const RQEstimate &est, double l_p, double alpha, bool inflate) {
    if (!(alpha > 0.0 && alpha < 1.0)) throw std::invalid_argument("alpha outside (0,1)");
    std::size_t i = est.index_of(l_p);
    const GridPointStat &stat = est.stats[i];
    double hw = band_halfwidth(stat, est.k, 1.0 - alpha / 2.0, inflate);
    PredictionBand band;
    band.l_p = est.grid[i];
    band.lower = stat.mean - hw;
    band.upper = stat.mean + hw;
    band.alpha = alpha;
    band.dof = stat.weight - static_cast<double>(est.k);
    return band;
}

double lower_quality_bound(const RQEstimate &est, double l_p, double alpha_star, bool inflate) {
    if (!(alpha_star > 0.0 && alpha_star < 1.0)) throw std::invalid_argument("alpha_star outside (0,1)");
    std::size_t i = est.index_of(l_p);
    const GridPointStat &stat = est.stats[i];
    if (stat.variance <= 0.0) {
        if (stat.weight <= static_cast<double>(est.k)) {
            raise(Errc::insufficient_samples, "lower_quality_bound with weight <= k");
        }
        return stat.mean;
    }
    double dof = stat.weight - static_cast<double>(est.k);
    if (dof <= 0.0) raise(Errc::insufficient_samples, "lower_quality_bound with weight <= k");
    double t = t_quantile(alpha_star, dof);
    double infl = inflate ? std::sqrt(1.0 + 1.0 / stat.weight) : 1.0;
    return stat.mean - t * std::sqrt(stat.variance) * infl;
}

double interpolate(const RQEstimate &est, double l_p, Statistic which, double alpha_star,
                   bool inflate) {
    if (est.grid.empty()) raise(Errc::empty_input, "interpolate on an empty estimate");
    auto stat_at = [&](std::size_t i) {
        return which == Statistic::mean ? est.stats[i].mean
                                        : lower_quality_bound(est, est.grid[i], alpha_star, inflate);
    };
    const double lo = est.grid.front();
    const double hi = est.grid.back();
    if (l_p < lo - kGridEps) {
        raise(Errc::below_grid, "L_p " + std::to_string(l_p) + " below smallest grid point " +
                                    std::to_string(lo));
    }
    if (l_p <= lo) return stat_at(0);
    if (l_p >= hi) {
        if (l_p <= hi + kGridEps || !est.allow_extrapolation) return stat_at(est.grid.size() - 1);
        // Extrapolate the mean along the fitted curve; a lower bound keeps
        // the last grid point's margin.
        double mean_ex = est.curve.eval(l_p);
        if (which == Statistic::mean) return mean_ex;
        double margin = est.stats.back().mean - stat_at(est.grid.size() - 1);
        return mean_ex - margin;
    }
    std::size_t j = 1;
    while (j < est.grid.size() && est.grid[j] < l_p) ++j;
    double x0 = est.grid[j - 1], x1 = est.grid[j];
    double y0 = stat_at(j - 1), y1 = stat_at(j);
    double t = (l_p - x0) / (x1 - x0);
    return y0 + t * (y1 - y0);
}

RQEstimate update_with_pilot(const RQEstimate &est, std::span<const QualitySample> pilots,
                             double forgetting) {
    if (!(forgetting > 0.0 && forgetting <= 1.0)) {
        throw std::invalid_argument("forgetting outside (0,1]");
    }
    RQEstimate out = est;
    for (const auto &s : pilots) {
        if (!out.covers(s.l_p)) {
            raise(Errc::grid_mismatch, "pilot sample at off-grid L_p " + std::to_string(s.l_p));
        }
        if (!std::isfinite(s.quality.value)) {
            raise(Errc::non_finite_quality, "pilot sample at L_p " + std::to_string(s.l_p));
        }
        GridPointStat &stat = out.stats[out.index_of(s.l_p)];
        // Exponentially weighted Welford step: all previous weights decay by
        // the forgetting factor, the new observation enters with weight 1.
        double w_old = stat.weight * forgetting;
        double w_new = w_old + 1.0;
        double delta = s.quality.value - stat.mean;
        double mean_new = stat.mean + delta / w_new;
        stat.sum_sq_dev = stat.sum_sq_dev * forgetting + delta * (s.quality.value - mean_new);
        stat.weight = w_new;
        stat.mean = mean_new;
        stat.variance = w_new > 1.0 ? stat.sum_sq_dev / (w_new - 1.0) : 0.0;
    }
    std::vector<double> means;
    means.reserve(out.stats.size());
    for (const auto &s : out.stats) means.push_back(s.mean);
    out.curve = fit_curve(out.grid, means);
    return out;
}

std::string rq_to_json(const RQEstimate &est) {
    json j;
    j["grid"] = est.grid;
    json means = json::array(), variances = json::array(), counts = json::array(),
         ssd = json::array();
    for (const auto &s : est.stats) {
        means.push_back(s.mean);
        variances.push_back(s.variance);
        counts.push_back(s.weight);
        ssd.push_back(s.sum_sq_dev);
    }
    j["means"] = means;
    j["variances"] = variances;
    j["counts"] = counts;
    j["sum_sq_dev"] = ssd;
    j["k"] = est.k;
    j["curve"] = {{"a", est.curve.a}, {"b", est.curve.b}, {"c", est.curve.c}, {"ssr", est.curve.ssr}};
    j["allow_extrapolation"] = est.allow_extrapolation;
    // Band convention carried for consumers: two-sided alpha splits evenly,
    // one-sided bounds use t at alpha_star with the same dof.
    j["alpha_convention"] = "two-sided-symmetric";
    return j.dump(2);
}

RQEstimate rq_from_json(const std::string &text) {
    json j = json::parse(text);
    RQEstimate est;
    est.grid = j.at("grid").get<std::vector<double>>();
    auto means = j.at("means").get<std::vector<double>>();
    auto variances = j.at("variances").get<std::vector<double>>();
    auto counts = j.at("counts").get<std::vector<double>>();
    std::vector<double> ssd;
    if (j.contains("sum_sq_dev")) ssd = j.at("sum_sq_dev").get<std::vector<double>>();
    if (means.size() != est.grid.size() || variances.size() != est.grid.size() ||
        counts.size() != est.grid.size()) {
        raise(Errc::grid_mismatch, "estimate JSON arrays disagree in length");
    }
    for (std::size_t i = 0; i < est.grid.size(); ++i) {
        GridPointStat s;
        s.mean = means[i];
        s.variance = variances[i];
        s.weight = counts[i];
        s.sum_sq_dev = i < ssd.size() ? ssd[i] : variances[i] * std::max(0.0, counts[i] - 1.0);
        est.stats.push_back(s);
    }
    est.k = j.value("k", 1);
    if (j.contains("curve")) {
        est.curve.a = j["curve"].value("a", 0.0);
        est.curve.b = j["curve"].value("b", 1.0);
        est.curve.c = j["curve"].value("c", 0.0);
        est.curve.ssr = j["curve"].value("ssr", 0.0);
    }
    est.allow_extrapolation = j.value("allow_extrapolation", true);
    return est;
}

} // namespace genrelay
