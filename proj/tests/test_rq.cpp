#include "genrelay/rq_estimate.hpp"

#include "genrelay/rng.hpp"
#include "oracles.hpp"

#include <doctest.h>

#include <algorithm>
#include <cmath>

using namespace genrelay;

namespace {

QualitySample sample_at(double l_p, double value) {
    QualitySample s;
    s.l_p = l_p;
    s.quality.value = value;
    return s;
}

std::vector<QualitySample> draw_samples(const SyntheticRQLaw &law, const std::vector<double> &grid,
                                        int n_per_point, Rng &rng) {
    std::vector<QualitySample> out;
    for (double l_p : grid) {
        for (int i = 0; i < n_per_point; ++i) out.push_back(sample_at(l_p, law.sample(l_p, rng)));
    }
    return out;
}

RQEstimate manual_estimate(double l_p, double mean, double variance, double weight) {
    RQEstimate est;
    est.grid = {l_p};
    GridPointStat stat;
    stat.mean = mean;
    stat.variance = variance;
    stat.weight = weight;
    stat.sum_sq_dev = variance * std::max(0.0, weight - 1.0);
    est.stats = {stat};
    return est;
}

} // namespace

TEST_CASE("fit_rq hand statistics") {
    std::vector<QualitySample> samples = {sample_at(1.0, 1), sample_at(1.0, 2), sample_at(1.0, 3)};
    RQEstimate est = fit_rq(samples);
    REQUIRE(est.grid.size() == 1);
    CHECK(est.stats[0].mean == doctest::Approx(2.0));
    CHECK(est.stats[0].variance == doctest::Approx(1.0));
    CHECK(est.stats[0].weight == 3.0);
}

TEST_CASE("fit_rq constant samples give zero variance and a constant curve") {
    std::vector<QualitySample> samples;
    for (double l_p : {0.5, 1.0, 2.0}) {
        for (int i = 0; i < 4; ++i) samples.push_back(sample_at(l_p, 7.25));
    }
    RQEstimate est = fit_rq(samples);
    for (const auto &s : est.stats) CHECK(s.variance == 0.0);
    for (double l_p : {0.5, 1.0, 2.0, 3.5}) {
        CHECK(est.curve.eval(l_p) == doctest::Approx(7.25).epsilon(1e-9));
    }
}

TEST_CASE("fit_rq errors") {
    CHECK_THROWS_AS(fit_rq(std::vector<QualitySample>{}), Error);
    std::vector<QualitySample> bad = {sample_at(1.0, std::nan(""))};
    CHECK_THROWS_AS(fit_rq(bad), Error);
}

TEST_CASE("fit_rq recovers the synthetic law means") {
    SyntheticRQLaw law{10.0, 1.0, 0.5, 0.0};
    std::vector<double> grid = {0.5, 1.0, 2.0, 3.0};
    Rng rng(2024);
    RQEstimate est = fit_rq(draw_samples(law, grid, 200, rng));
    for (std::size_t j = 0; j < grid.size(); ++j) {
        CHECK(std::abs(est.stats[j].mean - law.mean(grid[j])) < 0.15);
    }
}

TEST_CASE("fit_rq is permutation-invariant") {
    SyntheticRQLaw law{10.0, 1.0, 1.0, 0.2};
    Rng rng(5150);
    auto samples = draw_samples(law, {0.5, 1.5, 3.0}, 20, rng);
    RQEstimate a = fit_rq(samples);
    std::reverse(samples.begin(), samples.end());
    RQEstimate b = fit_rq(samples);
    for (std::size_t j = 0; j < a.grid.size(); ++j) {
        CHECK(a.stats[j].mean == b.stats[j].mean);
        CHECK(a.stats[j].variance == b.stats[j].variance);
    }
    CHECK(a.curve.a == b.curve.a);
}

TEST_CASE("prediction interval against the published t-table") {
    // N = 5, k = 1, alpha = 0.10, mu = 10, Var = 4
    RQEstimate est = manual_estimate(1.0, 10.0, 4.0, 5.0);
    PredictionBand band = prediction_interval(est, 1.0, 0.10, true);
    double expected_hw = oracle::t_table(0.050, 4) * 2.0 * std::sqrt(1.2);
    CHECK(band.upper - band.lower == doctest::Approx(2 * expected_hw).epsilon(1e-4));
    CHECK(band.lower == doctest::Approx(10.0 - expected_hw).epsilon(1e-4));
    CHECK(band.upper == doctest::Approx(10.0 + expected_hw).epsilon(1e-4));
    CHECK(band.dof == 4.0);

    // without the finite-sample inflation
    PredictionBand flat = prediction_interval(est, 1.0, 0.10, false);
    CHECK(flat.upper - flat.lower ==
          doctest::Approx(2 * oracle::t_table(0.050, 4) * 2.0).epsilon(1e-4));
}

TEST_CASE("degenerate band at zero variance") {
    RQEstimate est = manual_estimate(2.0, 6.5, 0.0, 12.0);
    for (double alpha : {0.01, 0.10, 0.5}) {
        PredictionBand band = prediction_interval(est, 2.0, alpha);
        CHECK(band.lower == 6.5);
        CHECK(band.upper == 6.5);
    }
}

TEST_CASE("large-sample band approaches the normal limit") {
    RQEstimate est = manual_estimate(1.0, 0.0, 2.25, 1e6);
    PredictionBand band = prediction_interval(est, 1.0, 0.10, true);
    double z_limit = oracle::kZ05 * 1.5;
    CHECK(std::abs((band.upper - band.lower) / 2 - z_limit) / z_limit < 1e-3);
}

TEST_CASE("insufficient samples raises") {
    RQEstimate est = manual_estimate(1.0, 5.0, 1.0, 1.0); // weight == k
    CHECK_THROWS_AS(prediction_interval(est, 1.0, 0.10), Error);
    CHECK_THROWS_AS(lower_quality_bound(est, 1.0, 0.9), Error);
    CHECK_THROWS_AS(prediction_interval(est, 9.0, 0.10), Error); // off grid
}

TEST_CASE("lower bound identities") {
    RQEstimate est = manual_estimate(1.0, 8.0, 2.0, 10.0);
    CHECK(lower_quality_bound(est, 1.0, 0.5) == doctest::Approx(8.0).epsilon(1e-12));
    RQEstimate flat = manual_estimate(1.0, 8.0, 0.0, 10.0);
    for (double a : {0.1, 0.5, 0.99}) CHECK(lower_quality_bound(flat, 1.0, a) == 8.0);
}

TEST_CASE("one-sided bound coverage on fresh draws") {
    SyntheticRQLaw law{10.0, 1.0, 1.0, 0.0};
    const double l_p = 1.5;
    const int n_l = 50;
    const int trials = 20000;
    int exceed = 0;
    for (int t = 0; t < trials; ++t) {
        Rng rng(derive_seed(0xc0feeULL, {static_cast<std::uint64_t>(t)}));
        std::vector<QualitySample> samples;
        for (int i = 0; i < n_l; ++i) samples.push_back(sample_at(l_p, law.sample(l_p, rng)));
        RQEstimate est = fit_rq(samples);
        double bound = lower_quality_bound(est, l_p, 0.95, true);
        if (law.sample(l_p, rng) >= bound) ++exceed;
    }
    double frequency = double(exceed) / trials;
    CHECK(std::abs(frequency - 0.95) < 0.02);
}

TEST_CASE("band nesting in alpha") {
    SyntheticRQLaw law{10.0, 1.0, 1.0, 0.3};
    Rng rng(888);
    RQEstimate est = fit_rq(draw_samples(law, {0.5, 1.0, 2.0}, 12, rng));
    for (double l_p : est.grid) {
        PredictionBand wide = prediction_interval(est, l_p, 0.05);
        PredictionBand narrow = prediction_interval(est, l_p, 0.20);
        CHECK(wide.lower <= narrow.lower);
        CHECK(wide.upper >= narrow.upper);
    }
}

TEST_CASE("mean band width shrinks from N=4 to N=32") {
    SyntheticRQLaw law{10.0, 1.0, 1.0, 0.0};
    auto mean_width = [&](int n_l, std::uint64_t tag) {
        double sum = 0;
        const int reps = 1000;
        for (int r = 0; r < reps; ++r) {
            Rng rng(derive_seed(tag, {static_cast<std::uint64_t>(r)}));
            std::vector<QualitySample> samples;
            for (int i = 0; i < n_l; ++i) samples.push_back(sample_at(1.0, law.sample(1.0, rng)));
            PredictionBand band = prediction_interval(fit_rq(samples), 1.0, 0.10);
            sum += band.width();
        }
        return sum / reps;
    };
    CHECK(mean_width(32, 1) < mean_width(4, 2));
}

TEST_CASE("heavy-tailed noise hurts small-sample coverage more") {
    // Student-t(3) noise scaled to the same variance as the Gaussian case.
    const double sd = 1.0;
    const double scale = sd / std::sqrt(3.0);
    auto coverage = [&](int n_l, std::uint64_t tag) {
        const int trials = 20000;
        int inside = 0;
        for (int t = 0; t < trials; ++t) {
            Rng rng(derive_seed(tag, {static_cast<std::uint64_t>(t)}));
            std::vector<QualitySample> samples;
            for (int i = 0; i < n_l; ++i) {
                samples.push_back(sample_at(1.0, 5.0 + scale * rng.student_t(3)));
            }
            PredictionBand band = prediction_interval(fit_rq(samples), 1.0, 0.10);
            double fresh = 5.0 + scale * rng.student_t(3);
            if (fresh >= band.lower && fresh <= band.upper) ++inside;
        }
        return double(inside) / trials;
    };
    double dev_small = std::abs(coverage(3, 0xaaa) - 0.90);
    double dev_large = std::abs(coverage(50, 0xbbb) - 0.90);
    CHECK(dev_small > dev_large);
}

TEST_CASE("interpolation rules") {
    std::vector<QualitySample> samples;
    for (int i = 0; i < 3; ++i) {
        samples.push_back(sample_at(1.0, 4.0));
        samples.push_back(sample_at(2.0, 8.0));
    }
    RQEstimate est = fit_rq(samples);
    CHECK(interpolate(est, 1.0, Statistic::mean) == doctest::Approx(4.0));
    CHECK(interpolate(est, 2.0, Statistic::mean) == doctest::Approx(8.0));
    CHECK(interpolate(est, 1.5, Statistic::mean) == doctest::Approx(6.0));
    CHECK_THROWS_AS(interpolate(est, 0.5, Statistic::mean), Error);

    est.allow_extrapolation = false;
    CHECK(interpolate(est, 3.0, Statistic::mean) == doctest::Approx(8.0)); // clamp
}

TEST_CASE("curve extrapolation matches the closed form") {
    CurveFit truth{6.0, 0.8, 1.5, 0.0};
    std::vector<QualitySample> samples;
    std::vector<double> grid = {0.5, 1.0, 1.5, 2.5, 4.0};
    for (double l_p : grid) {
        for (int i = 0; i < 2; ++i) samples.push_back(sample_at(l_p, truth.eval(l_p)));
    }
    RQEstimate est = fit_rq(samples);
    CHECK(est.curve.a == doctest::Approx(truth.a).epsilon(1e-4));
    CHECK(est.curve.b == doctest::Approx(truth.b).epsilon(1e-4));
    CHECK(est.curve.c == doctest::Approx(truth.c).epsilon(1e-3));
    double l_far = 2.0 * grid.back();
    CHECK(interpolate(est, l_far, Statistic::mean) ==
          doctest::Approx(truth.eval(l_far)).epsilon(1e-4));
}

TEST_CASE("pilot update: sample at the mean keeps it and shrinks the variance") {
    std::vector<QualitySample> samples = {sample_at(1.0, 1), sample_at(1.0, 2), sample_at(1.0, 3)};
    RQEstimate est = fit_rq(samples);
    RQEstimate updated =
        update_with_pilot(est, std::vector<QualitySample>{sample_at(1.0, 2.0)}, 1.0);
    CHECK(updated.stats[0].mean == doctest::Approx(2.0));
    CHECK(updated.stats[0].variance < est.stats[0].variance);
    CHECK(updated.stats[0].weight == 4.0);
}

TEST_CASE("pooled pilot update equals refitting the concatenation") {
    SyntheticRQLaw law{10.0, 1.0, 1.0, 0.1};
    std::vector<double> grid = {0.5, 1.5, 3.0};
    Rng rng(31415);
    auto batch1 = draw_samples(law, grid, 10, rng);
    auto batch2 = draw_samples(law, grid, 7, rng);
    RQEstimate incremental = update_with_pilot(fit_rq(batch1), batch2, 1.0);
    auto all = batch1;
    all.insert(all.end(), batch2.begin(), batch2.end());
    RQEstimate batch = fit_rq(all);
    for (std::size_t j = 0; j < grid.size(); ++j) {
        CHECK(incremental.stats[j].mean == doctest::Approx(batch.stats[j].mean).epsilon(1e-12));
        CHECK(incremental.stats[j].variance ==
              doctest::Approx(batch.stats[j].variance).epsilon(1e-9));
        CHECK(incremental.stats[j].weight == doctest::Approx(batch.stats[j].weight));
    }
}

TEST_CASE("pilot update tracks a distribution shift") {
    RQEstimate est = manual_estimate(1.0, 5.0, 0.5, 40.0);
    Rng rng(271828);
    RQEstimate current = est;
    for (int i = 0; i < 50; ++i) {
        std::vector<QualitySample> pilot = {sample_at(1.0, rng.normal(8.0, 0.3))};
        current = update_with_pilot(current, pilot, 0.9);
    }
    CHECK(std::abs(current.stats[0].mean - 8.0) < 0.3);
}

TEST_CASE("pilot update rejects off-grid samples") {
    RQEstimate est = manual_estimate(1.0, 5.0, 0.5, 10.0);
    std::vector<QualitySample> off = {sample_at(2.0, 5.0)};
    CHECK_THROWS_AS(update_with_pilot(est, off, 1.0), Error);
}

TEST_CASE("estimate JSON round trip") {
    SyntheticRQLaw law{10.0, 1.0, 1.0, 0.2};
    Rng rng(11);
    RQEstimate est = fit_rq(draw_samples(law, {0.5, 1.0, 2.0}, 8, rng));
    RQEstimate back = rq_from_json(rq_to_json(est));
    REQUIRE(back.grid == est.grid);
    for (std::size_t j = 0; j < est.grid.size(); ++j) {
        CHECK(back.stats[j].mean == est.stats[j].mean);
        CHECK(back.stats[j].variance == est.stats[j].variance);
        CHECK(back.stats[j].weight == est.stats[j].weight);
    }
    CHECK(back.curve.a == est.curve.a);
    CHECK(back.k == est.k);
    // a pilot update continues identically after the round trip
    std::vector<QualitySample> pilot = {sample_at(0.5, 4.0)};
    RQEstimate u1 = update_with_pilot(est, pilot, 0.95);
    RQEstimate u2 = update_with_pilot(back, pilot, 0.95);
    CHECK(u1.stats[0].variance == doctest::Approx(u2.stats[0].variance).epsilon(1e-12));
}
