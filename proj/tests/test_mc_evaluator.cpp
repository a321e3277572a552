#include "kumachart/mc_evaluator.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>

using namespace kumachart;

namespace {

StudyConfig config(const KumaParams& p, std::size_t m, std::size_t n, std::uint64_t seed) {
    StudyConfig c;
    c.params0 = p;
    c.m = m;
    c.replications = n;
    c.seed = seed;
    c.workers = 1;
    return c;
}

} // namespace

TEST(SimulateCarl, ValuesAtLeastOneAndDeterministic) {
    const auto cfg = config({2, 30}, 50, 500, 17);
    const CarlSample a = simulate_carl(cfg);
    const CarlSample b = simulate_carl(cfg);
    ASSERT_EQ(a.carl_values.size(), 500u);
    EXPECT_EQ(a.fit_records.size(), 500u);
    EXPECT_EQ(a.carl_values, b.carl_values);
    for (const double v : a.carl_values) {
        EXPECT_GE(v, 1.0);
    }
}

TEST(SimulateCarl, WorkerCountInvariant) {
    auto cfg = config({3, 12}, 60, 301, 5);
    const CarlSample one = simulate_carl(cfg);
    cfg.workers = 4;
    const CarlSample four = simulate_carl(cfg);
    cfg.workers = 7;
    const CarlSample seven = simulate_carl(cfg);
    EXPECT_EQ(one.carl_values, four.carl_values);
    EXPECT_EQ(one.carl_values, seven.carl_values);
}

TEST(SimulateCarl, FitsDoNotDependOnAlpha) {
    auto cfg = config({12, 100}, 80, 200, 23);
    const CarlSample a = simulate_carl(cfg);
    cfg.alpha = 0.0005;
    const CarlSample b = simulate_carl(cfg);
    ASSERT_EQ(a.fit_records.size(), b.fit_records.size());
    for (std::size_t i = 0; i < a.fit_records.size(); ++i) {
        EXPECT_EQ(a.fit_records[i].theta1_hat, b.fit_records[i].theta1_hat);
        EXPECT_EQ(a.fit_records[i].theta2_hat, b.fit_records[i].theta2_hat);
    }
    // Narrower alpha widens every chart.
    for (std::size_t i = 0; i < a.carl_values.size(); ++i) {
        EXPECT_GT(b.carl_values[i], a.carl_values[i]);
    }
}

TEST(SimulateCarl, RejectsInvalidConfig) {
    EXPECT_THROW(simulate_carl(config({2, 30}, 1, 10, 1)), std::invalid_argument);
    EXPECT_THROW(simulate_carl(config({2, 30}, 10, 0, 1)), std::invalid_argument);
    auto bad = config({2, 30}, 10, 10, 1);
    bad.alpha = 1.5;
    EXPECT_THROW(simulate_carl(bad), std::domain_error);
}

TEST(FailureShare, AbortsAboveOnePercent) {
    std::vector<FitRecord> fits(200, FitRecord{2, 30, true});
    fits[0].converged = false;
    fits[1].converged = false;
    EXPECT_NO_THROW(check_failure_share(fits));
    fits[2].converged = false;
    EXPECT_THROW(check_failure_share(fits), StudyError);
}

TEST(CarlFromFits, NonConvergedExcludedAndCounted) {
    std::vector<FitRecord> fits = {{2, 30, true}, {0, 0, false}, {2.1, 31, true}};
    const CarlSample s = carl_from_fits(fits, {2, 30}, 0.0027);
    EXPECT_EQ(s.carl_values.size(), 2u);
    const CarlSummary sum = summarize(s, 370.4, 370.4);
    EXPECT_EQ(sum.n_effective, 2u);
    EXPECT_EQ(sum.n_failed, 1u);
    EXPECT_NEAR(s.carl_values[0], 1 / 0.0027, 1e-8);
}

TEST(Summarize, ConstantSample) {
    CarlSample s;
    s.carl_values.assign(10, 370.4);
    const CarlSummary sum = summarize(s, 370.4, 370.4);
    EXPECT_DOUBLE_EQ(sum.aarl, 370.4);
    EXPECT_NEAR(sum.sdarl, 0.0, 1e-10);
    EXPECT_TRUE(sum.sdarl_defined);
    EXPECT_DOUBLE_EQ(sum.perc, 0.0);
    for (const double v : sum.percentiles) {
        EXPECT_DOUBLE_EQ(v, 370.4);
    }
}

TEST(Summarize, SingleValueFlagsUndefinedSd) {
    CarlSample s;
    s.carl_values = {412.0};
    const CarlSummary sum = summarize(s, 370.4, 370.4);
    EXPECT_DOUBLE_EQ(sum.aarl, 412.0);
    EXPECT_FALSE(sum.sdarl_defined);
    EXPECT_EQ(sum.sdarl, 0.0);
}

TEST(Summarize, EmptyAndBadThreshold) {
    EXPECT_THROW(summarize(CarlSample{}, 370.4, 370.4), std::invalid_argument);
    CarlSample s;
    s.carl_values = {1.0};
    EXPECT_THROW(summarize(s, 370.4, 0.0), std::domain_error);
}

TEST(Summarize, LinearInterpolationPercentiles) {
    EXPECT_DOUBLE_EQ(interpolated_quantile({1, 2, 3, 4}, 0.25), 1.75);
    EXPECT_DOUBLE_EQ(interpolated_quantile({1, 2, 3, 4}, 0.5), 2.5);
    EXPECT_DOUBLE_EQ(interpolated_quantile({5}, 0.9), 5.0);
    CarlSample s;
    for (int i = 1; i <= 101; ++i) {
        s.carl_values.push_back(static_cast<double>(102 - i));
    }
    const CarlSummary sum = summarize(s, 50.0, 50.0);
    EXPECT_DOUBLE_EQ(sum.percentile(0.05), 6.0);
    EXPECT_DOUBLE_EQ(sum.percentile(0.50), 51.0);
    EXPECT_DOUBLE_EQ(sum.percentile(0.95), 96.0);
    EXPECT_DOUBLE_EQ(sum.perc, 49.0 / 101.0);
    EXPECT_NEAR(sum.sdarl, std::sqrt(101.0 * 102.0 / 12.0), 1e-9);
    EXPECT_THROW(sum.percentile(0.33), std::out_of_range);
}

TEST(Summarize, PercentilesOrderedAndPercReproducible) {
    const CarlSample s = simulate_carl(config({2, 30}, 100, 2000, 31));
    const CarlSummary sum = summarize(s, 1 / 0.0027, 1 / 0.0027);
    EXPECT_TRUE(std::is_sorted(sum.percentiles.begin(), sum.percentiles.end()));
    const auto below = std::count_if(s.carl_values.begin(), s.carl_values.end(), [](double v) { return v < 1 / 0.0027; });
    EXPECT_EQ(sum.perc, static_cast<double>(below) / s.carl_values.size());
    // Reference values for (2, 30), m = 100, at a smaller N.
    EXPECT_NEAR(sum.aarl, 421.07, 0.06 * 421.07);
    EXPECT_NEAR(sum.perc, 0.5771, 0.04);
}

TEST(Trends, AarlAndSdarlShrinkWithM) {
    double prev_gap = 1e9, prev_sd = 1e9;
    for (const std::size_t m : {100u, 500u, 2000u}) {
        const CarlSummary s = summarize(simulate_carl(config({3, 12}, m, 1000, 2)), 370.37, 370.37);
        EXPECT_LT(std::abs(s.aarl - 1 / 0.0027), prev_gap) << m;
        EXPECT_LT(s.sdarl, prev_sd) << m;
        prev_gap = std::abs(s.aarl - 1 / 0.0027);
        prev_sd = s.sdarl;
    }
}

TEST(OocStudy, InControlRowAndCaseK) {
    OocConfig cfg;
    cfg.params0 = KumaParams(3, 12);
    cfg.m = 100;
    cfg.rules = {{"plugin", LimitSource::plugin, 0.0027}, {"adj_b", LimitSource::adjusted_b, 0.00052}};
    for (const double d : default_shift_grid()) {
        cfg.shifts.emplace_back(1.0, d);
    }
    cfg.replications = 400;
    cfg.seed = 8;
    cfg.workers = 2;
    cfg.keep_samples = true;
    const auto rows = ooc_study(cfg);
    ASSERT_EQ(rows.size(), 16u);

    const CarlSummary ic = summarize(simulate_carl(config({3, 12}, 100, 400, 8)), 1 / 0.0027, 1 / 0.0027);
    const OocRow& one = rows[5];
    ASSERT_TRUE(one.shift.in_control());
    EXPECT_NEAR(one.case_k_arl, 370.37, 0.01);
    EXPECT_DOUBLE_EQ(one.summaries[0].aarl, ic.aarl);

    for (const OocRow& r : rows) {
        // At delta2 = 2 the two tails sum to alpha exactly.
        if (r.shift.delta2 > 1.0) {
            EXPECT_GE(r.case_k_arl, 1 / 0.0027 - 1e-9) << r.shift.delta2;
        }
        ASSERT_EQ(r.samples.size(), 2u);
        // Wider limits give a larger conditional ARL for each Phase I sample.
        for (std::size_t i = 0; i < r.samples[0].carl_values.size(); ++i) {
            EXPECT_GT(r.samples[1].carl_values[i], r.samples[0].carl_values[i]);
        }
    }
}

TEST(OocStudy, NeedsARule) {
    OocConfig cfg;
    cfg.shifts = {ShiftSpec{}};
    cfg.replications = 10;
    EXPECT_THROW(ooc_study(cfg), std::invalid_argument);
}
