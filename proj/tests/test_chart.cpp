#include "kumachart/chart.hpp"
#include "kumachart/data_io.hpp"
#include "kumachart/mle_fit.hpp"

#include <boost/multiprecision/cpp_bin_float.hpp>
#include <gtest/gtest.h>

#include <cmath>
#include <random>

using namespace kumachart;

namespace {

double quantile_oracle(double u, double a, double b) {
    using BigFloat = boost::multiprecision::cpp_bin_float_50;
    const BigFloat one = 1;
    return static_cast<double>(pow(one - pow(one - BigFloat(u), one / BigFloat(b)), one / BigFloat(a)));
}

std::vector<double> phase1_values() {
    return read_data_file(std::string(KUMACHART_DATA_DIR) + "/phase1_sample.txt").values;
}

const KumaParams kHumidity(5.631625, 13815.307376);

} // namespace

TEST(ControlLimits, OrderingInvariant) {
    EXPECT_THROW(ControlLimits(0.3, 0.2, 0.25, 0.05, LimitSource::known), std::domain_error);
    EXPECT_THROW(ControlLimits(0.1, 0.2, 0.25, 0.05, LimitSource::known), std::domain_error);
    EXPECT_THROW(ControlLimits(0.1, 0.3, 0.2, 1.0, LimitSource::known), std::domain_error);
    EXPECT_NO_THROW(ControlLimits(0.1, 0.3, 0.2, 0.05, LimitSource::known));
}

TEST(LimitsKnown, UniformAndReferenceLimits) {
    const auto u = limits_known({1, 1}, 0.05);
    EXPECT_NEAR(u.lcl, 0.025, 1e-15);
    EXPECT_NEAR(u.ucl, 0.975, 1e-15);
    EXPECT_EQ(u.source, LimitSource::known);
    const auto h = limits_known(kHumidity, 0.05);
    EXPECT_NEAR(h.lcl, 0.095789, 5e-6);
    EXPECT_NEAR(h.ucl, 0.231980, 5e-6);
    EXPECT_THROW(limits_known({1, 1}, 0.0), std::domain_error);
    EXPECT_THROW(limits_known({1, 1}, 1.0), std::domain_error);
}

TEST(LimitsKnown, ThreeSigmaEquivalentMatchesOracle) {
    const auto l = limits_known({2, 30}, 0.0027);
    EXPECT_NEAR(l.lcl, quantile_oracle(0.00135, 2, 30), 1e-16);
    EXPECT_NEAR(l.ucl, quantile_oracle(0.99865, 2, 30), 1e-15);
}

TEST(LimitsPlugin, PhaseISampleFit) {
    const FitResult fit = fit_mle(PhaseISample(phase1_values()));
    const auto l = limits_plugin(fit.params_hat, 0.0027);
    EXPECT_EQ(l.source, LimitSource::plugin);
    EXPECT_NEAR(l.lcl, 0.001866, 0.02 * 0.001866);
    EXPECT_NEAR(l.ucl, 0.128041, 0.02 * 0.128041);
    // The reference adjusted limits come from the full-precision estimates.
    const auto b = limits_plugin(fit.params_hat, 0.00052);
    EXPECT_NEAR(b.lcl, 0.000821, 2e-5);
    EXPECT_NEAR(b.ucl, 0.142913, 2e-5);
    const auto a = limits_plugin(fit.params_hat, 0.00291);
    EXPECT_NEAR(a.lcl, 0.001937, 2e-5);
    EXPECT_NEAR(a.ucl, 0.127322, 2e-5);
    const auto b20 = limits_plugin(fit.params_hat, 0.000983);
    EXPECT_NEAR(b20.lcl, 0.001128, 2e-5);
    EXPECT_NEAR(b20.ucl, 0.137363, 2e-5);
    EXPECT_NEAR(l.cl, 0.041786, 1e-5);
}

TEST(LimitsPlugin, TruthReproducesKnownLimits) {
    const auto k = limits_known({3, 12}, 0.01);
    const auto p = limits_plugin({3, 12}, 0.01);
    EXPECT_EQ(k.lcl, p.lcl);
    EXPECT_EQ(k.ucl, p.ucl);
    EXPECT_EQ(k.cl, p.cl);
}

TEST(CenterLine, MedianAndMean) {
    EXPECT_NEAR(center_line({1, 1}), 0.5, 1e-15);
    EXPECT_NEAR(center_line(kHumidity), 0.172401, 5e-6);
    EXPECT_NEAR(center_line({2, 30}, CenterLineMode::mean), 0.159814, 1e-6);
}

TEST(FalseAlarm, ConstructionIdentityAndMonotonicity) {
    for (const KumaParams p : {KumaParams(2, 30), KumaParams(3, 12), KumaParams(12, 100), kHumidity}) {
        for (const double a : {0.0027, 0.05, 0.3}) {
            const auto l = limits_known(p, a);
            EXPECT_NEAR(false_alarm_prob(l, p), a, 1e-12);
            EXPECT_NEAR(cdf(l.lcl, p), a / 2, 1e-12);
            EXPECT_NEAR(survival(l.ucl, p), a / 2, 1e-12);
            const ControlLimits wider(l.lcl * 0.99, std::min(l.ucl * 1.01, 0.999999), l.cl, a, LimitSource::known);
            EXPECT_LT(false_alarm_prob(wider, p), false_alarm_prob(l, p));
        }
    }
}

TEST(FalseAlarm, AdjustedLimitsUnderRoundedEstimates) {
    const ControlLimits l(0.000821, 0.142913, 0.0418, 0.00052, LimitSource::adjusted_b);
    EXPECT_NEAR(false_alarm_prob(l, {2.01, 405.60}), 0.00052, 1e-5);
}

TEST(ConditionalArl, CaseKIdentity) {
    for (const KumaParams p : {KumaParams(2, 30), KumaParams(3, 12), KumaParams(12, 100)}) {
        EXPECT_NEAR(conditional_arl(limits_known(p, 0.0027), p), 370.37037037, 1e-6);
        for (const double a : {0.0027, 0.05, 0.1}) {
            EXPECT_NEAR(conditional_arl(limits_known(p, a), p) * a, 1.0, 1e-10);
        }
    }
}

TEST(ConditionalArl, IncreasingTheta2ShiftIsUndetected) {
    const auto l = limits_known({3, 12}, 0.0027);
    EXPECT_GT(conditional_arl(l, apply_shift({3, 12}, {1, 1.5})), 370.4);
}

TEST(ConditionalArl, OverflowGuard) {
    const ControlLimits l(1e-12, 1 - 1e-12, 0.5, 0.01, LimitSource::known);
    EXPECT_THROW(conditional_arl(l, {50, 50}), ArlOverflowError);
}

TEST(Shift, ApplyShift) {
    EXPECT_EQ(apply_shift({2, 30}, {}), KumaParams(2, 30));
    const auto p = apply_shift({3, 12}, {0.8, 1});
    EXPECT_NEAR(p.theta1(), 2.4, 1e-15);
    EXPECT_EQ(p.theta2(), 12);
    EXPECT_EQ(apply_shift({12, 100}, {1, 2}), KumaParams(12, 200));
    EXPECT_THROW(ShiftSpec(0, 1), std::domain_error);
    EXPECT_TRUE(ShiftSpec().in_control());
}

TEST(Shift, DefaultGrid) {
    const auto g = default_shift_grid();
    ASSERT_EQ(g.size(), 16u);
    EXPECT_DOUBLE_EQ(g.front(), 0.5);
    EXPECT_DOUBLE_EQ(g.back(), 2.0);
    EXPECT_DOUBLE_EQ(g[5], 1.0);
}

TEST(RunChart, PhaseISampleHasNoSignals) {
    const auto values = phase1_values();
    const FitResult fit = fit_mle(PhaseISample(values));
    for (const double a : {0.0027, 0.00291, 0.00052, 0.000983}) {
        const auto run = run_chart(values, limits_plugin(fit.params_hat, a));
        EXPECT_TRUE(run.signal_indices.empty()) << a;
        EXPECT_EQ(run.points.size(), values.size());
    }
}

TEST(RunChart, ClosedIntervalRule) {
    const ControlLimits l(0.1, 0.45, 0.3, 0.01, LimitSource::known);
    const std::vector<double> data = {0.2, 0.45, 0.1, 0.9, 0.05, 0.3};
    const auto run = run_chart(data, l);
    EXPECT_EQ(run.points[1].status, PointStatus::in);
    EXPECT_EQ(run.points[2].status, PointStatus::in);
    EXPECT_EQ(run.points[3].status, PointStatus::above_ucl);
    EXPECT_EQ(run.points[4].status, PointStatus::below_lcl);
    EXPECT_EQ(run.signal_indices, (std::vector<std::size_t>{4, 5}));
    const auto single = run_chart(std::vector<double>{0.2, 0.9, 0.3}, l);
    EXPECT_EQ(single.signal_indices, (std::vector<std::size_t>{2}));
    EXPECT_THROW(run_chart(std::vector<double>{0.2, 1.0}, l), std::domain_error);
}

TEST(Invariants, LimitNesting) {
    for (const KumaParams p : {KumaParams(2, 30), KumaParams(3, 12), KumaParams(12, 100)}) {
        double prev_l = 0.0, prev_u = 1.0;
        for (const double a : {1e-5, 1e-4, 0.00052, 0.0027, 0.01, 0.05, 0.2}) {
            const auto l = limits_known(p, a);
            EXPECT_GT(l.lcl, prev_l);
            EXPECT_LT(l.ucl, prev_u);
            prev_l = l.lcl;
            prev_u = l.ucl;
        }
    }
}

TEST(Invariants, GeometricRunLengthSimulation) {
    // Empirical mean run length of 1e5 simulated geometric trials.
    const KumaParams p0(3, 12);
    const auto l = limits_known(p0, 0.05);
    for (const KumaParams monitored : {p0, apply_shift(p0, {0.8, 1})}) {
        RandomStream stream(99);
        const int trials = 100000;
        double sum = 0.0, sumsq = 0.0;
        for (int t = 0; t < trials; ++t) {
            int n = 0;
            double y = 0.0;
            do {
                ++n;
                y = quantile(stream.uniform_open(), monitored);
            } while (y >= l.lcl && y <= l.ucl);
            sum += n;
            sumsq += static_cast<double>(n) * n;
        }
        const double avg = sum / trials;
        const double se = std::sqrt((sumsq / trials - avg * avg) / trials);
        EXPECT_NEAR(avg, conditional_arl(l, monitored), 3 * se);
    }
}
