#include "kumachart/mc_evaluator.hpp"

#include "kumachart/mle_fit.hpp"
#include "parallel.hpp"

#include <algorithm>
#include <cmath>
#include <iterator>
#include <limits>
#include <numeric>

namespace kumachart {

double CarlSummary::percentile(double level) const {
    for (std::size_t i = 0; i < kPercentileLevels.size(); ++i) {
        if (std::abs(kPercentileLevels[i] - level) < 1e-12) {
            return percentiles[i];
        }
    }
    throw std::out_of_range("percentile level is not part of the summary set");
}

void check_failure_share(const std::vector<FitRecord>& fits) {
    const auto failed = static_cast<std::size_t>(
        std::count_if(fits.begin(), fits.end(), [](const FitRecord& f) { return !f.converged; }));
    if (failed * 100 > fits.size()) {
        throw StudyError(std::to_string(failed) + " of " + std::to_string(fits.size()) +
                         " Phase I fits failed to converge (limit is 1%)");
    }
}

std::vector<FitRecord> simulate_fits(const KumaParams& params0, std::size_t m, std::size_t replications,
                                     std::uint64_t seed, unsigned workers) {
    if (m < 2) {
        throw std::invalid_argument("Phase I size m must be at least 2");
    }
    if (replications < 1) {
        throw std::invalid_argument("replications must be at least 1");
    }
    std::vector<FitRecord> fits(replications);
    const FitOptions options{.compute_std_errors = false};
    detail::parallel_for(replications, workers, [&](std::size_t r) {
        RandomStream stream(seed, r);
        try {
            const PhaseISample phase1(sample(params0, m, stream));
            const FitResult fit = fit_mle(phase1, options);
            fits[r] = {fit.params_hat.theta1(), fit.params_hat.theta2(), fit.converged};
        } catch (const DegenerateSampleError&) {
            fits[r] = {};
        } catch (const std::domain_error&) {
            fits[r] = {};
        }
    });
    check_failure_share(fits);
    return fits;
}

CarlSample carl_from_fits(const std::vector<FitRecord>& fits, const KumaParams& params0, double alpha,
                          const ShiftSpec& shift, unsigned workers) {
    const KumaParams monitored = apply_shift(params0, shift);
    std::vector<double> slots(fits.size(), std::numeric_limits<double>::quiet_NaN());
    detail::parallel_for(fits.size(), workers, [&](std::size_t r) {
        const FitRecord& f = fits[r];
        if (!f.converged) {
            return;
        }
        const ControlLimits limits = limits_plugin(KumaParams(f.theta1_hat, f.theta2_hat), alpha);
        slots[r] = conditional_arl(limits, monitored);
    });
    CarlSample out;
    out.fit_records = fits;
    out.carl_values.reserve(fits.size());
    std::copy_if(slots.begin(), slots.end(), std::back_inserter(out.carl_values),
                 [](double v) { return !std::isnan(v); });
    return out;
}

CarlSample simulate_carl(const StudyConfig& config) {
    if (!(config.alpha > 0.0 && config.alpha < 1.0)) {
        throw std::domain_error("alpha must lie in (0, 1)");
    }
    const auto fits = simulate_fits(config.params0, config.m, config.replications, config.seed, config.workers);
    return carl_from_fits(fits, config.params0, config.alpha, config.shift, config.workers);
}

double interpolated_quantile(const std::vector<double>& sorted, double level) {
    if (sorted.empty()) {
        throw std::invalid_argument("quantile of an empty sample");
    }
    const double pos = level * static_cast<double>(sorted.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
    const double frac = pos - static_cast<double>(lo);
    return sorted[lo] + frac * (sorted[hi] - sorted[lo]);
}

CarlSummary summarize(const CarlSample& sample, double reference_arl, double threshold) {
    const auto& v = sample.carl_values;
    if (v.empty()) {
        throw std::invalid_argument("cannot summarize an empty CARL sample");
    }
    if (!(threshold > 0.0)) {
        throw std::domain_error("summary threshold must be positive");
    }
    CarlSummary s;
    s.reference_arl = reference_arl;
    s.threshold = threshold;
    s.n_effective = v.size();
    s.n_failed = static_cast<std::size_t>(std::count_if(sample.fit_records.begin(), sample.fit_records.end(),
                                                        [](const FitRecord& f) { return !f.converged; }));
    const double n = static_cast<double>(v.size());
    s.aarl = std::accumulate(v.begin(), v.end(), 0.0) / n;
    if (v.size() > 1) {
        double ss = 0.0;
        for (const double x : v) {
            ss += (x - s.aarl) * (x - s.aarl);
        }
        s.sdarl = std::sqrt(ss / (n - 1.0));
        s.sdarl_defined = true;
    }
    s.perc = static_cast<double>(std::count_if(v.begin(), v.end(), [&](double x) { return x < threshold; })) / n;

    std::vector<double> sorted = v;
    std::sort(sorted.begin(), sorted.end());
    for (std::size_t i = 0; i < kPercentileLevels.size(); ++i) {
        s.percentiles[i] = interpolated_quantile(sorted, kPercentileLevels[i]);
    }
    return s;
}

std::vector<OocRow> ooc_study(const OocConfig& config, const std::vector<FitRecord>& fits) {
    if (config.rules.empty()) {
        throw std::invalid_argument("an out-of-control study needs at least one limit rule");
    }
    const double arl0 = 1.0 / config.alpha_nominal;
    const ControlLimits true_limits = limits_known(config.params0, config.alpha_nominal);
    std::vector<OocRow> rows;
    rows.reserve(config.shifts.size());
    for (const ShiftSpec& shift : config.shifts) {
        OocRow row;
        row.shift = shift;
        row.case_k_arl = conditional_arl(true_limits, apply_shift(config.params0, shift));
        for (const LimitRule& rule : config.rules) {
            CarlSample s = carl_from_fits(fits, config.params0, rule.alpha, shift, config.workers);
            row.summaries.push_back(summarize(s, arl0, arl0));
            if (config.keep_samples) {
                row.samples.push_back(std::move(s));
            }
        }
        rows.push_back(std::move(row));
    }
    return rows;
}

std::vector<OocRow> ooc_study(const OocConfig& config) {
    const auto fits = simulate_fits(config.params0, config.m, config.replications, config.seed, config.workers);
    return ooc_study(config, fits);
}

} // namespace kumachart
