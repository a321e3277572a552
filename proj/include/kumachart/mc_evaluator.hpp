#pragma once

#include "kumachart/chart.hpp"
#include "kumachart/kuma_dist.hpp"

#include <array>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace kumachart {

/// Raised when more than 1% of the Phase I fits in a study fail to converge.
class StudyError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct StudyConfig {
    KumaParams params0{1.0, 1.0};
    std::size_t m = 100;
    double alpha = 0.0027;
    std::size_t replications = 25000;
    std::uint64_t seed = 0;
    ShiftSpec shift{};
    unsigned workers = 0;  // 0 selects std::thread::hardware_concurrency()
};

struct FitRecord {
    double theta1_hat = 0.0;
    double theta2_hat = 0.0;
    bool converged = false;
};

/// Conditional ARL values for the converged replications, in replication
/// order, plus the fit record of every replication.
struct CarlSample {
    std::vector<double> carl_values;
    std::vector<FitRecord> fit_records;
};

inline constexpr std::array<double, 7> kPercentileLevels = {0.05, 0.10, 0.25, 0.50, 0.75, 0.90, 0.95};

struct CarlSummary {
    double aarl = 0.0;
    double sdarl = 0.0;
    bool sdarl_defined = false;  // false when fewer than two values
    double perc = 0.0;           // fraction of values strictly below threshold
    std::array<double, kPercentileLevels.size()> percentiles{};
    double reference_arl = 0.0;
    double threshold = 0.0;
    std::size_t n_effective = 0;
    std::size_t n_failed = 0;

    double percentile(double level) const;
};

/// Steps 1-2 of the in-control study: for each replication r draw a Phase I
/// sample of size m from substream (seed, r) and fit it. The result does not
/// depend on the worker count.
std::vector<FitRecord> simulate_fits(const KumaParams& params0, std::size_t m, std::size_t replications,
                                     std::uint64_t seed, unsigned workers = 0);

/// Steps 3-4 on cached fits: plug-in limits at alpha, CARL under the shifted
/// parameters.
CarlSample carl_from_fits(const std::vector<FitRecord>& fits, const KumaParams& params0, double alpha,
                          const ShiftSpec& shift = {}, unsigned workers = 0);

CarlSample simulate_carl(const StudyConfig& config);

/// Empirical quantile with linear interpolation between order statistics
/// (position (n-1) * level). The input must be sorted.
double interpolated_quantile(const std::vector<double>& sorted, double level);

CarlSummary summarize(const CarlSample& sample, double reference_arl, double threshold);

struct LimitRule {
    std::string label;
    LimitSource source = LimitSource::plugin;
    double alpha = 0.0027;
};

struct OocConfig {
    KumaParams params0{1.0, 1.0};
    std::size_t m = 100;
    double alpha_nominal = 0.0027;
    std::vector<LimitRule> rules;
    std::vector<ShiftSpec> shifts;
    std::size_t replications = 25000;
    std::uint64_t seed = 0;
    unsigned workers = 0;
    bool keep_samples = false;
};

struct OocRow {
    ShiftSpec shift;
    double case_k_arl = 0.0;               // known-parameter ARL at alpha_nominal
    std::vector<CarlSummary> summaries;    // one per rule
    std::vector<CarlSample> samples;       // one per rule when keep_samples
};

/// Out-of-control study. One cache of fitted estimates is shared by every
/// shift and every rule.
std::vector<OocRow> ooc_study(const OocConfig& config);

/// Same, reusing fits obtained elsewhere (e.g. from a calibration run).
std::vector<OocRow> ooc_study(const OocConfig& config, const std::vector<FitRecord>& fits);

/// Rejects a fit cache whose failure share exceeds 1%.
void check_failure_share(const std::vector<FitRecord>& fits);

} // namespace kumachart
