#pragma once

#include "kumachart/mc_evaluator.hpp"

#include <stdexcept>

namespace kumachart {

enum class AdjustmentMethod { A, B };

class CalibrationInfeasible : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct AdjustmentRequest {
    AdjustmentMethod method = AdjustmentMethod::A;
    KumaParams params0{1.0, 1.0};
    std::size_t m = 100;
    double alpha_nominal = 0.0027;  // ARL0 = 1 / alpha_nominal
    double p = 0.05;
    double epsilon = 0.0;           // method B only
    std::size_t replications = 25000;
    std::uint64_t seed = 0;
    double grid_step = 1e-5;
    unsigned workers = 0;
};

struct AdjustmentResult {
    double alpha_adjusted = 0.0;
    CarlSummary summary;
    double criterion_value = 0.0;  // |AARL - ARL0| / ARL0 for A, exceedance share for B
    int iterations = 0;            // distinct grid points evaluated
};

/// Grid of candidate rates alpha_nominal + k * step inside (0, 1).
class AlphaGrid {
public:
    AlphaGrid(double anchor, double step);

    // Snapped to 15 decimals so grid rates print as written.
    double at(long k) const noexcept;
    long first() const noexcept { return first_; }
    long last() const noexcept { return last_; }

private:
    double anchor_;
    double step_;
    long first_;
    long last_;
};

/// Adjustment A: the grid rate nearest alpha_nominal whose AARL lies within
/// 100p% of ARL0.
AdjustmentResult adjust_a(const AdjustmentRequest& request);
AdjustmentResult adjust_a(const AdjustmentRequest& request, const std::vector<FitRecord>& fits);

/// Adjustment B: the largest grid rate whose share of CARL values below
/// ARL0 / (1 + epsilon) is under p.
AdjustmentResult adjust_b(const AdjustmentRequest& request);
AdjustmentResult adjust_b(const AdjustmentRequest& request, const std::vector<FitRecord>& fits);

/// Dispatches on request.method.
AdjustmentResult calibrate(const AdjustmentRequest& request);
AdjustmentResult calibrate(const AdjustmentRequest& request, const std::vector<FitRecord>& fits);

/// Share of cached CARL values strictly below threshold at a given rate.
double exceedance_share(const std::vector<FitRecord>& fits, const KumaParams& params0, double alpha,
                        double threshold, unsigned workers = 0);

double average_carl(const std::vector<FitRecord>& fits, const KumaParams& params0, double alpha,
                    unsigned workers = 0);

} // namespace kumachart
