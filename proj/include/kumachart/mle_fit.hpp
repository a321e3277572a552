#pragma once

#include "kumachart/kuma_dist.hpp"

#include <array>
#include <span>
#include <stdexcept>
#include <vector>

namespace kumachart {

/// Raised when every observation in a sample is identical; the likelihood is
/// unbounded in that case.
class DegenerateSampleError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Phase I sample: at least two observations, all strictly inside (0, 1).
class PhaseISample {
public:
    explicit PhaseISample(std::vector<double> values);

    std::span<const double> values() const noexcept { return values_; }
    std::size_t size() const noexcept { return values_.size(); }

    /// Cached sum of ln(x_i).
    double sum_log() const noexcept { return sum_log_; }
    std::span<const double> log_values() const noexcept { return log_values_; }

    bool all_equal() const noexcept;

private:
    std::vector<double> values_;
    std::vector<double> log_values_;
    double sum_log_ = 0.0;
};

struct FitOptions {
    bool compute_std_errors = true;
    double bracket_lo = 1e-3;
    double bracket_hi = 1e3;
    int max_iterations = 500;
};

struct FitResult {
    KumaParams params_hat{1.0, 1.0};
    std::array<double, 2> std_errors{0.0, 0.0};
    double loglik = 0.0;
    bool converged = false;
    int iterations = 0;
};

/// l(theta) = m ln(theta1 theta2) + (theta1-1) sum ln x + (theta2-1) sum ln(1 - x^theta1).
double log_likelihood(const KumaParams& params, const PhaseISample& sample);

/// Maximizer of the log-likelihood in theta2 for fixed theta1:
/// -m / sum ln(1 - x^theta1).
double profile_theta2(double theta1, const PhaseISample& sample);

/// Log-likelihood with theta2 replaced by profile_theta2(theta1).
double profile_log_likelihood(double theta1, const PhaseISample& sample);

/// Gradient (d/dtheta1, d/dtheta2) of the log-likelihood.
std::array<double, 2> score(const KumaParams& params, const PhaseISample& sample);

/// Maximum-likelihood fit through the profiled likelihood in theta1.
///
/// Standard errors come from the inverse of a central finite-difference
/// observed information matrix. Non-convergence is reported through
/// FitResult::converged with the best iterate retained; a sample whose values
/// are all equal throws DegenerateSampleError.
FitResult fit_mle(const PhaseISample& sample, const FitOptions& options = {});

/// Observed information (negated Hessian of l), central differences with
/// step max(1e-4 |theta|, 1e-6) per coordinate.
std::array<std::array<double, 2>, 2> observed_information(const KumaParams& params,
                                                           const PhaseISample& sample);

} // namespace kumachart
