#pragma once

#include <cstdint>
#include <random>
#include <vector>

namespace kumachart {

/// Shape parameters of a Kumaraswamy law on (0, 1).
///
/// The density is a*b*y^(a-1)*(1-y^a)^(b-1); both shapes must be strictly
/// positive and finite.
class KumaParams {
public:
    KumaParams(double theta1, double theta2);

    double theta1() const noexcept { return theta1_; }
    double theta2() const noexcept { return theta2_; }

    friend bool operator==(const KumaParams&, const KumaParams&) = default;

private:
    double theta1_;
    double theta2_;
};

/// Deterministic 64-bit random stream.
///
/// Each stream is identified by a (seed, index) pair so that Monte Carlo
/// replication r always draws the same numbers regardless of how work is
/// split across threads.
class RandomStream {
public:
    explicit RandomStream(std::uint64_t seed, std::uint64_t substream = 0);

    /// Uniform variate strictly inside (0, 1), 53 bits of resolution.
    double uniform_open();

private:
    std::mt19937_64 engine_;
};

double pdf(double y, const KumaParams& params);
double log_pdf(double y, const KumaParams& params);

/// P(Y <= y).
double cdf(double y, const KumaParams& params);

/// P(Y > y), evaluated without forming 1 - cdf(y).
double survival(double y, const KumaParams& params);

/// Inverse of cdf: [1 - (1-u)^(1/theta2)]^(1/theta1).
double quantile(double u, const KumaParams& params);

double mean(const KumaParams& params);
double variance(const KumaParams& params);

/// ln B(a, b), accurate to roughly 1e-14 relative for arguments up to 1e5.
double log_beta(double a, double b);

/// ln(1 - y^theta) for y in (0, 1) without cancellation at either end.
double log1m_pow(double y, double theta);

std::vector<double> sample(const KumaParams& params, std::size_t n, RandomStream& stream);

namespace detail {
// lgamma(x) minus its Stirling approximation, for x >= 10.
double lgamma_stirling_correction(double x);
} // namespace detail

} // namespace kumachart
