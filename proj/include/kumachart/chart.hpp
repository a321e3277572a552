#pragma once

#include "kumachart/kuma_dist.hpp"

#include <span>
#include <stdexcept>
#include <string_view>
#include <vector>

namespace kumachart {

enum class LimitSource { known, plugin, adjusted_a, adjusted_b };

std::string_view to_string(LimitSource source);

enum class CenterLineMode { median, mean };

/// Two-sided Shewhart limits with 0 < lcl < cl < ucl < 1.
struct ControlLimits {
    double lcl;
    double ucl;
    double cl;
    double far;  // the false alarm rate the limits were derived from
    LimitSource source;

    ControlLimits(double lcl, double ucl, double cl, double far, LimitSource source);
};

/// Multiplicative shift of the shape parameters; (1, 1) is in control.
struct ShiftSpec {
    double delta1 = 1.0;
    double delta2 = 1.0;

    ShiftSpec() = default;
    ShiftSpec(double d1, double d2);

    bool in_control() const noexcept { return delta1 == 1.0 && delta2 == 1.0; }
    friend bool operator==(const ShiftSpec&, const ShiftSpec&) = default;
};

enum class PointStatus { in, above_ucl, below_lcl };

std::string_view to_string(PointStatus status);

struct ChartPoint {
    std::size_t index;  // 1-based
    double value;
    PointStatus status;
};

struct ChartRun {
    std::vector<ChartPoint> points;
    std::vector<std::size_t> signal_indices;
};

/// Thrown when the signal probability underflows so the run length is unbounded.
class ArlOverflowError : public std::overflow_error {
public:
    using std::overflow_error::overflow_error;
};

double center_line(const KumaParams& params, CenterLineMode mode = CenterLineMode::median);

/// Equal-tail probability limits at alpha/2 and 1 - alpha/2.
ControlLimits limits_known(const KumaParams& params0, double alpha,
                           CenterLineMode mode = CenterLineMode::median);

/// Same construction from estimated parameters.
ControlLimits limits_plugin(const KumaParams& params_hat, double alpha,
                            CenterLineMode mode = CenterLineMode::median,
                            LimitSource source = LimitSource::plugin);

/// Probability that one in-control point falls outside [lcl, ucl].
double false_alarm_prob(const ControlLimits& limits, const KumaParams& params0);

/// Probability of a signal on one point: 1 - P(lcl <= Y <= ucl) under params.
double signal_prob(double lcl, double ucl, const KumaParams& params);

/// Geometric ARL 1 / signal_prob for a fixed pair of limits.
double conditional_arl(const ControlLimits& limits, const KumaParams& params);
double conditional_arl(double lcl, double ucl, const KumaParams& params);

KumaParams apply_shift(const KumaParams& params0, const ShiftSpec& shift);

/// Applies the rule Y_t outside [lcl, ucl]; a point on a limit is in control.
ChartRun run_chart(std::span<const double> data, const ControlLimits& limits);

/// {0.5, 0.6, ..., 2.0}.
std::vector<double> default_shift_grid();

} // namespace kumachart
