#include "kumachart/chart.hpp"

#include <cmath>
#include <string>

namespace kumachart {

namespace {

void require_alpha(double alpha) {
    if (!(alpha > 0.0 && alpha < 1.0)) {
        throw std::domain_error("false alarm rate must lie in (0, 1), got " + std::to_string(alpha));
    }
}

} // namespace

std::string_view to_string(LimitSource source) {
    switch (source) {
    case LimitSource::known: return "known";
    case LimitSource::plugin: return "plugin";
    case LimitSource::adjusted_a: return "adjusted-A";
    case LimitSource::adjusted_b: return "adjusted-B";
    }
    return "unknown";
}

std::string_view to_string(PointStatus status) {
    switch (status) {
    case PointStatus::in: return "in";
    case PointStatus::above_ucl: return "above-ucl";
    case PointStatus::below_lcl: return "below-lcl";
    }
    return "unknown";
}

ControlLimits::ControlLimits(double lcl_, double ucl_, double cl_, double far_, LimitSource source_)
    : lcl(lcl_), ucl(ucl_), cl(cl_), far(far_), source(source_) {
    if (!(0.0 < lcl && lcl < cl && cl < ucl && ucl < 1.0)) {
        throw std::domain_error("control limits must satisfy 0 < LCL < CL < UCL < 1");
    }
    require_alpha(far);
}

ShiftSpec::ShiftSpec(double d1, double d2) : delta1(d1), delta2(d2) {
    if (!(d1 > 0.0) || !(d2 > 0.0)) {
        throw std::domain_error("shift factors must be positive");
    }
}

double center_line(const KumaParams& params, CenterLineMode mode) {
    return mode == CenterLineMode::median ? quantile(0.5, params) : mean(params);
}

ControlLimits limits_plugin(const KumaParams& params_hat, double alpha, CenterLineMode mode,
                            LimitSource source) {
    require_alpha(alpha);
    return ControlLimits(quantile(0.5 * alpha, params_hat), quantile(1.0 - 0.5 * alpha, params_hat),
                         center_line(params_hat, mode), alpha, source);
}

ControlLimits limits_known(const KumaParams& params0, double alpha, CenterLineMode mode) {
    return limits_plugin(params0, alpha, mode, LimitSource::known);
}

double signal_prob(double lcl, double ucl, const KumaParams& params) {
    return survival(ucl, params) + cdf(lcl, params);
}

double false_alarm_prob(const ControlLimits& limits, const KumaParams& params0) {
    return signal_prob(limits.lcl, limits.ucl, params0);
}

double conditional_arl(double lcl, double ucl, const KumaParams& params) {
    const double p = signal_prob(lcl, ucl, params);
    if (!(p > 0.0)) {
        throw ArlOverflowError("signal probability underflowed; run length is unbounded");
    }
    return 1.0 / p;
}

double conditional_arl(const ControlLimits& limits, const KumaParams& params) {
    return conditional_arl(limits.lcl, limits.ucl, params);
}

KumaParams apply_shift(const KumaParams& params0, const ShiftSpec& shift) {
    return KumaParams(shift.delta1 * params0.theta1(), shift.delta2 * params0.theta2());
}

ChartRun run_chart(std::span<const double> data, const ControlLimits& limits) {
    ChartRun run;
    run.points.reserve(data.size());
    for (std::size_t i = 0; i < data.size(); ++i) {
        const double y = data[i];
        if (!(y > 0.0 && y < 1.0)) {
            throw std::domain_error("chart observation " + std::to_string(i + 1) + " lies outside (0, 1)");
        }
        PointStatus status = PointStatus::in;
        if (y > limits.ucl) {
            status = PointStatus::above_ucl;
        } else if (y < limits.lcl) {
            status = PointStatus::below_lcl;
        }
        run.points.push_back({i + 1, y, status});
        if (status != PointStatus::in) {
            run.signal_indices.push_back(i + 1);
        }
    }
    return run;
}

std::vector<double> default_shift_grid() {
    std::vector<double> grid;
    for (int k = 5; k <= 20; ++k) {
        grid.push_back(k / 10.0);
    }
    return grid;
}

} // namespace kumachart
