#include "kumachart/calibrator.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <map>
#include <numeric>
#include <string>

namespace kumachart {

namespace {

void validate(const AdjustmentRequest& r) {
    if (!(r.alpha_nominal > 0.0 && r.alpha_nominal < 1.0)) {
        throw std::domain_error("nominal false alarm rate must lie in (0, 1)");
    }
    if (!(r.p > 0.0 && r.p < 1.0)) {
        throw std::domain_error("criterion level p must lie in (0, 1)");
    }
    if (r.method == AdjustmentMethod::B && !(r.epsilon >= 0.0 && r.epsilon < 1.0)) {
        throw std::domain_error("tolerance epsilon must lie in [0, 1)");
    }
    if (!(r.grid_step >= 1e-12 && r.grid_step < 1.0)) {
        throw std::domain_error("grid step must lie in [1e-12, 1)");
    }
}

// Memoized criterion on grid indices that checks monotonicity on every pair
// evaluated so far.
class MonotoneCriterion {
public:
    enum class Direction { non_increasing, non_decreasing };

    MonotoneCriterion(const AlphaGrid& grid, Direction dir, std::function<double(double)> fn)
        : grid_(grid), dir_(dir), fn_(std::move(fn)) {}

    double operator()(long k) {
        if (const auto it = cache_.find(k); it != cache_.end()) {
            return it->second;
        }
        const double v = fn_(grid_.at(k));
        for (const auto& [j, w] : cache_) {
            const bool ok = dir_ == Direction::non_increasing ? (j < k ? w >= v : w <= v)
                                                              : (j < k ? w <= v : w >= v);
            if (!ok) {
                throw std::logic_error("calibration criterion is not monotone in alpha");
            }
        }
        cache_.emplace(k, v);
        return v;
    }

    int evaluations() const noexcept { return static_cast<int>(cache_.size()); }

private:
    const AlphaGrid& grid_;
    Direction dir_;
    std::function<double(double)> fn_;
    std::map<long, double> cache_;
};

// Largest k in [lo, hi] with pred(k) true, given pred(lo) true, pred(hi)
// false and pred monotone (true then false).
template <class Pred>
long last_true(long lo, long hi, Pred&& pred) {
    while (hi - lo > 1) {
        const long mid = lo + (hi - lo) / 2;
        if (pred(mid)) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    return lo;
}

} // namespace

double AlphaGrid::at(long k) const noexcept {
    return std::round((anchor_ + static_cast<double>(k) * step_) * 1e15) / 1e15;
}

AlphaGrid::AlphaGrid(double anchor, double step) : anchor_(anchor), step_(step) {
    first_ = -static_cast<long>(std::floor(anchor / step));
    while (at(first_) <= 0.0) {
        ++first_;
    }
    last_ = static_cast<long>(std::floor((1.0 - anchor) / step));
    while (at(last_) >= 1.0) {
        --last_;
    }
}

double average_carl(const std::vector<FitRecord>& fits, const KumaParams& params0, double alpha,
                    unsigned workers) {
    const CarlSample s = carl_from_fits(fits, params0, alpha, {}, workers);
    if (s.carl_values.empty()) {
        throw StudyError("no converged fits available");
    }
    return std::accumulate(s.carl_values.begin(), s.carl_values.end(), 0.0) /
           static_cast<double>(s.carl_values.size());
}

double exceedance_share(const std::vector<FitRecord>& fits, const KumaParams& params0, double alpha,
                        double threshold, unsigned workers) {
    const CarlSample s = carl_from_fits(fits, params0, alpha, {}, workers);
    if (s.carl_values.empty()) {
        throw StudyError("no converged fits available");
    }
    const auto below = std::count_if(s.carl_values.begin(), s.carl_values.end(),
                                     [&](double v) { return v < threshold; });
    return static_cast<double>(below) / static_cast<double>(s.carl_values.size());
}

AdjustmentResult adjust_a(const AdjustmentRequest& request, const std::vector<FitRecord>& fits) {
    validate(request);
    check_failure_share(fits);
    const double arl0 = 1.0 / request.alpha_nominal;
    const double upper = arl0 * (1.0 + request.p);
    const double lower = arl0 * (1.0 - request.p);
    const AlphaGrid grid(request.alpha_nominal, request.grid_step);
    MonotoneCriterion aarl(grid, MonotoneCriterion::Direction::non_increasing, [&](double a) {
        return average_carl(fits, request.params0, a, request.workers);
    });
    auto inside = [&](double v) { return v > lower && v < upper; };

    long chosen = 0;
    const double at_nominal = aarl(0);
    if (!inside(at_nominal)) {
        if (at_nominal >= upper) {
            // AARL falls with alpha: first grid point above nominal below the upper edge.
            if (aarl(grid.last()) >= upper) {
                throw CalibrationInfeasible("no grid rate brings the AARL below the upper band edge");
            }
            chosen = last_true(0, grid.last(), [&](long k) { return aarl(k) >= upper; }) + 1;
        } else {
            if (aarl(grid.first()) <= lower) {
                throw CalibrationInfeasible("no grid rate lifts the AARL above the lower band edge");
            }
            chosen = last_true(grid.first(), 0, [&](long k) { return aarl(k) > lower; });
        }
        if (!inside(aarl(chosen))) {
            throw CalibrationInfeasible("the AARL band falls between two grid rates; refine grid_step");
        }
    }

    AdjustmentResult result;
    result.alpha_adjusted = grid.at(chosen);
    const CarlSample s = carl_from_fits(fits, request.params0, result.alpha_adjusted, {}, request.workers);
    result.summary = summarize(s, arl0, arl0);
    result.criterion_value = std::abs(result.summary.aarl - arl0) / arl0;
    result.iterations = aarl.evaluations();
    return result;
}

AdjustmentResult adjust_b(const AdjustmentRequest& request, const std::vector<FitRecord>& fits) {
    validate(request);
    check_failure_share(fits);
    const double arl0 = 1.0 / request.alpha_nominal;
    const double threshold = arl0 / (1.0 + request.epsilon);
    const AlphaGrid grid(request.alpha_nominal, request.grid_step);
    MonotoneCriterion share(grid, MonotoneCriterion::Direction::non_decreasing, [&](double a) {
        return exceedance_share(fits, request.params0, a, threshold, request.workers);
    });
    auto ok = [&](long k) { return share(k) < request.p; };

    long chosen = 0;
    if (!ok(grid.first())) {
        throw CalibrationInfeasible("even the smallest grid rate leaves " +
                                    std::to_string(100.0 * share(grid.first())) + "% of charts below " +
                                    std::to_string(threshold));
    }
    if (ok(grid.last())) {
        chosen = grid.last();
    } else if (ok(0)) {
        chosen = last_true(0, grid.last(), ok);
    } else {
        chosen = last_true(grid.first(), 0, ok);
    }

    AdjustmentResult result;
    result.alpha_adjusted = grid.at(chosen);
    const CarlSample s = carl_from_fits(fits, request.params0, result.alpha_adjusted, {}, request.workers);
    result.summary = summarize(s, arl0, threshold);
    result.criterion_value = result.summary.perc;
    result.iterations = share.evaluations();
    return result;
}

AdjustmentResult adjust_a(const AdjustmentRequest& request) {
    validate(request);
    return adjust_a(request,
                    simulate_fits(request.params0, request.m, request.replications, request.seed, request.workers));
}

AdjustmentResult adjust_b(const AdjustmentRequest& request) {
    validate(request);
    return adjust_b(request,
                    simulate_fits(request.params0, request.m, request.replications, request.seed, request.workers));
}

AdjustmentResult calibrate(const AdjustmentRequest& request, const std::vector<FitRecord>& fits) {
    return request.method == AdjustmentMethod::A ? adjust_a(request, fits) : adjust_b(request, fits);
}

AdjustmentResult calibrate(const AdjustmentRequest& request) {
    return request.method == AdjustmentMethod::A ? adjust_a(request) : adjust_b(request);
}

} // namespace kumachart
