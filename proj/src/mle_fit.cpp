#include "kumachart/mle_fit.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

namespace kumachart {

namespace {

// ln(1 - e^t) for t < 0.
double log1m_exp(double t) {
    return t > -std::numbers::ln2 ? std::log(-std::expm1(t)) : std::log1p(-std::exp(t));
}

// Closed-form pieces of the profiled likelihood at a given theta1.
//
// Terms are scaled by e^M, M = theta1 * max ln x, so that theta2-hat stays
// finite even when every x^theta1 underflows.
struct ProfileTerms {
    double theta1 = 0.0;
    double log_theta2 = 0.0;
    double theta2 = 0.0;
    double score = 0.0;       // d l_p / d theta1
    double curvature = 0.0;   // d^2 l_p / d theta1^2
    double profile_ll = 0.0;
};

ProfileTerms profile_terms(double theta1, const PhaseISample& sample) {
    const auto lx = sample.log_values();
    const double m = static_cast<double>(sample.size());
    const double lx_max = *std::max_element(lx.begin(), lx.end());
    const double shift = theta1 * lx_max;

    double a = 0.0;  // sum w c, with c = ln(1-z)/z
    double b = 0.0;  // sum w lx / (1-z)
    double d = 0.0;  // sum w lx^2 / (1-z)^2
    double p = 0.0;  // sum z lx / (1-z)
    double q = 0.0;  // sum z lx^2 / (1-z)^2
    double s = 0.0;  // sum ln(1-z)
    for (const double l : lx) {
        const double t = theta1 * l;
        const double z = std::exp(t);
        const double w = std::exp(t - shift);
        const double om = -std::expm1(t);
        const double l1m = log1m_exp(t);
        const double c = z > 1e-300 ? l1m / z : -1.0;
        const double r = l / om;
        a += w * c;
        b += w * r;
        d += w * r * r;
        p += z * r;
        q += z * r * r;
        s += l1m;
    }

    ProfileTerms out;
    out.theta1 = theta1;
    out.log_theta2 = std::log(m) - shift - std::log(-a);
    out.theta2 = std::exp(out.log_theta2);
    const double scaled_theta2 = m / (-a);  // theta2 * e^M
    out.score = m / theta1 + sample.sum_log() - scaled_theta2 * b + p;
    out.curvature = -m / (theta1 * theta1) - scaled_theta2 * d + q + (scaled_theta2 * b) * (scaled_theta2 * b) / m;
    out.profile_ll = m * std::log(theta1) + m * out.log_theta2 + (theta1 - 1.0) * sample.sum_log() - m - s;
    return out;
}

std::array<double, 2> std_errors_from(const std::array<std::array<double, 2>, 2>& info) {
    const double det = info[0][0] * info[1][1] - info[0][1] * info[1][0];
    constexpr double nan = std::numeric_limits<double>::quiet_NaN();
    if (!(info[0][0] > 0.0) || !(det > 0.0)) {
        return {nan, nan};
    }
    return {std::sqrt(info[1][1] / det), std::sqrt(info[0][0] / det)};
}

} // namespace

PhaseISample::PhaseISample(std::vector<double> values) : values_(std::move(values)) {
    if (values_.size() < 2) {
        throw DegenerateSampleError("a Phase I sample needs at least two observations");
    }
    log_values_.reserve(values_.size());
    for (const double v : values_) {
        if (!(v > 0.0 && v < 1.0)) {
            throw std::domain_error("Phase I observations must lie in (0, 1), got " + std::to_string(v));
        }
        log_values_.push_back(std::log(v));
        sum_log_ += log_values_.back();
    }
}

bool PhaseISample::all_equal() const noexcept {
    return std::adjacent_find(values_.begin(), values_.end(), std::not_equal_to<>{}) == values_.end();
}

double log_likelihood(const KumaParams& params, const PhaseISample& sample) {
    const double a = params.theta1();
    const double b = params.theta2();
    const double m = static_cast<double>(sample.size());
    double s = 0.0;
    for (const double l : sample.log_values()) {
        s += log1m_exp(a * l);
    }
    return m * std::log(a * b) + (a - 1.0) * sample.sum_log() + (b - 1.0) * s;
}

double profile_theta2(double theta1, const PhaseISample& sample) {
    if (!(theta1 > 0.0)) {
        throw std::domain_error("profile_theta2 requires theta1 > 0");
    }
    const ProfileTerms t = profile_terms(theta1, sample);
    if (!std::isfinite(t.theta2) || !(t.theta2 > 0.0)) {
        throw DegenerateSampleError("sum of ln(1 - x^theta1) vanished; theta2 is unbounded");
    }
    return t.theta2;
}

double profile_log_likelihood(double theta1, const PhaseISample& sample) {
    return profile_terms(theta1, sample).profile_ll;
}

std::array<double, 2> score(const KumaParams& params, const PhaseISample& sample) {
    const double a = params.theta1();
    const double b = params.theta2();
    const double m = static_cast<double>(sample.size());
    double s = 0.0;
    double p = 0.0;
    for (const double l : sample.log_values()) {
        const double t = a * l;
        s += log1m_exp(t);
        p += std::exp(t) * l / -std::expm1(t);
    }
    return {m / a + sample.sum_log() - (b - 1.0) * p, m / b + s};
}

std::array<std::array<double, 2>, 2> observed_information(const KumaParams& params,
                                                           const PhaseISample& sample) {
    const double a = params.theta1();
    const double b = params.theta2();
    const double ha = std::max(1e-4 * std::abs(a), 1e-6);
    const double hb = std::max(1e-4 * std::abs(b), 1e-6);
    auto ll = [&](double da, double db) { return log_likelihood(KumaParams(a + da, b + db), sample); };

    const double f0 = ll(0.0, 0.0);
    const double faa = (ll(ha, 0.0) - 2.0 * f0 + ll(-ha, 0.0)) / (ha * ha);
    const double fbb = (ll(0.0, hb) - 2.0 * f0 + ll(0.0, -hb)) / (hb * hb);
    const double fab = (ll(ha, hb) - ll(ha, -hb) - ll(-ha, hb) + ll(-ha, -hb)) / (4.0 * ha * hb);
    return {{{-faa, -fab}, {-fab, -fbb}}};
}

FitResult fit_mle(const PhaseISample& sample, const FitOptions& options) {
    if (sample.all_equal()) {
        throw DegenerateSampleError("all Phase I observations are identical");
    }

    // Root of the profile score in u = ln theta1, by Newton steps safeguarded
    // with bisection on a sign-change bracket.
    auto eval = [&](double u) { return profile_terms(std::exp(u), sample); };

    double lo = std::log(options.bracket_lo);
    double hi = std::log(options.bracket_hi);
    constexpr double decade = std::numbers::ln10;
    constexpr int max_expansions = 8;
    ProfileTerms at_lo = eval(lo);
    ProfileTerms at_hi = eval(hi);
    int iterations = 2;
    for (int k = 0; k < max_expansions && at_lo.score <= 0.0; ++k, ++iterations) {
        hi = lo;
        at_hi = at_lo;
        lo -= decade;
        at_lo = eval(lo);
    }
    for (int k = 0; k < max_expansions && at_hi.score >= 0.0; ++k, ++iterations) {
        lo = hi;
        at_lo = at_hi;
        hi += decade;
        at_hi = eval(hi);
    }

    FitResult result;
    auto finish = [&](const ProfileTerms& best, bool converged) {
        result.params_hat = KumaParams(best.theta1, best.theta2);
        result.loglik = log_likelihood(result.params_hat, sample);
        result.converged = converged;
        result.iterations = iterations;
        if (options.compute_std_errors) {
            result.std_errors = std_errors_from(observed_information(result.params_hat, sample));
        }
        return result;
    };

    if (at_lo.score <= 0.0 || at_hi.score >= 0.0) {
        return finish(at_lo.profile_ll >= at_hi.profile_ll ? at_lo : at_hi, false);
    }

    double u = std::clamp(0.0, lo, hi);
    if (u == lo || u == hi) {
        u = 0.5 * (lo + hi);
    }
    ProfileTerms cur = eval(u);
    ++iterations;
    double prev_ll = cur.profile_ll;
    double prev_step = hi - lo;
    while (iterations < options.max_iterations) {
        if (cur.score == 0.0) {
            return finish(cur, true);
        }
        if (cur.score > 0.0) {
            lo = u;
        } else {
            hi = u;
        }
        const double slope = cur.theta1 * cur.curvature;  // dh/du
        double next = slope < 0.0 ? u - cur.score / slope : lo - 1.0;
        double step = std::abs(next - u);
        if (next <= lo || next >= hi || step > 0.5 * prev_step) {
            next = 0.5 * (lo + hi);
            step = std::abs(next - u);
        }
        prev_step = step;
        u = next;
        cur = eval(u);
        ++iterations;

        const bool small_step = step < 1e-10 * std::max(1.0, std::abs(u));
        const bool flat = std::abs(cur.profile_ll - prev_ll) < 1e-10;
        prev_ll = cur.profile_ll;
        if ((small_step && flat) || hi - lo < 1e-14) {
            return finish(cur, std::isfinite(cur.theta2));
        }
    }
    return finish(cur, false);
}

} // namespace kumachart
