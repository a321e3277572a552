#include "kumachart/cli.hpp"

#include "kumachart/calibrator.hpp"
#include "kumachart/chart.hpp"
#include "kumachart/data_io.hpp"
#include "kumachart/kuma_dist.hpp"
#include "kumachart/mc_evaluator.hpp"
#include "kumachart/mle_fit.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <charconv>
#include <cmath>
#include <cstdio>
#include <functional>
#include <iostream>
#include <optional>
#include <random>
#include <sstream>

namespace kumachart::cli {

namespace {

using Json = nlohmann::ordered_json;

struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

std::string fixed(double v, int digits) {
    if (!std::isfinite(v)) {
        return "nan";
    }
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*f", digits, v);
    return buf;
}

std::uint64_t resolve_seed(const std::optional<std::uint64_t>& seed, std::ostream& err) {
    if (seed) {
        return *seed;
    }
    std::random_device rd;
    const std::uint64_t s = (static_cast<std::uint64_t>(rd()) << 32) ^ rd();
    err << "seed: " << s << "\n";
    return s;
}

Json header(const char* command) {
    Json j;
    j["schema_version"] = kSchemaVersion;
    j["command"] = command;
    return j;
}

Json params_json(const KumaParams& p) { return Json{{"theta1", p.theta1()}, {"theta2", p.theta2()}}; }

Json limits_json(const ControlLimits& l) {
    return Json{{"source", std::string(to_string(l.source))},
                {"far", l.far},
                {"lcl", l.lcl},
                {"cl", l.cl},
                {"ucl", l.ucl}};
}

Json summary_json(const CarlSummary& s) {
    Json pct;
    for (std::size_t i = 0; i < kPercentileLevels.size(); ++i) {
        pct[fixed(kPercentileLevels[i], 2)] = s.percentiles[i];
    }
    return Json{{"aarl", s.aarl},
                {"sdarl", s.sdarl},
                {"sdarl_defined", s.sdarl_defined},
                {"perc", s.perc},
                {"threshold", s.threshold},
                {"reference_arl", s.reference_arl},
                {"sdarl_over_arl0", s.sdarl / s.reference_arl},
                {"percentiles", pct},
                {"n_effective", s.n_effective},
                {"n_failed", s.n_failed}};
}

Json fit_json(const FitResult& f, std::size_t m) {
    return Json{{"m", m},
                {"theta1_hat", f.params_hat.theta1()},
                {"theta2_hat", f.params_hat.theta2()},
                {"se_theta1", f.std_errors[0]},
                {"se_theta2", f.std_errors[1]},
                {"loglik", f.loglik},
                {"converged", f.converged},
                {"iterations", f.iterations}};
}

std::string summary_text(const CarlSummary& s) {
    std::ostringstream os;
    os << "AARL " << fixed(s.aarl, 2) << "  SDARL " << (s.sdarl_defined ? fixed(s.sdarl, 2) : "undefined")
       << "  perc " << fixed(100.0 * s.perc, 2) << "%\n";
    for (std::size_t i = 0; i < kPercentileLevels.size(); ++i) {
        os << "  " << fixed(100.0 * kPercentileLevels[i], 0) << "%: " << fixed(s.percentiles[i], 2) << "\n";
    }
    os << "  n_effective " << s.n_effective << "  n_failed " << s.n_failed << "\n";
    return os.str();
}

std::string limits_text(const ControlLimits& l) {
    return std::string(to_string(l.source)) + "  FAR " + fixed(l.far, 5) + "  LCL " + fixed(l.lcl, 6) + "  CL " +
           fixed(l.cl, 6) + "  UCL " + fixed(l.ucl, 6) + "\n";
}

void emit(const Json& j, const std::string& out_path, std::ostream& out) {
    const std::string text = j.dump(2) + "\n";
    if (out_path.empty()) {
        out << text;
    } else {
        write_text_file(out_path, text);
    }
}

void emit_text(const std::string& text, const std::string& out_path, std::ostream& out) {
    if (out_path.empty()) {
        out << text;
    } else {
        write_text_file(out_path, text);
    }
}

CenterLineMode parse_center(const std::string& s) {
    return s == "mean" ? CenterLineMode::mean : CenterLineMode::median;
}

double parse_number(const std::string& token) {
    double v = 0.0;
    const char* end = token.data() + token.size();
    const auto [ptr, ec] = std::from_chars(token.data(), end, v);
    if (ec != std::errc{} || ptr != end) {
        throw UsageError("not a number: '" + token + "'");
    }
    return v;
}

// "lo:hi:step" or a comma-separated list.
std::vector<double> parse_grid(const std::string& spec) {
    std::vector<double> out;
    if (spec.find(':') != std::string::npos) {
        std::vector<std::string> parts;
        std::stringstream ss(spec);
        for (std::string part; std::getline(ss, part, ':');) {
            parts.push_back(part);
        }
        if (parts.size() != 3) {
            throw UsageError("grid range must look like lo:hi:step, got '" + spec + "'");
        }
        const double lo = parse_number(parts[0]);
        const double hi = parse_number(parts[1]);
        const double step = parse_number(parts[2]);
        if (!(step > 0.0) || hi < lo) {
            throw UsageError("invalid grid range '" + spec + "'");
        }
        const auto n = static_cast<long>(std::floor((hi - lo) / step + 1e-9));
        for (long k = 0; k <= n; ++k) {
            out.push_back(std::round((lo + static_cast<double>(k) * step) * 1e12) / 1e12);
        }
    } else {
        std::stringstream ss(spec);
        for (std::string part; std::getline(ss, part, ',');) {
            out.push_back(parse_number(part));
        }
    }
    if (out.empty()) {
        throw UsageError("empty shift grid");
    }
    return out;
}

AdjustmentMethod parse_method(const std::string& s) {
    if (s == "a" || s == "A") {
        return AdjustmentMethod::A;
    }
    if (s == "b" || s == "B") {
        return AdjustmentMethod::B;
    }
    throw UsageError("method must be a or b, got '" + s + "'");
}

std::string method_label(AdjustmentMethod method, double epsilon) {
    if (method == AdjustmentMethod::A) {
        return "adj_a";
    }
    return "adj_b_eps" + format_double(epsilon);
}

LimitSource method_source(AdjustmentMethod method) {
    return method == AdjustmentMethod::A ? LimitSource::adjusted_a : LimitSource::adjusted_b;
}

struct CalibrationFlags {
    double p = 0.05;
    double epsilon = 0.0;
    std::size_t reps = 25000;
    std::optional<std::uint64_t> seed;
    double grid_step = 1e-5;
};

void add_calibration_flags(CLI::App* cmd, CalibrationFlags& f) {
    cmd->add_option("--p", f.p, "criterion level p")->capture_default_str();
    cmd->add_option("--epsilon", f.epsilon, "tolerance for adjustment B")->capture_default_str();
    cmd->add_option("--reps", f.reps, "Monte Carlo replications N")->capture_default_str();
    cmd->add_option("--seed", f.seed, "random seed (generated and printed when omitted)");
    cmd->add_option("--grid-step", f.grid_step, "resolution of the alpha search")->capture_default_str();
}

AdjustmentRequest make_request(AdjustmentMethod method, const KumaParams& params0, std::size_t m, double alpha,
                               const CalibrationFlags& f, std::uint64_t seed, unsigned workers) {
    AdjustmentRequest r;
    r.method = method;
    r.params0 = params0;
    r.m = m;
    r.alpha_nominal = alpha;
    r.p = f.p;
    r.epsilon = method == AdjustmentMethod::B ? f.epsilon : 0.0;
    r.replications = f.reps;
    r.seed = seed;
    r.grid_step = f.grid_step;
    r.workers = workers;
    return r;
}

Json adjustment_json(const AdjustmentRequest& r, const AdjustmentResult& res) {
    return Json{{"method", r.method == AdjustmentMethod::A ? "a" : "b"},
                {"alpha_nominal", r.alpha_nominal},
                {"arl0", 1.0 / r.alpha_nominal},
                {"p", r.p},
                {"epsilon", r.epsilon},
                {"m", r.m},
                {"replications", r.replications},
                {"seed", r.seed},
                {"grid_step", r.grid_step},
                {"alpha_adjusted", res.alpha_adjusted},
                {"criterion_value", res.criterion_value},
                {"iterations", res.iterations},
                {"summary", summary_json(res.summary)}};
}

struct Chart {
    std::string label;
    ControlLimits limits;
};

std::string chart_rows(const std::vector<Chart>& charts, std::span<const double> values, const char* phase) {
    std::string text;
    std::vector<ChartRun> runs;
    for (const auto& c : charts) {
        runs.push_back(run_chart(values, c.limits));
    }
    for (std::size_t i = 0; i < values.size(); ++i) {
        text += std::to_string(i + 1) + "," + format_double(values[i]);
        for (std::size_t k = 0; k < charts.size(); ++k) {
            const auto& l = charts[k].limits;
            if (k == 0) {
                text += "," + format_double(l.lcl) + "," + format_double(l.cl) + "," + format_double(l.ucl);
            } else {
                text += "," + format_double(l.lcl) + "," + format_double(l.ucl);
            }
            text += ",";
            text += to_string(runs[k].points[i].status);
        }
        text += ",";
        text += phase;
        text += "\n";
    }
    return text;
}

Json signals_json(const std::vector<Chart>& charts, std::span<const double> values) {
    Json j = Json::array();
    for (const auto& c : charts) {
        const ChartRun run = run_chart(values, c.limits);
        j.push_back(Json{{"limits", c.label}, {"signals", run.signal_indices}});
    }
    return j;
}

} // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Shewhart charts for Kumaraswamy-distributed proportions", "kumachart"};
    app.require_subcommand(1);
    std::function<void()> action;
    unsigned workers = 0;
    app.add_option("--workers", workers, "worker threads for Monte Carlo loops (0 = all cores)");
    app.fallthrough();

    // simulate
    auto* sim = app.add_subcommand("simulate", "draw a Kumaraswamy sample");
    double s_t1 = 0.0, s_t2 = 0.0;
    std::size_t s_n = 0;
    std::optional<std::uint64_t> s_seed;
    std::string s_out;
    sim->add_option("--theta1", s_t1)->required();
    sim->add_option("--theta2", s_t2)->required();
    sim->add_option("--n", s_n, "number of draws")->required()->check(CLI::PositiveNumber);
    sim->add_option("--seed", s_seed);
    sim->add_option("--out", s_out, "output data file (stdout when omitted)");
    sim->callback([&] {
        action = [&] {
            const KumaParams params(s_t1, s_t2);
            const std::uint64_t seed = resolve_seed(s_seed, err);
            RandomStream stream(seed);
            const auto values = sample(params, s_n, stream);
            const std::string comment = "Kuma(" + format_double(s_t1) + ", " + format_double(s_t2) +
                                        ") n=" + std::to_string(s_n) + " seed=" + std::to_string(seed);
            if (s_out.empty()) {
                std::string text = "# " + comment + "\n";
                for (const double v : values) {
                    text += format_double(v) + "\n";
                }
                out << text;
                if (s_seed) {
                    err << "seed: " << seed << "\n";
                }
                return;
            }
            write_data_file(s_out, values, comment);
            Json j = header("simulate");
            j["params"] = params_json(params);
            j["n"] = s_n;
            j["seed"] = seed;
            j["out"] = s_out;
            emit(j, "", out);
        };
    });

    // fit
    auto* fit = app.add_subcommand("fit", "maximum-likelihood fit of a Phase I data file");
    std::string f_data, f_format = "json", f_out;
    fit->add_option("data,--data", f_data, "data file")->required();
    fit->add_option("--format", f_format)->check(CLI::IsMember({"json", "text"}))->capture_default_str();
    fit->add_option("--out", f_out);
    fit->callback([&] {
        action = [&] {
            const DataFile data = read_data_file(f_data);
            const PhaseISample phase1(data.values);
            const FitResult r = fit_mle(phase1);
            if (f_format == "text") {
                emit_text("m " + std::to_string(phase1.size()) + "\ntheta1_hat " + fixed(r.params_hat.theta1(), 6) +
                              " (" + fixed(r.std_errors[0], 6) + ")\ntheta2_hat " +
                              fixed(r.params_hat.theta2(), 6) + " (" + fixed(r.std_errors[1], 6) + ")\nloglik " +
                              fixed(r.loglik, 6) + "\nconverged " + (r.converged ? "yes" : "no") + "\n",
                          f_out, out);
            } else {
                Json j = header("fit");
                j["data"] = f_data;
                j["fit"] = fit_json(r, phase1.size());
                emit(j, f_out, out);
            }
            if (!r.converged) {
                throw DegenerateSampleError("maximum-likelihood fit did not converge");
            }
        };
    });

    // limits
    auto* lim = app.add_subcommand("limits", "control limits from parameters or a Phase I file");
    std::optional<double> l_t1, l_t2;
    std::string l_data, l_adjust = "none", l_center = "median", l_format = "json", l_out;
    double l_alpha = 0.0027;
    std::optional<std::size_t> l_m;
    CalibrationFlags l_cal;
    lim->add_option("--theta1", l_t1);
    lim->add_option("--theta2", l_t2);
    lim->add_option("--data", l_data, "Phase I data file to fit");
    lim->add_option("--alpha", l_alpha, "false alarm rate")->capture_default_str();
    lim->add_option("--adjust", l_adjust)->check(CLI::IsMember({"none", "a", "b"}))->capture_default_str();
    lim->add_option("--m", l_m, "Phase I size for calibration (defaults to the data size)");
    lim->add_option("--center", l_center)->check(CLI::IsMember({"median", "mean"}))->capture_default_str();
    lim->add_option("--format", l_format)->check(CLI::IsMember({"json", "text"}))->capture_default_str();
    lim->add_option("--out", l_out);
    add_calibration_flags(lim, l_cal);
    lim->callback([&] {
        action = [&] {
            const bool explicit_params = l_t1.has_value() || l_t2.has_value();
            if (explicit_params == !l_data.empty() || (explicit_params && !(l_t1 && l_t2))) {
                throw UsageError("give either --theta1 and --theta2, or --data");
            }
            Json j = header("limits");
            std::optional<KumaParams> params;
            std::optional<std::size_t> m = l_m;
            LimitSource source = LimitSource::known;
            if (explicit_params) {
                params.emplace(*l_t1, *l_t2);
            } else {
                const DataFile data = read_data_file(l_data);
                const PhaseISample phase1(data.values);
                const FitResult r = fit_mle(phase1);
                if (!r.converged) {
                    throw DegenerateSampleError("maximum-likelihood fit did not converge");
                }
                params = r.params_hat;
                source = LimitSource::plugin;
                if (!m) {
                    m = phase1.size();
                }
                j["data"] = l_data;
                j["fit"] = fit_json(r, phase1.size());
            }
            j["params"] = params_json(*params);
            double far = l_alpha;
            std::optional<AdjustmentResult> adj;
            if (l_adjust != "none") {
                if (!m) {
                    throw UsageError("--adjust requires --m (or --data)");
                }
                const AdjustmentMethod method = parse_method(l_adjust);
                const std::uint64_t seed = resolve_seed(l_cal.seed, err);
                const AdjustmentRequest req = make_request(method, *params, *m, l_alpha, l_cal, seed, workers);
                adj = calibrate(req);
                far = adj->alpha_adjusted;
                source = method_source(method);
                j["calibration"] = adjustment_json(req, *adj);
            }
            const ControlLimits limits = limits_plugin(*params, far, parse_center(l_center), source);
            j["limits"] = limits_json(limits);
            if (l_format == "text") {
                emit_text(limits_text(limits), l_out, out);
            } else {
                emit(j, l_out, out);
            }
        };
    });

    // ic-study
    auto* ic = app.add_subcommand("ic-study", "distribution of the conditional in-control ARL");
    double i_t1 = 0.0, i_t2 = 0.0, i_alpha = 0.0027;
    std::size_t i_m = 100, i_reps = 25000;
    std::optional<std::uint64_t> i_seed;
    std::optional<double> i_threshold;
    std::string i_out, i_format = "json", i_samples;
    ic->add_option("--theta1", i_t1)->required();
    ic->add_option("--theta2", i_t2)->required();
    ic->add_option("--m", i_m)->required();
    ic->add_option("--alpha", i_alpha)->capture_default_str();
    ic->add_option("--reps", i_reps)->capture_default_str();
    ic->add_option("--seed", i_seed);
    ic->add_option("--threshold", i_threshold, "comparison point for perc (default 1/alpha)");
    ic->add_option("--format", i_format)->check(CLI::IsMember({"json", "text"}))->capture_default_str();
    ic->add_option("--samples-out", i_samples, "write every CARL value to this file");
    ic->add_option("--out", i_out);
    ic->callback([&] {
        action = [&] {
            StudyConfig cfg;
            cfg.params0 = KumaParams(i_t1, i_t2);
            cfg.m = i_m;
            cfg.alpha = i_alpha;
            cfg.replications = i_reps;
            cfg.seed = resolve_seed(i_seed, err);
            cfg.workers = workers;
            const CarlSample s = simulate_carl(cfg);
            const double arl0 = 1.0 / i_alpha;
            const CarlSummary sum = summarize(s, arl0, i_threshold.value_or(arl0));
            if (!i_samples.empty()) {
                std::string text = "replication,carl\n";
                for (std::size_t r = 0; r < s.carl_values.size(); ++r) {
                    text += std::to_string(r + 1) + "," + format_double(s.carl_values[r]) + "\n";
                }
                write_text_file(i_samples, text);
            }
            if (i_format == "text") {
                emit_text("(" + format_double(i_t1) + ", " + format_double(i_t2) + ") m=" + std::to_string(i_m) +
                              " alpha=" + format_double(i_alpha) + "\n" + summary_text(sum),
                          i_out, out);
                return;
            }
            Json j = header("ic-study");
            j["params0"] = params_json(cfg.params0);
            j["m"] = cfg.m;
            j["alpha"] = cfg.alpha;
            j["arl0"] = arl0;
            j["replications"] = cfg.replications;
            j["seed"] = cfg.seed;
            j["summary"] = summary_json(sum);
            emit(j, i_out, out);
        };
    });

    // calibrate
    auto* cal = app.add_subcommand("calibrate", "adjusted false alarm rate (method a or b)");
    std::string c_method, c_out, c_format = "json";
    double c_t1 = 0.0, c_t2 = 0.0, c_alpha = 0.0027;
    std::size_t c_m = 100;
    CalibrationFlags c_flags;
    cal->add_option("--method", c_method)->required()->check(CLI::IsMember({"a", "b", "A", "B"}));
    cal->add_option("--theta1", c_t1)->required();
    cal->add_option("--theta2", c_t2)->required();
    cal->add_option("--m", c_m)->required();
    cal->add_option("--alpha", c_alpha)->capture_default_str();
    cal->add_option("--format", c_format)->check(CLI::IsMember({"json", "text"}))->capture_default_str();
    cal->add_option("--out", c_out);
    add_calibration_flags(cal, c_flags);
    cal->callback([&] {
        action = [&] {
            const AdjustmentMethod method = parse_method(c_method);
            const std::uint64_t seed = resolve_seed(c_flags.seed, err);
            const AdjustmentRequest req =
                make_request(method, KumaParams(c_t1, c_t2), c_m, c_alpha, c_flags, seed, workers);
            const AdjustmentResult res = calibrate(req);
            if (c_format == "text") {
                emit_text("method " + c_method + "  alpha_adjusted " + fixed(res.alpha_adjusted, 5) + "\n" +
                              summary_text(res.summary),
                          c_out, out);
                return;
            }
            Json j = header("calibrate");
            j["params0"] = params_json(req.params0);
            j["calibration"] = adjustment_json(req, res);
            emit(j, c_out, out);
        };
    });

    // ooc-study
    auto* ooc = app.add_subcommand("ooc-study", "out-of-control ARL over a shift grid");
    double o_t1 = 0.0, o_t2 = 0.0, o_alpha = 0.0027;
    std::size_t o_m = 100;
    std::string o_d1, o_d2, o_out, o_samples;
    bool o_both = false;
    std::vector<double> o_far_a, o_far_b;
    std::vector<std::string> o_methods;
    CalibrationFlags o_flags;
    ooc->add_option("--theta1", o_t1)->required();
    ooc->add_option("--theta2", o_t2)->required();
    ooc->add_option("--m", o_m)->required();
    ooc->add_option("--alpha", o_alpha, "nominal false alarm rate")->capture_default_str();
    ooc->add_option("--delta1-grid", o_d1, "shifts of theta1: lo:hi:step or a,b,c");
    ooc->add_option("--delta2-grid", o_d2, "shifts of theta2: lo:hi:step or a,b,c");
    ooc->add_flag("--allow-simultaneous", o_both, "cross both grids instead of varying one parameter");
    ooc->add_option("--far-a", o_far_a, "extra adjustment-A limit rule at a given false alarm rate");
    ooc->add_option("--far-b", o_far_b, "extra adjustment-B limit rule at a given false alarm rate");
    ooc->add_option("--method", o_methods, "extra limit rule calibrated by method a or b");
    ooc->add_option("--samples-out", o_samples, "long-format dump of every conditional ARL");
    ooc->add_option("--out", o_out);
    add_calibration_flags(ooc, o_flags);
    ooc->callback([&] {
        action = [&] {
            if (o_d1.empty() && o_d2.empty()) {
                throw UsageError("give --delta1-grid and/or --delta2-grid");
            }
            if (!o_d1.empty() && !o_d2.empty() && !o_both) {
                throw UsageError("varying both parameters needs --allow-simultaneous");
            }
            OocConfig cfg;
            cfg.params0 = KumaParams(o_t1, o_t2);
            cfg.m = o_m;
            cfg.alpha_nominal = o_alpha;
            cfg.replications = o_flags.reps;
            cfg.seed = resolve_seed(o_flags.seed, err);
            cfg.workers = workers;
            cfg.keep_samples = !o_samples.empty();
            const std::vector<double> g1 = o_d1.empty() ? std::vector<double>{1.0} : parse_grid(o_d1);
            const std::vector<double> g2 = o_d2.empty() ? std::vector<double>{1.0} : parse_grid(o_d2);
            for (const double d1 : g1) {
                for (const double d2 : g2) {
                    cfg.shifts.emplace_back(d1, d2);
                }
            }
            const auto fits = simulate_fits(cfg.params0, cfg.m, cfg.replications, cfg.seed, cfg.workers);
            cfg.rules.push_back({"plugin", LimitSource::plugin, o_alpha});
            for (const std::string& name : o_methods) {
                const AdjustmentMethod method = parse_method(name);
                const auto res = calibrate(make_request(method, cfg.params0, cfg.m, o_alpha, o_flags, cfg.seed, workers), fits);
                cfg.rules.push_back({method_label(method, o_flags.epsilon), method_source(method), res.alpha_adjusted});
                err << cfg.rules.back().label << " alpha " << format_double(res.alpha_adjusted) << "\n";
            }
            for (const double a : o_far_a) {
                cfg.rules.push_back({"far_a_" + format_double(a), LimitSource::adjusted_a, a});
            }
            for (const double a : o_far_b) {
                cfg.rules.push_back({"far_b_" + format_double(a), LimitSource::adjusted_b, a});
            }
            const auto rows = ooc_study(cfg, fits);

            std::string text = "delta1,delta2,case_k_arl";
            for (const auto& rule : cfg.rules) {
                text += "," + rule.label + "_alpha," + rule.label + "_aarl," + rule.label + "_sdarl," + rule.label +
                        "_median";
            }
            text += "\n";
            for (const auto& row : rows) {
                text += format_double(row.shift.delta1) + "," + format_double(row.shift.delta2) + "," +
                        format_double(row.case_k_arl);
                for (std::size_t k = 0; k < cfg.rules.size(); ++k) {
                    const auto& s = row.summaries[k];
                    text += "," + format_double(cfg.rules[k].alpha) + "," + format_double(s.aarl) + "," +
                            format_double(s.sdarl) + "," + format_double(s.percentile(0.5));
                }
                text += "\n";
            }
            emit_text(text, o_out, out);

            if (!o_samples.empty()) {
                std::string dump = "delta1,delta2,rule,replication,carl\n";
                for (const auto& row : rows) {
                    for (std::size_t k = 0; k < cfg.rules.size(); ++k) {
                        const auto& vals = row.samples[k].carl_values;
                        for (std::size_t r = 0; r < vals.size(); ++r) {
                            dump += format_double(row.shift.delta1) + "," + format_double(row.shift.delta2) + "," +
                                    cfg.rules[k].label + "," + std::to_string(r + 1) + "," + format_double(vals[r]) +
                                    "\n";
                        }
                    }
                }
                write_text_file(o_samples, dump);
            }
        };
    });

    // chart
    auto* ch = app.add_subcommand("chart", "Phase I / Phase II chart with one or more limit pairs");
    std::string h_p1, h_p2, h_out, h_report, h_center = "median";
    double h_alpha = 0.0027;
    std::vector<double> h_far_a, h_far_b;
    std::vector<std::string> h_methods;
    CalibrationFlags h_flags;
    ch->add_option("--phase1", h_p1, "Phase I data file")->required();
    ch->add_option("--phase2", h_p2, "Phase II data file");
    ch->add_option("--alpha", h_alpha)->capture_default_str();
    ch->add_option("--far-a", h_far_a, "extra adjustment-A limit pair at a given false alarm rate");
    ch->add_option("--far-b", h_far_b, "extra adjustment-B limit pair at a given false alarm rate");
    ch->add_option("--method", h_methods, "extra limit pair calibrated by method a or b");
    ch->add_option("--center", h_center)->check(CLI::IsMember({"median", "mean"}))->capture_default_str();
    ch->add_option("--out", h_out, "plot data file (CSV)");
    ch->add_option("--report", h_report, "write the JSON report here instead of stdout");
    add_calibration_flags(ch, h_flags);
    ch->callback([&] {
        action = [&] {
            const DataFile phase1 = read_data_file(h_p1);
            const PhaseISample sample1(phase1.values);
            const FitResult r = fit_mle(sample1);
            if (!r.converged) {
                throw DegenerateSampleError("maximum-likelihood fit did not converge");
            }
            std::optional<DataFile> phase2;
            if (!h_p2.empty()) {
                phase2 = read_data_file(h_p2);
            }
            const CenterLineMode mode = parse_center(h_center);
            std::vector<Chart> charts;
            charts.push_back({"plugin", limits_plugin(r.params_hat, h_alpha, mode)});
            Json calib = Json::array();
            if (!h_methods.empty()) {
                const std::uint64_t seed = resolve_seed(h_flags.seed, err);
                for (const std::string& name : h_methods) {
                    const AdjustmentMethod method = parse_method(name);
                    const auto req = make_request(method, r.params_hat, sample1.size(), h_alpha, h_flags, seed, workers);
                    const auto res = calibrate(req);
                    charts.push_back({method_label(method, req.epsilon),
                                      limits_plugin(r.params_hat, res.alpha_adjusted, mode, method_source(method))});
                    calib.push_back(adjustment_json(req, res));
                }
            }
            for (const double a : h_far_a) {
                charts.push_back({"far_a_" + format_double(a), limits_plugin(r.params_hat, a, mode, LimitSource::adjusted_a)});
            }
            for (const double a : h_far_b) {
                charts.push_back({"far_b_" + format_double(a), limits_plugin(r.params_hat, a, mode, LimitSource::adjusted_b)});
            }

            Json j = header("chart");
            j["phase1"] = h_p1;
            j["fit"] = fit_json(r, sample1.size());
            Json lims = Json::array();
            for (const auto& c : charts) {
                Json l = limits_json(c.limits);
                l["label"] = c.label;
                lims.push_back(l);
            }
            j["limits"] = lims;
            if (!calib.empty()) {
                j["calibration"] = calib;
            }
            j["phase1_signals"] = signals_json(charts, phase1.values);
            if (phase2) {
                j["phase2"] = h_p2;
                j["phase2_signals"] = signals_json(charts, phase2->values);
            }

            if (!h_out.empty()) {
                std::string text = "index,value,lcl,cl,ucl,status";
                for (std::size_t k = 1; k < charts.size(); ++k) {
                    const auto& lab = charts[k].label;
                    text += ",lcl_" + lab + ",ucl_" + lab + ",status_" + lab;
                }
                text += ",phase\n";
                text += chart_rows(charts, phase1.values, "1");
                if (phase2) {
                    text += chart_rows(charts, phase2->values, "2");
                }
                write_text_file(h_out, text);
                j["plot_file"] = h_out;
            }
            emit(j, h_report, out);
        };
    });

    try {
        std::vector<std::string> reversed(args.rbegin(), args.rend());
        app.parse(reversed);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return 0;
    } catch (const CLI::CallForAllHelp&) {
        out << app.help("", CLI::AppFormatMode::All);
        return 0;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << "\n";
        return static_cast<int>(ExitCode::usage);
    }

    try {
        action();
    } catch (const DataParseError& e) {
        err << "parse error: " << e.what() << "\n";
        return static_cast<int>(ExitCode::parse);
    } catch (const IoError& e) {
        err << "i/o error: " << e.what() << "\n";
        return static_cast<int>(ExitCode::io);
    } catch (const DegenerateSampleError& e) {
        err << "fit error: " << e.what() << "\n";
        return static_cast<int>(ExitCode::fit);
    } catch (const StudyError& e) {
        err << "fit error: " << e.what() << "\n";
        return static_cast<int>(ExitCode::fit);
    } catch (const CalibrationInfeasible& e) {
        err << "calibration infeasible: " << e.what() << "\n";
        return static_cast<int>(ExitCode::calibration);
    } catch (const UsageError& e) {
        err << "error: " << e.what() << "\n";
        return static_cast<int>(ExitCode::usage);
    } catch (const std::domain_error& e) {
        err << "error: " << e.what() << "\n";
        return static_cast<int>(ExitCode::usage);
    } catch (const std::invalid_argument& e) {
        err << "error: " << e.what() << "\n";
        return static_cast<int>(ExitCode::usage);
    } catch (const std::exception& e) {
        err << "internal error: " << e.what() << "\n";
        return static_cast<int>(ExitCode::internal);
    }
    return static_cast<int>(ExitCode::ok);
}

} // namespace kumachart::cli
