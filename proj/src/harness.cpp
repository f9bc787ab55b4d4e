#include "bandit/harness.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "bandit/environment.hpp"
#include "bandit/errors.hpp"

namespace bandit {

namespace {

std::string fmt_g17(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

std::string mode_name(run_mode mode) {
    return mode == run_mode::offline ? "offline" : "online";
}

std::string trim(const std::string& s) {
    size_t a = s.find_first_not_of(" \t\r\n");
    if (a == std::string::npos) return "";
    size_t b = s.find_last_not_of(" \t\r\n");
    return s.substr(a, b - a + 1);
}

std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, sep)) out.push_back(trim(item));
    return out;
}

double parse_real(const std::string& s, const std::string& what) {
    try {
        size_t pos = 0;
        double v = std::stod(s, &pos);
        if (pos != s.size()) throw std::invalid_argument(s);
        return v;
    } catch (const std::exception&) {
        throw config_error("could not parse " + what + ": '" + s + "'");
    }
}

// "name" or "name(arg1,arg2)"
std::pair<std::string, std::vector<double>> parse_call(const std::string& text,
                                                       const std::string& what) {
    std::string t = trim(text);
    size_t open = t.find('(');
    if (open == std::string::npos) return {t, {}};
    if (t.back() != ')') throw config_error("unbalanced parentheses in " + what + ": " + t);
    std::string name = trim(t.substr(0, open));
    std::string inside = t.substr(open + 1, t.size() - open - 2);
    std::vector<double> args;
    if (!trim(inside).empty()) {
        for (const std::string& piece : split(inside, ',')) {
            args.push_back(parse_real(piece, what + " argument"));
        }
    }
    return {name, args};
}

}  // namespace

uint64_t derive_seed(uint64_t base, int eps_index, run_mode mode, int trial) {
    uint64_t h = counter_rng::mix64(base ^ 0x5357454550534544ULL);
    h = counter_rng::mix64(h ^ static_cast<uint64_t>(eps_index));
    h = counter_rng::mix64(h ^ (mode == run_mode::online ? 0x4f4eULL : 0x4f46ULL));
    h = counter_rng::mix64(h ^ static_cast<uint64_t>(trial));
    return h;
}

functional_spec parse_functional(const std::string& text) {
    auto [name, args] = parse_call(text, "functional");
    if (name == "mean") {
        if (!args.empty()) throw config_error("mean takes no arguments");
        return functional_spec::mean();
    }
    if (name == "quantile" || name == "median") {
        double a = name == "median" ? 0.5 : (args.size() == 1 ? args[0] : -1.0);
        if (name == "quantile" && args.size() != 1)
            throw config_error("quantile needs exactly one argument");
        if (!(a > 0.0 && a < 1.0)) throw config_error("quantile level must lie in (0,1)");
        return functional_spec::quantile(a);
    }
    if (name == "maximum" || name == "max") {
        if (!args.empty()) throw config_error("maximum takes no arguments");
        return functional_spec::maximum();
    }
    if (name == "trimmed") {
        if (args.size() != 1) throw config_error("trimmed needs exactly one argument");
        if (!(args[0] > 0.0 && args[0] < 0.5))
            throw config_error("trim fraction must lie in (0,0.5)");
        return functional_spec::trimmed(args[0]);
    }
    throw config_error("unknown functional: " + text);
}

dist_spec parse_distribution(const std::string& text) {
    auto [name, args] = parse_call(text, "distribution");
    if (name == "uniform") {
        if (args.size() != 2 || !(args[1] > args[0]))
            throw config_error("uniform needs (lo, hi) with hi > lo");
        return dist_spec::uniform(args[0], args[1]);
    }
    if (name == "dirac") {
        if (args.size() != 1) throw config_error("dirac needs one argument");
        return dist_spec::dirac(args[0]);
    }
    if (name == "gaussian" || name == "normal") {
        if (args.size() != 2 || !(args[1] > 0.0))
            throw config_error("gaussian needs (mu, sd) with sd > 0");
        return dist_spec::gaussian(args[0], args[1]);
    }
    if (name == "beta_tail") {
        if (args.size() != 1 || !(args[0] > 0.0))
            throw config_error("beta_tail needs one positive argument");
        return dist_spec::beta_tail(args[0]);
    }
    throw config_error("unknown distribution: " + text);
}

sweep_config parse_config_file(const std::string& path, sweep_config defaults) {
    std::ifstream in(path);
    if (!in) throw io_error("cannot open config file: " + path);
    sweep_config cfg = defaults;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        std::string t = trim(line);
        if (t.empty() || t[0] == '#') continue;
        size_t eq = t.find('=');
        if (eq == std::string::npos) {
            throw config_error("config line " + std::to_string(lineno) +
                               " is not key=value: " + t);
        }
        std::string key = trim(t.substr(0, eq));
        std::string value = trim(t.substr(eq + 1));
        if (key == "functional") {
            cfg.functional = parse_functional(value);
            cfg.functional_str = value;
        } else if (key == "distribution") {
            cfg.distribution = parse_distribution(value);
            cfg.distribution_str = value;
        } else if (key == "eps") {
            cfg.eps_grid.clear();
            for (const std::string& piece : split(value, ','))
                cfg.eps_grid.push_back(parse_real(piece, "eps"));
        } else if (key == "delta") {
            cfg.delta = parse_real(value, "delta");
        } else if (key == "trials") {
            cfg.trials = static_cast<int>(parse_real(value, "trials"));
        } else if (key == "modes") {
            cfg.modes.clear();
            for (const std::string& piece : split(value, ',')) {
                if (piece == "offline") {
                    cfg.modes.push_back(run_mode::offline);
                } else if (piece == "online") {
                    cfg.modes.push_back(run_mode::online);
                } else {
                    throw config_error("unknown mode: " + piece);
                }
            }
        } else if (key == "schedule") {
            if (value == "theoretical") {
                cfg.sched_mode = schedule_mode::theoretical;
            } else if (value == "unit_constant") {
                cfg.sched_mode = schedule_mode::unit_constant;
            } else {
                throw config_error("unknown schedule mode: " + value);
            }
        } else if (key == "seed") {
            cfg.seed = static_cast<uint64_t>(parse_real(value, "seed"));
        } else if (key == "output") {
            cfg.output_path = value;
        } else if (key == "noise_sd") {
            cfg.noise_sd = parse_real(value, "noise_sd");
        } else if (key == "allow_nonstandard_noise") {
            cfg.allow_nonstandard_noise = (value == "1" || value == "true");
        } else {
            throw config_error("unknown config key: " + key);
        }
    }
    return cfg;
}

slope_fit fit_slope(const std::vector<std::pair<double, double>>& points) {
    if (points.size() < 3) throw too_few_points("fit_slope: need at least 3 points");
    double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0, syy = 0.0;
    auto n = static_cast<double>(points.size());
    for (const auto& [x, y] : points) {
        assert(x > 0.0 && y > 0.0);
        double lx = std::log(x), ly = std::log(y);
        sx += lx;
        sy += ly;
        sxx += lx * lx;
        sxy += lx * ly;
        syy += ly * ly;
    }
    double det = n * sxx - sx * sx;
    assert(det > 0.0);
    slope_fit fit;
    fit.slope = (n * sxy - sx * sy) / det;
    fit.intercept = (sy - fit.slope * sx) / n;
    double ss_tot = syy - sy * sy / n;
    double ss_res = 0.0;
    for (const auto& [x, y] : points) {
        double pred = fit.intercept + fit.slope * std::log(x);
        double r = std::log(y) - pred;
        ss_res += r * r;
    }
    fit.r2 = ss_tot > 0.0 ? 1.0 - ss_res / ss_tot : 1.0;
    fit.valid = true;
    return fit;
}

sweep_report run_sweep(const sweep_config& cfg) {
    if (cfg.eps_grid.empty()) throw config_error("run_sweep: empty eps grid");
    if (cfg.trials < 1) throw config_error("run_sweep: trials must be >= 1");
    for (size_t i = 1; i < cfg.eps_grid.size(); ++i) {
        if (!(cfg.eps_grid[i] < cfg.eps_grid[i - 1]))
            throw config_error("run_sweep: eps grid must be strictly decreasing");
    }

    sweep_report rep;
    rep.config = cfg;
    for (run_mode mode : cfg.modes) {
        std::string key = mode_name(mode);
        rep.median_M[key] = {};
        rep.failure_rates[key] = {};
    }

    for (size_t ei = 0; ei < cfg.eps_grid.size(); ++ei) {
        double eps = cfg.eps_grid[ei];
        // schedules depend only on derived regularity constants, not on data
        assumption_params params = check_assumptions(cfg.distribution, cfg.functional, eps);
        if (!params.ok()) {
            std::string msg = "assumption check failed for " + cfg.functional_str +
                              " on " + cfg.distribution_str + ":";
            for (const std::string& v : params.violations) msg += " " + v + ";";
            throw config_error(msg);
        }
        for (run_mode mode : cfg.modes) {
            std::string key = mode_name(mode);
            std::vector<double> budgets;
            budgets.reserve(static_cast<size_t>(cfg.trials));
            int failures = 0;
            for (int trial = 0; trial < cfg.trials; ++trial) {
                uint64_t seed = derive_seed(cfg.seed, static_cast<int>(ei), mode, trial);
                bandit_env env(cfg.distribution, cfg.noise_sd, seed,
                               cfg.allow_nonstandard_noise);
                estimate_report er;
                if (mode == run_mode::offline) {
                    schedule sched = offline_schedule(cfg.functional, eps, cfg.delta,
                                                      params, cfg.sched_mode);
                    er = run_offline(env, cfg.functional, sched);
                } else {
                    er = run_online(env, cfg.functional, eps, cfg.delta, params,
                                    cfg.sched_mode);
                }
                if (er.abs_err > eps) ++failures;
                budgets.push_back(static_cast<double>(er.total_pulls));
                sweep_row row;
                row.eps = eps;
                row.mode = mode;
                row.trial = trial;
                row.report = std::move(er);
                // only scalar summaries reach the rendered reports; dropping the
                // per-arm vectors keeps large sweeps within a modest footprint
                row.report.per_arm_counts.clear();
                row.report.per_arm_counts.shrink_to_fit();
                row.report.selected.clear();
                row.report.selected.shrink_to_fit();
                rep.rows.push_back(std::move(row));
            }
            std::sort(budgets.begin(), budgets.end());
            size_t mid = budgets.size() / 2;
            double median = budgets.size() % 2 == 1
                                ? budgets[mid]
                                : 0.5 * (budgets[mid - 1] + budgets[mid]);
            rep.median_M[key].push_back(median);
            rep.failure_rates[key].push_back(static_cast<double>(failures) /
                                             static_cast<double>(cfg.trials));
        }
    }

    for (run_mode mode : cfg.modes) {
        std::string key = mode_name(mode);
        if (cfg.eps_grid.size() >= 3) {
            std::vector<std::pair<double, double>> pts;
            for (size_t ei = 0; ei < cfg.eps_grid.size(); ++ei) {
                pts.emplace_back(1.0 / cfg.eps_grid[ei], rep.median_M[key][ei]);
            }
            rep.slopes[key] = fit_slope(pts);
        } else {
            rep.slopes[key] = slope_fit{};
        }
    }
    return rep;
}

std::string render_csv(const sweep_report& report) {
    std::ostringstream os;
    os << "eps,mode,functional,trial,estimate,truth,abs_err,samples_total,n,m,seed\n";
    for (const sweep_row& row : report.rows) {
        os << fmt_g17(row.eps) << ',' << mode_name(row.mode) << ','
           << report.config.functional_str << ',' << row.trial << ','
           << fmt_g17(row.report.estimate) << ',' << fmt_g17(row.report.truth) << ','
           << fmt_g17(row.report.abs_err) << ',' << row.report.total_pulls << ','
           << row.report.sched.n << ',' << row.report.sched.m << ',' << row.report.seed
           << "\n";
    }
    return os.str();
}

std::string render_json_summary(const sweep_report& report) {
    std::ostringstream os;
    os << "{\n";
    os << "  \"functional\": \"" << report.config.functional_str << "\",\n";
    os << "  \"distribution\": \"" << report.config.distribution_str << "\",\n";
    os << "  \"delta\": " << fmt_g17(report.config.delta) << ",\n";
    os << "  \"trials\": " << report.config.trials << ",\n";
    os << "  \"schedule\": "
       << (report.config.sched_mode == schedule_mode::theoretical ? "\"theoretical\""
                                                                  : "\"unit_constant\"")
       << ",\n";
    os << "  \"seed\": " << report.config.seed << ",\n";
    os << "  \"eps\": [";
    for (size_t i = 0; i < report.config.eps_grid.size(); ++i) {
        os << (i ? ", " : "") << fmt_g17(report.config.eps_grid[i]);
    }
    os << "],\n  \"modes\": {";
    bool first_mode = true;
    for (const auto& [key, medians] : report.median_M) {
        os << (first_mode ? "" : ",") << "\n    \"" << key << "\": {\n";
        first_mode = false;
        os << "      \"median_samples\": [";
        for (size_t i = 0; i < medians.size(); ++i) {
            os << (i ? ", " : "") << fmt_g17(medians[i]);
        }
        os << "],\n      \"failure_rates\": [";
        const auto& fr = report.failure_rates.at(key);
        for (size_t i = 0; i < fr.size(); ++i) os << (i ? ", " : "") << fmt_g17(fr[i]);
        os << "]";
        auto it = report.slopes.find(key);
        if (it != report.slopes.end() && it->second.valid) {
            os << ",\n      \"slope\": " << fmt_g17(it->second.slope);
            os << ",\n      \"r2\": " << fmt_g17(it->second.r2);
        }
        os << "\n    }";
    }
    os << "\n  }\n}\n";
    return os.str();
}

void emit_report(const sweep_report& report, const std::string& path) {
    std::ofstream csv(path, std::ios::binary);
    if (!csv) throw io_error("cannot write " + path);
    csv << render_csv(report);
    csv.close();
    if (!csv) throw io_error("failed writing " + path);
    std::string jpath = path + ".json";
    std::ofstream js(jpath, std::ios::binary);
    if (!js) throw io_error("cannot write " + jpath);
    js << render_json_summary(report);
    js.close();
    if (!js) throw io_error("failed writing " + jpath);
}

}  // namespace bandit
