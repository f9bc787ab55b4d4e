#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "bandit/environment.hpp"
#include "bandit/errors.hpp"
#include "bandit/harness.hpp"
#include "bandit/lowerbound.hpp"
#include "bandit/math_util.hpp"

namespace {

using namespace bandit;

std::string fmt(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

std::vector<double> parse_real_list(const std::string& csv, const std::string& what) {
    std::vector<double> out;
    std::string cur;
    std::stringstream ss(csv);
    while (std::getline(ss, cur, ',')) {
        try {
            out.push_back(std::stod(cur));
        } catch (const std::exception&) {
            throw config_error("could not parse " + what + ": '" + cur + "'");
        }
    }
    if (out.empty()) throw config_error(what + " list is empty");
    return out;
}

pair_kind parse_pair_kind(const std::string& name) {
    if (name == "mean_dirac") return pair_kind::mean_dirac;
    if (name == "max_w2") return pair_kind::max_w2;
    if (name == "max_winf") return pair_kind::max_winf;
    if (name == "max_kl") return pair_kind::max_kl;
    if (name == "median_pair") return pair_kind::median_pair;
    if (name == "trimmed_pair") return pair_kind::trimmed_pair;
    throw config_error("unknown pair kind: " + name);
}

int cmd_estimate(const std::string& functional_str, const std::string& distribution_str,
                 double eps, double delta, const std::string& mode_str,
                 const std::string& sched_str, uint64_t seed, double noise_sd,
                 bool allow_noise, const std::string& transcript_path) {
    functional_spec fn = parse_functional(functional_str);
    dist_spec dist = parse_distribution(distribution_str);
    schedule_mode sched_mode = sched_str == "theoretical" ? schedule_mode::theoretical
                                                          : schedule_mode::unit_constant;
    if (sched_str != "theoretical" && sched_str != "unit_constant")
        throw config_error("schedule must be theoretical or unit_constant");
    assumption_params params = check_assumptions(dist, fn, eps);
    if (!params.ok()) {
        std::string msg = "assumption check failed:";
        for (const std::string& v : params.violations) msg += " " + v + ";";
        throw config_error(msg);
    }

    bandit_env env(dist, noise_sd, seed, allow_noise);
    std::ofstream transcript;
    if (!transcript_path.empty()) {
        transcript.open(transcript_path, std::ios::binary);
        if (!transcript) throw io_error("cannot write " + transcript_path);
        env.attach_transcript(&transcript);
    }

    estimate_report rep;
    if (mode_str == "offline") {
        schedule sched = offline_schedule(fn, eps, delta, params, sched_mode);
        rep = run_offline(env, fn, sched);
    } else if (mode_str == "online") {
        rep = run_online(env, fn, eps, delta, params, sched_mode);
    } else {
        throw config_error("mode must be offline or online");
    }

    std::cout << "functional: " << fn.describe() << "\n"
              << "distribution: " << dist.describe() << "\n"
              << "mode: " << mode_str << " (" << sched_str << ")\n"
              << "schedule: n=" << rep.sched.n << " m=" << rep.sched.m << "\n"
              << "estimate: " << fmt(rep.estimate) << "\n"
              << "truth: " << fmt(rep.truth) << "\n"
              << "abs_err: " << fmt(rep.abs_err) << "\n"
              << "samples_total: " << rep.total_pulls << "\n"
              << "selected_arms: " << rep.selected.size() << "\n";
    return 0;
}

int cmd_sweep(sweep_config cfg, const std::string& config_path) {
    if (!config_path.empty()) {
        cfg = parse_config_file(config_path, cfg);
    }
    sweep_report rep = run_sweep(cfg);
    if (!cfg.output_path.empty()) {
        emit_report(rep, cfg.output_path);
        std::cout << "wrote " << cfg.output_path << " and " << cfg.output_path
                  << ".json\n";
    }
    for (const auto& [key, medians] : rep.median_M) {
        std::cout << key << ": median samples per eps:";
        for (double v : medians) std::cout << " " << fmt(v);
        std::cout << "\n  failure rates:";
        for (double v : rep.failure_rates.at(key)) std::cout << " " << fmt(v);
        std::cout << "\n";
        auto it = rep.slopes.find(key);
        if (it != rep.slopes.end() && it->second.valid) {
            std::cout << "  slope of log(samples) vs log(1/eps): " << fmt(it->second.slope)
                      << " (r2 " << fmt(it->second.r2) << ")\n";
        }
    }
    return 0;
}

int cmd_kl_sweep(const std::string& pair_name, double eps, int k, double beta,
                 double alpha, const std::string& sigma_csv, const std::string& output) {
    construction_pair pair = make_pair(parse_pair_kind(pair_name), eps, k, beta, alpha);
    std::vector<double> sigmas;
    if (!sigma_csv.empty()) {
        sigmas = parse_real_list(sigma_csv, "sigma");
    } else {
        // default geometric ladder from 0.5*sqrt(eps) to eps^0.3
        double lo = 0.5 * std::sqrt(eps), hi = std::pow(eps, 0.3);
        int steps = 6;
        for (int i = 0; i < steps; ++i) {
            sigmas.push_back(lo * std::pow(hi / lo, static_cast<double>(i) / (steps - 1)));
        }
    }
    std::vector<sweep_point> pts = sigma_sweep(pair, sigmas);
    double w2 = wasserstein2(pair), winf = wasserstein_inf(pair);
    std::ostringstream os;
    os << "eps,sigma,kl,w2,winf,gap,pair_kind,k\n";
    for (const sweep_point& p : pts) {
        os << fmt(pair.eps) << "," << fmt(p.sigma) << "," << fmt(p.kl) << "," << fmt(w2)
           << "," << fmt(winf) << "," << fmt(pair.gap) << ","
           << pair_kind_name(pair.kind) << "," << pair.k << "\n";
    }
    if (!output.empty()) {
        std::ofstream out(output, std::ios::binary);
        if (!out) throw io_error("cannot write " + output);
        out << os.str();
        std::cout << "wrote " << output << "\n";
    } else {
        std::cout << os.str();
    }
    return 0;
}

int cmd_pair_check(const std::string& pair_name, double eps, int k, double beta,
                   double alpha) {
    construction_pair pair = make_pair(parse_pair_kind(pair_name), eps, k, beta, alpha);
    std::cout << "pair: " << pair_kind_name(pair.kind) << "\n"
              << "eps: " << fmt(pair.eps) << "\n"
              << "support: [" << fmt(pair.support_lo) << ", " << fmt(pair.support_hi)
              << "]\n"
              << "functional gap: " << fmt(pair.gap) << "\n";
    if (pair.has_bump) {
        std::cout << "bump order k: " << pair.k
                  << ", half-width: " << fmt(pair.bump.half_width())
                  << ", density floor: " << fmt(pair.density_floor) << "\n";
    }
    std::cout << "W2: " << fmt(wasserstein2(pair)) << "\n"
              << "Winf: " << fmt(wasserstein_inf(pair)) << "\n"
              << "note: " << pair.note << "\n";
    return 0;
}

int cmd_bump_check(int k) {
    bump_spec bump = make_bump(k, 1.0);
    std::cout << "k: " << k << "\ncoefficients:";
    for (double a : bump.coeffs) std::cout << " " << fmt(a);
    std::cout << "\nlipschitz bound: " << fmt(bump.b)
              << "\nsup |h0|: " << fmt(bump.h0_max)
              << "\nsup |h0'|: " << fmt(bump.h0_deriv_max) << "\n";
    for (int ell = 0; ell <= 2 * k; ++ell) {
        auto f = [&](double y) { return std::pow(y, ell) * bump.h0(y); };
        double pos = integrate(f, 0.0, 1.0, 1e-13, 44);
        double full = (ell % 2 == 0) ? 0.0 : 2.0 * pos;  // odd extension
        std::cout << "moment " << ell << ": " << fmt(full) << "\n";
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Infinite-armed bandit estimation lab: offline/online order-statistic "
                 "estimators, scaling sweeps, and indistinguishable-pair diagnostics"};
    app.require_subcommand(1);

    // estimate
    auto* est = app.add_subcommand("estimate", "Run one estimation episode");
    std::string e_fn = "mean", e_dist = "uniform(0,1)", e_mode = "offline",
                e_sched = "theoretical", e_transcript;
    double e_eps = 0.1, e_delta = 0.1, e_noise = 1.0;
    uint64_t e_seed = 1;
    bool e_allow = false;
    est->add_option("--functional", e_fn, "mean | quantile(a) | maximum | trimmed(a)");
    est->add_option("--distribution", e_dist,
                    "uniform(a,b) | dirac(c) | gaussian(mu,sd) | beta_tail(beta)");
    est->add_option("--eps", e_eps, "target accuracy");
    est->add_option("--delta", e_delta, "failure probability");
    est->add_option("--mode", e_mode, "offline | online");
    est->add_option("--schedule", e_sched, "theoretical | unit_constant");
    est->add_option("--seed", e_seed, "environment seed");
    est->add_option("--noise-sd", e_noise, "observation noise sd (0 or 1)");
    est->add_flag("--allow-nonstandard-noise", e_allow, "permit noise_sd outside {0,1}");
    est->add_option("--transcript", e_transcript, "write per-pull transcript to file");

    // sweep
    auto* sw = app.add_subcommand("sweep", "Monte Carlo eps-sweep with slope fitting");
    sweep_config cfg;
    cfg.functional = parse_functional(cfg.functional_str);
    cfg.distribution = parse_distribution(cfg.distribution_str);
    cfg.eps_grid = {0.2, 0.1, 0.05, 0.025};
    std::string s_fn = cfg.functional_str, s_dist = cfg.distribution_str;
    std::string s_eps = "0.2,0.1,0.05,0.025", s_modes = "offline,online",
                s_sched = "unit_constant", s_config;
    sw->add_option("--functional", s_fn, "functional to estimate");
    sw->add_option("--distribution", s_dist, "arm-mean distribution");
    sw->add_option("--eps", s_eps, "comma-separated eps grid, strictly decreasing");
    sw->add_option("--delta", cfg.delta, "failure probability");
    sw->add_option("--trials", cfg.trials, "Monte Carlo trials per cell");
    sw->add_option("--modes", s_modes, "subset of offline,online");
    sw->add_option("--schedule", s_sched, "theoretical | unit_constant");
    sw->add_option("--seed", cfg.seed, "base seed");
    sw->add_option("--output", cfg.output_path, "CSV path (JSON summary at path.json)");
    sw->add_option("--noise-sd", cfg.noise_sd, "observation noise sd (0 or 1)");
    sw->add_flag("--allow-nonstandard-noise", cfg.allow_nonstandard_noise,
                 "permit noise_sd outside {0,1}");
    sw->add_option("--config", s_config,
                   "key=value config file; file values override flags");

    // lowerbound
    auto* lb = app.add_subcommand("lowerbound", "Indistinguishable-pair diagnostics");
    lb->require_subcommand(1);
    std::string l_pair = "median_pair", l_sigmas, l_output;
    double l_eps = 0.01, l_beta = 2.0, l_alpha = 0.25;
    int l_k = 1;
    auto add_pair_opts = [&](CLI::App* sub) {
        sub->add_option("--pair", l_pair,
                        "mean_dirac | max_w2 | max_winf | max_kl | median_pair | "
                        "trimmed_pair");
        sub->add_option("--eps", l_eps, "separation parameter");
        sub->add_option("--k", l_k, "bump order");
        sub->add_option("--beta", l_beta, "tail exponent (max pairs)");
        sub->add_option("--alpha", l_alpha, "trim fraction (trimmed pair)");
    };
    auto* kl = lb->add_subcommand("kl-sweep", "KL of the noise-smoothed pair vs sigma");
    add_pair_opts(kl);
    kl->add_option("--sigmas", l_sigmas, "comma-separated noise sds");
    kl->add_option("--output", l_output, "CSV path");
    auto* pc = lb->add_subcommand("pair-check", "Gap, floors and transport distances");
    add_pair_opts(pc);
    auto* bc = lb->add_subcommand("bump-check", "Coefficients and moment residuals");
    bc->add_option("--k", l_k, "bump order");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }

    try {
        if (est->parsed()) {
            return cmd_estimate(e_fn, e_dist, e_eps, e_delta, e_mode, e_sched, e_seed,
                                e_noise, e_allow, e_transcript);
        }
        if (sw->parsed()) {
            cfg.functional = parse_functional(s_fn);
            cfg.functional_str = s_fn;
            cfg.distribution = parse_distribution(s_dist);
            cfg.distribution_str = s_dist;
            cfg.eps_grid = parse_real_list(s_eps, "eps");
            cfg.modes.clear();
            std::stringstream ms(s_modes);
            std::string piece;
            while (std::getline(ms, piece, ',')) {
                if (piece == "offline") {
                    cfg.modes.push_back(run_mode::offline);
                } else if (piece == "online") {
                    cfg.modes.push_back(run_mode::online);
                } else {
                    throw config_error("unknown mode: " + piece);
                }
            }
            if (s_sched == "theoretical") {
                cfg.sched_mode = schedule_mode::theoretical;
            } else if (s_sched == "unit_constant") {
                cfg.sched_mode = schedule_mode::unit_constant;
            } else {
                throw config_error("schedule must be theoretical or unit_constant");
            }
            return cmd_sweep(cfg, s_config);
        }
        if (kl->parsed()) {
            return cmd_kl_sweep(l_pair, l_eps, l_k, l_beta, l_alpha, l_sigmas, l_output);
        }
        if (pc->parsed()) {
            return cmd_pair_check(l_pair, l_eps, l_k, l_beta, l_alpha);
        }
        if (bc->parsed()) {
            return cmd_bump_check(l_k);
        }
        return 1;
    } catch (const config_error& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
}
