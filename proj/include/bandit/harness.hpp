#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "bandit/core_model.hpp"
#include "bandit/offline.hpp"
#include "bandit/online.hpp"

namespace bandit {

enum class run_mode { offline, online };

struct sweep_config {
    functional_spec functional;
    dist_spec distribution;
    std::vector<double> eps_grid;  // strictly decreasing
    double delta = 0.1;
    int trials = 1;
    std::vector<run_mode> modes = {run_mode::offline, run_mode::online};
    schedule_mode sched_mode = schedule_mode::unit_constant;
    uint64_t seed = 1;
    std::string output_path;
    double noise_sd = 1.0;
    bool allow_nonstandard_noise = false;

    std::string functional_str = "mean";
    std::string distribution_str = "uniform(0,1)";
};

struct sweep_row {
    double eps = 0.0;
    run_mode mode = run_mode::offline;
    int trial = 0;
    estimate_report report;
};

struct slope_fit {
    double slope = 0.0;
    double intercept = 0.0;
    double r2 = 0.0;
    bool valid = false;  // requires >= 3 grid points
};

struct sweep_report {
    sweep_config config;
    std::vector<sweep_row> rows;  // sorted by (eps-index, mode, trial)
    // keyed by mode name; median M per eps in eps_grid order
    std::map<std::string, std::vector<double>> median_M;
    std::map<std::string, slope_fit> slopes;  // log median-M vs log(1/eps)
    std::map<std::string, std::vector<double>> failure_rates;  // per eps
};

// Deterministic per-trial seed: a fixed hash of (config seed, eps index, mode, trial).
uint64_t derive_seed(uint64_t base, int eps_index, run_mode mode, int trial);

sweep_config parse_config_file(const std::string& path, sweep_config defaults);
functional_spec parse_functional(const std::string& text);
dist_spec parse_distribution(const std::string& text);

sweep_report run_sweep(const sweep_config& cfg);

// OLS on (ln x, ln y); throws too_few_points below 3 points.
slope_fit fit_slope(const std::vector<std::pair<double, double>>& points);

// CSV at path (header: eps,mode,functional,trial,estimate,truth,abs_err,
// samples_total,n,m,seed) plus a JSON summary at path + ".json".
void emit_report(const sweep_report& report, const std::string& path);

std::string render_csv(const sweep_report& report);
std::string render_json_summary(const sweep_report& report);

}  // namespace bandit
