#pragma once

#include <cstdint>
#include <vector>

#include "bandit/core_model.hpp"
#include "bandit/environment.hpp"

namespace bandit {

enum class schedule_mode { theoretical, unit_constant };

struct schedule {
    int64_t n = 1;
    int64_t m = 1;
    schedule_mode mode = schedule_mode::theoretical;
    double eps = 0.0;
    double delta = 0.0;
};

struct estimate_report {
    double estimate = 0.0;
    double truth = 0.0;
    double abs_err = 0.0;
    int64_t total_pulls = 0;  // M
    std::vector<int64_t> per_arm_counts;
    schedule sched;
    uint64_t seed = 0;
    std::vector<int> selected;  // S_n (offline) or the final kept set (online)
    bool degenerate_m = false;  // m < 2 forced t_r := m
};

// Per-functional (n, m). theoretical: ceilings of the published formulas with
// natural logs; unit_constant: same eps/delta powers with leading constants 1.
schedule offline_schedule(const functional_spec& fn, double eps, double delta,
                          const assumption_params& params, schedule_mode mode);

// Order-statistic plug-in: S_n = values between the floor(alpha1*n)-th and
// floor(alpha2*n)-th order statistics (1-indexed, clamped to [1, n], boundary
// ties included); returns the mean over S_n.
double plug_in_estimate(const std::vector<double>& means, double alpha1, double alpha2);

// Indices of S_n in input order (used for reports and set comparisons).
std::vector<int> plug_in_select(const std::vector<double>& means, double alpha1,
                                double alpha2);

// Draw n arms, pull each exactly m times, average, plug in. M = n*m exactly.
estimate_report run_offline(bandit_env& env, const functional_spec& fn,
                            const schedule& sched);

}  // namespace bandit
