#pragma once

#include <cstdint>
#include <set>
#include <vector>

#include "bandit/core_model.hpp"
#include "bandit/environment.hpp"
#include "bandit/offline.hpp"

namespace bandit {

struct round_info {
    int r = 0;
    double b_r = 0.0;
    int64_t t_r = 0;
    int64_t active = 0;  // arms pulled this round
};

// Confidence width b_r = 2^-r and the cumulative pull target t_r.
// theoretical: t_r = min(m, ceil(8 * b_r^-2 * ln(16 n ln(m) / delta))), with
// ln(m) floored at 1 for m < 3; unit_constant strips the constant factor the
// same way the (n, m) formulas do: t_r = min(m, ceil(b_r^-2)).
// m < 2 degenerates to t_r = m for all r (flagged by the caller).
struct round_schedule_result {
    double b_r = 0.0;
    int64_t t_r = 0;
    bool degenerate_m = false;
};
round_schedule_result round_schedule(int r, int64_t n, int64_t m, double delta,
                                     schedule_mode mode = schedule_mode::theoretical);

// Arms (from the full index set) whose current estimate lies within b_r of the
// floor(alpha1*n)-th or floor(alpha2*n)-th order statistic of ALL n estimates
// (eliminated arms contribute their frozen values). Pure membership rule; the
// runner intersects consecutive active sets so a departed arm is never
// re-pulled.
std::vector<int> update_active_set(const std::vector<double>& estimates,
                                   const std::vector<int>& active, double b_r,
                                   double alpha1, double alpha2);

// Round-based elimination around the two order-statistic anchors, then either
// the average of kept running means (alpha1 == alpha2) or one fresh observation
// per kept arm with all prior samples discarded. Internally runs the offline
// schedule at (eps/2, delta/2).
estimate_report run_online(bandit_env& env, const functional_spec& fn, double eps,
                           double delta, const assumption_params& params,
                           schedule_mode mode,
                           std::vector<round_info>* trace = nullptr);

}  // namespace bandit
