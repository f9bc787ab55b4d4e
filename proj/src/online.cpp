#include "bandit/online.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>

#include "bandit/errors.hpp"

namespace bandit {

namespace {

int64_t stat_index(double alpha, int64_t n) {
    int64_t idx = static_cast<int64_t>(std::floor(alpha * static_cast<double>(n) + 1e-9));
    return std::clamp<int64_t>(idx, 1, n);
}

double order_stat(const std::vector<double>& values, int64_t pos_1based) {
    std::vector<double> sorted(values);
    std::sort(sorted.begin(), sorted.end());
    return sorted[static_cast<size_t>(pos_1based - 1)];
}

}  // namespace

round_schedule_result round_schedule(int r, int64_t n, int64_t m, double delta,
                                     schedule_mode mode) {
    assert(r >= 1);
    assert(n >= 1 && m >= 1);
    assert(delta > 0.0 && delta < 1.0);
    round_schedule_result out;
    out.b_r = std::pow(2.0, -r);
    if (m < 2) {
        out.t_r = m;
        out.degenerate_m = true;
        return out;
    }
    double inv_b2 = std::pow(4.0, r);
    if (mode == schedule_mode::unit_constant) {
        double raw = std::ceil(inv_b2 - 1e-9);
        out.t_r = std::min<int64_t>(m, static_cast<int64_t>(raw));
    } else {
        double lm = std::max(std::log(static_cast<double>(m)), 1.0);
        double raw =
            std::ceil(8.0 * inv_b2 *
                          std::log(16.0 * static_cast<double>(n) * lm / delta) -
                      1e-9);
        out.t_r = std::min<int64_t>(m, static_cast<int64_t>(raw));
    }
    assert(out.t_r >= 1);
    return out;
}

std::vector<int> update_active_set(const std::vector<double>& estimates,
                                   const std::vector<int>& active, double b_r,
                                   double alpha1, double alpha2) {
    (void)active;  // membership is evaluated over the full index set
    if (estimates.empty()) throw empty_input("update_active_set: no estimates");
    int64_t n = static_cast<int64_t>(estimates.size());
    double anchor1 = order_stat(estimates, stat_index(alpha1, n));
    double anchor2 = order_stat(estimates, stat_index(alpha2, n));
    std::vector<int> keep;
    for (int64_t i = 0; i < n; ++i) {
        double v = estimates[static_cast<size_t>(i)];
        if (std::abs(v - anchor1) <= b_r || std::abs(v - anchor2) <= b_r) {
            keep.push_back(static_cast<int>(i));
        }
    }
    return keep;
}

estimate_report run_online(bandit_env& env, const functional_spec& fn, double eps,
                           double delta, const assumption_params& params,
                           schedule_mode mode, std::vector<round_info>* trace) {
    assert(env.arm_count() == 0 && env.total_pulls() == 0);
    schedule sched = offline_schedule(fn, eps / 2.0, delta / 2.0, params, mode);
    int64_t n = sched.n, m = sched.m;

    std::vector<double> estimates(static_cast<size_t>(n), 0.0);
    std::vector<int64_t> counts(static_cast<size_t>(n), 0);
    std::vector<int> active;
    active.reserve(static_cast<size_t>(n));
    for (int64_t i = 0; i < n; ++i) {
        int id = env.new_arm();
        assert(id == static_cast<int>(i));
        active.push_back(id);
    }

    bool degenerate = false;
    for (int r = 1;; ++r) {
        round_schedule_result rs = round_schedule(r, n, m, delta, mode);
        degenerate = degenerate || rs.degenerate_m;
        for (int id : active) {
            int64_t have = counts[static_cast<size_t>(id)];
            int64_t want = rs.t_r - have;
            if (want <= 0) continue;
            double batch = env.pull_mean(id, want);
            double& est = estimates[static_cast<size_t>(id)];
            // weight = want/t_r is exactly 1.0 on the first batch, so a
            // noiseless estimate reproduces the hidden mean bit-for-bit
            double weight = static_cast<double>(want) / static_cast<double>(rs.t_r);
            est += (batch - est) * weight;
            counts[static_cast<size_t>(id)] = rs.t_r;
        }
        if (trace) {
            trace->push_back(round_info{r, rs.b_r, rs.t_r,
                                        static_cast<int64_t>(active.size())});
        }
        if (rs.t_r >= m) break;
        std::vector<int> rule =
            update_active_set(estimates, active, rs.b_r, fn.alpha1, fn.alpha2);
        // never revive: an arm that left stays out even if the rule re-admits it
        std::vector<int> next;
        next.reserve(rule.size());
        std::set_intersection(active.begin(), active.end(), rule.begin(), rule.end(),
                              std::back_inserter(next));
        active = std::move(next);
        if (active.empty()) break;
    }

    double anchor1 = order_stat(estimates, stat_index(fn.alpha1, n));
    double anchor2 = order_stat(estimates, stat_index(fn.alpha2, n));
    std::vector<int> kept;
    for (int64_t i = 0; i < n; ++i) {
        double v = estimates[static_cast<size_t>(i)];
        if (v >= anchor1 && v <= anchor2) kept.push_back(static_cast<int>(i));
    }
    if (kept.empty()) {
        throw estimator_error("online: empty final selection set");
    }

    double estimate = 0.0;
    if (fn.alpha1 == fn.alpha2) {
        int64_t cnt = 0;
        for (int id : kept) {
            cnt += 1;
            estimate +=
                (estimates[static_cast<size_t>(id)] - estimate) / static_cast<double>(cnt);
        }
    } else {
        int64_t cnt = 0;
        for (int id : kept) {
            double fresh = env.pull(id);
            cnt += 1;
            estimate += (fresh - estimate) / static_cast<double>(cnt);
        }
    }

    estimate_report rep;
    rep.estimate = estimate;
    rep.truth = true_functional(env.dist(), fn);
    rep.abs_err = std::abs(rep.estimate - rep.truth);
    rep.total_pulls = env.total_pulls();
    rep.per_arm_counts = env.pull_counts();
    rep.sched = sched;
    rep.seed = env.seed();
    rep.selected = kept;
    rep.degenerate_m = degenerate;
    assert(rep.total_pulls <= n * m + static_cast<int64_t>(kept.size()));
    return rep;
}

}  // namespace bandit
