#include "bandit/offline.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>

#include "bandit/errors.hpp"

namespace bandit {

namespace {

int64_t iceil(double x) {
    assert(x > 0.0 && x < 9.0e18);
    // the nudge forgives float noise that lands a hair above an exact integer
    return std::max<int64_t>(1, static_cast<int64_t>(std::ceil(x - 1e-9)));
}

// 1-indexed order-statistic position floor(alpha*n), clamped to [1, n]; the
// tiny nudge keeps products like 0.7*10 from flooring to 6.
int64_t stat_index(double alpha, int64_t n) {
    int64_t idx = static_cast<int64_t>(std::floor(alpha * static_cast<double>(n) + 1e-9));
    return std::clamp<int64_t>(idx, 1, n);
}

}  // namespace

schedule offline_schedule(const functional_spec& fn, double eps, double delta,
                          const assumption_params& params, schedule_mode mode) {
    if (!(eps > 0.0)) throw config_error("offline_schedule: eps must be positive");
    if (!(delta > 0.0 && delta < 1.0))
        throw config_error("offline_schedule: delta must lie in (0,1)");

    schedule s;
    s.mode = mode;
    s.eps = eps;
    s.delta = delta;
    bool unit = (mode == schedule_mode::unit_constant);

    switch (fn.kind) {
        case functional_kind::mean: {
            double c = 1.0;
            if (!unit) {
                if (!params.mean_var_bound)
                    throw missing_assumption("mean schedule needs a variance bound");
                c = *params.mean_var_bound;
            }
            s.m = 1;
            s.n = unit ? iceil(1.0 / (delta * eps * eps))
                       : iceil((1.0 + c) / (delta * eps * eps));
            break;
        }
        case functional_kind::quantile: {
            if (unit) {
                s.m = iceil(1.0 / eps);
                s.n = iceil(std::log(1.0 / delta) / (eps * eps));
            } else {
                if (!params.quantile_c1 || !params.quantile_c2)
                    throw missing_assumption("quantile schedule needs c1 and c2");
                double c1 = *params.quantile_c1, c2 = *params.quantile_c2;
                s.m = iceil(4.0 * (c2 + 1.0) / (c1 * eps));
                s.n = iceil(28.0 * std::log(1.0 / delta) / (c1 * c1 * eps * eps));
            }
            break;
        }
        case functional_kind::maximum: {
            if (!params.max_beta)
                throw missing_assumption("maximum schedule needs the tail exponent");
            double beta = *params.max_beta;
            if (unit) {
                s.n = iceil(std::pow(eps, -beta) * std::log(2.0 / delta));
                s.m = iceil(std::log(2.0 * static_cast<double>(s.n) / delta) /
                            (eps * eps));
            } else {
                if (!params.max_c1)
                    throw missing_assumption("maximum schedule needs c1");
                double c1 = *params.max_c1;
                s.n = iceil(std::pow(2.0, beta) * std::pow(eps, -beta) *
                            std::log(2.0 / delta) / c1);
                s.m = iceil(4.0 * std::log(2.0 * static_cast<double>(s.n) / delta) /
                            (eps * eps));
            }
            break;
        }
        case functional_kind::trimmed: {
            if (unit) {
                s.m = iceil(std::log(1.0 / eps) / eps);
                s.n = iceil(1.0 / (delta * eps * eps));
            } else {
                if (!params.trimmed_c1 || !params.trimmed_c2)
                    throw missing_assumption("trimmed schedule needs c1 and c2");
                double c1 = *params.trimmed_c1, c2 = *params.trimmed_c2;
                double C1 = 4.0 * (c2 + 1.0) / c1;
                s.m = iceil(C1 * std::log(1.0 / eps) / eps);
                s.n = iceil(28.0 / (delta * eps * eps));
            }
            break;
        }
    }
    assert(s.n >= 1 && s.m >= 1);
    return s;
}

std::vector<int> plug_in_select(const std::vector<double>& means, double alpha1,
                                double alpha2) {
    if (means.empty()) throw empty_input("plug_in_select: no values");
    assert(alpha1 >= 0.0 && alpha1 <= alpha2 && alpha2 <= 1.0);
    int64_t n = static_cast<int64_t>(means.size());
    std::vector<double> sorted(means);
    std::sort(sorted.begin(), sorted.end());
    double lo = sorted[static_cast<size_t>(stat_index(alpha1, n) - 1)];
    double hi = sorted[static_cast<size_t>(stat_index(alpha2, n) - 1)];
    std::vector<int> keep;
    for (int64_t i = 0; i < n; ++i) {
        double v = means[static_cast<size_t>(i)];
        if (v >= lo && v <= hi) keep.push_back(static_cast<int>(i));
    }
    assert(!keep.empty());
    return keep;
}

double plug_in_estimate(const std::vector<double>& means, double alpha1, double alpha2) {
    std::vector<int> keep = plug_in_select(means, alpha1, alpha2);
    double mean = 0.0;
    int64_t cnt = 0;
    for (int idx : keep) {
        cnt += 1;
        mean += (means[static_cast<size_t>(idx)] - mean) / static_cast<double>(cnt);
    }
    return mean;
}

estimate_report run_offline(bandit_env& env, const functional_spec& fn,
                            const schedule& sched) {
    assert(env.arm_count() == 0 && env.total_pulls() == 0);
    std::vector<double> means(static_cast<size_t>(sched.n));
    for (int64_t i = 0; i < sched.n; ++i) {
        int id = env.new_arm();
        means[static_cast<size_t>(i)] = env.pull_mean(id, sched.m);
    }
    estimate_report rep;
    rep.estimate = plug_in_estimate(means, fn.alpha1, fn.alpha2);
    rep.truth = true_functional(env.dist(), fn);
    rep.abs_err = std::abs(rep.estimate - rep.truth);
    rep.total_pulls = env.total_pulls();
    rep.per_arm_counts = env.pull_counts();
    rep.sched = sched;
    rep.seed = env.seed();
    rep.selected = plug_in_select(means, fn.alpha1, fn.alpha2);
    assert(rep.total_pulls == sched.n * sched.m);
    return rep;
}

}  // namespace bandit
