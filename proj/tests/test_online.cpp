#include <algorithm>
#include <cmath>
#include <set>
#include <vector>

#include "bandit/environment.hpp"
#include "bandit/errors.hpp"
#include "bandit/offline.hpp"
#include "bandit/online.hpp"
#include "doctest.h"
#include "test_util.hpp"

using namespace bandit;

TEST_CASE("round targets at pinned parameters") {
    // r = 1, n = 100, m = 64: cap wins over ceil(32 ln(16*100*ln(64)/0.1)) = 356
    auto rs = round_schedule(1, 100, 64, 0.1, schedule_mode::theoretical);
    CHECK(rs.b_r == 0.5);
    CHECK(rs.t_r == 64);
    CHECK(!rs.degenerate_m);

    // same but m = 10^6: the formula wins, ceil(32 ln(16*100*ln(1e6)/0.1)) = 394
    rs = round_schedule(1, 100, 1000000, 0.1, schedule_mode::theoretical);
    CHECK(rs.t_r == 394);

    // unit-constant mode keeps only the 4^r growth
    CHECK(round_schedule(1, 100, 1000, 0.1, schedule_mode::unit_constant).t_r == 4);
    CHECK(round_schedule(2, 100, 1000, 0.1, schedule_mode::unit_constant).t_r == 16);
    CHECK(round_schedule(5, 100, 1000, 0.1, schedule_mode::unit_constant).t_r == 1000);

    // a single-pull budget cannot halve anything
    rs = round_schedule(3, 100, 1, 0.1, schedule_mode::theoretical);
    CHECK(rs.t_r == 1);
    CHECK(rs.degenerate_m);
}

TEST_CASE("round targets grow with r until the cap") {
    for (auto mode : {schedule_mode::theoretical, schedule_mode::unit_constant}) {
        int64_t last = 0;
        for (int r = 1; r <= 12; ++r) {
            auto rs = round_schedule(r, 5000, 100000, 0.05, mode);
            CHECK(rs.t_r >= last);
            CHECK(rs.t_r <= 100000);
            CHECK(rs.b_r == std::pow(2.0, -r));
            last = rs.t_r;
        }
        CHECK(last == 100000);
    }
}

TEST_CASE("active-set rule at pinned estimates") {
    std::vector<double> est = {0.0, 1.0, 2.0, 3.0, 4.0};
    std::vector<int> all = {0, 1, 2, 3, 4};

    // both anchors are the 2nd order statistic (value 1); radius 1/2
    CHECK(update_active_set(est, all, 0.5, 0.5, 0.5) == std::vector<int>{1});

    // anchors 0 and 3 with radius 1 cover everything
    CHECK(update_active_set(est, all, 1.0, 0.2, 0.8) == std::vector<int>{0, 1, 2, 3, 4});

    // a vanishing radius keeps exactly the anchor arms
    CHECK(update_active_set(est, all, 1e-12, 0.2, 0.8) == std::vector<int>{0, 3});
}

TEST_CASE("active-set rule ranks over the full index set") {
    // the rule is a pure membership predicate: eliminated arms still contribute
    // their frozen estimates to the anchors, and the returned set may name them
    std::vector<double> est = {0.0, 1.0, 2.0, 3.0, 4.0};
    std::vector<int> shrunk = {0, 2};
    auto keep = update_active_set(est, shrunk, 0.5, 0.5, 0.5);
    CHECK(keep == std::vector<int>{1});
    CHECK(std::is_sorted(keep.begin(), keep.end()));
}

TEST_CASE("zero noise reduces the online run to the plug-in on the hidden means") {
    assumption_params none;

    // point target: the kept running means are the hidden means themselves
    {
        bandit_env env(dist_spec::uniform(0.0, 1.0), 0.0, 211);
        auto rep = run_online(env, functional_spec::quantile(0.5), 0.1, 0.1, none,
                              schedule_mode::unit_constant);
        double direct = plug_in_estimate(env.arm_means_for_test(), 0.5, 0.5);
        CHECK(rep.estimate == direct);
        CHECK(rep.selected == plug_in_select(env.arm_means_for_test(), 0.5, 0.5));
    }

    // interval target: fresh noiseless pulls return the hidden means exactly
    {
        bandit_env env(dist_spec::uniform(0.0, 1.0), 0.0, 223);
        functional_spec tr = functional_spec::trimmed(0.25);
        auto rep = run_online(env, tr, 0.1, 0.1, none, schedule_mode::unit_constant);
        double direct = plug_in_estimate(env.arm_means_for_test(), tr.alpha1, tr.alpha2);
        CHECK(rep.estimate == direct);
        CHECK(rep.selected == plug_in_select(env.arm_means_for_test(), tr.alpha1, tr.alpha2));
    }
}

TEST_CASE("elimination cuts the spend below the offline budget") {
    const int trials = 100;
    int strict = 0;
    for (int t = 0; t < trials; ++t) {
        bandit_env env(dist_spec::uniform(0.0, 1.0), 1.0, 3000ULL + static_cast<uint64_t>(t));
        auto rep = run_online(env, functional_spec::quantile(0.5), 0.1, 0.1,
                              assumption_params{}, schedule_mode::unit_constant);
        CHECK(rep.total_pulls <= rep.sched.n * rep.sched.m);
        if (rep.total_pulls < rep.sched.n * rep.sched.m) strict += 1;
        REQUIRE(!rep.selected.empty());
    }
    CHECK(strict >= 95);
}

TEST_CASE("per-arm spend never exceeds the cap and freezes on departure") {
    std::vector<round_info> trace;
    bandit_env env(dist_spec::uniform(0.0, 1.0), 1.0, 401);
    functional_spec tr = functional_spec::trimmed(0.25);
    auto rep = run_online(env, tr, 0.1, 0.1, assumption_params{},
                          schedule_mode::unit_constant, &trace);

    std::set<int64_t> targets;
    for (const auto& ri : trace) targets.insert(ri.t_r);
    std::set<int> kept(rep.selected.begin(), rep.selected.end());
    for (size_t i = 0; i < rep.per_arm_counts.size(); ++i) {
        int64_t c = rep.per_arm_counts[i];
        bool in_kept = kept.count(static_cast<int>(i)) > 0;
        // interval targets add one fresh observation per kept arm at the end
        int64_t base = in_kept ? c - 1 : c;
        CHECK(base <= rep.sched.m);
        // a departed arm's count is frozen at the round target where it left
        CHECK(targets.count(base) == 1);
    }
    CHECK(rep.total_pulls <=
          rep.sched.n * rep.sched.m + static_cast<int64_t>(rep.selected.size()));

    // trace sanity: consecutive rounds, shrinking radii, nonincreasing activity
    for (size_t i = 0; i < trace.size(); ++i) {
        CHECK(trace[i].r == static_cast<int>(i) + 1);
        if (i > 0) {
            CHECK(trace[i].t_r >= trace[i - 1].t_r);
            CHECK(trace[i].active <= trace[i - 1].active);
        }
    }
    CHECK(trace.back().t_r == rep.sched.m);
}

TEST_CASE("a single-pull budget degenerates to one round plus fresh pulls") {
    bandit_env env(dist_spec::uniform(0.0, 1.0), 1.0, 419);
    std::vector<round_info> trace;
    auto rep = run_online(env, functional_spec::mean(), 0.2, 0.2, assumption_params{},
                          schedule_mode::unit_constant, &trace);
    CHECK(rep.degenerate_m);
    CHECK(rep.sched.m == 1);
    CHECK(trace.size() == 1);
    // the mean target keeps everything, so the spend is one pull per arm twice
    CHECK(static_cast<int64_t>(rep.selected.size()) == rep.sched.n);
    CHECK(rep.total_pulls == 2 * rep.sched.n);
}

TEST_CASE("identical arms give a concentrated answer") {
    const int trials = 100;
    double avg = 0.0;
    int64_t m = 0;
    for (int t = 0; t < trials; ++t) {
        bandit_env env(dist_spec::dirac(0.5), 1.0, 5000ULL + static_cast<uint64_t>(t));
        auto rep = run_online(env, functional_spec::quantile(0.5), 0.2, 0.2,
                              assumption_params{}, schedule_mode::unit_constant);
        avg += (rep.estimate - avg) / static_cast<double>(t + 1);
        m = rep.sched.m;
    }
    CHECK(std::abs(avg - 0.5) <= 4.0 / std::sqrt(static_cast<double>(m * trials)));
}

TEST_CASE("per-arm spend respects the distance-dependent bound") {
    // drive the round loop by hand at a scale where the bound can bite:
    // n = 50 arms, m = 60000, so arms far from the median anchor must leave
    // early enough to stay under ~11659 / d^2 pulls
    const int64_t n = 50, m = 60000;
    const double delta = 0.1, alpha = 0.5;
    int good_trials = 0, checked = 0;
    for (uint64_t seed = 7100; seed < 7103; ++seed) {
        bandit_env env(dist_spec::uniform(0.0, 1.0), 1.0, seed);
        std::vector<double> est(n, 0.0);
        std::vector<int64_t> counts(n, 0);
        std::vector<int> active;
        for (int64_t i = 0; i < n; ++i) active.push_back(env.new_arm());

        struct round_obs {
            double b_r;
            std::vector<std::pair<int, double>> arm_est;  // (arm, estimate after round)
        };
        std::vector<round_obs> history;
        for (int r = 1;; ++r) {
            auto rs = round_schedule(r, n, m, delta, schedule_mode::theoretical);
            round_obs obs;
            obs.b_r = rs.b_r;
            for (int id : active) {
                int64_t want = rs.t_r - counts[static_cast<size_t>(id)];
                if (want > 0) {
                    double batch = env.pull_mean(id, want);
                    double w = static_cast<double>(want) / static_cast<double>(rs.t_r);
                    est[static_cast<size_t>(id)] += (batch - est[static_cast<size_t>(id)]) * w;
                    counts[static_cast<size_t>(id)] = rs.t_r;
                }
                obs.arm_est.push_back({id, est[static_cast<size_t>(id)]});
            }
            history.push_back(std::move(obs));
            if (rs.t_r >= m) break;
            auto rule = update_active_set(est, active, rs.b_r, alpha, alpha);
            std::vector<int> next;
            std::set_intersection(active.begin(), active.end(), rule.begin(), rule.end(),
                                  std::back_inserter(next));
            active = std::move(next);
            if (active.empty()) break;
        }

        // full-budget estimate for every arm along the same stream
        std::vector<double> full(n, 0.0);
        for (int64_t i = 0; i < n; ++i) {
            int64_t c = counts[static_cast<size_t>(i)];
            double e = est[static_cast<size_t>(i)];
            if (c < m) {
                double rest = env.peek_mean_for_test(static_cast<int>(i), c, m - c);
                e = (e * static_cast<double>(c) + rest * static_cast<double>(m - c)) /
                    static_cast<double>(m);
            }
            full[static_cast<size_t>(i)] = e;
        }

        // the trial is clean when every running estimate stayed within its
        // round radius of the full-budget value
        bool good = true;
        for (const auto& obs : history) {
            for (const auto& [id, e] : obs.arm_est) {
                if (std::abs(e - full[static_cast<size_t>(id)]) > obs.b_r) good = false;
            }
        }
        if (!good) continue;
        good_trials += 1;

        const auto& means = env.arm_means_for_test();
        double anchor = means[static_cast<size_t>(
            plug_in_select(means, alpha, alpha).front())];
        double log_term = std::log(16.0 * static_cast<double>(n) *
                                   std::log(static_cast<double>(m)) / delta);
        int violators = 0;
        for (int64_t i = 0; i < n; ++i) {
            double d = std::abs(means[static_cast<size_t>(i)] - anchor);
            double cap = static_cast<double>(m);
            if (d > 0.0) cap = std::min(cap, std::ceil(1024.0 * log_term / (d * d)));
            if (static_cast<double>(counts[static_cast<size_t>(i)]) > cap) violators += 1;
            checked += 1;
        }
        CHECK(violators * 20 <= n);  // at most 5% of arms
    }
    CHECK(good_trials >= 1);
    CHECK(checked > 0);
}
