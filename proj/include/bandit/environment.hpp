#pragma once

#include <cstdint>
#include <ostream>
#include <vector>

#include "bandit/core_model.hpp"

namespace bandit {

// Counter-based deterministic streams: every variate is a pure function of
// (seed, stream, a, b), so replays and out-of-order pulls reproduce bit-exactly.
namespace counter_rng {

uint64_t mix64(uint64_t z);
uint64_t key(uint64_t seed, uint64_t stream, uint64_t a, uint64_t b);
double uniform01(uint64_t k);  // in (0,1)

// Standard normal for pull index `idx` of arm `arm` (Box-Muller over index pairs).
double pull_normal(uint64_t seed, uint64_t arm, uint64_t idx);

// Standard normal used for a batched block of pulls starting at counter `start`.
double batch_normal(uint64_t seed, uint64_t arm, uint64_t start);

// Uniform driving the hidden mean of arm `arm`.
double arm_uniform(uint64_t seed, uint64_t arm);

}  // namespace counter_rng

// The infinite-armed bandit simulator: hidden means X_i ~ F, pulls observe
// X_i + noise_sd * Z. The only sampling gateway; keeps full pull accounting.
class bandit_env {
  public:
    // noise_sd outside {0, 1} is refused unless allow_nonstandard_noise, since
    // every schedule formula assumes unit noise variance.
    bandit_env(dist_spec dist, double noise_sd, uint64_t seed,
               bool allow_nonstandard_noise = false);

    int new_arm();
    double pull(int arm_id);

    // Mean of `count` consecutive pulls of one arm, drawn as a single
    // N(X, noise_sd^2/count) variate keyed by the starting counter. Counters
    // advance by `count`. With zero noise this returns the hidden mean exactly.
    // With a transcript attached it falls back to per-pull draws (running mean)
    // so the one-record-per-action dump stays exact.
    double pull_mean(int arm_id, int64_t count);

    struct snapshot {
        int64_t total = 0;
        std::vector<int64_t> per_arm;
    };
    snapshot stats() const;

    int arm_count() const { return static_cast<int>(means_.size()); }
    int64_t total_pulls() const { return total_; }
    const std::vector<int64_t>& pull_counts() const { return counts_; }
    const dist_spec& dist() const { return dist_; }
    double noise_sd() const { return noise_sd_; }
    uint64_t seed() const { return seed_; }

    // Newline-delimited records "step,action,arm_id,observation".
    void attach_transcript(std::ostream* sink) { transcript_ = sink; }

    // Test-only inspection hook; hidden means must not leak into estimators.
    const std::vector<double>& arm_means_for_test() const { return means_; }

    // What pull_mean(arm, count) would return if issued when the arm's counter
    // equals `start`; no accounting. Lets statistical checks extend an arm's
    // sample path hypothetically along the same deterministic stream.
    double peek_mean_for_test(int arm_id, int64_t start, int64_t count) const;

  private:
    double draw_pull(int arm_id, int64_t idx) const;

    dist_spec dist_;
    double noise_sd_;
    uint64_t seed_;
    std::vector<double> means_;
    std::vector<int64_t> counts_;
    int64_t total_ = 0;
    int64_t step_ = 0;
    std::ostream* transcript_ = nullptr;
};

}  // namespace bandit
