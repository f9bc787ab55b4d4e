#include "bandit/environment.hpp"

#include <cassert>
#include <cmath>
#include <cstdio>
#include <stdexcept>

#include "bandit/errors.hpp"

namespace bandit {

namespace counter_rng {

namespace {
constexpr uint64_t STREAM_ARM = 0x41524d5f4d45414eULL;
constexpr uint64_t STREAM_PULL = 0x50554c4c5f4e524dULL;
constexpr uint64_t STREAM_BATCH = 0x42415443485f4e52ULL;
}  // namespace

uint64_t mix64(uint64_t z) {
    z += 0x9E3779B97F4A7C15ULL;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

uint64_t key(uint64_t seed, uint64_t stream, uint64_t a, uint64_t b) {
    uint64_t h = mix64(seed ^ stream);
    h = mix64(h ^ a);
    h = mix64(h ^ b);
    return h;
}

double uniform01(uint64_t k) {
    return ((k >> 11) + 0.5) * 0x1.0p-53;
}

namespace {

// Box-Muller pair from two uniforms; `which` picks the sine/cosine component.
double box_muller(uint64_t k1, uint64_t k2, int which) {
    double u1 = uniform01(k1);
    double u2 = uniform01(k2);
    double r = std::sqrt(-2.0 * std::log(u1));
    double theta = 2.0 * M_PI * u2;
    return which == 0 ? r * std::cos(theta) : r * std::sin(theta);
}

}  // namespace

double pull_normal(uint64_t seed, uint64_t arm, uint64_t idx) {
    uint64_t pair = idx / 2;
    uint64_t k1 = key(seed, STREAM_PULL, arm, 2 * pair);
    uint64_t k2 = key(seed, STREAM_PULL, arm, 2 * pair + 1);
    return box_muller(k1, k2, static_cast<int>(idx % 2));
}

double batch_normal(uint64_t seed, uint64_t arm, uint64_t start) {
    uint64_t k1 = key(seed, STREAM_BATCH, arm, start);
    uint64_t k2 = key(seed, STREAM_BATCH, arm, ~start);
    return box_muller(k1, k2, 0);
}

double arm_uniform(uint64_t seed, uint64_t arm) {
    return uniform01(key(seed, STREAM_ARM, arm, 0));
}

}  // namespace counter_rng

bandit_env::bandit_env(dist_spec dist, double noise_sd, uint64_t seed,
                       bool allow_nonstandard_noise)
    : dist_(std::move(dist)), noise_sd_(noise_sd), seed_(seed) {
    if (!(noise_sd == 0.0 || noise_sd == 1.0) && !allow_nonstandard_noise) {
        throw config_error("noise_sd must be 0 or 1 unless explicitly overridden");
    }
    if (noise_sd < 0.0) {
        throw config_error("noise_sd must be nonnegative");
    }
}

int bandit_env::new_arm() {
    int id = static_cast<int>(means_.size());
    double u = counter_rng::arm_uniform(seed_, static_cast<uint64_t>(id));
    means_.push_back(dist_.quantile(u));
    counts_.push_back(0);
    step_ += 1;
    if (transcript_) {
        // hidden means never leak: the observation field stays empty for "new"
        (*transcript_) << step_ << ",new," << id << ",\n";
    }
    return id;
}

double bandit_env::draw_pull(int arm_id, int64_t idx) const {
    double x = means_[static_cast<size_t>(arm_id)];
    if (noise_sd_ == 0.0) return x;
    double z = counter_rng::pull_normal(seed_, static_cast<uint64_t>(arm_id),
                                        static_cast<uint64_t>(idx));
    return x + noise_sd_ * z;
}

double bandit_env::pull(int arm_id) {
    if (arm_id < 0 || arm_id >= arm_count()) {
        throw unknown_arm("pull: arm id out of range");
    }
    int64_t idx = counts_[static_cast<size_t>(arm_id)];
    double y = draw_pull(arm_id, idx);
    counts_[static_cast<size_t>(arm_id)] += 1;
    total_ += 1;
    step_ += 1;
    if (transcript_) {
        // shortest round-tripping decimal so replays parse the exact value back
        char buf[32];
        std::snprintf(buf, sizeof(buf), "%.17g", y);
        (*transcript_) << step_ << ",pull," << arm_id << "," << buf << "\n";
    }
    return y;
}

double bandit_env::pull_mean(int arm_id, int64_t count) {
    if (arm_id < 0 || arm_id >= arm_count()) {
        throw unknown_arm("pull_mean: arm id out of range");
    }
    assert(count >= 1);
    if (transcript_) {
        // exact per-pull records; running mean is bit-stable for constant inputs
        double mean = 0.0;
        for (int64_t i = 0; i < count; ++i) {
            double y = pull(arm_id);
            mean += (y - mean) / static_cast<double>(i + 1);
        }
        return mean;
    }
    double x = means_[static_cast<size_t>(arm_id)];
    int64_t start = counts_[static_cast<size_t>(arm_id)];
    double mean = x;
    if (noise_sd_ != 0.0) {
        double z = counter_rng::batch_normal(seed_, static_cast<uint64_t>(arm_id),
                                             static_cast<uint64_t>(start));
        mean = x + noise_sd_ * z / std::sqrt(static_cast<double>(count));
    }
    counts_[static_cast<size_t>(arm_id)] += count;
    total_ += count;
    step_ += count;
    return mean;
}

double bandit_env::peek_mean_for_test(int arm_id, int64_t start, int64_t count) const {
    assert(arm_id >= 0 && arm_id < arm_count());
    assert(count >= 1);
    double x = means_[static_cast<size_t>(arm_id)];
    if (noise_sd_ == 0.0) return x;
    double z = counter_rng::batch_normal(seed_, static_cast<uint64_t>(arm_id),
                                         static_cast<uint64_t>(start));
    return x + noise_sd_ * z / std::sqrt(static_cast<double>(count));
}

bandit_env::snapshot bandit_env::stats() const {
    return snapshot{total_, counts_};
}

}  // namespace bandit
