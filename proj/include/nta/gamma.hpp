#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "nta/flow.hpp"

namespace nta {

struct GammaParams {
    double alpha = 0.0;  // shape
    double beta = 0.0;   // scale
};

// Moment matching on a sample: alpha = mean^2 / s^2, beta = s^2 / mean with
// s^2 the unbiased sample variance. Throws "degenerate series" when the mean
// or variance vanishes.
GammaParams fit_gamma(const std::vector<double>& series);

struct MultiResConfig {
    std::size_t hash_count = 8;  // N independent hash functions
    std::size_t table_size = 16; // M buckets per hash
    std::size_t levels = 4;      // J dyadic aggregation levels
    double base_bin = 1.0;       // seconds per bin at the finest level
    double lambda = 1.5;         // detection threshold on the distance
    std::uint64_t seed = 1;      // hash seed

    void validate() const;
};

struct BucketSeries {
    std::vector<std::vector<double>> level;  // level[j] = packet counts at resolution 2^j * base
    std::vector<std::uint64_t> keys;         // distinct keys hashed to this bucket, sorted
};

struct MultiResSplit {
    std::vector<std::vector<BucketSeries>> bucket;  // [hash][table index]
};

// Step 1 and 2: hash-split packet counts at base resolution, then aggregate
// dyadically, x_2d(t) = x_d(2t) + x_d(2t+1). The base series is zero-padded
// to a multiple of 2^(J-1) so every level halves exactly; the window must
// still cover at least 8 real samples at the coarsest level.
MultiResSplit split_and_aggregate(const std::vector<FlowRecord>& records, Feature key_feature,
                                  const MultiResConfig& config);

struct GammaBucketScore {
    std::size_t hash_index = 0;
    std::size_t bucket_index = 0;
    bool valid = false;      // false when some level's fit was degenerate
    double d_alpha = 0.0;    // Mahalanobis distance of the shape profile
    double d_beta = 0.0;     // same form applied to the scale profile
    bool alarm = false;
};

struct GammaDetectResult {
    std::vector<GammaBucketScore> scores;    // one per (hash, bucket)
    std::vector<std::uint64_t> identified;   // key intersection across hashes
};

// Steps 3 to 6: per-bucket Gamma fits per level, cross-hash reference per
// (bucket, level), Mahalanobis distance averaged over levels, alarm when
// either parameter's distance exceeds lambda, and key identification by
// intersecting the alarmed buckets' key lists across hash functions.
GammaDetectResult gamma_detect(const MultiResSplit& split, const MultiResConfig& config);

}  // namespace nta
