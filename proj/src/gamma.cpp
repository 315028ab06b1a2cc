#include "nta/gamma.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "nta/par.hpp"
#include "nta/rng.hpp"
#include "nta/sketch.hpp"
#include "nta/stats.hpp"

namespace nta {

GammaParams fit_gamma(const std::vector<double>& series) {
    if (series.size() < 8)
        throw std::invalid_argument("fit_gamma: need at least 8 samples, have " +
                                    std::to_string(series.size()));
    double mu = mean(series);
    double var = variance_sample(series);
    if (!(mu > 0.0) || !(var > 0.0)) throw std::runtime_error("fit_gamma: degenerate series");
    return {mu * mu / var, var / mu};
}

void MultiResConfig::validate() const {
    if (hash_count < 1) throw std::invalid_argument("gamma: need at least one hash function");
    if (table_size < 2) throw std::invalid_argument("gamma: table size must be >= 2");
    if (levels < 1) throw std::invalid_argument("gamma: need at least one aggregation level");
    if (!(base_bin > 0.0)) throw std::invalid_argument("gamma: base bin width must be > 0");
    if (!(lambda > 0.0)) throw std::invalid_argument("gamma: lambda must be > 0");
}

MultiResSplit split_and_aggregate(const std::vector<FlowRecord>& records, Feature key_feature,
                                  const MultiResConfig& config) {
    config.validate();
    if (records.empty()) throw std::invalid_argument("gamma: no records");
    double t0 = records.front().t;
    double t1 = records.front().t;
    for (const FlowRecord& r : records) {
        t0 = std::min(t0, r.t);
        t1 = std::max(t1, r.t);
    }
    std::size_t bins = static_cast<std::size_t>((t1 - t0) / config.base_bin) + 1;
    std::size_t block = std::size_t{1} << (config.levels - 1);
    if (bins < 8 * block)
        throw std::invalid_argument(
            "gamma: window covers fewer than 8 samples at the coarsest level (need " +
            std::to_string(8 * block) + " base bins, have " + std::to_string(bins) + ")");
    std::size_t padded = (bins + block - 1) / block * block;

    // One independent hash per row, seeded identically to the sketch module.
    KarySketch hasher(config.hash_count, config.table_size, config.seed);

    MultiResSplit split;
    split.bucket.assign(config.hash_count,
                        std::vector<BucketSeries>(config.table_size, BucketSeries{}));
    for (std::size_t n = 0; n < config.hash_count; ++n)
        for (std::size_t m = 0; m < config.table_size; ++m)
            split.bucket[n][m].level.assign(config.levels, {});

    // Bin the base-resolution counts per (hash, bucket); rows are independent.
    parallel_for(config.hash_count, [&](std::size_t n) {
        for (std::size_t m = 0; m < config.table_size; ++m)
            split.bucket[n][m].level[0].assign(padded, 0.0);
        for (const FlowRecord& r : records) {
            std::uint64_t key = feature_value(r, key_feature);
            std::size_t m = hasher.bucket(n, key);
            std::size_t bin = static_cast<std::size_t>((r.t - t0) / config.base_bin);
            split.bucket[n][m].level[0][bin] += static_cast<double>(r.packets);
            split.bucket[n][m].keys.push_back(key);
        }
        for (std::size_t m = 0; m < config.table_size; ++m) {
            auto& keys = split.bucket[n][m].keys;
            std::sort(keys.begin(), keys.end());
            keys.erase(std::unique(keys.begin(), keys.end()), keys.end());
            for (std::size_t j = 1; j < config.levels; ++j) {
                const auto& prev = split.bucket[n][m].level[j - 1];
                auto& cur = split.bucket[n][m].level[j];
                cur.assign(prev.size() / 2, 0.0);
                for (std::size_t t = 0; t < cur.size(); ++t)
                    cur[t] = prev[2 * t] + prev[2 * t + 1];
            }
        }
    });
    return split;
}

GammaDetectResult gamma_detect(const MultiResSplit& split, const MultiResConfig& config) {
    config.validate();
    std::size_t n_hash = split.bucket.size();
    if (n_hash < 2)
        throw std::invalid_argument("gamma_detect: need at least 2 hash functions for a reference");
    // The reference statistics include the tested fit itself, so the
    // studentized deviation of any member is bounded by (N-1)/sqrt(N)
    // (Samuelson's inequality). A threshold at or above that bound can never
    // alarm, which is a configuration error, not a quiet network.
    double reach = (static_cast<double>(n_hash) - 1.0) / std::sqrt(static_cast<double>(n_hash));
    if (config.lambda >= reach)
        throw std::invalid_argument("gamma_detect: lambda " + std::to_string(config.lambda) +
                                    " is unreachable; deviations are bounded by (N-1)/sqrt(N) = " +
                                    std::to_string(reach) + " for N = " + std::to_string(n_hash) +
                                    " hashes");
    std::size_t n_buckets = split.bucket.front().size();
    std::size_t n_levels = split.bucket.front().front().level.size();

    struct Fit {
        bool valid = false;
        std::vector<GammaParams> per_level;
    };
    std::vector<Fit> fits(n_hash * n_buckets);
    // Fitting dominates the cost and is embarrassingly parallel per bucket.
    parallel_for(n_hash * n_buckets, [&](std::size_t i) {
        std::size_t n = i / n_buckets, m = i % n_buckets;
        Fit fit;
        fit.per_level.resize(n_levels);
        fit.valid = true;
        for (std::size_t j = 0; j < n_levels; ++j) {
            try {
                fit.per_level[j] = fit_gamma(split.bucket[n][m].level[j]);
            } catch (const std::exception&) {
                fit.valid = false;
                break;
            }
        }
        fits[i] = std::move(fit);
    });

    // Reference profile per (bucket, level): mean and variance across hashes.
    struct Ref {
        bool valid = false;
        double mean_a = 0.0, var_a = 0.0;
        double mean_b = 0.0, var_b = 0.0;
    };
    std::vector<Ref> refs(n_buckets * n_levels);
    for (std::size_t m = 0; m < n_buckets; ++m)
        for (std::size_t j = 0; j < n_levels; ++j) {
            std::vector<double> alphas, betas;
            for (std::size_t n = 0; n < n_hash; ++n) {
                const Fit& f = fits[n * n_buckets + m];
                if (!f.valid) continue;
                alphas.push_back(f.per_level[j].alpha);
                betas.push_back(f.per_level[j].beta);
            }
            Ref& ref = refs[m * n_levels + j];
            if (alphas.size() < 2) continue;
            ref.valid = true;
            ref.mean_a = mean(alphas);
            ref.var_a = variance_sample(alphas);
            ref.mean_b = mean(betas);
            ref.var_b = variance_sample(betas);
        }

    auto mahalanobis_term = [](double value, double ref_mean, double ref_var) {
        double dev = value - ref_mean;
        if (ref_var > 0.0) return dev * dev / ref_var;
        return dev == 0.0 ? 0.0 : std::numeric_limits<double>::infinity();
    };

    GammaDetectResult out;
    out.scores.reserve(n_hash * n_buckets);
    std::vector<std::vector<std::uint64_t>> per_hash_keys(n_hash);
    for (std::size_t n = 0; n < n_hash; ++n)
        for (std::size_t m = 0; m < n_buckets; ++m) {
            GammaBucketScore score;
            score.hash_index = n;
            score.bucket_index = m;
            const Fit& fit = fits[n * n_buckets + m];
            bool refs_ok = true;
            for (std::size_t j = 0; j < n_levels; ++j)
                refs_ok = refs_ok && refs[m * n_levels + j].valid;
            if (fit.valid && refs_ok) {
                score.valid = true;
                double acc_a = 0.0, acc_b = 0.0;
                for (std::size_t j = 0; j < n_levels; ++j) {
                    const Ref& ref = refs[m * n_levels + j];
                    acc_a += mahalanobis_term(fit.per_level[j].alpha, ref.mean_a, ref.var_a);
                    acc_b += mahalanobis_term(fit.per_level[j].beta, ref.mean_b, ref.var_b);
                }
                score.d_alpha = std::sqrt(acc_a / static_cast<double>(n_levels));
                score.d_beta = std::sqrt(acc_b / static_cast<double>(n_levels));
                score.alarm = score.d_alpha > config.lambda || score.d_beta > config.lambda;
                if (score.alarm) {
                    auto& acc = per_hash_keys[n];
                    const auto& keys = split.bucket[n][m].keys;
                    acc.insert(acc.end(), keys.begin(), keys.end());
                }
            }
            out.scores.push_back(score);
        }

    // Intersection of the recorded key lists across all hash functions.
    std::vector<std::uint64_t> inter;
    for (std::size_t n = 0; n < n_hash; ++n) {
        auto& keys = per_hash_keys[n];
        std::sort(keys.begin(), keys.end());
        keys.erase(std::unique(keys.begin(), keys.end()), keys.end());
        if (n == 0) {
            inter = keys;
        } else {
            std::vector<std::uint64_t> next;
            std::set_intersection(inter.begin(), inter.end(), keys.begin(), keys.end(),
                                  std::back_inserter(next));
            inter = std::move(next);
        }
    }
    out.identified = std::move(inter);
    return out;
}

}  // namespace nta
