#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "nta/alarm.hpp"
#include "nta/flow.hpp"

namespace nta {

// Combined sketch and subspace detector. Flows hash into one of `sketch_size`
// entries under `sketch_count` independent hash functions; each entry keeps
// per-feature histograms whose entropies feed a multi-way subspace model per
// hash. A time bin alarms when at least `votes` hashes agree.
struct DefeatConfig {
    std::size_t sketch_count = 4;  // m
    std::size_t sketch_size = 64;  // s
    std::size_t votes = 3;         // l, 1 <= l <= m
    std::vector<Feature> features = {Feature::SIP, Feature::DIP, Feature::SP, Feature::DP};
    double bin_width = 60.0;
    std::uint64_t seed = 1;

    void validate() const;
};

struct DefeatPcaParams {
    double alpha = 0.005;        // SPE false-alarm level
    std::size_t normal_axes = 0; // 0 picks the split with the 3-sigma rule
};

// Hash key: the first 21 bits of the source address concatenated with the
// first 21 bits of the destination address.
std::uint64_t defeat_key(const FlowRecord& r);
std::string defeat_key_string(std::uint64_t key);

struct DefeatDetection {
    long t_index = 0;
    std::size_t votes = 0;
    std::vector<std::uint64_t> keys;  // intersection across the voting hashes
};

struct DefeatResult {
    std::vector<std::vector<bool>> bits;  // [time bin][hash]
    std::vector<DefeatDetection> detections;
    std::vector<Alarm> alarms;
};

// Local histogram-sketches per router are summed into global sketches, entry
// entropies are recast per hash into a time x (features * entries) matrix,
// and the subspace residual test sets that hash's bit. Identified keys are
// the ones mapping to anomalous entries of every voting hash, where entries
// are removed greedily by residual contribution until the remaining residual
// drops below the threshold.
DefeatResult defeat_pipeline(const std::vector<std::vector<FlowRecord>>& per_router,
                             const DefeatConfig& config, const DefeatPcaParams& pca = {});

}  // namespace nta
