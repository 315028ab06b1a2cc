#pragma once

#include <cstddef>
#include <cstdint>
#include <ostream>
#include <string>
#include <vector>

#include "nta/alarm.hpp"
#include "nta/flow.hpp"
#include "nta/mat.hpp"
#include "nta/sketch.hpp"

namespace nta {

// One hashed histogram: values land in bins through one row of a KarySketch
// built from `seed`, so counts from adjacent values spread out instead of
// clustering. The sum of counts equals the packet total of the interval.
struct HistogramClone {
    std::size_t bin_count = 256;
    std::uint64_t seed = 0;
    std::vector<double> counts;
};

struct CloneConfig {
    std::size_t clones = 3;
    std::size_t bins = 256;
    std::uint64_t seed = 1;

    void validate() const;
};

// The hash family shared by every clone builder: row c of the sketch is the
// hash of clone c. Tests and identification use the same object, so the
// value-to-bin mapping is reproducible from the seed alone.
KarySketch make_clone_hasher(const CloneConfig& config);

// Per-interval histogram clones of one feature, counts weighted by packets.
// Intervals are [t0 + i*bin_width, t0 + (i+1)*bin_width). Result is indexed
// [interval][clone].
std::vector<std::vector<HistogramClone>> build_clone_series(
    const std::vector<FlowRecord>& records, Feature feature, double bin_width, double t0,
    std::size_t intervals, const CloneConfig& config);

// Kullback-Leibler distance in bits between distributions that sum to one
// (within 1e-9). Terms with p_i = 0 contribute zero; q_i = 0 with p_i > 0
// yields +infinity.
double kl_distance(const Vec& p, const Vec& q);

struct KlDetectResult {
    Mat kl;     // interval x clone; row 0 is zero (no previous interval)
    Mat delta;  // first difference of kl; rows 0 and 1 are zero
    Vec sigma;  // per-clone robust standard deviation of the training deltas
    std::vector<std::vector<bool>> alarm;  // [interval][clone], always false in training
};

// Change detection on the KL series of each clone: each interval is scored
// as D(current || previous), with the previous interval as the reference
// distribution. Counts become probabilities with add-half smoothing, so a
// bin that is empty in one interval and hit in the next stays finite. sigma
// comes from the MAD of the first `training_intervals` deltas scaled by
// 1.4826, and an interval after the training prefix alarms when its delta
// reaches 3 sigma.
KlDetectResult kl_detect(const std::vector<std::vector<HistogramClone>>& series,
                         std::size_t training_intervals);

// Bins of one clone whose removal brings D(current || reference) - prev_kl
// below 3 sigma, removed greedily by largest |current_i - reference_i|.
// Removal resets a current bin to its reference share without renormalizing,
// so it cancels that bin's contribution and nothing else.
std::vector<std::size_t> identify_bins(const Vec& reference, const Vec& current, double prev_kl,
                                       double sigma);

// Candidate feature values that fall in an identified bin of every clone.
// reference/current hold the alarmed interval's clones and its predecessor's;
// prev_kl and sigma are per clone, from kl_detect.
std::vector<std::uint64_t> identify_values(const std::vector<HistogramClone>& reference,
                                           const std::vector<HistogramClone>& current,
                                           const Vec& prev_kl, const Vec& sigma,
                                           const std::vector<std::uint64_t>& candidates,
                                           const KarySketch& hasher);

// One (feature, value) item of a transaction; a flow record is the 7-item
// transaction over SIP, DIP, SP, DP, Proto, Packets, Bytes.
struct Item {
    Feature feature = Feature::SIP;
    std::uint64_t value = 0;
};
bool operator==(const Item& a, const Item& b);
bool operator<(const Item& a, const Item& b);

struct ItemSet {
    std::vector<Item> items;  // sorted by feature, each feature at most once
    std::size_t support = 0;
};

// Level-wise frequent item-set mining with exact supports. Sets that are
// subsets of a more specific frequent set are suppressed from the output.
std::vector<ItemSet> apriori(const std::vector<FlowRecord>& transactions,
                             std::size_t min_support);

// `sip=10.0.0.1` style rendering; IP features print dotted quads.
std::string item_to_string(const Item& item);

// One line per set: `k<TAB>item,item,...<TAB>support`.
void write_item_sets(std::ostream& out, const std::vector<ItemSet>& sets);

struct ExtractConfig {
    // Detector features. Protocol is left out of the default list because a
    // couple of values dominate it, which makes hashed histograms degenerate.
    std::vector<Feature> features = {Feature::SIP, Feature::DIP,     Feature::SP,
                                     Feature::DP,  Feature::Packets, Feature::Bytes};
    CloneConfig clones;
    double bin_width = 60.0;
    // The MAD estimate of sigma needs a couple dozen training deltas before
    // the 3 sigma rule holds its nominal false alarm rate.
    std::size_t training_intervals = 20;
    std::size_t min_support = 10;

    void validate() const;
};

struct ExtractResult {
    std::vector<Alarm> alarms;  // one per alarmed (feature, interval)
    std::vector<ItemSet> item_sets;
    std::vector<std::size_t> flagged;  // indices of records matching the identified values
};

// Full extraction chain: detect KL changes per feature (an interval counts
// when a majority of clones alarm), identify the offending feature values,
// filter the records carrying them, and mine the survivors for frequent
// item-sets.
ExtractResult extract_pipeline(const std::vector<FlowRecord>& records,
                               const ExtractConfig& config);

}  // namespace nta
