#include "nta/defeat.hpp"

#include <algorithm>
#include <numeric>
#include <set>
#include <stdexcept>

#include "nta/par.hpp"
#include "nta/pca.hpp"
#include "nta/sketch.hpp"

namespace nta {

void DefeatConfig::validate() const {
    if (sketch_count < 1) throw std::invalid_argument("defeat: need at least one hash function");
    if (sketch_size < 2) throw std::invalid_argument("defeat: sketch size must be >= 2");
    if (votes < 1 || votes > sketch_count)
        throw std::invalid_argument("defeat: vote threshold must lie in [1, " +
                                    std::to_string(sketch_count) + "]");
    if (features.size() != 4)
        throw std::invalid_argument("defeat: need exactly four features");
    std::set<Feature> distinct(features.begin(), features.end());
    if (distinct.size() != 4) throw std::invalid_argument("defeat: features must be distinct");
    if (!(bin_width > 0.0)) throw std::invalid_argument("defeat: bin width must be > 0");
}

std::uint64_t defeat_key(const FlowRecord& r) {
    std::uint64_t hi = r.sip >> 11, lo = r.dip >> 11;
    return (hi << 21) | lo;
}

std::string defeat_key_string(std::uint64_t key) {
    auto sip = static_cast<std::uint32_t>((key >> 21) << 11);
    auto dip = static_cast<std::uint32_t>((key & 0x1fffff) << 11);
    return format_ipv4(sip) + "/21>" + format_ipv4(dip) + "/21";
}

namespace {

// [hash][time][entry][feature] packet histograms of one router's traffic.
using LocalSketches = std::vector<std::vector<std::vector<std::vector<Histogram>>>>;

LocalSketches make_sketches(std::size_t hashes, std::size_t bins, std::size_t entries,
                            const std::vector<Feature>& features) {
    LocalSketches s(hashes);
    for (auto& per_time : s) {
        per_time.resize(bins);
        for (auto& per_entry : per_time) {
            per_entry.resize(entries);
            for (auto& per_feature : per_entry) {
                per_feature.resize(features.size());
                for (std::size_t f = 0; f < features.size(); ++f)
                    per_feature[f].feature = features[f];
            }
        }
    }
    return s;
}

}  // namespace

DefeatResult defeat_pipeline(const std::vector<std::vector<FlowRecord>>& per_router,
                             const DefeatConfig& config, const DefeatPcaParams& pca) {
    config.validate();
    if (!(pca.alpha > 0.0 && pca.alpha < 1.0))
        throw std::invalid_argument("defeat: alpha must lie in (0, 1)");
    bool any_records = false;
    double t0 = 0.0, t1 = 0.0;
    for (const auto& records : per_router)
        for (const FlowRecord& r : records) {
            if (!any_records) t0 = t1 = r.t;
            any_records = true;
            t0 = std::min(t0, r.t);
            t1 = std::max(t1, r.t);
        }
    if (!any_records) throw std::invalid_argument("defeat: no records");
    std::size_t bins = static_cast<std::size_t>((t1 - t0) / config.bin_width) + 1;
    if (bins < 2) throw std::invalid_argument("defeat: need at least 2 time bins");

    KarySketch hasher(config.sketch_count, config.sketch_size, config.seed);

    // Local sketches per router, built in parallel, then summed globally.
    std::vector<LocalSketches> local(per_router.size());
    parallel_for(per_router.size(), [&](std::size_t ri) {
        local[ri] = make_sketches(config.sketch_count, bins, config.sketch_size, config.features);
        for (const FlowRecord& r : per_router[ri]) {
            std::size_t t = static_cast<std::size_t>((r.t - t0) / config.bin_width);
            std::uint64_t key = defeat_key(r);
            for (std::size_t j = 0; j < config.sketch_count; ++j) {
                std::size_t k = hasher.bucket(j, key);
                for (std::size_t f = 0; f < config.features.size(); ++f)
                    local[ri][j][t][k][f].counts[feature_value(r, config.features[f])] +=
                        r.packets;
            }
        }
    });
    LocalSketches global =
        make_sketches(config.sketch_count, bins, config.sketch_size, config.features);
    for (const LocalSketches& l : local)
        for (std::size_t j = 0; j < config.sketch_count; ++j)
            for (std::size_t t = 0; t < bins; ++t)
                for (std::size_t k = 0; k < config.sketch_size; ++k)
                    for (std::size_t f = 0; f < config.features.size(); ++f)
                        for (const auto& [value, count] : l[j][t][k][f].counts)
                            global[j][t][k][f].counts[value] += count;
    local.clear();

    // Per hash: entropy tensor over (time, entry, feature), recast and fed to
    // the subspace model. Empty entries contribute zero entropy.
    struct HashModel {
        PcaModel model;
        Mat normalized;  // time x 4*entries
        double threshold = 0.0;
        std::vector<bool> bit;
    };
    std::vector<HashModel> models(config.sketch_count);
    parallel_for(config.sketch_count, [&](std::size_t j) {
        EntropyTensor tensor(bins, config.sketch_size);
        for (std::size_t t = 0; t < bins; ++t)
            for (std::size_t k = 0; k < config.sketch_size; ++k)
                for (std::size_t f = 0; f < 4; ++f) {
                    const Histogram& h = global[j][t][k][f];
                    tensor.at(t, k, f) = h.total() == 0 ? 0.0 : sample_entropy(h);
                }
        EntropyMatrix recast = multiway_recast(tensor);
        Normalized norm = normalize_columns(recast.values, true);
        HashModel hm;
        hm.model = fit_pca(norm);
        hm.model.k = pca.normal_axes != 0 ? pca.normal_axes : split_subspace(norm.x, hm.model);
        hm.normalized = norm.x;
        hm.bit.assign(bins, false);
        for (std::size_t t = 0; t < bins; ++t) {
            SpeResult spe = spe_detect(norm.x.row(t), hm.model, pca.alpha);
            hm.bit[t] = spe.alarm;
            hm.threshold = spe.threshold;
        }
        models[j] = std::move(hm);
    });

    // Distinct keys observed per time bin, for mapping entries back to flows.
    std::vector<std::vector<std::uint64_t>> keys_at(bins);
    for (const auto& records : per_router)
        for (const FlowRecord& r : records)
            keys_at[static_cast<std::size_t>((r.t - t0) / config.bin_width)].push_back(
                defeat_key(r));
    for (auto& keys : keys_at) {
        std::sort(keys.begin(), keys.end());
        keys.erase(std::unique(keys.begin(), keys.end()), keys.end());
    }

    DefeatResult out;
    out.bits.assign(bins, std::vector<bool>(config.sketch_count, false));
    for (std::size_t t = 0; t < bins; ++t)
        for (std::size_t j = 0; j < config.sketch_count; ++j)
            out.bits[t][j] = models[j].bit[t];

    for (std::size_t t = 0; t < bins; ++t) {
        std::size_t votes = 0;
        for (std::size_t j = 0; j < config.sketch_count; ++j) votes += out.bits[t][j] ? 1 : 0;
        if (votes < config.votes) continue;

        // Greedy identification per voting hash: peel entries off by largest
        // residual contribution until the leftover drops below the threshold.
        std::vector<std::uint64_t> inter;
        bool first = true;
        for (std::size_t j = 0; j < config.sketch_count; ++j) {
            if (!out.bits[t][j]) continue;
            const HashModel& hm = models[j];
            Vec residual = residual_vector(hm.model, hm.normalized.row(t));
            Vec contribution(config.sketch_size, 0.0);
            double spe = 0.0;
            for (std::size_t f = 0; f < 4; ++f)
                for (std::size_t k = 0; k < config.sketch_size; ++k) {
                    double r = residual[f * config.sketch_size + k];
                    contribution[k] += r * r;
                    spe += r * r;
                }
            std::vector<std::size_t> order(config.sketch_size);
            std::iota(order.begin(), order.end(), std::size_t{0});
            std::sort(order.begin(), order.end(),
                      [&](std::size_t a, std::size_t b) { return contribution[a] > contribution[b]; });
            std::set<std::size_t> anomalous;
            for (std::size_t k : order) {
                if (spe <= hm.threshold) break;
                anomalous.insert(k);
                spe -= contribution[k];
            }

            std::vector<std::uint64_t> mapped;
            for (std::uint64_t key : keys_at[t])
                if (anomalous.count(hasher.bucket(j, key))) mapped.push_back(key);
            if (first) {
                inter = std::move(mapped);
                first = false;
            } else {
                std::vector<std::uint64_t> next;
                std::set_intersection(inter.begin(), inter.end(), mapped.begin(), mapped.end(),
                                      std::back_inserter(next));
                inter = std::move(next);
            }
        }

        DefeatDetection det;
        det.t_index = static_cast<long>(t);
        det.votes = votes;
        det.keys = inter;
        std::vector<std::string> keys;
        for (std::uint64_t key : det.keys) keys.push_back(defeat_key_string(key));
        out.alarms.push_back(make_alarm(det.t_index, "defeat", static_cast<double>(votes),
                                        static_cast<double>(config.votes), std::move(keys)));
        out.detections.push_back(std::move(det));
    }
    return out;
}

}  // namespace nta
