#include "nta/extraction.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <set>
#include <stdexcept>

#include "nta/par.hpp"
#include "nta/stats.hpp"

namespace nta {

namespace {

constexpr double kMadToSigma = 1.4826;

// KL sum without the normalization check, for the removal simulation where
// the modified histogram intentionally no longer sums to one.
double raw_kl(const Vec& p, const Vec& q) {
    double acc = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) {
        if (p[i] == 0.0) continue;
        if (q[i] == 0.0) return std::numeric_limits<double>::infinity();
        acc += p[i] * std::log2(p[i] / q[i]);
    }
    return acc;
}

// Counts to probabilities with add-half smoothing. Hashed histograms of
// high-cardinality features (ephemeral ports) leave a few bins empty in any
// one interval, and an unsmoothed estimate would turn every such bin that
// fills up next interval into an infinite KL term.
Vec to_distribution(const HistogramClone& clone, std::size_t interval) {
    double total = 0.0;
    for (double c : clone.counts) total += c;
    if (!(total > 0.0))
        throw std::runtime_error("extraction: interval " + std::to_string(interval) +
                                 " has no traffic");
    Vec p(clone.counts.size());
    double denom = total + 0.5 * static_cast<double>(p.size());
    for (std::size_t i = 0; i < p.size(); ++i) p[i] = (clone.counts[i] + 0.5) / denom;
    return p;
}

}  // namespace

void CloneConfig::validate() const {
    if (clones < 1) throw std::invalid_argument("extraction: need at least one clone");
    if (bins < 2) throw std::invalid_argument("extraction: need at least two bins");
}

KarySketch make_clone_hasher(const CloneConfig& config) {
    config.validate();
    return KarySketch(config.clones, config.bins, config.seed);
}

std::vector<std::vector<HistogramClone>> build_clone_series(
    const std::vector<FlowRecord>& records, Feature feature, double bin_width, double t0,
    std::size_t intervals, const CloneConfig& config) {
    if (!(bin_width > 0.0)) throw std::invalid_argument("extraction: bin width must be > 0");
    if (intervals == 0) throw std::invalid_argument("extraction: need at least one interval");
    KarySketch hasher = make_clone_hasher(config);

    std::vector<std::vector<HistogramClone>> series(intervals);
    for (std::size_t t = 0; t < intervals; ++t) {
        series[t].resize(config.clones);
        for (std::size_t c = 0; c < config.clones; ++c) {
            series[t][c].bin_count = config.bins;
            series[t][c].seed = config.seed;
            series[t][c].counts.assign(config.bins, 0.0);
        }
    }
    // Each clone fills its own counts, so clones are safe to run in parallel.
    parallel_for(config.clones, [&](std::size_t c) {
        for (const FlowRecord& r : records) {
            if (r.t < t0) continue;
            std::size_t t = static_cast<std::size_t>((r.t - t0) / bin_width);
            if (t >= intervals) continue;
            std::size_t bin = hasher.bucket(c, feature_value(r, feature));
            series[t][c].counts[bin] += static_cast<double>(r.packets);
        }
    });
    return series;
}

double kl_distance(const Vec& p, const Vec& q) {
    if (p.size() != q.size())
        throw std::invalid_argument("kl_distance: distributions differ in size");
    if (p.empty()) throw std::invalid_argument("kl_distance: empty distribution");
    double sum_p = 0.0, sum_q = 0.0;
    for (double v : p) {
        if (v < 0.0) throw std::invalid_argument("kl_distance: negative probability");
        sum_p += v;
    }
    for (double v : q) {
        if (v < 0.0) throw std::invalid_argument("kl_distance: negative probability");
        sum_q += v;
    }
    if (std::abs(sum_p - 1.0) > 1e-9 || std::abs(sum_q - 1.0) > 1e-9)
        throw std::invalid_argument("kl_distance: distributions must sum to 1");
    return raw_kl(p, q);
}

KlDetectResult kl_detect(const std::vector<std::vector<HistogramClone>>& series,
                         std::size_t training_intervals) {
    if (training_intervals < 1)
        throw std::invalid_argument("kl_detect: need at least one training interval");
    if (series.size() < training_intervals + 2)
        throw std::invalid_argument("kl_detect: need at least " +
                                    std::to_string(training_intervals + 2) +
                                    " intervals, have " + std::to_string(series.size()));
    std::size_t clones = series.front().size();
    if (clones == 0) throw std::invalid_argument("kl_detect: no clones");
    for (const auto& interval : series)
        if (interval.size() != clones)
            throw std::invalid_argument("kl_detect: intervals disagree on the clone count");

    KlDetectResult out;
    out.kl = Mat(series.size(), clones);
    out.delta = Mat(series.size(), clones);
    out.sigma.assign(clones, 0.0);
    out.alarm.assign(series.size(), std::vector<bool>(clones, false));

    std::vector<std::vector<Vec>> dist(series.size());
    for (std::size_t t = 0; t < series.size(); ++t) {
        dist[t].resize(clones);
        for (std::size_t c = 0; c < clones; ++c) dist[t][c] = to_distribution(series[t][c], t);
    }

    for (std::size_t c = 0; c < clones; ++c) {
        // Current interval against the previous one as reference. This order
        // puts the excess mass of an anomaly into positive terms, which is
        // what lets identify_bins peel it off bin by bin.
        for (std::size_t t = 1; t < series.size(); ++t)
            out.kl(t, c) = raw_kl(dist[t][c], dist[t - 1][c]);
        for (std::size_t t = 2; t < series.size(); ++t)
            out.delta(t, c) = out.kl(t, c) - out.kl(t - 1, c);

        Vec training;
        training.reserve(training_intervals);
        for (std::size_t t = 2; t < training_intervals + 2; ++t) training.push_back(out.delta(t, c));
        out.sigma[c] = kMadToSigma * mad(training);
        if (!(out.sigma[c] > 0.0))
            throw std::runtime_error("kl_detect: clone " + std::to_string(c) +
                                     " saw no training variation; use more training intervals");
        for (std::size_t t = training_intervals + 2; t < series.size(); ++t)
            out.alarm[t][c] = out.delta(t, c) >= 3.0 * out.sigma[c];
    }
    return out;
}

std::vector<std::size_t> identify_bins(const Vec& reference, const Vec& current, double prev_kl,
                                       double sigma) {
    if (reference.size() != current.size())
        throw std::invalid_argument("identify_bins: histograms differ in size");
    if (!(sigma > 0.0)) throw std::invalid_argument("identify_bins: sigma must be > 0");
    Vec q = current;
    std::vector<std::size_t> picked;
    while (raw_kl(q, reference) - prev_kl >= 3.0 * sigma) {
        if (picked.size() >= q.size())
            throw std::runtime_error("identify_bins: removal loop failed to converge");
        std::size_t best = 0;
        double best_gap = -1.0;
        for (std::size_t i = 0; i < q.size(); ++i) {
            double gap = std::abs(reference[i] - q[i]);
            if (gap > best_gap) {
                best_gap = gap;
                best = i;
            }
        }
        q[best] = reference[best];
        picked.push_back(best);
    }
    std::sort(picked.begin(), picked.end());
    return picked;
}

std::vector<std::uint64_t> identify_values(const std::vector<HistogramClone>& reference,
                                           const std::vector<HistogramClone>& current,
                                           const Vec& prev_kl, const Vec& sigma,
                                           const std::vector<std::uint64_t>& candidates,
                                           const KarySketch& hasher) {
    std::size_t clones = current.size();
    if (reference.size() != clones || prev_kl.size() != clones || sigma.size() != clones)
        throw std::invalid_argument("identify_values: per-clone inputs differ in size");
    if (clones == 0 || hasher.rows() < clones)
        throw std::invalid_argument("identify_values: hasher does not cover every clone");

    std::vector<std::set<std::size_t>> bins(clones);
    for (std::size_t c = 0; c < clones; ++c) {
        auto picked = identify_bins(to_distribution(reference[c], 0), to_distribution(current[c], 1),
                                    prev_kl[c], sigma[c]);
        bins[c].insert(picked.begin(), picked.end());
    }

    std::vector<std::uint64_t> values;
    for (std::uint64_t v : candidates) {
        bool survives = true;
        for (std::size_t c = 0; c < clones && survives; ++c)
            survives = bins[c].count(hasher.bucket(c, v)) > 0;
        if (survives) values.push_back(v);
    }
    std::sort(values.begin(), values.end());
    values.erase(std::unique(values.begin(), values.end()), values.end());
    return values;
}

bool operator==(const Item& a, const Item& b) {
    return a.feature == b.feature && a.value == b.value;
}

bool operator<(const Item& a, const Item& b) {
    if (a.feature != b.feature) return static_cast<int>(a.feature) < static_cast<int>(b.feature);
    return a.value < b.value;
}

namespace {

constexpr Feature kAllFeatures[7] = {Feature::SIP, Feature::DIP,   Feature::SP,     Feature::DP,
                                     Feature::Proto, Feature::Packets, Feature::Bytes};

bool contains_items(const std::vector<std::uint64_t>& transaction,
                    const std::vector<Item>& items) {
    for (const Item& item : items)
        if (transaction[static_cast<std::size_t>(item.feature)] != item.value) return false;
    return true;
}

bool is_subset(const std::vector<Item>& small, const std::vector<Item>& big) {
    for (const Item& item : small)
        if (std::find(big.begin(), big.end(), item) == big.end()) return false;
    return true;
}

}  // namespace

std::vector<ItemSet> apriori(const std::vector<FlowRecord>& transactions,
                             std::size_t min_support) {
    if (min_support < 1) throw std::invalid_argument("apriori: min_support must be >= 1");

    std::vector<std::vector<std::uint64_t>> rows;
    rows.reserve(transactions.size());
    for (const FlowRecord& r : transactions) {
        std::vector<std::uint64_t> row(7);
        for (std::size_t f = 0; f < 7; ++f) row[f] = feature_value(r, kAllFeatures[f]);
        rows.push_back(std::move(row));
    }

    // Level 1: exact count of every distinct item.
    std::map<Item, std::size_t> singles;
    for (const auto& row : rows)
        for (std::size_t f = 0; f < 7; ++f) ++singles[Item{kAllFeatures[f], row[f]}];
    std::vector<ItemSet> frequent;
    for (const auto& [item, count] : singles)
        if (count >= min_support) frequent.push_back({{item}, count});

    std::vector<std::vector<ItemSet>> levels;
    while (!frequent.empty()) {
        levels.push_back(frequent);
        // Extend each set with frequent single items on strictly later
        // features; a transaction has one value per feature, so this
        // enumerates every candidate with distinct features exactly once.
        std::vector<ItemSet> next;
        for (const ItemSet& base : levels.back()) {
            for (const ItemSet& one : levels.front()) {
                const Item& item = one.items.front();
                if (!(base.items.back() < item) || base.items.back().feature == item.feature)
                    continue;
                ItemSet candidate;
                candidate.items = base.items;
                candidate.items.push_back(item);
                for (const auto& row : rows)
                    if (contains_items(row, candidate.items)) ++candidate.support;
                if (candidate.support >= min_support) next.push_back(std::move(candidate));
            }
        }
        frequent = std::move(next);
    }

    // Keep only sets that no more specific frequent set subsumes.
    std::vector<ItemSet> out;
    for (std::size_t k = 0; k < levels.size(); ++k)
        for (const ItemSet& set : levels[k]) {
            bool subsumed = false;
            if (k + 1 < levels.size())
                for (const ItemSet& bigger : levels[k + 1])
                    if (is_subset(set.items, bigger.items)) {
                        subsumed = true;
                        break;
                    }
            if (!subsumed) out.push_back(set);
        }
    return out;
}

std::string item_to_string(const Item& item) {
    std::string value;
    if (item.feature == Feature::SIP || item.feature == Feature::DIP)
        value = format_ipv4(static_cast<std::uint32_t>(item.value));
    else
        value = std::to_string(item.value);
    return std::string(feature_name(item.feature)) + "=" + value;
}

void write_item_sets(std::ostream& out, const std::vector<ItemSet>& sets) {
    for (const ItemSet& set : sets) {
        out << set.items.size() << '\t';
        for (std::size_t i = 0; i < set.items.size(); ++i) {
            if (i > 0) out << ',';
            out << item_to_string(set.items[i]);
        }
        out << '\t' << set.support << '\n';
    }
}

void ExtractConfig::validate() const {
    if (features.empty()) throw std::invalid_argument("extraction: no detector features");
    clones.validate();
    if (!(bin_width > 0.0)) throw std::invalid_argument("extraction: bin width must be > 0");
    if (training_intervals < 1)
        throw std::invalid_argument("extraction: need at least one training interval");
    if (min_support < 1) throw std::invalid_argument("extraction: min_support must be >= 1");
}

ExtractResult extract_pipeline(const std::vector<FlowRecord>& records,
                               const ExtractConfig& config) {
    config.validate();
    if (records.empty()) throw std::invalid_argument("extraction: no records");
    double t0 = records.front().t, t1 = records.front().t;
    for (const FlowRecord& r : records) {
        t0 = std::min(t0, r.t);
        t1 = std::max(t1, r.t);
    }
    std::size_t intervals = static_cast<std::size_t>((t1 - t0) / config.bin_width) + 1;
    KarySketch hasher = make_clone_hasher(config.clones);

    ExtractResult out;
    std::vector<bool> flagged(records.size(), false);
    for (Feature feature : config.features) {
        auto series =
            build_clone_series(records, feature, config.bin_width, t0, intervals, config.clones);
        KlDetectResult det = kl_detect(series, config.training_intervals);

        for (std::size_t t = config.training_intervals + 2; t < intervals; ++t) {
            // A real distribution change moves mass under every hash layout,
            // so demand a majority of clones instead of trusting one clone's
            // occupancy flutter.
            std::size_t votes = 0;
            for (std::size_t c = 0; c < config.clones.clones; ++c)
                if (det.alarm[t][c]) ++votes;
            if (2 * votes <= config.clones.clones) continue;

            // Values seen in the alarmed interval are the candidates.
            std::vector<std::uint64_t> candidates;
            for (const FlowRecord& r : records) {
                std::size_t bin = static_cast<std::size_t>((r.t - t0) / config.bin_width);
                if (bin == t) candidates.push_back(feature_value(r, feature));
            }
            Vec prev_kl(config.clones.clones);
            for (std::size_t c = 0; c < config.clones.clones; ++c)
                prev_kl[c] = det.kl(t - 1, c);
            std::vector<std::uint64_t> values =
                identify_values(series[t - 1], series[t], prev_kl, det.sigma, candidates, hasher);

            double score = 0.0, threshold = 0.0;
            for (std::size_t c = 0; c < config.clones.clones; ++c)
                if (det.alarm[t][c] && det.delta(t, c) - 3.0 * det.sigma[c] >= score - threshold) {
                    score = det.delta(t, c);
                    threshold = 3.0 * det.sigma[c];
                }
            std::vector<std::string> keys;
            for (std::uint64_t v : values) keys.push_back(item_to_string(Item{feature, v}));
            out.alarms.push_back(make_alarm(static_cast<long>(t),
                                            std::string("extract:") + feature_name(feature), score,
                                            threshold, std::move(keys)));

            std::set<std::uint64_t> value_set(values.begin(), values.end());
            for (std::size_t i = 0; i < records.size(); ++i) {
                std::size_t bin = static_cast<std::size_t>((records[i].t - t0) / config.bin_width);
                if (bin == t && value_set.count(feature_value(records[i], feature)))
                    flagged[i] = true;
            }
        }
    }

    std::vector<FlowRecord> suspicious;
    for (std::size_t i = 0; i < records.size(); ++i)
        if (flagged[i]) {
            out.flagged.push_back(i);
            suspicious.push_back(records[i]);
        }
    if (!suspicious.empty()) out.item_sets = apriori(suspicious, config.min_support);
    return out;
}

}  // namespace nta
