#include "nta/hhh.hpp"

#include <algorithm>
#include <stdexcept>

namespace nta {

std::string miss_rule_name(MissRule rule) {
    switch (rule) {
        case MissRule::CopyAll: return "copy_all";
        case MissRule::NoCopy: return "no_copy";
        case MissRule::Splitting: return "splitting";
    }
    throw std::logic_error("hhh: unknown miss rule");
}

MissRule miss_rule_from_name(const std::string& name) {
    if (name == "copy_all") return MissRule::CopyAll;
    if (name == "no_copy") return MissRule::NoCopy;
    if (name == "splitting") return MissRule::Splitting;
    throw std::invalid_argument("hhh: unknown miss rule '" + name + "'");
}

void HhhConfig::validate() const {
    if (!(phi > 0.0 && phi <= 1.0)) throw std::invalid_argument("hhh: phi must lie in (0, 1]");
    if (!(epsilon > 0.0 && epsilon <= 1.0))
        throw std::invalid_argument("hhh: epsilon must lie in (0, 1]");
    if (width < 1 || width > 32) throw std::invalid_argument("hhh: width must lie in [1, 32]");
}

PrefixTrie::PrefixTrie(int width) : width_(width) {
    if (width < 1 || width > 32) throw std::invalid_argument("hhh: width must lie in [1, 32]");
    nodes_.push_back(TrieNode{});  // root, zero-length prefix
}

PrefixTrie::Charge PrefixTrie::update(std::uint64_t key, double value, double split_threshold) {
    if (!(split_threshold > 0.0))
        throw std::invalid_argument("hhh: split threshold must be > 0");
    if (value > split_threshold)
        throw std::invalid_argument("hhh: packet value exceeds the split threshold");
    if (value < 0.0) throw std::invalid_argument("hhh: packet value must be >= 0");
    if (width_ < 64 && key >> width_ != 0)
        throw std::invalid_argument("hhh: key wider than the configured width");
    total_ += value;
    int i = 0;
    while (true) {
        TrieNode& node = nodes_[i];
        if (node.fringe) {
            if (node.volume + value < split_threshold) {
                node.volume += value;
                return {node.depth - 1, node.prefix, node.depth};
            }
            node.fringe = false;
            if (node.depth == width_) {
                node.subtotal = value;
                return {node.depth, node.prefix, node.depth};
            }
            // Conversion with depth < W falls through to create the child
            // matching this packet, which then takes the value.
        } else if (node.depth == width_) {
            node.subtotal += value;
            return {node.depth, node.prefix, node.depth};
        }
        int bit = static_cast<int>(key >> (width_ - node.depth - 1)) & 1;
        int c = node.child[bit];
        if (c < 0) {
            TrieNode child;
            child.prefix = (node.prefix << 1) | static_cast<std::uint64_t>(bit);
            child.depth = node.depth + 1;
            child.parent = i;
            c = static_cast<int>(nodes_.size());
            nodes_[i].child[bit] = c;
            nodes_.push_back(child);
        }
        i = c;
    }
}

std::vector<double> PrefixTrie::reconstructed() const {
    // Children are created after their parents, so a reverse scan is a
    // bottom-up traversal.
    std::vector<double> recon(nodes_.size(), 0.0);
    for (std::size_t r = nodes_.size(); r-- > 0;) {
        const TrieNode& node = nodes_[r];
        recon[r] += node.volume + node.subtotal;
        for (int c : node.child)
            if (c >= 0) recon[r] += recon[static_cast<std::size_t>(c)];
    }
    return recon;
}

std::vector<double> PrefixTrie::missed_traffic(MissRule rule) const {
    std::vector<double> miss(nodes_.size(), 0.0);
    if (rule == MissRule::NoCopy) return miss;
    if (rule == MissRule::CopyAll) {
        // Forward scan is top-down for the same creation-order reason.
        for (std::size_t i = 1; i < nodes_.size(); ++i) {
            const TrieNode& parent = nodes_[static_cast<std::size_t>(nodes_[i].parent)];
            miss[i] = miss[static_cast<std::size_t>(nodes_[i].parent)] + parent.volume;
        }
        return miss;
    }
    std::vector<double> recon = reconstructed();
    for (std::size_t i = 0; i < nodes_.size(); ++i) {
        const TrieNode& node = nodes_[i];
        double pool = miss[i] + node.volume;
        double child_sum = 0.0;
        int child_count = 0;
        for (int c : node.child)
            if (c >= 0) {
                child_sum += recon[static_cast<std::size_t>(c)];
                ++child_count;
            }
        for (int c : node.child)
            if (c >= 0) {
                double share = child_sum > 0.0
                                   ? recon[static_cast<std::size_t>(c)] / child_sum
                                   : 1.0 / static_cast<double>(child_count);
                miss[static_cast<std::size_t>(c)] = pool * share;
            }
    }
    return miss;
}

std::vector<PrefixEstimate> PrefixTrie::finalize(MissRule rule) const {
    std::vector<double> recon = reconstructed();
    std::vector<double> miss = missed_traffic(rule);
    std::vector<PrefixEstimate> out(nodes_.size());
    for (std::size_t i = 0; i < nodes_.size(); ++i)
        out[i] = {nodes_[i].prefix, nodes_[i].depth, recon[i] + miss[i]};
    std::sort(out.begin(), out.end(), [](const PrefixEstimate& a, const PrefixEstimate& b) {
        return a.length != b.length ? a.length < b.length : a.prefix < b.prefix;
    });
    return out;
}

int PrefixTrie::find_node(std::uint64_t prefix, int length) const {
    int i = 0;
    for (int d = 0; d < length; ++d) {
        int bit = static_cast<int>(prefix >> (length - d - 1)) & 1;
        i = nodes_[static_cast<std::size_t>(i)].child[bit];
        if (i < 0) return -1;
    }
    return i;
}

std::vector<PrefixEstimate> detect_hhh(const std::vector<PrefixEstimate>& estimates, double phi,
                                       double total) {
    if (!(total > 0.0)) throw std::invalid_argument("hhh: total volume must be > 0");
    std::vector<PrefixEstimate> out;
    for (const PrefixEstimate& e : estimates)
        if (e.volume >= phi * total) out.push_back(e);
    return out;
}

Hhh2d::Hhh2d(int width)
    : width_(width), trie1_(width), trie2_(width),
      tables_(static_cast<std::size_t>(width + 1) * static_cast<std::size_t>(width + 1)) {}

void Hhh2d::update(std::uint64_t key1, std::uint64_t key2, double value,
                   double split_threshold) {
    PrefixTrie::Charge c1 = trie1_.update(key1, value, split_threshold);
    PrefixTrie::Charge c2 = trie2_.update(key2, value, split_threshold);
    auto& table = tables_[static_cast<std::size_t>(c1.length) *
                              static_cast<std::size_t>(width_ + 1) +
                          static_cast<std::size_t>(c2.length)];
    table[{c1.prefix, c2.prefix}] += value;
    total_ += value;
}

Hhh2d::Result Hhh2d::finalize(MissRule rule, double phi) const {
    auto tables = tables_;
    auto cell = [&](int l1, int l2) -> std::map<std::pair<std::uint64_t, std::uint64_t>, double>& {
        return tables[static_cast<std::size_t>(l1) * static_cast<std::size_t>(width_ + 1) +
                      static_cast<std::size_t>(l2)];
    };
    // Pass 1: collapse dimension 1 upward, longest prefixes first.
    for (int l1 = width_; l1 >= 1; --l1)
        for (int l2 = 0; l2 <= width_; ++l2)
            for (const auto& [key, vol] : cell(l1, l2))
                cell(l1 - 1, l2)[{key.first >> 1, key.second}] += vol;
    // Pass 2: collapse dimension 2 upward over the augmented tables.
    for (int l2 = width_; l2 >= 1; --l2)
        for (int l1 = 0; l1 <= width_; ++l1)
            for (const auto& [key, vol] : cell(l1, l2))
                cell(l1, l2 - 1)[{key.first, key.second >> 1}] += vol;

    std::vector<double> miss1 = trie1_.missed_traffic(rule);
    std::vector<double> miss2 = trie2_.missed_traffic(rule);
    Result out;
    for (int l1 = 0; l1 <= width_; ++l1)
        for (int l2 = 0; l2 <= width_; ++l2)
            for (const auto& [key, vol] : cell(l1, l2)) {
                int n1 = trie1_.find_node(key.first, l1);
                int n2 = trie2_.find_node(key.second, l2);
                double m1 = n1 >= 0 ? miss1[static_cast<std::size_t>(n1)] : 0.0;
                double m2 = n2 >= 0 ? miss2[static_cast<std::size_t>(n2)] : 0.0;
                out.estimates.push_back(
                    {key.first, l1, key.second, l2, vol + std::max(m1, m2)});
            }
    if (!(total_ > 0.0)) return out;
    for (const PairEstimate& e : out.estimates)
        if (e.volume >= phi * total_) out.detected.push_back(e);
    return out;
}

HhhResult hhh_run(const std::vector<std::pair<std::uint64_t, double>>& packets,
                  const HhhConfig& config, MissRule rule) {
    config.validate();
    if (packets.empty()) throw std::invalid_argument("hhh: packet stream is empty");
    double total = 0.0;
    for (const auto& [key, value] : packets) total += value;
    if (!(total > 0.0)) throw std::invalid_argument("hhh: stream volume must be > 0");
    double ts = config.epsilon * total / config.width;
    PrefixTrie trie(config.width);
    for (const auto& [key, value] : packets) trie.update(key, value, ts);
    HhhResult out;
    out.total = total;
    out.split_threshold = ts;
    out.estimates = trie.finalize(rule);
    out.detected = detect_hhh(out.estimates, config.phi, total);
    return out;
}

Hhh2dResult hhh2d_run(const std::vector<PairPacket>& packets, const HhhConfig& config,
                      MissRule rule) {
    config.validate();
    if (packets.empty()) throw std::invalid_argument("hhh: packet stream is empty");
    double total = 0.0;
    for (const PairPacket& p : packets) total += p.value;
    if (!(total > 0.0)) throw std::invalid_argument("hhh: stream volume must be > 0");
    double ts = config.epsilon * total / config.width;
    Hhh2d grid(config.width);
    for (const PairPacket& p : packets) grid.update(p.key1, p.key2, p.value, ts);
    Hhh2d::Result res = grid.finalize(rule, config.phi);
    return {std::move(res.estimates), std::move(res.detected), total, ts};
}

}  // namespace nta
