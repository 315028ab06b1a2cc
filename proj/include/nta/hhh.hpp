#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <string>
#include <utility>
#include <vector>

namespace nta {

enum class MissRule { CopyAll, NoCopy, Splitting };

std::string miss_rule_name(MissRule rule);
MissRule miss_rule_from_name(const std::string& name);

struct HhhConfig {
    double phi = 0.1;          // heavy-hitter fraction of total volume
    double epsilon = 0.05;     // tolerated inaccuracy fraction
    int width = 32;            // key width in bits

    void validate() const;
};

struct TrieNode {
    std::uint64_t prefix = 0;  // top `depth` bits of the key, right-aligned
    int depth = 0;
    int parent = -1;
    std::array<int, 2> child{-1, -1};
    bool fringe = true;
    double volume = 0.0;       // traffic absorbed while this node was fringe
    double subtotal = 0.0;     // width-depth leaf accumulation past conversion
};

struct PrefixEstimate {
    std::uint64_t prefix = 0;
    int length = 0;
    double volume = 0.0;       // reconstructed + missed
};

// 1-bit prefix trie with split-threshold growth. Nodes absorb traffic while
// fringe; once a node has seen T_s it converts and pushes later traffic down.
class PrefixTrie {
  public:
    explicit PrefixTrie(int width);

    struct Charge {
        int listed_depth = 0;       // depth the update algorithm reports
        std::uint64_t prefix = 0;   // node whose counter took the value
        int length = 0;
    };

    Charge update(std::uint64_t key, double value, double split_threshold);

    // Reconstructed volume plus missed-traffic estimate for every node,
    // sorted by (length, prefix).
    std::vector<PrefixEstimate> finalize(MissRule rule) const;

    // Per-node missed traffic in arena order, for callers that combine rules.
    std::vector<double> missed_traffic(MissRule rule) const;
    std::vector<double> reconstructed() const;

    int find_node(std::uint64_t prefix, int length) const;  // -1 when absent
    const std::vector<TrieNode>& nodes() const { return nodes_; }
    int width() const { return width_; }
    double total() const { return total_; }

  private:
    int width_;
    std::vector<TrieNode> nodes_;
    double total_ = 0.0;
};

// Prefixes whose estimated volume reaches phi * S.
std::vector<PrefixEstimate> detect_hhh(const std::vector<PrefixEstimate>& estimates, double phi,
                                       double total);

struct PairEstimate {
    std::uint64_t prefix1 = 0;
    int length1 = 0;
    std::uint64_t prefix2 = 0;
    int length2 = 0;
    double volume = 0.0;
};

// Cross-producting 2-D scheme: one trie per dimension plus a (length1,
// length2)-indexed family of pair tables.
class Hhh2d {
  public:
    explicit Hhh2d(int width);

    void update(std::uint64_t key1, std::uint64_t key2, double value, double split_threshold);

    struct Result {
        std::vector<PairEstimate> estimates;
        std::vector<PairEstimate> detected;
    };
    Result finalize(MissRule rule, double phi) const;

    double total() const { return total_; }
    const PrefixTrie& trie1() const { return trie1_; }
    const PrefixTrie& trie2() const { return trie2_; }

  private:
    int width_;
    PrefixTrie trie1_, trie2_;
    // tables_[l1 * (width+1) + l2] maps (prefix1, prefix2) to volume.
    std::vector<std::map<std::pair<std::uint64_t, std::uint64_t>, double>> tables_;
    double total_ = 0.0;
};

struct HhhResult {
    std::vector<PrefixEstimate> estimates;
    std::vector<PrefixEstimate> detected;
    double total = 0.0;
    double split_threshold = 0.0;
};

// Batch 1-D run: computes S from the stream, sets T_s = epsilon * S / W.
HhhResult hhh_run(const std::vector<std::pair<std::uint64_t, double>>& packets,
                  const HhhConfig& config, MissRule rule);

struct Hhh2dResult {
    std::vector<PairEstimate> estimates;
    std::vector<PairEstimate> detected;
    double total = 0.0;
    double split_threshold = 0.0;
};

struct PairPacket {
    std::uint64_t key1 = 0;
    std::uint64_t key2 = 0;
    double value = 0.0;
};

Hhh2dResult hhh2d_run(const std::vector<PairPacket>& packets, const HhhConfig& config,
                      MissRule rule);

}  // namespace nta
