#include "nta/synth.hpp"

#include <algorithm>
#include <cmath>
#include <queue>
#include <set>
#include <stdexcept>

#include "nta/rng.hpp"

namespace nta {

namespace {

constexpr double kTwoPi = 6.28318530717958647692;
constexpr std::uint32_t kAttacker = 0xC0A84D05;  // 192.168.77.5
constexpr std::uint32_t kVictim = 0xAC100909;    // 172.16.9.9
constexpr std::uint16_t kServices[6] = {80, 443, 53, 22, 25, 8080};
constexpr std::uint64_t kFrameBytes[3] = {40, 576, 1500};

std::uint16_t ephemeral_port(Rng& rng) {
    return static_cast<std::uint16_t>(1024 + rng.below(64512));
}

}  // namespace

void SynthConfig::validate() const {
    if (!(duration > 0.0)) throw std::invalid_argument("synth: duration must be > 0");
    if (!(rate > 0.0)) throw std::invalid_argument("synth: rate must be > 0");
    if (hosts < 2 || hosts > 256)
        throw std::invalid_argument("synth: host pool size must lie in [2, 256]");
}

const char* anomaly_kind_name(AnomalyKind k) {
    switch (k) {
        case AnomalyKind::None: return "none";
        case AnomalyKind::Alpha: return "alpha";
        case AnomalyKind::Dos: return "dos";
        case AnomalyKind::PortScan: return "portscan";
        case AnomalyKind::NetworkScan: return "netscan";
    }
    return "?";
}

AnomalyKind anomaly_kind_from_name(const std::string& name) {
    if (name == "none") return AnomalyKind::None;
    if (name == "alpha") return AnomalyKind::Alpha;
    if (name == "dos") return AnomalyKind::Dos;
    if (name == "portscan") return AnomalyKind::PortScan;
    if (name == "netscan") return AnomalyKind::NetworkScan;
    throw std::invalid_argument("unknown anomaly kind: " + name);
}

void AnomalySpec::validate(double duration) const {
    if (kind == AnomalyKind::None) return;
    if (!(start >= 0.0 && start < stop && stop <= duration))
        throw std::invalid_argument("synth: anomaly window must satisfy 0 <= start < stop <= duration");
    if (!(rate > 0.0)) throw std::invalid_argument("synth: anomaly rate must be > 0");
    if (packets < 1) throw std::invalid_argument("synth: anomaly packets must be >= 1");
}

std::uint32_t synth_attacker() { return kAttacker; }
std::uint32_t synth_victim() { return kVictim; }

std::vector<FlowRecord> synth_flows(const SynthConfig& config, const AnomalySpec& anomaly) {
    config.validate();
    anomaly.validate(config.duration);
    Rng rng(config.seed);

    std::vector<FlowRecord> out;
    auto background = static_cast<std::size_t>(std::llround(config.rate * config.duration));
    out.reserve(background);
    for (std::size_t i = 0; i < background; ++i) {
        FlowRecord r;
        r.t = rng.uniform(0.0, config.duration);
        r.sip = 0x0A000001u + static_cast<std::uint32_t>(rng.below(config.hosts)) * 256u;
        r.dip = 0x0A010001u + static_cast<std::uint32_t>(rng.below(config.hosts)) * 256u;
        r.sp = rng.uniform() < 0.3 ? kServices[rng.below(6)] : ephemeral_port(rng);
        r.dp = rng.uniform() < 0.7 ? kServices[rng.below(6)] : ephemeral_port(rng);
        r.proto = rng.uniform() < 0.8 ? 6 : 17;
        r.packets = 1 + rng.below(8);
        r.bytes = r.packets * kFrameBytes[rng.below(3)];
        out.push_back(r);
    }

    if (anomaly.kind != AnomalyKind::None) {
        auto count =
            static_cast<std::size_t>(std::llround(anomaly.rate * (anomaly.stop - anomaly.start)));
        for (std::size_t i = 0; i < count; ++i) {
            FlowRecord r;
            r.t = rng.uniform(anomaly.start, anomaly.stop);
            r.proto = 6;
            r.packets = anomaly.packets;
            switch (anomaly.kind) {
                case AnomalyKind::Alpha:
                    r.sip = kAttacker;
                    r.dip = kVictim;
                    r.sp = 41000;
                    r.dp = 80;
                    r.bytes = r.packets * 1500;
                    break;
                case AnomalyKind::Dos:
                    r.sip = static_cast<std::uint32_t>(rng.u64());  // spoofed
                    r.dip = kVictim;
                    r.sp = ephemeral_port(rng);
                    r.dp = 7000;
                    r.bytes = r.packets * 46;
                    break;
                case AnomalyKind::PortScan:
                    r.sip = kAttacker;
                    r.dip = kVictim;
                    r.sp = 40000;
                    r.dp = static_cast<std::uint16_t>(1 + i % 65535);
                    r.bytes = r.packets * 40;
                    break;
                case AnomalyKind::NetworkScan:
                    r.sip = kAttacker;
                    r.dip = 0xAC100000u | static_cast<std::uint32_t>(i % 65536);
                    r.sp = 40000;
                    r.dp = 445;
                    r.bytes = r.packets * 40;
                    break;
                case AnomalyKind::None: break;
            }
            out.push_back(r);
        }
    }

    // Ties keep generation order so identical seeds give identical streams.
    std::stable_sort(out.begin(), out.end(),
                     [](const FlowRecord& a, const FlowRecord& b) { return a.t < b.t; });
    return out;
}

Mat diurnal_traffic(std::size_t bins, std::size_t links, std::size_t factors, double noise,
                    std::uint64_t seed) {
    if (bins < 1 || links < 1 || factors < 1)
        throw std::invalid_argument("synth: bins, links and factors must all be >= 1");
    if (!(noise >= 0.0)) throw std::invalid_argument("synth: noise must be >= 0");
    Rng rng(seed);
    Mat load(links, factors);
    for (double& v : load.a) v = rng.uniform(0.2, 1.0);
    Vec phase(factors);
    for (double& v : phase) v = rng.uniform(0.0, kTwoPi);

    Mat x(bins, links);
    Vec g(factors);
    for (std::size_t t = 0; t < bins; ++t) {
        for (std::size_t f = 0; f < factors; ++f)
            g[f] = 100.0 * (1.2 + std::sin(kTwoPi * static_cast<double>((f + 1) * t) /
                                               static_cast<double>(bins) +
                                           phase[f]));
        for (std::size_t l = 0; l < links; ++l) {
            double acc = 0.0;
            for (std::size_t f = 0; f < factors; ++f) acc += load(l, f) * g[f];
            x(t, l) = acc + noise * rng.normal();
        }
    }
    return x;
}

SynthTopology synth_topology(std::size_t links, std::size_t flows, std::uint64_t seed) {
    if (links < 3) throw std::invalid_argument("synth: need at least 3 links");
    if (flows < 1) throw std::invalid_argument("synth: need at least 1 flow");
    std::size_t nodes = 3;
    while (nodes * (nodes - 1) / 2 < links) ++nodes;
    nodes = std::max(nodes, std::min(links, 2 * links / 3));
    if (flows > nodes * (nodes - 1))
        throw std::invalid_argument("synth: more flows than ordered node pairs");

    Rng rng(seed);
    SynthTopology topo;
    topo.nodes = nodes;
    std::set<std::pair<std::size_t, std::size_t>> edge_set;
    auto add_edge = [&](std::size_t u, std::size_t v) {
        auto e = std::minmax(u, v);
        if (!edge_set.insert({e.first, e.second}).second) return false;
        topo.edges.push_back({e.first, e.second});
        return true;
    };
    for (std::size_t i = 0; i < nodes; ++i) add_edge(i, (i + 1) % nodes);
    std::size_t attempts = 0;
    while (topo.edges.size() < links) {
        if (++attempts > 100000) throw std::runtime_error("synth: topology generation stalled");
        std::size_t u = rng.below(nodes), v = rng.below(nodes);
        if (u != v) add_edge(u, v);
    }

    std::set<std::pair<std::size_t, std::size_t>> pair_set;
    attempts = 0;
    while (topo.pairs.size() < flows) {
        if (++attempts > 100000) throw std::runtime_error("synth: flow sampling stalled");
        std::size_t s = rng.below(nodes), d = rng.below(nodes);
        if (s == d || !pair_set.insert({s, d}).second) continue;
        topo.pairs.push_back({s, d});
    }

    // Sorted adjacency makes the BFS tie-breaks deterministic.
    std::vector<std::vector<std::pair<std::size_t, std::size_t>>> adj(nodes);  // (neighbor, edge)
    for (std::size_t e = 0; e < topo.edges.size(); ++e) {
        adj[topo.edges[e].first].push_back({topo.edges[e].second, e});
        adj[topo.edges[e].second].push_back({topo.edges[e].first, e});
    }
    for (auto& list : adj) std::sort(list.begin(), list.end());

    topo.routing = Mat(links, flows);
    for (std::size_t j = 0; j < flows; ++j) {
        auto [src, dst] = topo.pairs[j];
        std::vector<std::size_t> parent_node(nodes, nodes), parent_edge(nodes, links);
        std::queue<std::size_t> queue;
        queue.push(src);
        parent_node[src] = src;
        while (!queue.empty()) {
            std::size_t u = queue.front();
            queue.pop();
            if (u == dst) break;
            for (auto [v, e] : adj[u])
                if (parent_node[v] == nodes) {
                    parent_node[v] = u;
                    parent_edge[v] = e;
                    queue.push(v);
                }
        }
        for (std::size_t v = dst; v != src; v = parent_node[v])
            topo.routing(parent_edge[v], j) = 1.0;
    }
    return topo;
}

}  // namespace nta
