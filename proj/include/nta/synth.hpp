#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "nta/flow.hpp"
#include "nta/mat.hpp"

namespace nta {

// Synthetic trace generator. Background traffic is stationary: addresses come
// from fixed pools, ports and sizes from fixed mixtures, so per-interval
// feature distributions stay stable and detectors calibrate against it.
struct SynthConfig {
    double duration = 3600.0;  // seconds
    double rate = 50.0;        // background flows per second
    std::size_t hosts = 64;    // pool size per address side
    std::uint64_t seed = 1;

    void validate() const;
};

enum class AnomalyKind { None, Alpha, Dos, PortScan, NetworkScan };

const char* anomaly_kind_name(AnomalyKind k);
AnomalyKind anomaly_kind_from_name(const std::string& name);

// Injected anomaly, active on [start, stop). Templates follow the usual
// feature signatures: alpha pins one heavy src/dst pair, dos floods one
// dst/port from spoofed sources, portscan sweeps ports on one address,
// netscan sweeps addresses on one port.
struct AnomalySpec {
    AnomalyKind kind = AnomalyKind::None;
    double start = 0.0;
    double stop = 0.0;
    double rate = 200.0;         // anomalous flows per second
    std::uint64_t packets = 1;   // per record (alpha flows want more)

    void validate(double duration) const;
};

// Fixed anomaly endpoints, outside the background pools so tests can assert
// on exactly which keys a detector identified.
std::uint32_t synth_attacker();
std::uint32_t synth_victim();

// Records sorted by time; ties keep generation order.
std::vector<FlowRecord> synth_flows(const SynthConfig& config, const AnomalySpec& anomaly = {});

// Low-rank link traffic: `factors` latent sinusoidal series with random
// nonnegative loadings over the columns, plus white noise.
Mat diurnal_traffic(std::size_t bins, std::size_t links, std::size_t factors, double noise,
                    std::uint64_t seed);

// Random connected topology (ring plus chords) with shortest-path routing.
// routing(i, j) = 1 when flow j's path crosses undirected link i.
struct SynthTopology {
    Mat routing;  // links x flows, 0/1 entries
    std::size_t nodes = 0;
    std::vector<std::pair<std::size_t, std::size_t>> edges;  // link index -> endpoints
    std::vector<std::pair<std::size_t, std::size_t>> pairs;  // flow index -> (src, dst)
};

SynthTopology synth_topology(std::size_t links, std::size_t flows, std::uint64_t seed);

}  // namespace nta
