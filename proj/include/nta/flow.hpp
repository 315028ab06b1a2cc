#pragma once

#include <cstdint>
#include <istream>
#include <map>
#include <ostream>
#include <string>
#include <vector>

namespace nta {

struct FlowRecord {
    double t = 0.0;           // seconds since epoch
    std::uint32_t sip = 0;
    std::uint32_t dip = 0;
    std::uint16_t sp = 0;
    std::uint16_t dp = 0;
    std::uint8_t proto = 0;
    std::uint64_t packets = 1;
    std::uint64_t bytes = 1;
};

enum class Feature { SIP, DIP, SP, DP, Proto, Packets, Bytes };

const char* feature_name(Feature f);
std::uint64_t feature_value(const FlowRecord& r, Feature f);

// Empirical distribution of one flow feature, counts weighted by packets.
struct Histogram {
    Feature feature = Feature::SIP;
    std::map<std::uint64_t, std::uint64_t> counts;

    std::uint64_t total() const {
        std::uint64_t s = 0;
        for (const auto& [v, c] : counts) s += c;
        return s;
    }
};

// Parses the flow CSV format (header `t,sip,dip,sp,dp,proto,packets,bytes`).
// Throws std::runtime_error naming the offending line on malformed input.
std::vector<FlowRecord> parse_flow_records(std::istream& in);

// Inverse of parse_flow_records; addresses print as dotted quads.
void write_flow_records(std::ostream& out, const std::vector<FlowRecord>& records);

std::uint32_t parse_ipv4(const std::string& s);
std::string format_ipv4(std::uint32_t addr);

// Histogram of one feature over the records falling in bin `bin_index`
// ([t0 + i*bin_width, t0 + (i+1)*bin_width)), counting packets.
Histogram feature_histogram(const std::vector<FlowRecord>& records, Feature feature,
                            double bin_width, double t0, std::size_t bin_index);

}  // namespace nta
