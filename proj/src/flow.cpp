#include "nta/flow.hpp"

#include <cmath>
#include <charconv>
#include <sstream>
#include <stdexcept>

#include "nta/io.hpp"

namespace nta {

const char* feature_name(Feature f) {
    switch (f) {
        case Feature::SIP: return "sip";
        case Feature::DIP: return "dip";
        case Feature::SP: return "sp";
        case Feature::DP: return "dp";
        case Feature::Proto: return "proto";
        case Feature::Packets: return "packets";
        case Feature::Bytes: return "bytes";
    }
    return "?";
}

std::uint64_t feature_value(const FlowRecord& r, Feature f) {
    switch (f) {
        case Feature::SIP: return r.sip;
        case Feature::DIP: return r.dip;
        case Feature::SP: return r.sp;
        case Feature::DP: return r.dp;
        case Feature::Proto: return r.proto;
        case Feature::Packets: return r.packets;
        case Feature::Bytes: return r.bytes;
    }
    return 0;
}

namespace {

[[noreturn]] void bad_line(std::size_t line_no, const std::string& why) {
    throw std::runtime_error("flow csv: line " + std::to_string(line_no) + ": " + why);
}

std::vector<std::string> split_csv(const std::string& line) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : line) {
        if (c == ',') {
            out.push_back(cur);
            cur.clear();
        } else if (c != '\r') {
            cur.push_back(c);
        }
    }
    out.push_back(cur);
    return out;
}

std::uint64_t parse_u64(const std::string& s, std::size_t line_no, const char* field,
                        std::uint64_t maxval) {
    std::uint64_t v = 0;
    auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || p != s.data() + s.size())
        bad_line(line_no, std::string("bad ") + field + " value '" + s + "'");
    if (v > maxval) bad_line(line_no, std::string(field) + " out of range: " + s);
    return v;
}

double parse_time(const std::string& s, std::size_t line_no) {
    try {
        std::size_t used = 0;
        double v = std::stod(s, &used);
        if (used != s.size() || !std::isfinite(v)) throw std::invalid_argument("trailing");
        return v;
    } catch (const std::exception&) {
        bad_line(line_no, "bad t value '" + s + "'");
    }
}

}  // namespace

std::uint32_t parse_ipv4(const std::string& s) {
    std::uint32_t addr = 0;
    std::size_t pos = 0;
    for (int octet = 0; octet < 4; ++octet) {
        if (pos >= s.size()) throw std::runtime_error("bad IPv4 address '" + s + "'");
        std::uint32_t v = 0;
        std::size_t start = pos;
        while (pos < s.size() && s[pos] >= '0' && s[pos] <= '9') {
            v = v * 10 + static_cast<std::uint32_t>(s[pos] - '0');
            if (v > 255) throw std::runtime_error("bad IPv4 address '" + s + "'");
            ++pos;
        }
        if (pos == start) throw std::runtime_error("bad IPv4 address '" + s + "'");
        addr = (addr << 8) | v;
        if (octet < 3) {
            if (pos >= s.size() || s[pos] != '.') throw std::runtime_error("bad IPv4 address '" + s + "'");
            ++pos;
        }
    }
    if (pos != s.size()) throw std::runtime_error("bad IPv4 address '" + s + "'");
    return addr;
}

std::string format_ipv4(std::uint32_t addr) {
    std::ostringstream os;
    os << ((addr >> 24) & 0xff) << '.' << ((addr >> 16) & 0xff) << '.' << ((addr >> 8) & 0xff)
       << '.' << (addr & 0xff);
    return os.str();
}

std::vector<FlowRecord> parse_flow_records(std::istream& in) {
    std::vector<FlowRecord> out;
    std::string line;
    std::size_t line_no = 0;
    bool saw_header = false;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty() || (line.size() == 1 && line[0] == '\r')) continue;
        auto fields = split_csv(line);
        if (!saw_header) {
            if (fields.size() != 8 || fields[0] != "t")
                bad_line(line_no, "expected header t,sip,dip,sp,dp,proto,packets,bytes");
            saw_header = true;
            continue;
        }
        if (fields.size() != 8)
            bad_line(line_no, "expected 8 fields, got " + std::to_string(fields.size()));
        FlowRecord r;
        r.t = parse_time(fields[0], line_no);
        try {
            r.sip = parse_ipv4(fields[1]);
            r.dip = parse_ipv4(fields[2]);
        } catch (const std::exception& e) {
            bad_line(line_no, e.what());
        }
        r.sp = static_cast<std::uint16_t>(parse_u64(fields[3], line_no, "sp", 65535));
        r.dp = static_cast<std::uint16_t>(parse_u64(fields[4], line_no, "dp", 65535));
        r.proto = static_cast<std::uint8_t>(parse_u64(fields[5], line_no, "proto", 255));
        r.packets = parse_u64(fields[6], line_no, "packets", UINT64_MAX);
        r.bytes = parse_u64(fields[7], line_no, "bytes", UINT64_MAX);
        if (r.packets < 1) bad_line(line_no, "packets must be >= 1");
        if (r.bytes < r.packets) bad_line(line_no, "bytes must be >= packets");
        out.push_back(r);
    }
    return out;
}

void write_flow_records(std::ostream& out, const std::vector<FlowRecord>& records) {
    out << "t,sip,dip,sp,dp,proto,packets,bytes\n";
    for (const FlowRecord& r : records)
        out << format_double(r.t) << ',' << format_ipv4(r.sip) << ',' << format_ipv4(r.dip) << ','
            << r.sp << ',' << r.dp << ',' << static_cast<unsigned>(r.proto) << ',' << r.packets
            << ',' << r.bytes << '\n';
}

Histogram feature_histogram(const std::vector<FlowRecord>& records, Feature feature,
                            double bin_width, double t0, std::size_t bin_index) {
    Histogram h;
    h.feature = feature;
    double lo = t0 + bin_width * static_cast<double>(bin_index);
    double hi = lo + bin_width;
    for (const auto& r : records) {
        if (r.t >= lo && r.t < hi) h.counts[feature_value(r, feature)] += r.packets;
    }
    return h;
}

}  // namespace nta
