#include "nta/traffic.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <sstream>
#include <stdexcept>

namespace nta {

SeriesKey key_by(Feature f) {
    return [f](const FlowRecord& r) -> std::string {
        switch (f) {
            case Feature::SIP: return format_ipv4(r.sip);
            case Feature::DIP: return format_ipv4(r.dip);
            default: return std::to_string(feature_value(r, f));
        }
    };
}

SeriesKey key_five_tuple() {
    return [](const FlowRecord& r) {
        std::ostringstream os;
        os << format_ipv4(r.sip) << ':' << r.sp << '>' << format_ipv4(r.dip) << ':' << r.dp
           << '/' << static_cast<int>(r.proto);
        return os.str();
    };
}

TrafficMatrix bin_traffic(const std::vector<FlowRecord>& records, double bin_width,
                          const SeriesKey& key, Volume volume) {
    if (bin_width <= 0.0) throw std::invalid_argument("bin_traffic: bin_width must be positive");
    if (records.empty()) throw std::invalid_argument("bin_traffic: no records");

    double t_min = records[0].t, t_max = records[0].t;
    for (const auto& r : records) {
        t_min = std::min(t_min, r.t);
        t_max = std::max(t_max, r.t);
    }
    std::size_t bins = static_cast<std::size_t>(std::floor((t_max - t_min) / bin_width)) + 1;

    // Columns ordered by key string so the layout is independent of record order.
    std::map<std::string, std::size_t> col_of;
    for (const auto& r : records) col_of.emplace(key(r), 0);
    std::size_t next = 0;
    for (auto& [k, idx] : col_of) idx = next++;

    TrafficMatrix tm;
    tm.bin_width = bin_width;
    tm.t0 = t_min;
    tm.values = Mat(bins, col_of.size());
    tm.series_ids.resize(col_of.size());
    for (const auto& [k, idx] : col_of) tm.series_ids[idx] = k;

    for (const auto& r : records) {
        auto bin = static_cast<std::size_t>(std::floor((r.t - t_min) / bin_width));
        if (bin >= bins) bin = bins - 1;  // t_max lands exactly on the upper edge
        double v = (volume == Volume::Bytes) ? static_cast<double>(r.bytes)
                                             : static_cast<double>(r.packets);
        tm.values(bin, col_of[key(r)]) += v;
    }
    return tm;
}

}  // namespace nta
