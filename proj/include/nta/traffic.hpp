#pragma once

#include <functional>
#include <string>
#include <vector>

#include "nta/flow.hpp"
#include "nta/mat.hpp"

namespace nta {

// Time-binned volume matrix: rows are consecutive bins, columns are series
// (links, destination hosts, 5-tuples, ... whatever the key selector yields).
struct TrafficMatrix {
    Mat values;
    double bin_width = 300.0;
    std::vector<std::string> series_ids;
    double t0 = 0.0;
};

enum class Volume { Bytes, Packets };

using SeriesKey = std::function<std::string(const FlowRecord&)>;

SeriesKey key_by(Feature f);
SeriesKey key_five_tuple();

TrafficMatrix bin_traffic(const std::vector<FlowRecord>& records, double bin_width,
                          const SeriesKey& key, Volume volume = Volume::Bytes);

}  // namespace nta
