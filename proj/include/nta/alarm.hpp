#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace nta {

struct Alarm {
    long t_index = 0;
    std::string detector;
    double score = 0.0;
    double threshold = 0.0;
    std::vector<std::string> keys;
};

// Construction helper that enforces the score >= threshold invariant.
Alarm make_alarm(long t_index, std::string detector, double score, double threshold,
                 std::vector<std::string> keys = {});

// One JSON object per line: {"t_index":..,"detector":..,"score":..,"threshold":..,"keys":[..]}
std::string alarm_to_json(const Alarm& a);
void write_alarms(std::ostream& out, const std::vector<Alarm>& alarms);

}  // namespace nta
