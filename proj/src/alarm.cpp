#include "nta/alarm.hpp"

#include <stdexcept>

#include "json.hpp"

namespace nta {

Alarm make_alarm(long t_index, std::string detector, double score, double threshold,
                 std::vector<std::string> keys) {
    if (!(score >= threshold))
        throw std::logic_error("alarm invariant violated: score < threshold for detector " +
                               detector);
    Alarm a;
    a.t_index = t_index;
    a.detector = std::move(detector);
    a.score = score;
    a.threshold = threshold;
    a.keys = std::move(keys);
    return a;
}

std::string alarm_to_json(const Alarm& a) {
    nlohmann::ordered_json j;
    j["t_index"] = a.t_index;
    j["detector"] = a.detector;
    j["score"] = a.score;
    j["threshold"] = a.threshold;
    j["keys"] = a.keys;
    return j.dump();
}

void write_alarms(std::ostream& out, const std::vector<Alarm>& alarms) {
    for (const auto& a : alarms) out << alarm_to_json(a) << '\n';
}

}  // namespace nta
