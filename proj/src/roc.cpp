#include "nta/roc.hpp"

#include <algorithm>
#include <numeric>
#include <ostream>
#include <stdexcept>

#include "nta/io.hpp"

namespace nta {

RocCurve roc_curve(const std::vector<double>& scores, const std::vector<bool>& labels) {
    if (scores.size() != labels.size())
        throw std::invalid_argument("roc: scores and labels must have equal length");
    std::size_t pos = 0;
    for (bool l : labels) pos += l ? 1 : 0;
    std::size_t neg = labels.size() - pos;
    if (pos == 0 || neg == 0)
        throw std::invalid_argument("roc: need at least one positive and one negative label");

    std::vector<std::size_t> order(scores.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(),
              [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });

    RocCurve curve;
    curve.points.push_back({0.0, 0.0});
    std::size_t tp = 0, fp = 0;
    for (std::size_t i = 0; i < order.size();) {
        // Advance through the whole tie group before emitting a point.
        double s = scores[order[i]];
        while (i < order.size() && scores[order[i]] == s) {
            if (labels[order[i]])
                ++tp;
            else
                ++fp;
            ++i;
        }
        curve.points.push_back({static_cast<double>(fp) / static_cast<double>(neg),
                                static_cast<double>(tp) / static_cast<double>(pos)});
    }
    double auc = 0.0;
    for (std::size_t i = 1; i < curve.points.size(); ++i)
        auc += 0.5 * (curve.points[i].tpr + curve.points[i - 1].tpr) *
               (curve.points[i].fpr - curve.points[i - 1].fpr);
    curve.auc = auc;
    return curve;
}

void write_roc_csv(std::ostream& os, const RocCurve& curve) {
    os << "fpr,tpr\n";
    for (const RocPoint& p : curve.points)
        os << format_double(p.fpr) << ',' << format_double(p.tpr) << '\n';
    os << "auc=" << format_double(curve.auc) << '\n';
}

}  // namespace nta
