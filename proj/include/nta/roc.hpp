#pragma once

#include <iosfwd>
#include <vector>

namespace nta {

struct RocPoint {
    double fpr = 0.0;
    double tpr = 0.0;
};

struct RocCurve {
    std::vector<RocPoint> points;  // sorted by fpr, starts at (0,0), ends at (1,1)
    double auc = 0.0;
};

// Threshold sweep over scores against binary labels (true = positive). Tied
// scores move together. Needs at least one positive and one negative label.
RocCurve roc_curve(const std::vector<double>& scores, const std::vector<bool>& labels);

// CSV rows `fpr,tpr` followed by a trailing `auc=<value>` line.
void write_roc_csv(std::ostream& os, const RocCurve& curve);

}  // namespace nta
