#pragma once

#include <cstddef>
#include <string>
#include <vector>

namespace nta {

// Redundant filter bank: one lowpass plus m >= 1 highpass filters, analyzed
// with decimation by 2 and periodic boundary. Synthesis is the adjoint of
// analysis, so perfect reconstruction holds exactly when the bank is a tight
// frame (the shipped spline framelet is; custom banks are checked only for
// the vanishing-moment contract).
struct FilterBank {
    std::vector<double> lowpass;
    std::vector<std::vector<double>> highpass;

    void validate() const;

    // Cubic spline framelet: lowpass (1,4,6,4,1)/16 and four highpass
    // filters sqrt(C(4,i)) ((1-z)/2)^i ((1+z)/2)^(4-i), i = 1..4. Tight
    // frame; highpass i has i vanishing moments.
    static FilterBank spline_framelet();
};

struct BandDecomposition {
    // detail[j][i] holds level j+1 coefficients of highpass filter i.
    std::vector<std::vector<std::vector<double>>> detail;
    std::vector<double> approx;  // lowpass output at the deepest level
    std::size_t signal_length = 0;

    std::size_t levels() const { return detail.size(); }
};

BandDecomposition analyze(const std::vector<double>& x, const FilterBank& bank,
                          std::size_t levels);
std::vector<double> synthesize(const BandDecomposition& decomp, const FilterBank& bank);

struct BandSplit {
    std::vector<double> low, mid, high;
    std::size_t levels = 0;       // analysis depth used
    std::size_t high_levels = 0;  // finest levels assigned to the H part
    std::size_t mid_levels = 0;   // next levels assigned to the M part
};

// Decompose into low/mid/high frequency parts. Level bands follow fixed
// fractions (5/12, 3/12, 4/12) of the analysis depth, which is capped at 12.
// Coefficients in the H band with magnitude <= high_threshold are dropped.
BandSplit band_split(const std::vector<double>& x, const FilterBank& bank,
                     double high_threshold = 0.0);

struct VAlarm {
    std::size_t start = 0;   // first index of the above-threshold run
    std::size_t width = 0;   // run length
    double peak = 0.0;       // maximum V inside the run
};

struct VSignalResult {
    std::vector<double> v;
    std::vector<VAlarm> alarms;
    std::vector<std::string> warnings;
};

// V(t) = w_h * localvar(H, t) + w_m * localvar(M, t) where localvar is the
// population variance over the trailing window of length `window` (zero
// during warm-up). Parts are standardized to unit variance first; a
// zero-variance part is used as-is and a warning is recorded.
VSignalResult local_variability_detect(const std::vector<double>& mid,
                                       const std::vector<double>& high, std::size_t window,
                                       double w_mid, double w_high, double threshold);

}  // namespace nta
