#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "nta/flow.hpp"
#include "nta/mat.hpp"

namespace nta {

// Principal-axes model of a centered traffic matrix. `k` is the dimension of
// the normal subspace; fit_pca leaves it at n until split_subspace (or the
// caller) decides the split.
struct PcaModel {
    Mat axes;            // column i is v_i
    Vec variances;       // descending, eigenvalues of (1/m) X^T X
    std::size_t k = 0;
    Vec col_means;
    Vec col_scales;
};

struct AnomalyDirection {
    Vec theta;           // unit norm
    std::string label;
};

struct Normalized {
    Mat x;
    Vec means;
    Vec scales;
};

// Column centering; optional scaling to unit population variance. Constant
// columns stay at zero with scale 1.
Normalized normalize_columns(const Mat& a, bool unit_variance = false);

PcaModel fit_pca(const Mat& x_centered);
PcaModel fit_pca(const Normalized& nx);

// Applies the model's means/scales to a raw row vector.
Vec normalize_row(const PcaModel& model, const Vec& raw);

// Projection onto the normal subspace and its residual.
Vec project_normal(const PcaModel& model, const Vec& x);
Vec residual_vector(const PcaModel& model, const Vec& x);
Mat projection_matrix(const PcaModel& model);  // P = V_k V_k^T

// 3-sigma rule on the per-axis projection series: k stops just before the
// first axis whose projection contains a sample beyond sigma_mult standard
// deviations. Returns n when nothing triggers; clamped to >= 1.
std::size_t split_subspace(const Mat& x_centered, const PcaModel& model, double sigma_mult = 3.0);

// Q-statistic threshold for the SPE at false-alarm level alpha.
double q_threshold(const Vec& residual_variances, double alpha);

struct SpeResult {
    double spe = 0.0;
    double threshold = 0.0;
    bool alarm = false;
};
SpeResult spe_detect(const Vec& x_normalized, const PcaModel& model, double alpha);

struct IdentifyResult {
    std::size_t index = 0;         // position in the candidate list
    double magnitude = 0.0;        // least-squares estimate of the anomaly size
    Vec anomalous;                 // x - x_hat for the winning candidate
    std::vector<std::string> skipped;  // candidates with no residual component
};
IdentifyResult identify_quantify(const Vec& x_normalized, const PcaModel& model,
                                 const std::vector<AnomalyDirection>& directions);

// Minimal detectable anomaly magnitude along theta; empty when theta has no
// residual component at all.
std::optional<double> detectability_bound(const Vec& theta, const PcaModel& model, double alpha);

double sample_entropy(const Histogram& h);

// t x p x 4 entropy tensor (feature order SIP, DIP, SP, DP).
struct EntropyTensor {
    std::size_t t = 0, p = 0;
    std::vector<double> data;  // (time, flow, feature)

    EntropyTensor() = default;
    EntropyTensor(std::size_t t_, std::size_t p_) : t(t_), p(p_), data(t_ * p_ * 4, 0.0) {}
    double& at(std::size_t ti, std::size_t pi, std::size_t fi) {
        return data[(ti * p + pi) * 4 + fi];
    }
    double at(std::size_t ti, std::size_t pi, std::size_t fi) const {
        return data[(ti * p + pi) * 4 + fi];
    }
};

struct EntropyMatrix {
    Mat values;      // t x 4p, column blocks SIP | DIP | SP | DP of width p
    std::size_t p = 0;
};

EntropyMatrix multiway_recast(const EntropyTensor& h);

struct LaggedPcaResult {
    Mat approximation;   // rows J-1 .. m-1 of the input's time range
    Mat residual;
    std::size_t offset = 0;  // first input row covered
};

// Lag-stacked (temporal) PCA: rows (x(k), x(k-1), ..., x(k-J+1)) of width N*J,
// reconstruction with the top L*M principal components.
LaggedPcaResult lagged_pca(const Mat& x, std::size_t lags, std::size_t keep_axes,
                           std::size_t keep_lag_modes);

}  // namespace nta
