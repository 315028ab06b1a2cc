#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "nta/mat.hpp"

namespace nta {

// Linear state-space traffic model: observations y_t = A x_t + noise(R),
// state evolution x_{t+1} = C x_t + noise(Q). Matrices are constant in time;
// the filter itself would work per-step but nothing here needs that.
struct StateSpaceModel {
    Mat a;  // measurement matrix (links x flows)
    Mat c;  // state transition (flows x flows)
    Mat q;  // state noise covariance
    Mat r;  // measurement noise covariance

    void validate() const;
};

struct FilterStep {
    Vec state;        // x̂ after the measurement update
    Vec predicted;    // one-step state prediction used at this step
    Mat cov;          // posterior covariance
    Mat cov_pred;     // prior covariance
    Mat gain;         // Kalman gain
    Vec innovation;   // observation minus predicted observation
    Vec residual;     // gain times innovation
    Vec corrected;    // model-error-corrected residual tau
};

struct FilterTrace {
    std::vector<FilterStep> steps;
    std::vector<std::string> warnings;
};

// Runs the filter over observations (one row per time step). Covariance
// updates use the Joseph form, which keeps the posterior symmetric PSD.
// Near-singular residual covariances are solved with a jittered system and a
// warning is recorded.
FilterTrace kalman_filter(const StateSpaceModel& model, const Mat& observations, const Vec& x0,
                          const Mat& p0);

enum class ResidualMethod { Variance, Cusum, Glr, Multiscale, VarShift };

std::string residual_method_name(ResidualMethod method);
ResidualMethod residual_method_from_name(const std::string& name);

struct DetectParams {
    double threshold = 2.0;   // T_h
    double mu0 = 0.0;         // pre-change mean (cusum)
    double mu1 = 1.0;         // post-change mean (cusum)
    double sigma = 1.0;       // noise scale for the likelihood increments
    std::size_t window = 10;  // glr level-estimation window; var_shift local window
    std::size_t scales = 3;   // multiscale cascade depth
    std::size_t quorum = 0;   // multiscale votes required; 0 means ceil(scales/2)
    Vec scale;                // variance method: per-step sqrt(P); empty means 1
};

struct DetectResult {
    std::vector<std::size_t> alarms;  // alarmed time indices
    Vec score;                        // per-step detector statistic
    long change_time = -1;            // cusum/glr change-point estimate at first alarm
};

// Change detection on the corrected residual series. Every method fills
// `score` for ROC sweeps; `alarms` applies the method's threshold rule.
DetectResult detect_residuals(const Vec& tau, ResidualMethod method, const DetectParams& params);

}  // namespace nta
