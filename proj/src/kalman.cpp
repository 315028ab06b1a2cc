#include "nta/kalman.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "nta/stats.hpp"

namespace nta {

namespace {

void require_symmetric_psd(const Mat& m, const char* name) {
    if (m.rows != m.cols) throw std::invalid_argument(std::string("kalman: ") + name + " not square");
    double mx = 0.0;
    for (double v : m.a) mx = std::max(mx, std::abs(v));
    for (std::size_t i = 0; i < m.rows; ++i)
        for (std::size_t j = i + 1; j < m.cols; ++j)
            if (std::abs(m(i, j) - m(j, i)) > 1e-9 * std::max(mx, 1.0))
                throw std::invalid_argument(std::string("kalman: ") + name + " not symmetric");
    EigenResult eig = sym_eigen(m);
    for (double v : eig.values)
        if (v < -1e-8 * std::max(mx, 1.0))
            throw std::invalid_argument(std::string("kalman: ") + name +
                                        " not positive semidefinite");
}

// Solve s x = b, falling back to the jittered solver when s is singular.
Mat solve_possibly_singular(const Mat& s, const Mat& b, std::vector<std::string>& warnings,
                            const char* what) {
    try {
        return solve_linear(s, b);
    } catch (const std::runtime_error&) {
        warnings.push_back(std::string(what) + " near singular; solved with jitter");
        return solve_regularized(s, b);
    }
}

}  // namespace

void StateSpaceModel::validate() const {
    if (a.rows == 0 || a.cols == 0) throw std::invalid_argument("kalman: empty measurement matrix");
    if (c.rows != a.cols || c.cols != a.cols)
        throw std::invalid_argument("kalman: state transition shape mismatch");
    if (q.rows != a.cols || q.cols != a.cols)
        throw std::invalid_argument("kalman: state noise covariance shape mismatch");
    if (r.rows != a.rows || r.cols != a.rows)
        throw std::invalid_argument("kalman: measurement noise covariance shape mismatch");
    require_symmetric_psd(q, "Q");
    require_symmetric_psd(r, "R");
}

FilterTrace kalman_filter(const StateSpaceModel& model, const Mat& observations, const Vec& x0,
                          const Mat& p0) {
    model.validate();
    std::size_t flows = model.a.cols;
    std::size_t links = model.a.rows;
    if (observations.cols != links)
        throw std::invalid_argument("kalman: observation width must match measurement rows");
    if (x0.size() != flows) throw std::invalid_argument("kalman: x0 size mismatch");
    require_symmetric_psd(p0, "P0");
    if (p0.rows != flows) throw std::invalid_argument("kalman: P0 shape mismatch");

    FilterTrace trace;
    trace.steps.reserve(observations.rows);
    Mat at = transpose(model.a);
    Mat ct = transpose(model.c);
    Vec x = x0;
    Mat p = p0;
    for (std::size_t t = 0; t < observations.rows; ++t) {
        FilterStep step;
        // Prediction.
        step.predicted = matvec(model.c, x);
        step.cov_pred = matmul(matmul(model.c, p), ct) + model.q;
        // Gain from the innovation covariance A P A^T + R.
        Mat s_innov = matmul(matmul(model.a, step.cov_pred), at) + model.r;
        Mat gain_t = solve_possibly_singular(s_innov, matmul(model.a, step.cov_pred),
                                             trace.warnings, "innovation covariance");
        step.gain = transpose(gain_t);
        // Measurement update.
        Vec y = observations.row(t);
        Vec predicted_y = matvec(model.a, step.predicted);
        step.innovation.resize(links);
        for (std::size_t i = 0; i < links; ++i) step.innovation[i] = y[i] - predicted_y[i];
        Vec corr = matvec(step.gain, step.innovation);
        step.state.resize(flows);
        for (std::size_t i = 0; i < flows; ++i) step.state[i] = step.predicted[i] + corr[i];
        // Joseph-form covariance update keeps symmetry and PSD-ness.
        Mat ika = identity(flows) - matmul(step.gain, model.a);
        step.cov = matmul(matmul(ika, step.cov_pred), transpose(ika)) +
                   matmul(matmul(step.gain, model.r), transpose(step.gain));
        step.residual = corr;
        // Corrected residual tau = -K A P_pred S^-1 eta with S = cov of eta.
        Mat s_eta = matmul(matmul(step.gain, s_innov), transpose(step.gain));
        Mat eta_col(flows, 1);
        for (std::size_t i = 0; i < flows; ++i) eta_col(i, 0) = step.residual[i];
        Mat s_inv_eta =
            solve_possibly_singular(s_eta, eta_col, trace.warnings, "residual covariance");
        Vec tail = matvec(step.cov_pred, s_inv_eta.col(0));
        Vec tau = matvec(step.gain, matvec(model.a, tail));
        step.corrected.resize(flows);
        for (std::size_t i = 0; i < flows; ++i) step.corrected[i] = -tau[i];
        x = step.state;
        p = step.cov;
        trace.steps.push_back(std::move(step));
    }
    return trace;
}

std::string residual_method_name(ResidualMethod method) {
    switch (method) {
        case ResidualMethod::Variance: return "variance";
        case ResidualMethod::Cusum: return "cusum";
        case ResidualMethod::Glr: return "glr";
        case ResidualMethod::Multiscale: return "multiscale";
        case ResidualMethod::VarShift: return "var_shift";
    }
    throw std::logic_error("kalman: unknown method");
}

ResidualMethod residual_method_from_name(const std::string& name) {
    if (name == "variance") return ResidualMethod::Variance;
    if (name == "cusum") return ResidualMethod::Cusum;
    if (name == "glr") return ResidualMethod::Glr;
    if (name == "multiscale") return ResidualMethod::Multiscale;
    if (name == "var_shift") return ResidualMethod::VarShift;
    throw std::invalid_argument("kalman: unknown detection method '" + name + "'");
}

namespace {

DetectResult detect_variance(const Vec& tau, const DetectParams& params) {
    if (!params.scale.empty() && params.scale.size() != tau.size())
        throw std::invalid_argument("kalman: scale vector length mismatch");
    DetectResult out;
    out.score.resize(tau.size());
    for (std::size_t t = 0; t < tau.size(); ++t) {
        double s = params.scale.empty() ? 1.0 : params.scale[t];
        out.score[t] = s > 0.0 ? tau[t] / s : 0.0;
        if (out.score[t] > params.threshold) out.alarms.push_back(t);
    }
    return out;
}

// Gaussian mean-shift log-likelihood increment for one observation.
double llr_increment(double x, double mu0, double mu1, double sigma) {
    double s2 = sigma * sigma;
    return (mu1 - mu0) / s2 * (x - 0.5 * (mu0 + mu1));
}

// Shared CUSUM recursion: level[t] supplies the post-change mean for step t.
DetectResult cusum_core(const Vec& tau, const Vec& level, const DetectParams& params) {
    DetectResult out;
    out.score.resize(tau.size());
    double sum = 0.0, run_min = 0.0;
    std::size_t argmin = 0;
    bool have_min = false;
    for (std::size_t t = 0; t < tau.size(); ++t) {
        sum += llr_increment(tau[t], params.mu0, level[t], params.sigma);
        if (!have_min || sum < run_min) {
            run_min = sum;
            argmin = t;
            have_min = true;
        }
        // The decision statistic compares against the running minimum of
        // partial sums, with the empty prefix contributing zero.
        out.score[t] = sum - std::min(run_min, 0.0);
        if (out.score[t] > params.threshold) {
            // Change-point estimate: index of the minimizing partial sum, or
            // the series start when the empty prefix is the minimum.
            if (out.alarms.empty())
                out.change_time = run_min < 0.0 ? static_cast<long>(argmin) : 0;
            out.alarms.push_back(t);
        }
    }
    return out;
}

DetectResult detect_cusum(const Vec& tau, const DetectParams& params) {
    Vec level(tau.size(), params.mu1);
    return cusum_core(tau, level, params);
}

DetectResult detect_glr(const Vec& tau, const DetectParams& params) {
    if (params.window < 1) throw std::invalid_argument("kalman: glr window must be >= 1");
    Vec level(tau.size(), 0.0);
    double sum = 0.0;
    for (std::size_t t = 0; t < tau.size(); ++t) {
        sum += tau[t];
        if (t >= params.window) sum -= tau[t - params.window];
        std::size_t n = std::min<std::size_t>(t + 1, params.window);
        level[t] = sum / static_cast<double>(n);
    }
    return cusum_core(tau, level, params);
}

// Causal a-trous Haar cascade: approximations by pairwise averaging at dyadic
// lags, details as consecutive differences. tau = a^L + sum of details.
std::vector<Vec> atrous_details(const Vec& tau, std::size_t scales, Vec& approx) {
    std::vector<Vec> details;
    approx = tau;
    for (std::size_t i = 1; i <= scales; ++i) {
        std::size_t lag = std::size_t{1} << (i - 1);
        Vec next(approx.size());
        for (std::size_t t = 0; t < approx.size(); ++t) {
            std::size_t back = t >= lag ? t - lag : 0;
            next[t] = 0.5 * (approx[t] + approx[back]);
        }
        Vec d(approx.size());
        for (std::size_t t = 0; t < approx.size(); ++t) d[t] = approx[t] - next[t];
        details.push_back(std::move(d));
        approx = std::move(next);
    }
    return details;
}

DetectResult detect_multiscale(const Vec& tau, const DetectParams& params) {
    if (params.scales < 1) throw std::invalid_argument("kalman: need at least one scale");
    std::size_t quorum = params.quorum > 0 ? params.quorum : (params.scales + 1) / 2;
    Vec approx;
    std::vector<Vec> details = atrous_details(tau, params.scales, approx);
    DetectResult out;
    out.score.assign(tau.size(), 0.0);
    for (const Vec& d : details) {
        double sd = std::sqrt(variance_pop(d));
        if (sd <= 0.0) continue;
        for (std::size_t t = 0; t < d.size(); ++t)
            if (d[t] > params.threshold * sd) out.score[t] += 1.0;
    }
    for (std::size_t t = 0; t < tau.size(); ++t)
        if (out.score[t] >= static_cast<double>(quorum)) out.alarms.push_back(t);
    return out;
}

DetectResult detect_var_shift(const Vec& tau, const DetectParams& params) {
    if (params.window < 2) throw std::invalid_argument("kalman: var_shift window must be >= 2");
    if (tau.size() < params.window)
        throw std::invalid_argument("kalman: series shorter than var_shift window");
    // Detrend by removing the coarse a-trous approximation, then compare the
    // trailing-window variance against the global variance.
    Vec approx;
    atrous_details(tau, params.scales, approx);
    Vec detrended(tau.size());
    for (std::size_t t = 0; t < tau.size(); ++t) detrended[t] = tau[t] - approx[t];
    double global = variance_pop(detrended);
    DetectResult out;
    out.score.assign(tau.size(), 0.0);
    if (global <= 0.0) return out;
    for (std::size_t t = params.window - 1; t < tau.size(); ++t) {
        double sum = 0.0, sumsq = 0.0;
        for (std::size_t i = t + 1 - params.window; i <= t; ++i) {
            sum += detrended[i];
            sumsq += detrended[i] * detrended[i];
        }
        double mu = sum / static_cast<double>(params.window);
        double local = sumsq / static_cast<double>(params.window) - mu * mu;
        out.score[t] = local / global;
        if (out.score[t] > params.threshold) out.alarms.push_back(t);
    }
    return out;
}

}  // namespace

DetectResult detect_residuals(const Vec& tau, ResidualMethod method, const DetectParams& params) {
    if (tau.empty()) throw std::invalid_argument("kalman: empty residual series");
    switch (method) {
        case ResidualMethod::Variance: return detect_variance(tau, params);
        case ResidualMethod::Cusum: return detect_cusum(tau, params);
        case ResidualMethod::Glr: return detect_glr(tau, params);
        case ResidualMethod::Multiscale: return detect_multiscale(tau, params);
        case ResidualMethod::VarShift: return detect_var_shift(tau, params);
    }
    throw std::invalid_argument("kalman: unknown detection method");
}

}  // namespace nta
