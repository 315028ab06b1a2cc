#include "nta/statdetect.hpp"

#include <cmath>
#include <stdexcept>

#include "nta/stats.hpp"

namespace nta {

void GlrConfig::validate() const {
    if (learn_len <= order)
        throw std::invalid_argument("ar_glr: learning window must be longer than the AR order");
    if (test_len <= order)
        throw std::invalid_argument("ar_glr: test window must be longer than the AR order");
}

namespace {

// AR(p) residual variance of one demeaned window, fitted by least squares:
// SSR / (N - p). A perfectly predictable window has no residual variance and
// cannot enter the likelihood ratio.
double ar_residual_variance(const std::vector<double>& window, std::size_t p) {
    std::size_t n = window.size();
    std::vector<double> w(window);
    double mu = mean(w);
    for (double& v : w) v -= mu;
    double ssr = 0.0;
    if (p == 0) {
        for (double v : w) ssr += v * v;
    } else {
        Mat xtx(p, p);
        Mat xty(p, 1);
        for (std::size_t t = p; t < n; ++t)
            for (std::size_t i = 0; i < p; ++i) {
                xty(i, 0) += w[t - 1 - i] * w[t];
                for (std::size_t j = 0; j < p; ++j) xtx(i, j) += w[t - 1 - i] * w[t - 1 - j];
            }
        Mat beta;
        try {
            beta = solve_linear(xtx, xty);
        } catch (const std::runtime_error&) {
            throw std::runtime_error("ar_glr: degenerate window");
        }
        for (std::size_t t = p; t < n; ++t) {
            double pred = 0.0;
            for (std::size_t i = 0; i < p; ++i) pred += beta(i, 0) * w[t - 1 - i];
            double e = w[t] - pred;
            ssr += e * e;
        }
    }
    double variance = ssr / static_cast<double>(n - p);
    if (!(variance > 0.0)) throw std::runtime_error("ar_glr: degenerate window");
    return variance;
}

}  // namespace

double ar_glr(const std::vector<double>& series, std::size_t t_split, const GlrConfig& config) {
    config.validate();
    if (t_split < config.learn_len)
        throw std::invalid_argument("ar_glr: learning window does not fit before the split");
    if (t_split + config.test_len > series.size())
        throw std::invalid_argument("ar_glr: test window does not fit after the split");
    std::vector<double> learn(series.begin() + (t_split - config.learn_len),
                              series.begin() + t_split);
    std::vector<double> test(series.begin() + t_split,
                             series.begin() + (t_split + config.test_len));
    double nl = static_cast<double>(config.learn_len - config.order);
    double ns = static_cast<double>(config.test_len - config.order);
    double var_l = ar_residual_variance(learn, config.order);
    double var_s = ar_residual_variance(test, config.order);
    double var_p = (nl * var_l + ns * var_s) / (nl + ns);
    // eta = L / (L + P) computed in the log domain so large windows cannot
    // overflow: eta = sigmoid(log L - log P).
    double log_l = -nl * std::log(var_l) - ns * std::log(var_s);
    double log_p = -(nl + ns) * std::log(var_p);
    double diff = log_l - log_p;
    if (diff >= 0.0) return 1.0 / (1.0 + std::exp(-diff));
    double e = std::exp(diff);
    return e / (1.0 + e);
}

AnomalyOperator build_operator(const Mat& anomaly_history) {
    if (anomaly_history.rows < 1 || anomaly_history.cols < 1)
        throw std::invalid_argument("build_operator: empty history");
    std::size_t m = anomaly_history.cols;
    double tn = static_cast<double>(anomaly_history.rows);
    AnomalyOperator op;
    op.a_m = Mat(m, m);
    for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = i + 1; j < m; ++j) {
            double acc = 0.0;
            for (std::size_t t = 0; t < anomaly_history.rows; ++t)
                acc += anomaly_history(t, i) * anomaly_history(t, j);
            double v = std::abs(acc) / tn;
            op.a_m(i, j) = v;
            op.a_m(j, i) = v;
        }
    for (std::size_t i = 0; i < m; ++i) {
        double off = 0.0;
        for (std::size_t j = 0; j < m; ++j)
            if (j != i) off += op.a_m(i, j);
        op.a_m(i, i) = 1.0 - off;
    }
    op.eig = sym_eigen(op.a_m);
    return op;
}

CombinedMeasure combined_measure(const Vec& phi, const AnomalyOperator& op,
                                 const std::vector<std::size_t>& anomalous) {
    std::size_t m = op.a_m.rows;
    if (phi.size() != m) throw std::invalid_argument("combined_measure: dimension mismatch");
    CombinedMeasure out;
    out.coefficients.resize(m);
    for (std::size_t i = 0; i < m; ++i) {
        double c = dot(op.eig.vectors.col(i), phi);
        out.coefficients[i] = c;
        out.energy += c * c * op.eig.values[i];
    }
    bool first = true;
    auto consider = [&](std::size_t idx) {
        if (idx >= m) throw std::invalid_argument("combined_measure: eigenvalue index out of range");
        if (first || op.eig.values[idx] < out.lambda_min) out.lambda_min = op.eig.values[idx];
        first = false;
    };
    if (anomalous.empty())
        for (std::size_t i = 0; i < m; ++i) consider(i);
    else
        for (std::size_t idx : anomalous) consider(idx);
    out.alarm = out.energy > out.lambda_min;
    return out;
}

AstuteResult astute_test(const Mat& volumes, double p) {
    if (volumes.cols != 2)
        throw std::invalid_argument("astute: need exactly two time-slot columns");
    if (volumes.rows < 2) throw std::invalid_argument("astute: need at least two flows");
    if (!(p > 0.0 && p < 1.0)) throw std::invalid_argument("astute: p must lie in (0, 1)");
    std::size_t flows = volumes.rows;
    std::vector<double> deltas(flows);
    for (std::size_t f = 0; f < flows; ++f) deltas[f] = volumes(f, 1) - volumes(f, 0);
    AstuteResult out;
    out.mean = mean(deltas);
    out.stddev = std::sqrt(variance_sample(deltas));
    double z = normal_quantile(1.0 - p / 2.0);
    double half = z * out.stddev / std::sqrt(static_cast<double>(flows));
    out.ci_low = out.mean - half;
    out.ci_high = out.mean + half;
    // A zero-width interval away from zero is a degenerate but certain shift.
    out.alarm = out.ci_low > 0.0 || out.ci_high < 0.0 ||
                (out.stddev == 0.0 && out.mean != 0.0);
    return out;
}

}  // namespace nta
