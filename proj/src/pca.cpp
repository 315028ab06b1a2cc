#include "nta/pca.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "nta/stats.hpp"

namespace nta {

Normalized normalize_columns(const Mat& a, bool unit_variance) {
    if (a.rows < 2) throw std::invalid_argument("normalize_columns: need at least 2 rows");
    Normalized out;
    out.x = a;
    out.means.assign(a.cols, 0.0);
    out.scales.assign(a.cols, 1.0);
    const double m = static_cast<double>(a.rows);
    for (std::size_t j = 0; j < a.cols; ++j) {
        double mu = 0.0;
        for (std::size_t i = 0; i < a.rows; ++i) mu += a(i, j);
        mu /= m;
        out.means[j] = mu;
        for (std::size_t i = 0; i < a.rows; ++i) out.x(i, j) -= mu;
        if (unit_variance) {
            double var = 0.0;
            for (std::size_t i = 0; i < a.rows; ++i) var += out.x(i, j) * out.x(i, j);
            var /= m;
            if (var > 1e-24) {
                double s = std::sqrt(var);
                out.scales[j] = s;
                for (std::size_t i = 0; i < a.rows; ++i) out.x(i, j) /= s;
            }
        }
    }
    return out;
}

PcaModel fit_pca(const Mat& x_centered) {
    const std::size_t m = x_centered.rows, n = x_centered.cols;
    if (m == 0 || n == 0) throw std::invalid_argument("fit_pca: empty matrix");
    Mat c(n, n);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i; j < n; ++j) {
            double s = 0.0;
            for (std::size_t r = 0; r < m; ++r) s += x_centered(r, i) * x_centered(r, j);
            s /= static_cast<double>(m);
            c(i, j) = s;
            c(j, i) = s;
        }
    }
    auto eig = sym_eigen(c);
    PcaModel model;
    model.axes = std::move(eig.vectors);
    model.variances = std::move(eig.values);
    for (double& v : model.variances) v = std::max(v, 0.0);  // clip eigensolver noise
    model.k = n;
    model.col_means.assign(n, 0.0);
    model.col_scales.assign(n, 1.0);
    return model;
}

PcaModel fit_pca(const Normalized& nx) {
    PcaModel model = fit_pca(nx.x);
    model.col_means = nx.means;
    model.col_scales = nx.scales;
    return model;
}

Vec normalize_row(const PcaModel& model, const Vec& raw) {
    if (raw.size() != model.col_means.size())
        throw std::invalid_argument("normalize_row: dimension mismatch");
    Vec x(raw.size());
    for (std::size_t j = 0; j < raw.size(); ++j)
        x[j] = (raw[j] - model.col_means[j]) / model.col_scales[j];
    return x;
}

Vec project_normal(const PcaModel& model, const Vec& x) {
    const std::size_t n = model.axes.rows;
    if (x.size() != n) throw std::invalid_argument("project_normal: dimension mismatch");
    Vec p(n, 0.0);
    for (std::size_t j = 0; j < model.k; ++j) {
        double c = 0.0;
        for (std::size_t i = 0; i < n; ++i) c += model.axes(i, j) * x[i];
        for (std::size_t i = 0; i < n; ++i) p[i] += c * model.axes(i, j);
    }
    return p;
}

Vec residual_vector(const PcaModel& model, const Vec& x) {
    Vec p = project_normal(model, x);
    Vec r(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) r[i] = x[i] - p[i];
    return r;
}

Mat projection_matrix(const PcaModel& model) {
    const std::size_t n = model.axes.rows;
    Mat p(n, n);
    for (std::size_t j = 0; j < model.k; ++j)
        for (std::size_t r = 0; r < n; ++r)
            for (std::size_t c = 0; c < n; ++c)
                p(r, c) += model.axes(r, j) * model.axes(c, j);
    return p;
}

std::size_t split_subspace(const Mat& x_centered, const PcaModel& model, double sigma_mult) {
    const std::size_t m = x_centered.rows, n = x_centered.cols;
    if (model.axes.rows != n) throw std::invalid_argument("split_subspace: model mismatch");
    for (std::size_t axis = 0; axis < n; ++axis) {
        Vec proj(m, 0.0);
        for (std::size_t r = 0; r < m; ++r) {
            double s = 0.0;
            for (std::size_t i = 0; i < n; ++i) s += x_centered(r, i) * model.axes(i, axis);
            proj[r] = s;
        }
        double mu = mean(proj);
        double sd = std::sqrt(variance_pop(proj));
        if (sd <= 0.0) continue;
        for (double v : proj) {
            if (std::fabs(v - mu) > sigma_mult * sd) {
                // First deviating axis belongs to the anomalous side.
                return std::max<std::size_t>(axis, 1);
            }
        }
    }
    return n;
}

double q_threshold(const Vec& residual_variances, double alpha) {
    if (!(alpha > 0.0 && alpha < 1.0))
        throw std::invalid_argument("q_threshold: alpha must be in (0,1)");
    double phi1 = 0.0, phi2 = 0.0, phi3 = 0.0;
    for (double lam : residual_variances) {
        phi1 += lam;
        phi2 += lam * lam;
        phi3 += lam * lam * lam;
    }
    if (phi1 <= 0.0 || phi2 <= 0.0) throw std::runtime_error("q_threshold: empty residual subspace");
    double h0 = 1.0 - 2.0 * phi1 * phi3 / (3.0 * phi2 * phi2);
    double c = normal_quantile(1.0 - alpha);
    double inner = c * std::sqrt(2.0 * phi2 * h0 * h0) / phi1 +
                   phi2 * h0 * (h0 - 1.0) / (phi1 * phi1) + 1.0;
    if (inner <= 0.0) return 0.0;  // extreme alpha; threshold collapses
    return phi1 * std::pow(inner, 1.0 / h0);
}

SpeResult spe_detect(const Vec& x_normalized, const PcaModel& model, double alpha) {
    if (model.k >= model.variances.size())
        throw std::runtime_error("q_threshold: empty residual subspace");
    Vec res = residual_vector(model, x_normalized);
    SpeResult r;
    r.spe = norm2sq(res);
    Vec rv(model.variances.begin() + static_cast<long>(model.k), model.variances.end());
    r.threshold = q_threshold(rv, alpha);
    r.alarm = r.spe > r.threshold;
    return r;
}

IdentifyResult identify_quantify(const Vec& x_normalized, const PcaModel& model,
                                 const std::vector<AnomalyDirection>& directions) {
    if (directions.empty()) throw std::invalid_argument("identify_quantify: no candidates");
    Vec x2 = residual_vector(model, x_normalized);
    IdentifyResult best;
    bool found = false;
    double best_dist = 0.0;
    for (std::size_t i = 0; i < directions.size(); ++i) {
        const auto& dir = directions[i];
        Vec th2 = residual_vector(model, dir.theta);
        double n2 = norm2sq(th2);
        if (std::sqrt(n2) <= 1e-9) {
            best.skipped.push_back(dir.label.empty() ? std::to_string(i) : dir.label);
            continue;
        }
        double f = dot(th2, x2) / n2;
        // Residual of x after removing the hypothesized anomaly along theta_i.
        Vec rem(x2.size());
        for (std::size_t j = 0; j < x2.size(); ++j) rem[j] = x2[j] - th2[j] * f;
        double d = norm2(rem);
        if (!found || d < best_dist) {
            found = true;
            best_dist = d;
            best.index = i;
            best.magnitude = f;
            best.anomalous.assign(x_normalized.size(), 0.0);
            for (std::size_t j = 0; j < x_normalized.size(); ++j)
                best.anomalous[j] = dir.theta[j] * f;
        }
    }
    if (!found) {
        std::string msg = "identify_quantify: all candidates undetectable:";
        for (const auto& s : best.skipped) msg += " " + s;
        throw std::runtime_error(msg);
    }
    return best;
}

std::optional<double> detectability_bound(const Vec& theta, const PcaModel& model, double alpha) {
    Vec th2 = residual_vector(model, theta);
    double n2 = norm2(th2);
    if (n2 <= 1e-9) return std::nullopt;
    Vec rv(model.variances.begin() + static_cast<long>(model.k), model.variances.end());
    double delta = std::sqrt(q_threshold(rv, alpha));
    return 2.0 * delta / n2;
}

double sample_entropy(const Histogram& h) {
    std::uint64_t total = h.total();
    if (total == 0) throw std::runtime_error("sample_entropy: empty histogram");
    double s = static_cast<double>(total);
    double out = 0.0;
    for (const auto& [v, c] : h.counts) {
        if (c == 0) continue;
        double p = static_cast<double>(c) / s;
        out -= p * std::log2(p);
    }
    return out;
}

EntropyMatrix multiway_recast(const EntropyTensor& h) {
    EntropyMatrix em;
    em.p = h.p;
    em.values = Mat(h.t, 4 * h.p);
    for (std::size_t ti = 0; ti < h.t; ++ti)
        for (std::size_t fi = 0; fi < 4; ++fi)
            for (std::size_t pi = 0; pi < h.p; ++pi)
                em.values(ti, fi * h.p + pi) = h.at(ti, pi, fi);
    return em;
}

LaggedPcaResult lagged_pca(const Mat& x, std::size_t lags, std::size_t keep_axes,
                           std::size_t keep_lag_modes) {
    const std::size_t m = x.rows, n = x.cols;
    if (lags < 1) throw std::invalid_argument("lagged_pca: lags must be >= 1");
    if (lags >= m) throw std::invalid_argument("lagged_pca: lags must be < row count");
    if (keep_axes < 1 || keep_lag_modes < 1)
        throw std::invalid_argument("lagged_pca: kept mode counts must be >= 1");

    const std::size_t rows = m - lags + 1, width = n * lags;
    Mat z(rows, width);
    for (std::size_t k = 0; k < rows; ++k)
        for (std::size_t j = 0; j < lags; ++j)
            for (std::size_t c = 0; c < n; ++c)
                z(k, j * n + c) = x(k + lags - 1 - j, c);

    auto nz = normalize_columns(z, false);
    PcaModel model = fit_pca(nz);
    model.k = std::min(keep_axes * keep_lag_modes, width);

    LaggedPcaResult out;
    out.offset = lags - 1;
    out.approximation = Mat(rows, n);
    out.residual = Mat(rows, n);
    for (std::size_t k = 0; k < rows; ++k) {
        Vec zr = nz.x.row(k);
        Vec rec = project_normal(model, zr);
        for (std::size_t c = 0; c < n; ++c) {
            double approx = rec[c] + nz.means[c];  // leading block is x(k+lags-1)
            out.approximation(k, c) = approx;
            out.residual(k, c) = x(k + lags - 1, c) - approx;
        }
    }
    return out;
}

}  // namespace nta
