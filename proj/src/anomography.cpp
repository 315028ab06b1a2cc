#include "nta/anomography.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <mutex>
#include <stdexcept>

#include "nta/io.hpp"
#include "nta/par.hpp"
#include "nta/pca.hpp"
#include "nta/stats.hpp"
#include "nta/wavelet.hpp"

namespace nta {

namespace {

constexpr double kPi = 3.14159265358979323846;

// Centered PCA projector with k normal axes (k = 0 picks the 3-sigma split).
Mat anomalous_projector(const Mat& y, std::size_t k) {
    Normalized ny = normalize_columns(y);
    PcaModel model = fit_pca(ny);
    if (k == 0) k = split_subspace(ny.x, model);
    if (k > y.cols)
        throw std::invalid_argument("anomography: pca transform asked for " + std::to_string(k) +
                                    " normal axes but the matrix has " + std::to_string(y.cols) +
                                    " columns");
    model.k = k;
    Mat t = identity(y.cols) - projection_matrix(model);
    return t;
}

Mat center_columns(const Mat& y) {
    Mat out = y;
    for (std::size_t j = 0; j < y.cols; ++j) {
        double mu = 0.0;
        for (std::size_t i = 0; i < y.rows; ++i) mu += y(i, j);
        mu /= static_cast<double>(y.rows);
        for (std::size_t i = 0; i < y.rows; ++i) out(i, j) -= mu;
    }
    return out;
}

// Direct DFT pair. Quadratic cost is fine at the window lengths this toolkit
// sees, and keeping it explicit makes the zeroed-harmonic contract obvious.
std::vector<std::complex<double>> dft(const Vec& x) {
    std::size_t n = x.size();
    std::vector<std::complex<double>> f(n);
    for (std::size_t k = 0; k < n; ++k) {
        std::complex<double> acc = 0.0;
        for (std::size_t i = 0; i < n; ++i)
            acc += x[i] * std::polar(1.0, -2.0 * kPi * static_cast<double>(i * k) /
                                              static_cast<double>(n));
        f[k] = acc / static_cast<double>(n);
    }
    return f;
}

Vec idft(const std::vector<std::complex<double>>& f) {
    std::size_t n = f.size();
    Vec x(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        std::complex<double> acc = 0.0;
        for (std::size_t k = 0; k < n; ++k)
            acc += f[k] * std::polar(1.0, 2.0 * kPi * static_cast<double>(i * k) /
                                              static_cast<double>(n));
        x[i] = acc.real();
    }
    return x;
}

Vec fourier_filter(const Vec& series, std::size_t cutoff) {
    auto f = dft(series);
    std::size_t n = f.size();
    for (std::size_t k = 0; k < n; ++k)
        if (k <= cutoff || k + cutoff >= n) f[k] = 0.0;
    return idft(f);
}

Vec wavelet_filter(const Vec& series, std::size_t cutoff, const FilterBank& bank) {
    std::size_t levels = 0;
    while (levels < 12 && series.size() % (std::size_t{2} << levels) == 0 &&
           series.size() >= (std::size_t{2} << levels))
        ++levels;
    if (levels == 0)
        throw std::invalid_argument("anomography: wavelet transform needs an even series length");
    if (cutoff > levels)
        throw std::invalid_argument("anomography: wavelet cutoff " + std::to_string(cutoff) +
                                    " exceeds the available depth " + std::to_string(levels));
    BandDecomposition decomp = analyze(series, bank, levels);
    for (std::size_t j = cutoff; j < decomp.levels(); ++j)
        for (auto& coeffs : decomp.detail[j]) std::fill(coeffs.begin(), coeffs.end(), 0.0);
    std::fill(decomp.approx.begin(), decomp.approx.end(), 0.0);
    return synthesize(decomp, bank);
}

Vec arima_filter(const Vec& series, const ForecastModel& model) {
    Vec err(series.size(), 0.0);
    std::size_t warmup = model.warmup();
    Vec prefix;
    prefix.reserve(series.size());
    for (std::size_t t = 0; t < series.size(); ++t) {
        if (t >= warmup) err[t] = series[t] - forecast_scalar(model, prefix);
        prefix.push_back(series[t]);
    }
    return err;
}

void check_matrix(const Mat& y) {
    if (y.rows < 2 || y.cols < 1)
        throw std::invalid_argument("anomography: need at least 2 time rows and 1 column");
}

}  // namespace

const char* transform_kind_name(TransformKind k) {
    switch (k) {
        case TransformKind::SpatialPca: return "spatial_pca";
        case TransformKind::TemporalPca: return "temporal_pca";
        case TransformKind::Fourier: return "fourier";
        case TransformKind::Wavelet: return "wavelet";
        case TransformKind::Arima: return "arima";
    }
    return "?";
}

TransformKind transform_kind_from_name(const std::string& name) {
    if (name == "spatial_pca") return TransformKind::SpatialPca;
    if (name == "temporal_pca") return TransformKind::TemporalPca;
    if (name == "fourier") return TransformKind::Fourier;
    if (name == "wavelet") return TransformKind::Wavelet;
    if (name == "arima") return TransformKind::Arima;
    throw std::invalid_argument("unknown transform: " + name);
}

void Transform::validate() const {
    switch (kind) {
        case TransformKind::Wavelet:
            if (cutoff < 1)
                throw std::invalid_argument("anomography: wavelet cutoff must be >= 1");
            break;
        case TransformKind::Arima:
            if (arima.kind != ForecastKind::ARIMA0 && arima.kind != ForecastKind::ARIMA1)
                throw std::invalid_argument("anomography: arima transform needs an arima model");
            arima.validate();
            break;
        default: break;
    }
}

Mat apply_transform(const Mat& y, const Transform& transform) {
    check_matrix(y);
    transform.validate();
    switch (transform.kind) {
        case TransformKind::SpatialPca: {
            // Project each time row onto the anomalous link subspace. The
            // projector is symmetric, so right-multiplying the centered
            // matrix applies it to every row.
            Mat t = anomalous_projector(y, transform.k);
            return matmul(center_columns(y), t);
        }
        case TransformKind::TemporalPca: {
            // Same construction with links as samples and time bins as
            // coordinates, which filters along the time axis instead.
            Mat z = transpose(y);
            Mat t = anomalous_projector(z, transform.k);
            return transpose(matmul(center_columns(z), t));
        }
        case TransformKind::Fourier: {
            if (2 * transform.cutoff >= y.rows)
                throw std::invalid_argument(
                    "anomography: fourier cutoff must be below half the series length");
            Mat out(y.rows, y.cols);
            parallel_for(y.cols, [&](std::size_t j) {
                Vec filtered = fourier_filter(y.col(j), transform.cutoff);
                for (std::size_t i = 0; i < y.rows; ++i) out(i, j) = filtered[i];
            });
            return out;
        }
        case TransformKind::Wavelet: {
            FilterBank bank = FilterBank::spline_framelet();
            // Validate depth once so parallel workers cannot throw.
            wavelet_filter(y.col(0), transform.cutoff, bank);
            Mat out(y.rows, y.cols);
            parallel_for(y.cols, [&](std::size_t j) {
                Vec filtered = wavelet_filter(y.col(j), transform.cutoff, bank);
                for (std::size_t i = 0; i < y.rows; ++i) out(i, j) = filtered[i];
            });
            return out;
        }
        case TransformKind::Arima: {
            Mat out(y.rows, y.cols);
            parallel_for(y.cols, [&](std::size_t j) {
                Vec err = arima_filter(y.col(j), transform.arima);
                for (std::size_t i = 0; i < y.rows; ++i) out(i, j) = err[i];
            });
            return out;
        }
    }
    throw std::logic_error("anomography: unreachable transform kind");
}

namespace {

void check_problem(const InferenceProblem& problem) {
    if (problem.a.rows == 0 || problem.a.cols == 0)
        throw std::invalid_argument("anomography: empty matrix");
    if (problem.y.rows != problem.a.rows)
        throw std::invalid_argument("anomography: right-hand side has " +
                                    std::to_string(problem.y.rows) + " rows but A has " +
                                    std::to_string(problem.a.rows));
    bool nonzero = false;
    for (double v : problem.a.a) {
        if (!std::isfinite(v)) throw std::invalid_argument("anomography: matrix is not finite");
        nonzero = nonzero || v != 0.0;
    }
    if (!nonzero) throw std::invalid_argument("anomography: matrix is zero");
}

// Spectral pseudo-inverse of the symmetric PSD Gram matrix A A^T. Eigenvalues
// within a relative tolerance of zero are treated as exact rank deficiency.
Mat gram_pseudoinverse(const Mat& a) {
    Mat gram = matmul(a, transpose(a));
    EigenResult eig = sym_eigen(gram);
    double tol = eig.values.empty() ? 0.0 : std::abs(eig.values.front()) * 1e-12;
    Mat scaled = eig.vectors;
    for (std::size_t j = 0; j < scaled.cols; ++j) {
        double inv = eig.values[j] > tol ? 1.0 / eig.values[j] : 0.0;
        for (std::size_t i = 0; i < scaled.rows; ++i) scaled(i, j) *= inv;
    }
    return matmul(scaled, transpose(eig.vectors));
}

}  // namespace

Mat solve_pseudoinverse(const InferenceProblem& problem) {
    check_problem(problem);
    Mat pinv = matmul(transpose(problem.a), gram_pseudoinverse(problem.a));
    return matmul(pinv, problem.y);
}

OmpResult solve_omp(const InferenceProblem& problem, std::size_t sparsity, double tol) {
    check_problem(problem);
    std::size_t m = problem.a.rows, n = problem.a.cols;
    if (sparsity > n)
        throw std::invalid_argument("anomography: sparsity " + std::to_string(sparsity) +
                                    " exceeds the " + std::to_string(n) + " available atoms");

    Vec col_norm(n, 0.0);
    for (std::size_t j = 0; j < n; ++j) col_norm[j] = norm2(problem.a.col(j));

    OmpResult out;
    out.x = Mat(n, problem.y.cols);
    out.support.resize(problem.y.cols);
    out.residual_norm.assign(problem.y.cols, 0.0);

    for (std::size_t c = 0; c < problem.y.cols; ++c) {
        Vec y = problem.y.col(c);
        Vec residual = y;
        std::vector<std::size_t> support;
        Vec coeffs;
        while (support.size() < sparsity && norm2(residual) > tol) {
            std::size_t best = n;
            double best_corr = 0.0;
            for (std::size_t j = 0; j < n; ++j) {
                if (col_norm[j] == 0.0) continue;
                if (std::find(support.begin(), support.end(), j) != support.end()) continue;
                double corr = std::abs(dot(problem.a.col(j), residual)) / col_norm[j];
                if (corr > best_corr) {
                    best_corr = corr;
                    best = j;
                }
            }
            if (best == n) break;  // residual orthogonal to every remaining atom
            support.push_back(best);

            // Least-squares refit over the current support.
            Mat sub(m, support.size());
            for (std::size_t j = 0; j < support.size(); ++j)
                for (std::size_t i = 0; i < m; ++i) sub(i, j) = problem.a(i, support[j]);
            Mat normal = matmul(transpose(sub), sub);
            Mat rhs(support.size(), 1);
            Vec aty = matvec(transpose(sub), y);
            for (std::size_t j = 0; j < support.size(); ++j) rhs(j, 0) = aty[j];
            Mat sol;
            try {
                sol = solve_linear(normal, rhs);
            } catch (const std::runtime_error&) {
                sol = solve_regularized(normal, rhs);
            }
            coeffs = sol.col(0);
            Vec fitted = matvec(sub, coeffs);
            for (std::size_t i = 0; i < m; ++i) residual[i] = y[i] - fitted[i];
        }
        for (std::size_t j = 0; j < support.size(); ++j) out.x(support[j], c) = coeffs[j];
        out.support[c] = std::move(support);
        out.residual_norm[c] = norm2(residual);
    }
    return out;
}

const char* solver_kind_name(SolverKind k) {
    return k == SolverKind::Pseudoinverse ? "pinv" : "omp";
}

SolverKind solver_kind_from_name(const std::string& name) {
    if (name == "pinv") return SolverKind::Pseudoinverse;
    if (name == "omp") return SolverKind::Omp;
    throw std::invalid_argument("unknown solver: " + name);
}

void AnomographyConfig::validate() const {
    transform.validate();
    if (!(omp_tol >= 0.0)) throw std::invalid_argument("anomography: omp tolerance must be >= 0");
    if (!(alarm_scale > 0.0)) throw std::invalid_argument("anomography: alarm scale must be > 0");
}

AnomographyResult anomography_pipeline(const Mat& y, const Mat& routing,
                                       const AnomographyConfig& config) {
    config.validate();
    check_matrix(y);
    if (y.cols != routing.rows)
        throw std::invalid_argument("anomography: traffic has " + std::to_string(y.cols) +
                                    " links but the routing matrix has " +
                                    std::to_string(routing.rows) + " rows");
    for (double v : routing.a)
        if (!(v >= 0.0 && v <= 1.0))
            throw std::invalid_argument("anomography: routing entries must lie in [0, 1]");

    AnomographyResult out;
    out.y_tilde = apply_transform(y, config.transform);
    out.x_tilde = Mat(y.rows, routing.cols);

    // Each time bin is an independent inverse problem.
    std::mutex error_mutex;
    std::string first_error;
    if (config.solver == SolverKind::Pseudoinverse) {
        Mat pinv = matmul(transpose(routing), gram_pseudoinverse(routing));
        parallel_for(y.rows, [&](std::size_t t) {
            Vec x = matvec(pinv, out.y_tilde.row(t));
            for (std::size_t j = 0; j < routing.cols; ++j) out.x_tilde(t, j) = x[j];
        });
    } else {
        parallel_for(y.rows, [&](std::size_t t) {
            try {
                InferenceProblem problem;
                problem.a = routing;
                problem.y = Mat(routing.rows, 1);
                Vec rhs = out.y_tilde.row(t);
                for (std::size_t i = 0; i < routing.rows; ++i) problem.y(i, 0) = rhs[i];
                OmpResult sol = solve_omp(problem, config.omp_sparsity, config.omp_tol);
                for (std::size_t j = 0; j < routing.cols; ++j) out.x_tilde(t, j) = sol.x(j, 0);
            } catch (const std::exception& e) {
                std::lock_guard<std::mutex> lock(error_mutex);
                if (first_error.empty()) first_error = e.what();
            }
        });
        if (!first_error.empty()) throw std::runtime_error(first_error);
    }

    for (std::size_t t = 0; t < out.x_tilde.rows; ++t) {
        Vec row = out.x_tilde.row(t);
        double threshold = config.alarm_scale * mad(row);
        // A zero MAD means the bin has no dispersion to calibrate against
        // (all-zero traffic, or a solution sparser than half the flows), so
        // the rule stays silent rather than alarming on every nonzero entry.
        if (!(threshold > 0.0)) continue;
        double peak = 0.0;
        std::vector<std::string> keys;
        for (std::size_t j = 0; j < row.size(); ++j)
            if (std::abs(row[j]) > threshold) {
                keys.push_back("flow:" + std::to_string(j));
                peak = std::max(peak, std::abs(row[j]));
            }
        if (!keys.empty())
            out.alarms.push_back(make_alarm(static_cast<long>(t), "anomography", peak, threshold,
                                            std::move(keys)));
    }
    return out;
}

void write_flow_anomalies_csv(std::ostream& out, const Mat& x_tilde) {
    out << "time,flow,value\n";
    for (std::size_t t = 0; t < x_tilde.rows; ++t)
        for (std::size_t j = 0; j < x_tilde.cols; ++j)
            out << t << ',' << j << ',' << format_double(x_tilde(t, j)) << '\n';
}

}  // namespace nta
