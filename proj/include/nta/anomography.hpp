#pragma once

#include <cstddef>
#include <ostream>
#include <string>
#include <vector>

#include "nta/alarm.hpp"
#include "nta/forecast.hpp"
#include "nta/mat.hpp"

namespace nta {

// Traffic matrices here are time x links: row t is the vector of link loads
// at bin t. The spatial transform projects each row onto the anomalous link
// subspace; the temporal transforms filter each column's time series.
enum class TransformKind { SpatialPca, TemporalPca, Fourier, Wavelet, Arima };

const char* transform_kind_name(TransformKind k);
TransformKind transform_kind_from_name(const std::string& name);

struct Transform {
    TransformKind kind = TransformKind::SpatialPca;
    // PCA kinds: number of normal axes to remove; 0 picks the split with the
    // 3-sigma rule on the projection series.
    std::size_t k = 0;
    // Fourier: harmonics 0..cutoff and their mirror images are dropped.
    // Wavelet: number of finest detail levels kept; everything deeper (the
    // lower frequencies) is zeroed along with the approximation.
    std::size_t cutoff = 1;
    // Arima: the model whose one-step forecast errors become the anomalous
    // traffic. Warm-up entries without a forecast are zero.
    ForecastModel arima;

    void validate() const;
};

// Anomalous link traffic, same shape as the input.
Mat apply_transform(const Mat& y, const Transform& transform);

// One ill-posed inverse instance: recover flow anomalies x from y = A x.
// Each column of y is an independent right-hand side. The [0,1] range of
// routing entries is enforced by the pipeline, not here, so the solvers stay
// usable with arbitrary sensing matrices.
struct InferenceProblem {
    Mat a;  // m x n
    Mat y;  // m x t
};

// Minimum-l2-norm least-squares solution per column, via the spectral
// pseudo-inverse of A A^T. Returns n x t.
Mat solve_pseudoinverse(const InferenceProblem& problem);

struct OmpResult {
    Mat x;                                          // n x t, sparse columns
    std::vector<std::vector<std::size_t>> support;  // selected atoms per column
    Vec residual_norm;                              // final ||y - A x|| per column
};

// Orthogonal matching pursuit: greedy atom selection by normalized residual
// correlation with a least-squares refit on the support each round. Stops at
// `sparsity` atoms or when the residual norm drops to `tol`.
OmpResult solve_omp(const InferenceProblem& problem, std::size_t sparsity, double tol = 1e-9);

enum class SolverKind { Pseudoinverse, Omp };

const char* solver_kind_name(SolverKind k);
SolverKind solver_kind_from_name(const std::string& name);

struct AnomographyConfig {
    Transform transform;
    SolverKind solver = SolverKind::Omp;
    std::size_t omp_sparsity = 5;
    double omp_tol = 1e-9;
    // A flow alarms when |x| exceeds alarm_scale times the median absolute
    // deviation of its time bin's solution.
    double alarm_scale = 5.0;

    void validate() const;
};

struct AnomographyResult {
    Mat y_tilde;  // time x links
    Mat x_tilde;  // time x flows
    std::vector<Alarm> alarms;
};

// Transform the link matrix, then solve one inverse problem per time bin
// (bins are independent and solved in parallel).
AnomographyResult anomography_pipeline(const Mat& y, const Mat& routing,
                                       const AnomographyConfig& config);

// CSV dump of the recovered flow anomalies, one `time,flow,value` row per
// matrix entry.
void write_flow_anomalies_csv(std::ostream& out, const Mat& x_tilde);

}  // namespace nta
