#pragma once

#include <cstddef>
#include <vector>

#include "nta/mat.hpp"

namespace nta {

struct GlrConfig {
    std::size_t order = 1;      // AR order p
    std::size_t learn_len = 0;  // learning window length N_L
    std::size_t test_len = 0;   // test window length N_S

    void validate() const;      // both windows must exceed the AR order
};

// Likelihood-ratio score in [0, 1] comparing AR(p) residual variances of the
// learning window (ending at t_split) against the test window (starting
// there). 0.5 means the windows look alike; near 1 means the test window's
// variance departs from the pooled fit.
double ar_glr(const std::vector<double>& series, std::size_t t_split, const GlrConfig& config);

struct AnomalyOperator {
    Mat a_m;           // symmetric correlation operator
    EigenResult eig;   // descending eigenvalues with paired eigenvectors
};

// Correlation operator from a T x M history of per-variable anomaly
// indicators: off-diagonals are |time-averaged products|, diagonals complete
// each row to 1.
AnomalyOperator build_operator(const Mat& anomaly_history);

struct CombinedMeasure {
    double energy = 0.0;      // E = sum c_i^2 lambda_i = phi' A phi
    double lambda_min = 0.0;  // smallest designated eigenvalue
    bool alarm = false;
    Vec coefficients;         // c_i, projections of phi on the eigenvectors
};

// Quadratic anomaly measure of an indicator vector against the operator.
// `anomalous` designates eigenvalue indices forming the alarm band; empty
// means all of them.
CombinedMeasure combined_measure(const Vec& phi, const AnomalyOperator& op,
                                 const std::vector<std::size_t>& anomalous = {});

struct AstuteResult {
    double mean = 0.0;     // average per-flow volume change
    double stddev = 0.0;   // sample standard deviation of the changes
    double ci_low = 0.0;
    double ci_high = 0.0;
    bool alarm = false;
};

// Equilibrium test on two consecutive time slots: with many independent
// flows the mean change should be statistically zero. volumes is |F| x 2
// (slot i, slot i+1); p is the confidence-interval tail mass.
AstuteResult astute_test(const Mat& volumes, double p);

}  // namespace nta
