#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "nta/sketch.hpp"

namespace nta {

enum class ForecastKind { MA, SMA, EWMA, NSHW, ARIMA0, ARIMA1 };

std::string forecast_kind_name(ForecastKind kind);
ForecastKind forecast_kind_from_name(const std::string& name);

// Univariate forecasting model applied bucket-wise to sketch series. ARIMA
// coefficients are user-supplied; there is no fitting step.
struct ForecastModel {
    ForecastKind kind = ForecastKind::EWMA;
    std::size_t window = 2;        // W, used by MA and SMA
    double alpha = 0.5;            // EWMA and NSHW level smoothing
    double beta = 0.5;             // NSHW trend smoothing
    std::vector<double> ar;        // AR_j, j = 1..p
    std::vector<double> ma;        // MA_i, i = 1..q

    // Minimum history length before forecast() is defined.
    std::size_t warmup() const;
    void validate() const;
};

// Forecast of the next value given history[0..T-1] = S_o(1..T); returns S_f(T+1).
double forecast_scalar(const ForecastModel& model, const std::vector<double>& history);

// Bucket-wise forecast sketch; output shares H, K and seeds with the inputs.
KarySketch forecast(const ForecastModel& model, const std::vector<KarySketch>& history);

}  // namespace nta
