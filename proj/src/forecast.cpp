#include "nta/forecast.hpp"

#include <cmath>
#include <stdexcept>

#include "nta/par.hpp"

namespace nta {

std::string forecast_kind_name(ForecastKind kind) {
    switch (kind) {
        case ForecastKind::MA: return "ma";
        case ForecastKind::SMA: return "sma";
        case ForecastKind::EWMA: return "ewma";
        case ForecastKind::NSHW: return "nshw";
        case ForecastKind::ARIMA0: return "arima0";
        case ForecastKind::ARIMA1: return "arima1";
    }
    throw std::logic_error("forecast: unknown kind");
}

ForecastKind forecast_kind_from_name(const std::string& name) {
    if (name == "ma") return ForecastKind::MA;
    if (name == "sma") return ForecastKind::SMA;
    if (name == "ewma") return ForecastKind::EWMA;
    if (name == "nshw") return ForecastKind::NSHW;
    if (name == "arima0") return ForecastKind::ARIMA0;
    if (name == "arima1") return ForecastKind::ARIMA1;
    throw std::invalid_argument("forecast: unknown model name '" + name + "'");
}

std::size_t ForecastModel::warmup() const {
    switch (kind) {
        case ForecastKind::MA:
        case ForecastKind::SMA:
            return window;
        case ForecastKind::EWMA:
        case ForecastKind::NSHW:
            return 1;
        case ForecastKind::ARIMA0:
            return ar.size() + ma.size();
        case ForecastKind::ARIMA1:
            return ar.size() + ma.size() + 1;
    }
    throw std::logic_error("forecast: unknown kind");
}

void ForecastModel::validate() const {
    switch (kind) {
        case ForecastKind::MA:
        case ForecastKind::SMA:
            if (window < 1) throw std::invalid_argument("forecast: window W must be >= 1");
            return;
        case ForecastKind::NSHW:
            if (!(beta >= 0.0 && beta <= 1.0))
                throw std::invalid_argument("forecast: beta must lie in [0, 1]");
            [[fallthrough]];
        case ForecastKind::EWMA:
            if (!(alpha >= 0.0 && alpha <= 1.0))
                throw std::invalid_argument("forecast: alpha must lie in [0, 1]");
            return;
        case ForecastKind::ARIMA0:
        case ForecastKind::ARIMA1:
            if (ar.size() > 2 || ma.size() > 2)
                throw std::invalid_argument("forecast: ARIMA orders are limited to p <= 2, q <= 2");
            for (double c : ar)
                if (!(c >= -2.0 && c <= 2.0))
                    throw std::invalid_argument("forecast: AR coefficients must lie in [-2, 2]");
            for (double c : ma)
                if (!(c >= -2.0 && c <= 2.0))
                    throw std::invalid_argument("forecast: MA coefficients must lie in [-2, 2]");
            return;
    }
    throw std::logic_error("forecast: unknown kind");
}

namespace {

double forecast_ma(const std::vector<double>& h, std::size_t w) {
    double sum = 0.0;
    for (std::size_t i = h.size() - w; i < h.size(); ++i) sum += h[i];
    return sum / static_cast<double>(w);
}

// Lag weights: 1 for the most recent ceil(W/2) samples, then a straight line
// down to 1/ceil(W/2) for the remainder of the window.
double forecast_sma(const std::vector<double>& h, std::size_t w) {
    std::size_t recent = (w + 1) / 2;
    std::size_t tail = w - recent;
    double floor_w = 1.0 / static_cast<double>(recent);
    double num = 0.0, den = 0.0;
    for (std::size_t lag = 1; lag <= w; ++lag) {
        double weight = 1.0;
        if (lag > recent)
            weight = 1.0 - static_cast<double>(lag - recent) * (1.0 - floor_w) /
                               static_cast<double>(tail);
        num += weight * h[h.size() - lag];
        den += weight;
    }
    return num / den;
}

double forecast_ewma(const std::vector<double>& h, double alpha) {
    double f = h[0];  // S_f(2) = S_o(1)
    for (std::size_t t = 1; t < h.size(); ++t) f = alpha * h[t] + (1.0 - alpha) * f;
    return f;
}

double forecast_nshw(const std::vector<double>& h, double alpha, double beta) {
    // The trend seed needs two observations; with one, forecast flat.
    if (h.size() == 1) return h[0];
    double level = h[0];            // S_s(2)
    double trend = h[1] - h[0];     // S_t(2)
    double f = level + trend;       // S_f(2), equals S_o(2)
    for (std::size_t t = 2; t < h.size(); ++t) {
        double next_level = alpha * h[t] + (1.0 - alpha) * f;
        trend = beta * (next_level - level) + (1.0 - beta) * trend;
        level = next_level;
        f = level + trend;
    }
    return f;
}

// Standard Box-Jenkins ARMA prediction on the d-times differenced series:
// z_t = sum_j AR_j z_{t-j} + e_t - sum_i MA_i e_{t-i}. Residuals before the
// start of the series are taken as zero.
double forecast_arima(const std::vector<double>& h, const std::vector<double>& ar,
                      const std::vector<double>& ma, int d) {
    std::vector<double> z;
    if (d == 0) {
        z = h;
    } else {
        z.resize(h.size() - 1);
        for (std::size_t t = 0; t + 1 < h.size(); ++t) z[t] = h[t + 1] - h[t];
    }
    std::vector<double> err(z.size(), 0.0);
    auto predict = [&](std::size_t t) {
        double zhat = 0.0;
        for (std::size_t j = 0; j < ar.size(); ++j)
            if (t >= j + 1) zhat += ar[j] * z[t - j - 1];
        for (std::size_t i = 0; i < ma.size(); ++i)
            if (t >= i + 1) zhat -= ma[i] * err[t - i - 1];
        return zhat;
    };
    for (std::size_t t = 0; t < z.size(); ++t) err[t] = z[t] - predict(t);
    double zhat = predict(z.size());
    return d == 0 ? zhat : h.back() + zhat;
}

}  // namespace

double forecast_scalar(const ForecastModel& model, const std::vector<double>& history) {
    model.validate();
    if (history.size() < model.warmup() || history.empty())
        throw std::invalid_argument("forecast: " + forecast_kind_name(model.kind) +
                                    " needs at least " +
                                    std::to_string(std::max<std::size_t>(model.warmup(), 1)) +
                                    " observations, have " + std::to_string(history.size()));
    switch (model.kind) {
        case ForecastKind::MA: return forecast_ma(history, model.window);
        case ForecastKind::SMA: return forecast_sma(history, model.window);
        case ForecastKind::EWMA: return forecast_ewma(history, model.alpha);
        case ForecastKind::NSHW: return forecast_nshw(history, model.alpha, model.beta);
        case ForecastKind::ARIMA0: return forecast_arima(history, model.ar, model.ma, 0);
        case ForecastKind::ARIMA1: return forecast_arima(history, model.ar, model.ma, 1);
    }
    throw std::logic_error("forecast: unknown kind");
}

KarySketch forecast(const ForecastModel& model, const std::vector<KarySketch>& history) {
    model.validate();
    if (history.size() < model.warmup() || history.empty())
        throw std::invalid_argument("forecast: " + forecast_kind_name(model.kind) +
                                    " needs at least " +
                                    std::to_string(std::max<std::size_t>(model.warmup(), 1)) +
                                    " sketches, have " + std::to_string(history.size()));
    const KarySketch& first = history.front();
    for (const KarySketch& sk : history)
        if (!sk.same_shape(first))
            throw std::invalid_argument("forecast: sketch shape/seed mismatch in history");
    KarySketch out(first.rows(), first.cols(), first.seed());
    // Buckets are independent time series; rows partition the writes.
    parallel_for(out.rows(), [&](std::size_t i) {
        std::vector<double> series(history.size());
        for (std::size_t j = 0; j < out.cols(); ++j) {
            for (std::size_t t = 0; t < history.size(); ++t) series[t] = history[t].cell(i, j);
            out.cell(i, j) = forecast_scalar(model, series);
        }
    });
    return out;
}

}  // namespace nta
