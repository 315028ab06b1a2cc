#include "nta/wavelet.hpp"

#include <cmath>
#include <stdexcept>

#include "nta/stats.hpp"

namespace nta {

void FilterBank::validate() const {
    if (lowpass.empty()) throw std::invalid_argument("wavelet: lowpass filter is empty");
    if (highpass.empty()) throw std::invalid_argument("wavelet: need at least one highpass filter");
    for (const auto& h : highpass) {
        if (h.empty()) throw std::invalid_argument("wavelet: highpass filter is empty");
        double sum = 0.0;
        for (double c : h) sum += c;
        if (std::abs(sum) > 1e-12)
            throw std::invalid_argument("wavelet: highpass taps must sum to zero");
    }
}

FilterBank FilterBank::spline_framelet() {
    const double r6 = std::sqrt(6.0);
    FilterBank bank;
    bank.lowpass = {1.0 / 16, 4.0 / 16, 6.0 / 16, 4.0 / 16, 1.0 / 16};
    bank.highpass = {
        {1.0 / 8, 2.0 / 8, 0.0, -2.0 / 8, -1.0 / 8},
        {r6 / 16, 0.0, -2.0 * r6 / 16, 0.0, r6 / 16},
        {1.0 / 8, -2.0 / 8, 0.0, 2.0 / 8, -1.0 / 8},
        {1.0 / 16, -4.0 / 16, 6.0 / 16, -4.0 / 16, 1.0 / 16},
    };
    return bank;
}

namespace {

// One decimated analysis step with periodic indexing: y[m] = sum_k g[k] x[(2m+k) mod n].
std::vector<double> convolve_down(const std::vector<double>& x, const std::vector<double>& g) {
    std::size_t n = x.size();
    std::vector<double> y(n / 2, 0.0);
    for (std::size_t m = 0; m < y.size(); ++m) {
        double acc = 0.0;
        for (std::size_t k = 0; k < g.size(); ++k) acc += g[k] * x[(2 * m + k) % n];
        y[m] = acc;
    }
    return y;
}

// Adjoint of convolve_down: scatter y back onto a length-n signal.
void adjoint_up(const std::vector<double>& y, const std::vector<double>& g, std::size_t n,
                std::vector<double>& out) {
    for (std::size_t m = 0; m < y.size(); ++m)
        for (std::size_t k = 0; k < g.size(); ++k) out[(2 * m + k) % n] += g[k] * y[m];
}

}  // namespace

BandDecomposition analyze(const std::vector<double>& x, const FilterBank& bank,
                          std::size_t levels) {
    bank.validate();
    if (levels < 1) throw std::invalid_argument("wavelet: need at least one level");
    std::size_t block = std::size_t{1} << levels;
    if (x.size() < block || x.size() % block != 0)
        throw std::invalid_argument("wavelet: signal length must be a multiple of 2^levels (at least " +
                                    std::to_string(block) + "), have " + std::to_string(x.size()));
    BandDecomposition decomp;
    decomp.signal_length = x.size();
    std::vector<double> approx = x;
    for (std::size_t j = 0; j < levels; ++j) {
        std::vector<std::vector<double>> level;
        level.reserve(bank.highpass.size());
        for (const auto& h : bank.highpass) level.push_back(convolve_down(approx, h));
        decomp.detail.push_back(std::move(level));
        approx = convolve_down(approx, bank.lowpass);
    }
    decomp.approx = std::move(approx);
    return decomp;
}

std::vector<double> synthesize(const BandDecomposition& decomp, const FilterBank& bank) {
    bank.validate();
    if (decomp.detail.empty()) throw std::invalid_argument("wavelet: empty decomposition");
    std::size_t levels = decomp.levels();
    for (std::size_t j = 0; j < levels; ++j) {
        if (decomp.detail[j].size() != bank.highpass.size())
            throw std::invalid_argument("wavelet: decomposition does not match the filter bank");
        std::size_t expect = decomp.signal_length >> (j + 1);
        for (const auto& d : decomp.detail[j])
            if (d.size() != expect)
                throw std::invalid_argument("wavelet: coefficient array size mismatch");
    }
    if (decomp.approx.size() != decomp.signal_length >> levels)
        throw std::invalid_argument("wavelet: coefficient array size mismatch");
    std::vector<double> current = decomp.approx;
    for (std::size_t j = levels; j-- > 0;) {
        std::size_t n = decomp.signal_length >> j;
        std::vector<double> next(n, 0.0);
        adjoint_up(current, bank.lowpass, n, next);
        for (std::size_t i = 0; i < bank.highpass.size(); ++i)
            adjoint_up(decomp.detail[j][i], bank.highpass[i], n, next);
        // The decimated adjoint applies half of the frame operator under this
        // filter normalization (the squared filter responses sum to one, not
        // two); doubling each level completes the inverse.
        for (double& v : next) v *= 2.0;
        current = std::move(next);
    }
    return current;
}

BandSplit band_split(const std::vector<double>& x, const FilterBank& bank,
                     double high_threshold) {
    std::size_t max_levels = 0;
    while (max_levels < 12 && x.size() % (std::size_t{2} << max_levels) == 0 &&
           x.size() >= (std::size_t{2} << max_levels))
        ++max_levels;
    if (max_levels == 0)
        throw std::invalid_argument("wavelet: signal length must be a multiple of 2 (at least 2), have " +
                                    std::to_string(x.size()));
    std::size_t levels = max_levels;
    auto scaled = [&](int numer) {
        return static_cast<std::size_t>((levels * static_cast<std::size_t>(numer) + 11) / 12);
    };
    BandSplit split;
    split.levels = levels;
    split.high_levels = scaled(5);
    split.mid_levels = scaled(8) - split.high_levels;

    BandDecomposition full = analyze(x, bank, levels);
    auto part = [&](std::size_t lo, std::size_t hi, bool with_approx,
                    bool threshold) -> std::vector<double> {
        BandDecomposition d = full;
        for (std::size_t j = 0; j < levels; ++j) {
            bool keep = j >= lo && j < hi;
            for (auto& coeffs : d.detail[j])
                for (double& c : coeffs) {
                    if (!keep)
                        c = 0.0;
                    else if (threshold && std::abs(c) <= high_threshold)
                        c = 0.0;
                }
        }
        if (!with_approx) d.approx.assign(d.approx.size(), 0.0);
        return synthesize(d, bank);
    };
    split.high = part(0, split.high_levels, false, true);
    split.mid = part(split.high_levels, split.high_levels + split.mid_levels, false, false);
    split.low = part(split.high_levels + split.mid_levels, levels, true, false);
    return split;
}

VSignalResult local_variability_detect(const std::vector<double>& mid,
                                       const std::vector<double>& high, std::size_t window,
                                       double w_mid, double w_high, double threshold) {
    if (window < 2) throw std::invalid_argument("wavelet: variability window must be >= 2");
    if (mid.size() != high.size())
        throw std::invalid_argument("wavelet: M and H parts must have equal length");
    if (mid.size() < window)
        throw std::invalid_argument("wavelet: signal shorter than the variability window");
    VSignalResult out;
    auto standardize = [&](std::vector<double> part, const char* name) {
        double sd = std::sqrt(variance_pop(part));
        if (sd <= 0.0) {
            out.warnings.push_back(std::string(name) + " part has zero variance; not normalized");
            return part;
        }
        for (double& v : part) v /= sd;
        return part;
    };
    std::vector<double> m = standardize(mid, "M");
    std::vector<double> h = standardize(high, "H");
    std::size_t n = m.size();
    out.v.assign(n, 0.0);
    auto local_var = [&](const std::vector<double>& s, std::size_t t) {
        double sum = 0.0, sumsq = 0.0;
        for (std::size_t i = t + 1 - window; i <= t; ++i) {
            sum += s[i];
            sumsq += s[i] * s[i];
        }
        double mu = sum / static_cast<double>(window);
        return sumsq / static_cast<double>(window) - mu * mu;
    };
    for (std::size_t t = window - 1; t < n; ++t)
        out.v[t] = w_high * local_var(h, t) + w_mid * local_var(m, t);
    for (std::size_t t = 0; t < n;) {
        if (out.v[t] > threshold) {
            std::size_t start = t;
            double peak = out.v[t];
            while (t < n && out.v[t] > threshold) {
                peak = std::max(peak, out.v[t]);
                ++t;
            }
            out.alarms.push_back({start, t - start, peak});
        } else {
            ++t;
        }
    }
    return out;
}

}  // namespace nta
