#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <vector>

#include "doctest.h"
#include "nta/rng.hpp"
#include "nta/wavelet.hpp"

using namespace nta;

namespace {

double max_abs_diff(const std::vector<double>& a, const std::vector<double>& b) {
    REQUIRE(a.size() == b.size());
    double m = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
    return m;
}

double energy(const std::vector<double>& x) {
    double e = 0.0;
    for (double v : x) e += v * v;
    return e;
}

std::vector<double> random_signal(std::size_t n, std::uint64_t seed) {
    Rng rng(seed);
    std::vector<double> x(n);
    for (double& v : x) v = rng.normal();
    return x;
}

}  // namespace

TEST_CASE("wavelet: perfect reconstruction of random signals") {
    FilterBank bank = FilterBank::spline_framelet();
    for (std::uint64_t seed : {1, 2, 3}) {
        std::vector<double> x = random_signal(256, seed);
        for (std::size_t levels : {std::size_t{1}, std::size_t{2}, std::size_t{4}}) {
            BandDecomposition d = analyze(x, bank, levels);
            CHECK(max_abs_diff(synthesize(d, bank), x) < 1e-9);
        }
    }
}

TEST_CASE("wavelet: vanishing moments annihilate polynomials") {
    FilterBank bank = FilterBank::spline_framelet();

    // Every highpass filter kills constants at all levels.
    std::vector<double> flat(64, 7.5);
    BandDecomposition d = analyze(flat, bank, 3);
    for (const auto& level : d.detail)
        for (const auto& coeffs : level)
            for (double c : coeffs) CHECK(std::abs(c) < 1e-9);
    for (double a : d.approx) CHECK(a == doctest::Approx(7.5));

    // Filter i has i vanishing moments: interior coefficients (those whose
    // support does not wrap around) of t^(i-1) vanish, and of t^i do not.
    std::vector<double> cubic(64), quad(64);
    for (std::size_t t = 0; t < 64; ++t) {
        double z = static_cast<double>(t);
        cubic[t] = z * z * z;
        quad[t] = z * z;
    }
    BandDecomposition dc = analyze(cubic, bank, 1);
    BandDecomposition dq = analyze(quad, bank, 1);
    double worst_cubic = 0.0, best_quad = 0.0;
    for (std::size_t m = 0; 2 * m + 4 < 64; ++m) {
        worst_cubic = std::max(worst_cubic, std::abs(dc.detail[0][3][m]));
        best_quad = std::max(best_quad, std::abs(dq.detail[0][3][m]));
    }
    CHECK(worst_cubic < 1e-7);  // fourth filter kills cubics
    CHECK(best_quad < 1e-7);    // and quadratics
    double linear_response = 0.0;
    for (std::size_t m = 0; 2 * m + 4 < 64; ++m)
        linear_response = std::max(linear_response, std::abs(analyze(quad, bank, 1).detail[0][0][m]));
    CHECK(linear_response > 1e-3);  // first filter has only one vanishing moment
}

TEST_CASE("wavelet: level-1 coefficients match direct convolution") {
    FilterBank bank = FilterBank::spline_framelet();
    std::vector<double> x(32, 0.0);
    x[10] = 1.0;
    BandDecomposition d = analyze(x, bank, 1);
    // Written-out decimated periodic correlation as an oracle.
    for (std::size_t f = 0; f < bank.highpass.size(); ++f) {
        const auto& g = bank.highpass[f];
        for (std::size_t m = 0; m < 16; ++m) {
            double want = 0.0;
            for (std::size_t k = 0; k < g.size(); ++k)
                if ((2 * m + k) % 32 == 10) want += g[k];
            CHECK(d.detail[0][f][m] == doctest::Approx(want).epsilon(1e-12));
        }
    }
}

TEST_CASE("wavelet: coefficient shapes and degenerate inputs") {
    FilterBank bank = FilterBank::spline_framelet();
    std::vector<double> x = random_signal(64, 4);
    BandDecomposition d = analyze(x, bank, 3);
    REQUIRE(d.levels() == 3);
    CHECK(d.detail[0][0].size() == 32);
    CHECK(d.detail[1][0].size() == 16);
    CHECK(d.detail[2][0].size() == 8);
    CHECK(d.approx.size() == 8);
    CHECK(d.signal_length == 64);

    // Zeroing everything synthesizes the zero signal.
    BandDecomposition zero = d;
    for (auto& level : zero.detail)
        for (auto& coeffs : level) coeffs.assign(coeffs.size(), 0.0);
    zero.approx.assign(zero.approx.size(), 0.0);
    for (double v : synthesize(zero, bank)) CHECK(v == 0.0);

    // Synthesis is linear, so splitting the coefficients splits the signal.
    BandDecomposition only_l1 = zero;
    only_l1.detail[0] = d.detail[0];
    BandDecomposition rest = d;
    for (auto& coeffs : rest.detail[0]) coeffs.assign(coeffs.size(), 0.0);
    std::vector<double> sum = synthesize(only_l1, bank);
    std::vector<double> other = synthesize(rest, bank);
    for (std::size_t i = 0; i < sum.size(); ++i) sum[i] += other[i];
    CHECK(max_abs_diff(sum, x) < 1e-9);
}

TEST_CASE("wavelet: analyze is linear") {
    FilterBank bank = FilterBank::spline_framelet();
    std::vector<double> x = random_signal(64, 5), y = random_signal(64, 6);
    std::vector<double> mix(64);
    for (std::size_t i = 0; i < 64; ++i) mix[i] = 2.0 * x[i] - 3.0 * y[i];
    BandDecomposition dx = analyze(x, bank, 2), dy = analyze(y, bank, 2),
                      dm = analyze(mix, bank, 2);
    for (std::size_t j = 0; j < 2; ++j)
        for (std::size_t f = 0; f < bank.highpass.size(); ++f)
            for (std::size_t m = 0; m < dm.detail[j][f].size(); ++m)
                CHECK(dm.detail[j][f][m] ==
                      doctest::Approx(2.0 * dx.detail[j][f][m] - 3.0 * dy.detail[j][f][m])
                          .epsilon(1e-10));
}

TEST_CASE("wavelet: validation errors") {
    FilterBank bank = FilterBank::spline_framelet();
    std::vector<double> x = random_signal(12, 7);
    CHECK_THROWS_WITH_AS(analyze(x, bank, 3),
                         doctest::Contains("multiple of 2^levels (at least 8), have 12"),
                         std::invalid_argument);
    CHECK_THROWS_WITH_AS(analyze(random_signal(64, 8), bank, 0),
                         doctest::Contains("at least one level"), std::invalid_argument);

    FilterBank bad = bank;
    bad.highpass[0] = {0.5, 0.5};  // does not sum to zero
    CHECK_THROWS_WITH_AS(bad.validate(), doctest::Contains("sum to zero"), std::invalid_argument);
    bad = bank;
    bad.highpass.clear();
    CHECK_THROWS_WITH_AS(bad.validate(), doctest::Contains("at least one highpass"),
                         std::invalid_argument);
    bad = bank;
    bad.lowpass.clear();
    CHECK_THROWS_WITH_AS(bad.validate(), doctest::Contains("lowpass filter is empty"),
                         std::invalid_argument);

    BandDecomposition d = analyze(random_signal(64, 9), bank, 2);
    BandDecomposition wrong = d;
    wrong.detail[0].pop_back();
    CHECK_THROWS_WITH_AS(synthesize(wrong, bank), doctest::Contains("does not match"),
                         std::invalid_argument);
    wrong = d;
    wrong.approx.pop_back();
    CHECK_THROWS_WITH_AS(synthesize(wrong, bank), doctest::Contains("size mismatch"),
                         std::invalid_argument);
}

TEST_CASE("wavelet: band split partitions the signal") {
    FilterBank bank = FilterBank::spline_framelet();

    SUBCASE("parts sum back to the signal") {
        for (std::size_t n : {std::size_t{96}, std::size_t{256}}) {
            std::vector<double> x = random_signal(n, 10 + n);
            BandSplit split = band_split(x, bank, 0.0);
            CHECK(split.high_levels >= 1);
            CHECK(split.mid_levels >= 1);
            CHECK(split.high_levels + split.mid_levels <= split.levels);
            std::vector<double> sum(n, 0.0);
            for (std::size_t i = 0; i < n; ++i)
                sum[i] = split.low[i] + split.mid[i] + split.high[i];
            CHECK(max_abs_diff(sum, x) < 1e-8);
        }
    }
    SUBCASE("baseline plus slow drift lives in the low band") {
        // Half a cycle over the window on top of a constant level: the kind
        // of slowly varying baseline the L part is meant to isolate.
        std::vector<double> x(256);
        for (std::size_t t = 0; t < 256; ++t)
            x[t] = 2.0 + std::sin(2.0 * M_PI * static_cast<double>(t) / 512.0);
        BandSplit split = band_split(x, bank, 0.0);
        CHECK(energy(split.low) >= 0.95 * energy(x));
        CHECK(energy(split.high) < 0.01 * energy(x));
    }
    SUBCASE("white noise concentrates in the high band") {
        std::vector<double> x = random_signal(256, 11);
        BandSplit split = band_split(x, bank, 0.0);
        CHECK(energy(split.high) > energy(split.mid));
        CHECK(energy(split.high) > energy(split.low));
    }
    SUBCASE("zero signal splits into zeros") {
        std::vector<double> x(64, 0.0);
        BandSplit split = band_split(x, bank, 0.0);
        CHECK(energy(split.low) == 0.0);
        CHECK(energy(split.mid) == 0.0);
        CHECK(energy(split.high) == 0.0);
    }
    SUBCASE("thresholding only shrinks the high band") {
        std::vector<double> x = random_signal(128, 12);
        BandSplit full = band_split(x, bank, 0.0);
        BandSplit cut = band_split(x, bank, 0.5);
        BandSplit gone = band_split(x, bank, 1e9);
        CHECK(energy(cut.high) <= energy(full.high));
        CHECK(energy(gone.high) == 0.0);
        CHECK(max_abs_diff(cut.mid, full.mid) < 1e-12);
        CHECK(max_abs_diff(cut.low, full.low) < 1e-12);
    }
    SUBCASE("length with no power-of-two factor is rejected") {
        CHECK_THROWS_WITH_AS(band_split(random_signal(31, 13), bank, 0.0),
                             doctest::Contains("multiple of 2"), std::invalid_argument);
    }
}

TEST_CASE("wavelet: local variability detector") {
    Rng rng(21);
    const std::size_t n = 512, window = 20;

    SUBCASE("stationary noise stays quiet") {
        std::vector<double> mid(n), high(n);
        for (std::size_t t = 0; t < n; ++t) {
            mid[t] = rng.normal();
            high[t] = rng.normal();
        }
        VSignalResult r = local_variability_detect(mid, high, window, 0.5, 0.5, 3.0);
        CHECK(r.alarms.empty());
        CHECK(r.warnings.empty());
        for (std::size_t t = 0; t + 1 < window; ++t) CHECK(r.v[t] == 0.0);
    }
    SUBCASE("a variance burst raises one alarm spanning it") {
        std::vector<double> mid(n), high(n);
        for (std::size_t t = 0; t < n; ++t) {
            mid[t] = rng.normal();
            high[t] = rng.normal();
        }
        const std::size_t burst_start = 200, burst_len = 30;
        for (std::size_t t = burst_start; t < burst_start + burst_len; ++t) {
            mid[t] *= 8.0;
            high[t] *= 8.0;
        }
        VSignalResult r = local_variability_detect(mid, high, window, 0.5, 0.5, 3.0);
        REQUIRE(r.alarms.size() == 1);
        const VAlarm& a = r.alarms[0];
        CHECK(a.start >= burst_start - 5);
        CHECK(a.start <= burst_start + window);
        CHECK(a.width >= burst_len - 5);
        CHECK(a.width <= burst_len + 2 * window);
        CHECK(a.peak > 3.0);
    }
    SUBCASE("constant parts yield zero V and warnings") {
        std::vector<double> mid(n, 2.0), high(n, -1.0);
        VSignalResult r = local_variability_detect(mid, high, window, 0.5, 0.5, 0.5);
        CHECK(r.alarms.empty());
        for (double v : r.v) CHECK(v == doctest::Approx(0.0));
        REQUIRE(r.warnings.size() == 2);
        CHECK(r.warnings[0] == "M part has zero variance; not normalized");
        CHECK(r.warnings[1] == "H part has zero variance; not normalized");
    }
    SUBCASE("input validation") {
        std::vector<double> a(50, 0.0), b(40, 0.0);
        CHECK_THROWS_WITH_AS(local_variability_detect(a, a, 1, 0.5, 0.5, 1.0),
                             doctest::Contains("window must be >= 2"), std::invalid_argument);
        CHECK_THROWS_WITH_AS(local_variability_detect(a, b, 10, 0.5, 0.5, 1.0),
                             doctest::Contains("equal length"), std::invalid_argument);
        CHECK_THROWS_WITH_AS(local_variability_detect(b, b, 50, 0.5, 0.5, 1.0),
                             doctest::Contains("shorter than"), std::invalid_argument);
    }
}
