#include "nta/rng.hpp"

#include <cmath>
#include <stdexcept>

namespace nta {

std::uint64_t Rng::below(std::uint64_t n) {
    if (n == 0) throw std::invalid_argument("Rng::below: n must be positive");
    std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
    std::uint64_t x;
    do { x = eng_(); } while (x >= limit);
    return x % n;
}

double Rng::normal() {
    if (have_spare_) {
        have_spare_ = false;
        return spare_;
    }
    double u1, u2;
    do { u1 = uniform(); } while (u1 <= 0.0);
    u2 = uniform();
    double r = std::sqrt(-2.0 * std::log(u1));
    double a = 2.0 * M_PI * u2;
    spare_ = r * std::sin(a);
    have_spare_ = true;
    return r * std::cos(a);
}

double Rng::exponential(double rate) {
    if (rate <= 0.0) throw std::invalid_argument("Rng::exponential: rate must be positive");
    double u;
    do { u = uniform(); } while (u <= 0.0);
    return -std::log(u) / rate;
}

double Rng::gamma(double shape, double scaleparam) {
    if (shape <= 0.0 || scaleparam <= 0.0)
        throw std::invalid_argument("Rng::gamma: parameters must be positive");
    if (shape < 1.0) {
        // Boost to shape+1 and correct with a power of a uniform.
        double u;
        do { u = uniform(); } while (u <= 0.0);
        return gamma(shape + 1.0, scaleparam) * std::pow(u, 1.0 / shape);
    }
    double d = shape - 1.0 / 3.0;
    double c = 1.0 / std::sqrt(9.0 * d);
    for (;;) {
        double x = normal();
        double v = 1.0 + c * x;
        if (v <= 0.0) continue;
        v = v * v * v;
        double u = uniform();
        if (u < 1.0 - 0.0331 * x * x * x * x) return d * v * scaleparam;
        if (u > 0.0 && std::log(u) < 0.5 * x * x + d * (1.0 - v + std::log(v)))
            return d * v * scaleparam;
    }
}

std::uint64_t Rng::poisson(double lambda) {
    if (lambda < 0.0) throw std::invalid_argument("Rng::poisson: lambda must be >= 0");
    if (lambda < 30.0) {
        double limit = std::exp(-lambda), p = 1.0;
        std::uint64_t k = 0;
        do {
            ++k;
            p *= uniform();
        } while (p > limit);
        return k - 1;
    }
    // Split recursively; keeps the simple multiplicative method numerically safe.
    std::uint64_t half = poisson(lambda / 2.0);
    return half + poisson(lambda - lambda / 2.0);
}

}  // namespace nta
