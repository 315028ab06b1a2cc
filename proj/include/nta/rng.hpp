#pragma once

#include <cstdint>
#include <random>

namespace nta {

// Seeded RNG with explicit distribution code so that generated streams are
// identical across standard library implementations (std:: distributions are
// not portable). Every randomized path in the toolkit goes through this.
class Rng {
  public:
    explicit Rng(std::uint64_t seed) : eng_(seed) {}

    std::uint64_t u64() { return eng_(); }

    // Uniform in [0,1) with 53 random bits.
    double uniform() { return static_cast<double>(eng_() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    // Uniform integer in [0, n) by rejection, bias-free.
    std::uint64_t below(std::uint64_t n);

    int range(int lo, int hi) {  // inclusive ends
        return lo + static_cast<int>(below(static_cast<std::uint64_t>(hi - lo + 1)));
    }

    double normal();  // standard normal, Box-Muller
    double normal(double mu, double sigma) { return mu + sigma * normal(); }

    double exponential(double rate) ;

    // Gamma(shape, scale) via Marsaglia-Tsang.
    double gamma(double shape, double scale);

    std::uint64_t poisson(double lambda);

  private:
    std::mt19937_64 eng_;
    bool have_spare_ = false;
    double spare_ = 0.0;
};

}  // namespace nta
