#pragma once

#include <array>
#include <cstdint>
#include <vector>

namespace nta {

// Degree-3 polynomial hash over GF(2^61 - 1); 4-universal, which the sketch
// estimator variance bounds rely on.
struct Hash61 {
    std::array<std::uint64_t, 4> coef{};

    std::uint64_t operator()(std::uint64_t x) const;
};

// Turnstile sketch: H rows of K buckets, one independent hash per row. Values
// are reals; updates may be negative (forecast errors are).
class KarySketch {
  public:
    KarySketch(std::size_t h, std::size_t k, std::uint64_t seed);

    void update(std::uint64_t key, double u);
    double estimate(std::uint64_t key) const;
    double estimate_f2() const;

    std::size_t rows() const { return h_; }
    std::size_t cols() const { return k_; }
    std::uint64_t seed() const { return seed_; }
    std::size_t bucket(std::size_t row, std::uint64_t key) const;

    double cell(std::size_t row, std::size_t col) const { return table_[row * k_ + col]; }
    double& cell(std::size_t row, std::size_t col) { return table_[row * k_ + col]; }

    bool same_shape(const KarySketch& other) const {
        return h_ == other.h_ && k_ == other.k_ && seed_ == other.seed_;
    }

    KarySketch& operator+=(const KarySketch& other);
    KarySketch& operator-=(const KarySketch& other);

  private:
    std::size_t h_, k_;
    std::uint64_t seed_;
    std::vector<Hash61> hashes_;
    std::vector<double> table_;
};

// Row-parallel bulk update; identical result to applying update() in a loop.
void sketch_update_batch(KarySketch& sk, const std::vector<std::uint64_t>& keys,
                         const std::vector<double>& values);
void sketch_update_batch_serial(KarySketch& sk, const std::vector<std::uint64_t>& keys,
                                const std::vector<double>& values);

struct ChangeDetectResult {
    KarySketch error;          // S_e = S_o - S_f
    double f2 = 0.0;
    double threshold = 0.0;    // R_A
    std::vector<std::uint64_t> alarmed;
};

// Sketch-space change detection: key alarms iff |estimate(S_e, key)| > R * sqrt(F2(S_e)).
ChangeDetectResult change_detect(const KarySketch& observed, const KarySketch& predicted,
                                 double r, const std::vector<std::uint64_t>& keys);

}  // namespace nta
