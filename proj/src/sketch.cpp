#include "nta/sketch.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "nta/par.hpp"
#include "nta/rng.hpp"
#include "nta/stats.hpp"

namespace nta {

namespace {

constexpr std::uint64_t kMersenne61 = (std::uint64_t{1} << 61) - 1;

// a * b mod (2^61 - 1) via the Mersenne folding identity: for z = hi*2^61 + lo,
// z mod p == hi + lo (mod p).
std::uint64_t mulmod61(std::uint64_t a, std::uint64_t b) {
    unsigned __int128 z = static_cast<unsigned __int128>(a) * b;
    std::uint64_t lo = static_cast<std::uint64_t>(z & kMersenne61);
    std::uint64_t hi = static_cast<std::uint64_t>(z >> 61);
    std::uint64_t s = lo + hi;
    if (s >= kMersenne61) s -= kMersenne61;
    return s;
}

}  // namespace

std::uint64_t Hash61::operator()(std::uint64_t x) const {
    std::uint64_t v = x % kMersenne61;
    // Horner evaluation of coef[3]*v^3 + coef[2]*v^2 + coef[1]*v + coef[0].
    std::uint64_t acc = coef[3];
    for (int i = 2; i >= 0; --i) {
        acc = mulmod61(acc, v);
        acc += coef[i];
        if (acc >= kMersenne61) acc -= kMersenne61;
    }
    return acc;
}

KarySketch::KarySketch(std::size_t h, std::size_t k, std::uint64_t seed)
    : h_(h), k_(k), seed_(seed) {
    if (h_ == 0 || k_ < 2) throw std::invalid_argument("sketch: need H >= 1 and K >= 2");
    Rng rng(seed);
    hashes_.resize(h_);
    for (auto& hash : hashes_) {
        // Leading coefficient nonzero keeps the polynomial degree (and thus
        // 4-universality) intact; the rest may be anything in the field.
        for (std::size_t c = 0; c + 1 < hash.coef.size(); ++c)
            hash.coef[c] = rng.below(kMersenne61);
        hash.coef.back() = 1 + rng.below(kMersenne61 - 1);
    }
    table_.assign(h_ * k_, 0.0);
}

std::size_t KarySketch::bucket(std::size_t row, std::uint64_t key) const {
    return static_cast<std::size_t>(hashes_[row](key) % k_);
}

void KarySketch::update(std::uint64_t key, double u) {
    for (std::size_t i = 0; i < h_; ++i) table_[i * k_ + bucket(i, key)] += u;
}

double KarySketch::estimate(std::uint64_t key) const {
    std::vector<double> per_row(h_);
    double kf = static_cast<double>(k_);
    for (std::size_t i = 0; i < h_; ++i) {
        double sum = 0.0;
        for (std::size_t j = 0; j < k_; ++j) sum += table_[i * k_ + j];
        double hit = table_[i * k_ + bucket(i, key)];
        per_row[i] = (hit - sum / kf) / (1.0 - 1.0 / kf);
    }
    return median(per_row);
}

double KarySketch::estimate_f2() const {
    std::vector<double> per_row(h_);
    double kf = static_cast<double>(k_);
    for (std::size_t i = 0; i < h_; ++i) {
        double sum = 0.0, sumsq = 0.0;
        for (std::size_t j = 0; j < k_; ++j) {
            double v = table_[i * k_ + j];
            sum += v;
            sumsq += v * v;
        }
        per_row[i] = kf / (kf - 1.0) * sumsq - sum * sum / (kf - 1.0);
    }
    return median(per_row);
}

KarySketch& KarySketch::operator+=(const KarySketch& other) {
    if (!same_shape(other)) throw std::invalid_argument("sketch: shape/seed mismatch in +=");
    for (std::size_t i = 0; i < table_.size(); ++i) table_[i] += other.table_[i];
    return *this;
}

KarySketch& KarySketch::operator-=(const KarySketch& other) {
    if (!same_shape(other)) throw std::invalid_argument("sketch: shape/seed mismatch in -=");
    for (std::size_t i = 0; i < table_.size(); ++i) table_[i] -= other.table_[i];
    return *this;
}

void sketch_update_batch_serial(KarySketch& sk, const std::vector<std::uint64_t>& keys,
                                const std::vector<double>& values) {
    if (keys.size() != values.size())
        throw std::invalid_argument("sketch: batch keys/values length mismatch");
    for (std::size_t n = 0; n < keys.size(); ++n) sk.update(keys[n], values[n]);
}

void sketch_update_batch(KarySketch& sk, const std::vector<std::uint64_t>& keys,
                         const std::vector<double>& values) {
    if (keys.size() != values.size())
        throw std::invalid_argument("sketch: batch keys/values length mismatch");
    // Each task owns one row of the table, so writes never collide and the
    // result is bit-identical to the serial loop.
    parallel_for(sk.rows(), [&](std::size_t i) {
        for (std::size_t n = 0; n < keys.size(); ++n)
            sk.cell(i, sk.bucket(i, keys[n])) += values[n];
    });
}

ChangeDetectResult change_detect(const KarySketch& observed, const KarySketch& predicted,
                                 double r, const std::vector<std::uint64_t>& keys) {
    if (!observed.same_shape(predicted))
        throw std::invalid_argument("change_detect: sketch shape/seed mismatch");
    if (!(r > 0.0)) throw std::invalid_argument("change_detect: threshold scale must be > 0");
    ChangeDetectResult out{observed, 0.0, 0.0, {}};
    out.error -= predicted;
    out.f2 = std::max(out.error.estimate_f2(), 0.0);
    out.threshold = r * std::sqrt(out.f2);
    for (std::uint64_t key : keys) {
        if (std::abs(out.error.estimate(key)) > out.threshold) out.alarmed.push_back(key);
    }
    return out;
}

}  // namespace nta
