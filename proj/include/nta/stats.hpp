#pragma once

#include <vector>

namespace nta {

// Inverse standard normal CDF. Absolute error below 1e-9 (rational
// approximation refined with one Halley step against erfc). Requires 0 < p < 1.
double normal_quantile(double p);

double mean(const std::vector<double>& v);
double variance_pop(const std::vector<double>& v);      // divides by n
double variance_sample(const std::vector<double>& v);   // divides by n-1
double median(std::vector<double> v);
// Median absolute deviation from the median (unscaled).
double mad(const std::vector<double>& v);

}  // namespace nta
