#pragma once

#include <cstddef>
#include <vector>

namespace nta {

using Vec = std::vector<double>;

// Dense row-major matrix. Small and simple on purpose: everything in this
// toolkit works on desk-scale covariances and routing matrices.
struct Mat {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<double> a;

    Mat() = default;
    Mat(std::size_t r, std::size_t c, double fill = 0.0) : rows(r), cols(c), a(r * c, fill) {}

    double& operator()(std::size_t i, std::size_t j) { return a[i * cols + j]; }
    double operator()(std::size_t i, std::size_t j) const { return a[i * cols + j]; }

    Vec row(std::size_t i) const { return Vec(a.begin() + i * cols, a.begin() + (i + 1) * cols); }
    Vec col(std::size_t j) const {
        Vec v(rows);
        for (std::size_t i = 0; i < rows; ++i) v[i] = (*this)(i, j);
        return v;
    }
};

Mat identity(std::size_t n);
Mat transpose(const Mat& m);
Mat matmul(const Mat& x, const Mat& y);
Vec matvec(const Mat& m, const Vec& v);
Mat operator+(const Mat& x, const Mat& y);
Mat operator-(const Mat& x, const Mat& y);
Mat scale(const Mat& m, double s);

double dot(const Vec& x, const Vec& y);
double norm2(const Vec& v);        // Euclidean norm
double norm2sq(const Vec& v);      // squared Euclidean norm

// Solve a x = b for square a by Gaussian elimination with partial pivoting.
// b may have multiple right-hand-side columns. Throws on (near-)singular input.
Mat solve_linear(Mat a, Mat b);
Mat inverse(const Mat& m);

// Like solve_linear but adds jitter * I (jitter = 1e-9 * trace, with a small
// absolute floor) before factorizing when the plain solve hits a tiny pivot.
Mat solve_regularized(const Mat& a, const Mat& b);

struct EigenResult {
    Vec values;    // descending
    Mat vectors;   // column j pairs with values[j]
};

// Cyclic Jacobi eigendecomposition for symmetric matrices. Input must be
// symmetric within 1e-8 (relative to its largest entry) or it throws.
EigenResult sym_eigen(const Mat& m);

}  // namespace nta
