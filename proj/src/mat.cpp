#include "nta/mat.hpp"

#include <cmath>
#include <stdexcept>
#include <algorithm>
#include <numeric>

namespace nta {

Mat identity(std::size_t n) {
    Mat m(n, n);
    for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
    return m;
}

Mat transpose(const Mat& m) {
    Mat t(m.cols, m.rows);
    for (std::size_t i = 0; i < m.rows; ++i)
        for (std::size_t j = 0; j < m.cols; ++j) t(j, i) = m(i, j);
    return t;
}

Mat matmul(const Mat& x, const Mat& y) {
    if (x.cols != y.rows) throw std::invalid_argument("matmul: shape mismatch");
    Mat r(x.rows, y.cols);
    for (std::size_t i = 0; i < x.rows; ++i) {
        for (std::size_t k = 0; k < x.cols; ++k) {
            double v = x(i, k);
            if (v == 0.0) continue;
            for (std::size_t j = 0; j < y.cols; ++j) r(i, j) += v * y(k, j);
        }
    }
    return r;
}

Vec matvec(const Mat& m, const Vec& v) {
    if (m.cols != v.size()) throw std::invalid_argument("matvec: shape mismatch");
    Vec r(m.rows, 0.0);
    for (std::size_t i = 0; i < m.rows; ++i) {
        double s = 0.0;
        for (std::size_t j = 0; j < m.cols; ++j) s += m(i, j) * v[j];
        r[i] = s;
    }
    return r;
}

Mat operator+(const Mat& x, const Mat& y) {
    if (x.rows != y.rows || x.cols != y.cols) throw std::invalid_argument("mat+: shape mismatch");
    Mat r = x;
    for (std::size_t i = 0; i < r.a.size(); ++i) r.a[i] += y.a[i];
    return r;
}

Mat operator-(const Mat& x, const Mat& y) {
    if (x.rows != y.rows || x.cols != y.cols) throw std::invalid_argument("mat-: shape mismatch");
    Mat r = x;
    for (std::size_t i = 0; i < r.a.size(); ++i) r.a[i] -= y.a[i];
    return r;
}

Mat scale(const Mat& m, double s) {
    Mat r = m;
    for (double& v : r.a) v *= s;
    return r;
}

double dot(const Vec& x, const Vec& y) {
    if (x.size() != y.size()) throw std::invalid_argument("dot: size mismatch");
    double s = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) s += x[i] * y[i];
    return s;
}

double norm2sq(const Vec& v) { return dot(v, v); }
double norm2(const Vec& v) { return std::sqrt(norm2sq(v)); }

namespace {

// Gaussian elimination with partial pivoting; returns false on a pivot below tol.
bool gauss_solve(Mat& a, Mat& b, double tol) {
    const std::size_t n = a.rows;
    for (std::size_t k = 0; k < n; ++k) {
        std::size_t piv = k;
        double best = std::fabs(a(k, k));
        for (std::size_t i = k + 1; i < n; ++i) {
            double v = std::fabs(a(i, k));
            if (v > best) { best = v; piv = i; }
        }
        if (best < tol) return false;
        if (piv != k) {
            for (std::size_t j = 0; j < n; ++j) std::swap(a(k, j), a(piv, j));
            for (std::size_t j = 0; j < b.cols; ++j) std::swap(b(k, j), b(piv, j));
        }
        for (std::size_t i = k + 1; i < n; ++i) {
            double f = a(i, k) / a(k, k);
            if (f == 0.0) continue;
            for (std::size_t j = k; j < n; ++j) a(i, j) -= f * a(k, j);
            for (std::size_t j = 0; j < b.cols; ++j) b(i, j) -= f * b(k, j);
        }
    }
    for (std::size_t k = n; k-- > 0;) {
        for (std::size_t j = 0; j < b.cols; ++j) {
            double s = b(k, j);
            for (std::size_t i = k + 1; i < n; ++i) s -= a(k, i) * b(i, j);
            b(k, j) = s / a(k, k);
        }
    }
    return true;
}

double scale_of(const Mat& m) {
    double s = 0.0;
    for (double v : m.a) s = std::max(s, std::fabs(v));
    return s;
}

}  // namespace

Mat solve_linear(Mat a, Mat b) {
    if (a.rows != a.cols) throw std::invalid_argument("solve_linear: matrix not square");
    if (a.rows != b.rows) throw std::invalid_argument("solve_linear: rhs shape mismatch");
    double tol = 1e-13 * std::max(1.0, scale_of(a));
    if (!gauss_solve(a, b, tol)) throw std::runtime_error("solve_linear: singular matrix");
    return b;
}

Mat inverse(const Mat& m) { return solve_linear(m, identity(m.rows)); }

Mat solve_regularized(const Mat& a, const Mat& b) {
    Mat a1 = a, b1 = b;
    double tol = 1e-13 * std::max(1.0, scale_of(a));
    if (gauss_solve(a1, b1, tol)) return b1;
    double tr = 0.0;
    for (std::size_t i = 0; i < a.rows; ++i) tr += a(i, i);
    double jitter = 1e-9 * std::max(std::fabs(tr), 1e-3);
    Mat a2 = a, b2 = b;
    for (std::size_t i = 0; i < a2.rows; ++i) a2(i, i) += jitter;
    if (!gauss_solve(a2, b2, 0.0)) throw std::runtime_error("solve_regularized: singular matrix");
    return b2;
}

EigenResult sym_eigen(const Mat& m) {
    if (m.rows != m.cols) throw std::invalid_argument("sym_eigen: matrix not square");
    const std::size_t n = m.rows;
    double mx = std::max(1.0, scale_of(m));
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j)
            if (std::fabs(m(i, j) - m(j, i)) > 1e-8 * mx)
                throw std::invalid_argument("sym_eigen: matrix not symmetric");

    Mat a = m;
    Mat v = identity(n);
    // Cyclic Jacobi sweeps; n here is tiny (covariances), so O(n^3) per sweep is fine.
    for (int sweep = 0; sweep < 200; ++sweep) {
        double off = 0.0;
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = i + 1; j < n; ++j) off += a(i, j) * a(i, j);
        if (std::sqrt(off) <= 1e-14 * mx * n) break;
        for (std::size_t p = 0; p < n; ++p) {
            for (std::size_t q = p + 1; q < n; ++q) {
                double apq = a(p, q);
                if (std::fabs(apq) <= 1e-300) continue;
                double theta = (a(q, q) - a(p, p)) / (2.0 * apq);
                double t = (theta >= 0 ? 1.0 : -1.0) /
                           (std::fabs(theta) + std::sqrt(theta * theta + 1.0));
                double c = 1.0 / std::sqrt(t * t + 1.0);
                double s = t * c;
                for (std::size_t k = 0; k < n; ++k) {
                    double akp = a(k, p), akq = a(k, q);
                    a(k, p) = c * akp - s * akq;
                    a(k, q) = s * akp + c * akq;
                }
                for (std::size_t k = 0; k < n; ++k) {
                    double apk = a(p, k), aqk = a(q, k);
                    a(p, k) = c * apk - s * aqk;
                    a(q, k) = s * apk + c * aqk;
                }
                for (std::size_t k = 0; k < n; ++k) {
                    double vkp = v(k, p), vkq = v(k, q);
                    v(k, p) = c * vkp - s * vkq;
                    v(k, q) = s * vkp + c * vkq;
                }
            }
        }
    }

    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(),
              [&](std::size_t x, std::size_t y) { return a(x, x) > a(y, y); });

    EigenResult r;
    r.values.resize(n);
    r.vectors = Mat(n, n);
    for (std::size_t j = 0; j < n; ++j) {
        r.values[j] = a(order[j], order[j]);
        for (std::size_t i = 0; i < n; ++i) r.vectors(i, j) = v(i, order[j]);
    }
    return r;
}

}  // namespace nta
