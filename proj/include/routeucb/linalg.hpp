#ifndef ROUTEUCB_LINALG_HPP
#define ROUTEUCB_LINALG_HPP

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <vector>

namespace routeucb {

using Vec = std::vector<double>;

// Dense row-major matrix. Only what the router needs: matvec, outer-product
// updates, and an SPD inverse for covariance rebuilds.
struct Mat {
    int rows = 0;
    int cols = 0;
    Vec a;

    Mat() = default;
    Mat(int r, int c) : rows(r), cols(c), a(static_cast<std::size_t>(r) * c, 0.0) {}

    double& operator()(int r, int c) { return a[static_cast<std::size_t>(r) * cols + c]; }
    double operator()(int r, int c) const { return a[static_cast<std::size_t>(r) * cols + c]; }

    double* row(int r) { return a.data() + static_cast<std::size_t>(r) * cols; }
    const double* row(int r) const { return a.data() + static_cast<std::size_t>(r) * cols; }

    static Mat identity(int n, double diag = 1.0) {
        Mat m(n, n);
        for (int i = 0; i < n; ++i) m(i, i) = diag;
        return m;
    }
};

inline double dot(const Vec& x, const Vec& y) {
    double s = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) s += x[i] * y[i];
    return s;
}

inline Vec matvec(const Mat& m, const Vec& x) {
    Vec y(static_cast<std::size_t>(m.rows), 0.0);
    for (int r = 0; r < m.rows; ++r) {
        const double* wr = m.row(r);
        double s = 0.0;
        for (int c = 0; c < m.cols; ++c) s += wr[c] * x[c];
        y[r] = s;
    }
    return y;
}

inline void symmetrize(Mat& m) {
    for (int r = 0; r < m.rows; ++r) {
        for (int c = r + 1; c < m.cols; ++c) {
            double v = 0.5 * (m(r, c) + m(c, r));
            m(r, c) = v;
            m(c, r) = v;
        }
    }
}

inline double max_asymmetry(const Mat& m) {
    double worst = 0.0;
    for (int r = 0; r < m.rows; ++r)
        for (int c = r + 1; c < m.cols; ++c)
            worst = std::max(worst, std::abs(m(r, c) - m(c, r)));
    return worst;
}

// Inverse of a symmetric positive-definite matrix via Cholesky.
// Throws std::runtime_error if the factorization hits a non-positive pivot.
inline Mat spd_inverse(const Mat& m) {
    if (m.rows != m.cols) throw std::runtime_error("spd_inverse: matrix not square");
    const int n = m.rows;

    // lower Cholesky factor
    Mat l(n, n);
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j <= i; ++j) {
            double s = m(i, j);
            for (int k = 0; k < j; ++k) s -= l(i, k) * l(j, k);
            if (i == j) {
                if (s <= 0.0 || !std::isfinite(s)) throw std::runtime_error("spd_inverse: matrix not positive-definite");
                l(i, i) = std::sqrt(s);
            } else {
                l(i, j) = s / l(j, j);
            }
        }
    }

    // invert L in place (lower triangular)
    Mat li(n, n);
    for (int i = 0; i < n; ++i) {
        li(i, i) = 1.0 / l(i, i);
        for (int j = 0; j < i; ++j) {
            double s = 0.0;
            for (int k = j; k < i; ++k) s += l(i, k) * li(k, j);
            li(i, j) = -s / l(i, i);
        }
    }

    // A^-1 = L^-T L^-1
    Mat inv(n, n);
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j <= i; ++j) {
            double s = 0.0;
            for (int k = i; k < n; ++k) s += li(k, i) * li(k, j);
            inv(i, j) = s;
            inv(j, i) = s;
        }
    }
    return inv;
}

} // namespace routeucb

#endif
