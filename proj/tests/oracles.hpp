#pragma once

// Independent reference implementations used only by tests: a direct
// O(n^2) Fourier sum, dense Gaussian-conditional algebra via explicit
// Gauss-Jordan inversion, and central finite differences.

#include <cmath>
#include <complex>
#include <functional>
#include <stdexcept>
#include <vector>

namespace oracle {

inline std::vector<std::complex<double>> dft(
    const std::vector<std::complex<double>>& x) {
    const std::size_t n = x.size();
    std::vector<std::complex<double>> out(n);
    for (std::size_t k = 0; k < n; ++k) {
        std::complex<double> acc{0.0, 0.0};
        for (std::size_t i = 0; i < n; ++i) {
            const double angle = -2.0 * M_PI * static_cast<double>(k) *
                                 static_cast<double>(i) / static_cast<double>(n);
            acc += x[i] * std::complex<double>(std::cos(angle), std::sin(angle));
        }
        out[k] = acc;
    }
    return out;
}

// Explicit inverse by Gauss-Jordan elimination with partial pivoting.
inline std::vector<std::vector<double>> invert(std::vector<std::vector<double>> a) {
    const std::size_t n = a.size();
    std::vector<std::vector<double>> inv(n, std::vector<double>(n, 0.0));
    for (std::size_t i = 0; i < n; ++i) inv[i][i] = 1.0;
    for (std::size_t col = 0; col < n; ++col) {
        std::size_t pivot = col;
        for (std::size_t r = col + 1; r < n; ++r) {
            if (std::abs(a[r][col]) > std::abs(a[pivot][col])) pivot = r;
        }
        if (std::abs(a[pivot][col]) < 1e-300) {
            throw std::runtime_error("oracle::invert: singular matrix");
        }
        std::swap(a[col], a[pivot]);
        std::swap(inv[col], inv[pivot]);
        const double d = a[col][col];
        for (std::size_t j = 0; j < n; ++j) {
            a[col][j] /= d;
            inv[col][j] /= d;
        }
        for (std::size_t r = 0; r < n; ++r) {
            if (r == col) continue;
            const double f = a[r][col];
            if (f == 0.0) continue;
            for (std::size_t j = 0; j < n; ++j) {
                a[r][j] -= f * a[col][j];
                inv[r][j] -= f * inv[col][j];
            }
        }
    }
    return inv;
}

inline double determinant(std::vector<std::vector<double>> a) {
    const std::size_t n = a.size();
    double det = 1.0;
    for (std::size_t col = 0; col < n; ++col) {
        std::size_t pivot = col;
        for (std::size_t r = col + 1; r < n; ++r) {
            if (std::abs(a[r][col]) > std::abs(a[pivot][col])) pivot = r;
        }
        if (pivot != col) {
            std::swap(a[col], a[pivot]);
            det = -det;
        }
        if (a[col][col] == 0.0) return 0.0;
        det *= a[col][col];
        for (std::size_t r = col + 1; r < n; ++r) {
            const double f = a[r][col] / a[col][col];
            for (std::size_t j = col; j < n; ++j) a[r][j] -= f * a[col][j];
        }
    }
    return det;
}

struct GaussianConditional {
    double mean = 0.0;
    double sigma = 0.0;
};

// Posterior via explicit inversion: mu = k*' Kn^-1 r + m(x*), var = kxx -
// k*' Kn^-1 k*.
inline GaussianConditional dense_posterior(const std::vector<std::vector<double>>& k_noisy,
                                           const std::vector<double>& kstar, double kxx,
                                           const std::vector<double>& residual,
                                           double prior_mean) {
    const auto inv = invert(k_noisy);
    const std::size_t m = kstar.size();
    GaussianConditional out;
    out.mean = prior_mean;
    double var = kxx;
    for (std::size_t i = 0; i < m; ++i) {
        double row_r = 0.0, row_k = 0.0;
        for (std::size_t j = 0; j < m; ++j) {
            row_r += inv[i][j] * residual[j];
            row_k += inv[i][j] * kstar[j];
        }
        out.mean += kstar[i] * row_r;
        var -= kstar[i] * row_k;
    }
    out.sigma = std::sqrt(std::max(var, 0.0));
    return out;
}

inline double dense_log_likelihood(const std::vector<std::vector<double>>& k_noisy,
                                   const std::vector<double>& residual) {
    const auto inv = invert(k_noisy);
    const std::size_t m = residual.size();
    double quad = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
        for (std::size_t j = 0; j < m; ++j) {
            quad += residual[i] * inv[i][j] * residual[j];
        }
    }
    return -0.5 * quad - 0.5 * std::log(determinant(k_noisy)) -
           0.5 * static_cast<double>(m) * std::log(2.0 * M_PI);
}

// Central finite difference of a scalar function of one coordinate.
inline double central_difference(const std::function<double(double)>& f, double x0,
                                 double step) {
    return (f(x0 + step) - f(x0 - step)) / (2.0 * step);
}

inline double relative_gap(double a, double b, double floor = 1e-8) {
    const double denom = std::max({std::abs(a), std::abs(b), floor});
    return std::abs(a - b) / denom;
}

}  // namespace oracle
