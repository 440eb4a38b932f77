#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <span>
#include <vector>

#include "netmatch/common.hpp"

namespace netmatch {

struct Matrix {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<double> a;

    Matrix() = default;
    Matrix(std::size_t r, std::size_t c) : rows(r), cols(c), a(r * c, 0.0) {}

    double& operator()(std::size_t i, std::size_t j) { return a[i * cols + j]; }
    double operator()(std::size_t i, std::size_t j) const { return a[i * cols + j]; }
};

namespace detail {

// Solve A x = b for symmetric positive definite A (in place); false on breakdown.
inline bool cholesky_solve(Matrix& A, std::vector<double>& b) {
    const std::size_t n = A.rows;
    for (std::size_t j = 0; j < n; ++j) {
        double d = A(j, j);
        for (std::size_t k = 0; k < j; ++k) d -= A(j, k) * A(j, k);
        if (!(d > 0.0)) return false;
        d = std::sqrt(d);
        A(j, j) = d;
        for (std::size_t i = j + 1; i < n; ++i) {
            double s = A(i, j);
            for (std::size_t k = 0; k < j; ++k) s -= A(i, k) * A(j, k);
            A(i, j) = s / d;
        }
    }
    for (std::size_t i = 0; i < n; ++i) {
        double s = b[i];
        for (std::size_t k = 0; k < i; ++k) s -= A(i, k) * b[k];
        b[i] = s / A(i, i);
    }
    for (std::size_t ii = n; ii-- > 0;) {
        double s = b[ii];
        for (std::size_t k = ii + 1; k < n; ++k) s -= A(k, ii) * b[k];
        b[ii] = s / A(ii, ii);
    }
    return true;
}

// SPD solve with escalating jitter for borderline-singular systems.
inline std::vector<double> solve_spd(Matrix A, std::vector<double> b) {
    double jitter = 0.0;
    double scale = 0.0;
    for (std::size_t i = 0; i < A.rows; ++i) scale = std::max(scale, std::abs(A(i, i)));
    if (scale == 0.0) scale = 1.0;
    for (int attempt = 0; attempt < 6; ++attempt) {
        Matrix M = A;
        std::vector<double> x = b;
        if (jitter > 0.0)
            for (std::size_t i = 0; i < M.rows; ++i) M(i, i) += jitter;
        if (cholesky_solve(M, x)) return x;
        jitter = (jitter == 0.0) ? scale * 1e-12 : jitter * 100.0;
    }
    throw Error("linear solve failed: matrix not positive definite");
}

}  // namespace detail

struct RidgeFit {
    std::vector<double> beta;
    double sse = 0.0;
};

// Penalized least squares via the normal equations: minimizes
// ||y - X b||^2 + sum_j penalty[j] b_j^2. Returns the fit and its (unpenalized)
// sum of squared errors.
inline RidgeFit ridge_fit(const Matrix& X, std::span<const double> y,
                          std::span<const double> penalty) {
    const std::size_t n = X.rows, d = X.cols;
    if (y.size() != n || penalty.size() != d) throw InputError("ridge_fit: dimension mismatch");
    Matrix G(d, d);
    std::vector<double> rhs(d, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        const double* row = &X.a[i * d];
        for (std::size_t j = 0; j < d; ++j) {
            rhs[j] += row[j] * y[i];
            for (std::size_t k = j; k < d; ++k) G(j, k) += row[j] * row[k];
        }
    }
    for (std::size_t j = 0; j < d; ++j) {
        G(j, j) += penalty[j];
        for (std::size_t k = j + 1; k < d; ++k) G(k, j) = G(j, k);
    }
    RidgeFit fit;
    fit.beta = detail::solve_spd(std::move(G), std::move(rhs));
    for (std::size_t i = 0; i < n; ++i) {
        double pred = 0.0;
        const double* row = &X.a[i * d];
        for (std::size_t j = 0; j < d; ++j) pred += row[j] * fit.beta[j];
        const double r = y[i] - pred;
        fit.sse += r * r;
    }
    return fit;
}

struct LogisticOptions {
    int max_iterations = 50;
    double tolerance = 1e-9;
    const std::vector<double>* warm_start = nullptr;
};

struct LogisticFit {
    std::vector<double> beta;
    double deviance = 0.0;
    double log_likelihood = 0.0;
    int iterations = 0;
    bool converged = false;
};

// Bernoulli GLM by iteratively reweighted least squares (Newton steps with
// step halving). Probabilities are clamped away from {0,1}; on non-convergence
// (e.g. perfect separation) the fit at the iteration cap is returned with
// converged = false.
inline LogisticFit logistic_fit(const Matrix& X, const std::vector<std::uint8_t>& y,
                                const LogisticOptions& opts = {}) {
    const std::size_t n = X.rows, d = X.cols;
    if (y.size() != n) throw InputError("logistic_fit: dimension mismatch");
    LogisticFit fit;
    fit.beta.assign(d, 0.0);
    if (opts.warm_start && opts.warm_start->size() == d) fit.beta = *opts.warm_start;

    std::vector<double> eta(n, 0.0), mu(n, 0.0);
    auto compute_deviance = [&](const std::vector<double>& beta) {
        double ll = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            double e = 0.0;
            const double* row = &X.a[i * d];
            for (std::size_t j = 0; j < d; ++j) e += row[j] * beta[j];
            eta[i] = e;
            double m = 1.0 / (1.0 + std::exp(-e));
            m = std::min(1.0 - 1e-12, std::max(1e-12, m));
            mu[i] = m;
            ll += y[i] ? std::log(m) : std::log(1.0 - m);
        }
        return -2.0 * ll;
    };

    double dev = compute_deviance(fit.beta);
    for (int it = 0; it < opts.max_iterations; ++it) {
        Matrix H(d, d);
        std::vector<double> grad(d, 0.0);
        for (std::size_t i = 0; i < n; ++i) {
            const double* row = &X.a[i * d];
            const double w = mu[i] * (1.0 - mu[i]);
            const double r = static_cast<double>(y[i]) - mu[i];
            for (std::size_t j = 0; j < d; ++j) {
                grad[j] += row[j] * r;
                const double wj = w * row[j];
                for (std::size_t k = j; k < d; ++k) H(j, k) += wj * row[k];
            }
        }
        for (std::size_t j = 0; j < d; ++j) {
            H(j, j) += 1e-10;
            for (std::size_t k = j + 1; k < d; ++k) H(k, j) = H(j, k);
        }
        std::vector<double> step = detail::solve_spd(std::move(H), grad);

        double max_step = 0.0;
        for (double s : step) max_step = std::max(max_step, std::abs(s));

        std::vector<double> cand(d);
        double new_dev = dev;
        double scale = 1.0;
        for (int half = 0; half < 30; ++half) {
            for (std::size_t j = 0; j < d; ++j) cand[j] = fit.beta[j] + scale * step[j];
            new_dev = compute_deviance(cand);
            if (new_dev <= dev + 1e-12) break;
            scale *= 0.5;
        }
        fit.beta = cand;
        fit.iterations = it + 1;
        const double improved = dev - new_dev;
        dev = new_dev;
        if (max_step * scale < opts.tolerance || std::abs(improved) < 1e-12) {
            fit.converged = true;
            break;
        }
    }
    fit.deviance = compute_deviance(fit.beta);
    fit.log_likelihood = -0.5 * fit.deviance;
    return fit;
}

// Full spectrum of a symmetric matrix by cyclic Jacobi rotations. Eigenvalues
// come back unsorted; V's columns are the matching eigenvectors.
inline void jacobi_eigen(const Matrix& A, std::vector<double>& values, Matrix& V) {
    const std::size_t n = A.rows;
    if (A.cols != n) throw InputError("jacobi_eigen: matrix must be square");
    Matrix S = A;
    V = Matrix(n, n);
    for (std::size_t i = 0; i < n; ++i) V(i, i) = 1.0;

    double norm = 0.0;
    for (double v : S.a) norm += v * v;
    norm = std::sqrt(norm);
    const double stop = 1e-14 * (1.0 + norm);

    for (int sweep = 0; sweep < 100; ++sweep) {
        double off = 0.0;
        for (std::size_t p = 0; p < n; ++p)
            for (std::size_t q = p + 1; q < n; ++q) off += 2.0 * S(p, q) * S(p, q);
        if (std::sqrt(off) < stop) break;
        for (std::size_t p = 0; p + 1 < n; ++p) {
            for (std::size_t q = p + 1; q < n; ++q) {
                const double apq = S(p, q);
                if (std::abs(apq) < 1e-300) continue;
                const double theta = (S(q, q) - S(p, p)) / (2.0 * apq);
                const double t = (theta >= 0 ? 1.0 : -1.0) /
                                 (std::abs(theta) + std::sqrt(theta * theta + 1.0));
                const double c = 1.0 / std::sqrt(t * t + 1.0);
                const double s = t * c;
                for (std::size_t k = 0; k < n; ++k) {
                    const double skp = S(k, p), skq = S(k, q);
                    S(k, p) = c * skp - s * skq;
                    S(k, q) = s * skp + c * skq;
                }
                for (std::size_t k = 0; k < n; ++k) {
                    const double spk = S(p, k), sqk = S(q, k);
                    S(p, k) = c * spk - s * sqk;
                    S(q, k) = s * spk + c * sqk;
                }
                for (std::size_t k = 0; k < n; ++k) {
                    const double vkp = V(k, p), vkq = V(k, q);
                    V(k, p) = c * vkp - s * vkq;
                    V(k, q) = s * vkp + c * vkq;
                }
            }
        }
    }
    values.assign(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) values[i] = S(i, i);
}

}  // namespace netmatch
