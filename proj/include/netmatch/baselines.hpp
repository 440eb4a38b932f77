#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>
#include <span>
#include <vector>

#include "netmatch/graph.hpp"
#include "netmatch/linalg.hpp"

namespace netmatch {

// Difference in means between the treated and control arms.
inline double naive_dim(std::span<const double> y, const TreatmentVector& t) {
    if (y.size() != t.size()) throw InputError("naive_dim: length mismatch");
    double sum[2] = {0.0, 0.0};
    int cnt[2] = {0, 0};
    for (std::size_t i = 0; i < y.size(); ++i) {
        sum[t[static_cast<int>(i)]] += y[i];
        ++cnt[t[static_cast<int>(i)]];
    }
    if (cnt[0] == 0 || cnt[1] == 0) throw EstimationError("naive_dim: an arm is empty");
    return sum[1] / cnt[1] - sum[0] / cnt[0];
}

struct EigenSpectrum {
    std::vector<double> values;  // descending
    Matrix vectors;              // columns, unit norm, aligned with values
};

inline Matrix adjacency_matrix(const Graph& g) {
    const std::size_t n = static_cast<std::size_t>(g.vertex_count());
    Matrix A(n, n);
    for (int u = 0; u < g.vertex_count(); ++u)
        for (int v : g.neighbors(u)) A(static_cast<std::size_t>(u), static_cast<std::size_t>(v)) = 1.0;
    return A;
}

// Full spectrum of a symmetric matrix (cyclic Jacobi), eigenvalues descending.
inline EigenSpectrum sym_eigen(const Matrix& A) {
    if (A.rows != A.cols) throw InputError("sym_eigen: matrix must be square");
    for (std::size_t i = 0; i < A.rows; ++i)
        for (std::size_t j = i + 1; j < A.cols; ++j)
            if (std::abs(A(i, j) - A(j, i)) > 1e-12)
                throw InputError("sym_eigen: matrix is not symmetric");

    EigenSpectrum spec;
    Matrix V;
    std::vector<double> values;
    jacobi_eigen(A, values, V);

    std::vector<std::size_t> order(values.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return values[a] > values[b]; });
    spec.values.resize(values.size());
    spec.vectors = Matrix(A.rows, A.cols);
    for (std::size_t k = 0; k < order.size(); ++k) {
        spec.values[k] = values[order[k]];
        for (std::size_t i = 0; i < A.rows; ++i) spec.vectors(i, k) = V(i, order[k]);
    }
    return spec;
}

enum class EigenMatchMode { FirstVector, AllVectors };

struct EigenMatchOptions {
    EigenMatchMode mode = EigenMatchMode::AllVectors;
    bool standardize = true;
    std::vector<std::pair<int, int>>* pairing = nullptr;  // (treated, control), if wanted
};

// Match every treated unit to the control minimizing the 1/k-weighted,
// sd-standardized squared distance between eigenvector coordinates; controls
// may be reused. Estimate is the mean of within-pair outcome differences.
inline double eigen_match(const EigenSpectrum& spec, std::span<const double> y,
                          const TreatmentVector& t, const EigenMatchOptions& opts = {}) {
    const std::size_t n = t.size();
    if (y.size() != n || spec.vectors.rows != n)
        throw InputError("eigen_match: dimension mismatch");
    const std::size_t k_max = opts.mode == EigenMatchMode::FirstVector ? 1 : spec.vectors.cols;

    std::vector<double> weight(k_max);
    for (std::size_t k = 0; k < k_max; ++k) {
        double scale = 1.0;
        if (opts.standardize) {
            double mean = 0.0;
            for (std::size_t i = 0; i < n; ++i) mean += spec.vectors(i, k);
            mean /= static_cast<double>(n);
            double ss = 0.0;
            for (std::size_t i = 0; i < n; ++i) {
                const double d = spec.vectors(i, k) - mean;
                ss += d * d;
            }
            const double sd = std::sqrt(ss / static_cast<double>(n > 1 ? n - 1 : 1));
            if (sd > 0.0) scale = sd;  // zero-variance coordinate: skip standardization
        }
        weight[k] = 1.0 / (static_cast<double>(k + 1) * scale * scale);
    }

    std::vector<int> treated, control;
    for (std::size_t i = 0; i < n; ++i)
        (t[static_cast<int>(i)] ? treated : control).push_back(static_cast<int>(i));
    if (treated.empty() || control.empty())
        throw EstimationError("eigen_match: an arm is empty");

    double total = 0.0;
    for (int i : treated) {
        int best = -1;
        double best_d = std::numeric_limits<double>::infinity();
        for (int j : control) {
            double d = 0.0;
            for (std::size_t k = 0; k < k_max; ++k) {
                const double diff = spec.vectors(static_cast<std::size_t>(i), k) -
                                    spec.vectors(static_cast<std::size_t>(j), k);
                d += weight[k] * diff * diff;
            }
            if (d < best_d) {
                best_d = d;
                best = j;  // ties keep the smallest id (controls scanned in order)
            }
        }
        total += y[static_cast<std::size_t>(i)] - y[static_cast<std::size_t>(best)];
        if (opts.pairing) opts.pairing->emplace_back(i, best);
    }
    return total / static_cast<double>(treated.size());
}

// Weighted difference in means across strata defined by treated degree, with
// weight equal to the stratum unit count. Strata missing an arm are excluded.
inline double stratified_naive(const Graph& g, std::span<const double> y,
                               const TreatmentVector& t) {
    require_compatible(g, t);
    if (y.size() != t.size()) throw InputError("stratified_naive: length mismatch");
    struct Stratum {
        double sum[2] = {0.0, 0.0};
        int cnt[2] = {0, 0};
    };
    std::map<int, Stratum> strata;
    for (int i = 0; i < g.vertex_count(); ++i) {
        auto& s = strata[treated_degree(g, t, i)];
        s.sum[t[i]] += y[static_cast<std::size_t>(i)];
        ++s.cnt[t[i]];
    }
    double num = 0.0, den = 0.0;
    for (const auto& [d, s] : strata) {
        if (s.cnt[0] == 0 || s.cnt[1] == 0) continue;
        const double w = s.cnt[0] + s.cnt[1];
        num += w * (s.sum[1] / s.cnt[1] - s.sum[0] / s.cnt[0]);
        den += w;
    }
    if (den == 0.0) throw EstimationError("stratified_naive: no stratum contains both arms");
    return num / den;
}

struct SaniaWeights {
    std::vector<double> weights;
    double p = 0.5;
};

namespace detail {

inline double binomial_double(int n, int k) {
    if (k < 0 || k > n) return 0.0;
    double r = 1.0;
    for (int j = 1; j <= k; ++j) r = r * static_cast<double>(n - k + j) / static_cast<double>(j);
    return r;
}

}  // namespace detail

// Closed-form SANIA MIVLUE weights under an independent Bernoulli(p) design:
// w_i = [z_i/(np) - (1-z_i)/(n(1-p))] / sum_d C(d_i,d)^2 p^d (1-p)^(d_i-d).
inline SaniaWeights sania_weights(std::span<const int> degrees, const TreatmentVector& z,
                                  double p) {
    if (!(p > 0.0 && p < 1.0)) throw InputError("sania_weights: p must lie strictly in (0,1)");
    if (degrees.size() != z.size()) throw InputError("sania_weights: length mismatch");
    const double n = static_cast<double>(degrees.size());
    SaniaWeights out;
    out.p = p;
    out.weights.resize(degrees.size());
    for (std::size_t i = 0; i < degrees.size(); ++i) {
        const int d_i = degrees[i];
        double denom = 0.0;
        for (int d = 0; d <= d_i; ++d) {
            const double c = detail::binomial_double(d_i, d);
            denom += c * c * std::pow(p, d) * std::pow(1.0 - p, d_i - d);
        }
        const double sign_term = z[static_cast<int>(i)] ? 1.0 / (n * p) : -1.0 / (n * (1.0 - p));
        out.weights[i] = sign_term / denom;
    }
    return out;
}

inline double sania_estimate(const SaniaWeights& w, std::span<const double> y) {
    if (w.weights.size() != y.size()) throw InputError("sania_estimate: length mismatch");
    double s = 0.0;
    for (std::size_t i = 0; i < y.size(); ++i) s += w.weights[i] * y[i];
    return s;
}

}  // namespace netmatch
