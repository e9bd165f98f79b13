#pragma once

#include <algorithm>
#include <numeric>
#include <vector>

#include "core.hpp"

namespace xnucsens {

// Eigendecomposition of a Hermitian matrix: values descending, vectors
// row-major n x n with column j the unit eigenvector of values[j].
struct HermitianEigen {
    int n = 0;
    std::vector<double> values;
    std::vector<cdouble> vectors;
};

// Cyclic complex Jacobi iteration. The input is symmetrized first so tiny
// round-off asymmetry in computed Gram matrices cannot accumulate. Suited to
// the small (coil-count sized) matrices this project produces.
inline HermitianEigen hermitian_eigen(std::vector<cdouble> a, int n) {
    if (n < 1) throw std::invalid_argument("linalg: matrix order must be at least 1");
    if (a.size() != static_cast<std::size_t>(n) * n)
        throw std::invalid_argument("linalg: matrix storage does not match its order");
    auto at = [&](int i, int j) -> cdouble& { return a[static_cast<std::size_t>(i) * n + j]; };
    for (int i = 0; i < n; ++i)
        for (int j = i; j < n; ++j) {
            cdouble m = 0.5 * (at(i, j) + std::conj(at(j, i)));
            at(i, j) = m;
            at(j, i) = std::conj(m);
        }

    std::vector<cdouble> v(static_cast<std::size_t>(n) * n, cdouble(0, 0));
    for (int i = 0; i < n; ++i) v[static_cast<std::size_t>(i) * n + i] = 1.0;
    auto vat = [&](int i, int j) -> cdouble& { return v[static_cast<std::size_t>(i) * n + j]; };

    double norm = 0.0;
    for (const auto& z : a) norm += std::norm(z);
    norm = std::sqrt(norm);
    const double tol = 1e-15 * (norm > 0 ? norm : 1.0);

    for (int sweep = 0; sweep < 64; ++sweep) {
        double off = 0.0;
        for (int p = 0; p < n; ++p)
            for (int q = p + 1; q < n; ++q) off += std::norm(at(p, q));
        if (std::sqrt(2.0 * off) <= tol) break;

        for (int p = 0; p < n; ++p) {
            for (int q = p + 1; q < n; ++q) {
                double t = std::abs(at(p, q));
                if (t <= tol * 1e-2) continue;
                // Phase of the pivot reduces the problem to a real rotation:
                // with a_pq = t*e^{i*phi}, the unitary J is the identity
                // except J_pp = c, J_pq = s*e^{i*phi}, J_qp = -s*e^{-i*phi},
                // J_qq = c, and J^H A J zeroes the pivot.
                cdouble phase = at(p, q) / t;
                double app = at(p, p).real();
                double aqq = at(q, q).real();
                double d = (aqq - app) / (2.0 * t);
                double tang = (d >= 0 ? 1.0 : -1.0) / (std::abs(d) + std::sqrt(d * d + 1.0));
                double c = 1.0 / std::sqrt(tang * tang + 1.0);
                double s = tang * c;

                for (int i = 0; i < n; ++i) {
                    if (i == p || i == q) continue;
                    cdouble aip = at(i, p), aiq = at(i, q);
                    at(i, p) = c * aip - s * std::conj(phase) * aiq;
                    at(i, q) = s * phase * aip + c * aiq;
                    at(p, i) = std::conj(at(i, p));
                    at(q, i) = std::conj(at(i, q));
                }
                at(p, p) = c * c * app + s * s * aqq - 2.0 * c * s * t;
                at(q, q) = s * s * app + c * c * aqq + 2.0 * c * s * t;
                at(p, q) = at(q, p) = 0.0;

                for (int i = 0; i < n; ++i) {
                    cdouble vip = vat(i, p), viq = vat(i, q);
                    vat(i, p) = c * vip - s * std::conj(phase) * viq;
                    vat(i, q) = s * phase * vip + c * viq;
                }
            }
        }
    }

    HermitianEigen out;
    out.n = n;
    out.values.resize(n);
    for (int i = 0; i < n; ++i) out.values[i] = at(i, i).real();

    std::vector<int> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](int i, int j) { return out.values[i] > out.values[j]; });
    std::vector<double> sorted_values(n);
    out.vectors.assign(static_cast<std::size_t>(n) * n, cdouble(0, 0));
    for (int j = 0; j < n; ++j) {
        sorted_values[j] = out.values[order[j]];
        for (int i = 0; i < n; ++i)
            out.vectors[static_cast<std::size_t>(i) * n + j] = vat(i, order[j]);
    }
    out.values = std::move(sorted_values);
    return out;
}

// Singular values (descending) and right singular vectors of a tall matrix,
// obtained from the eigendecomposition of its small Gram matrix S^H S.
struct TruncatedSvd {
    std::vector<double> singular_values;  // length cols
    std::vector<cdouble> right_vectors;   // cols x cols, column j pairs with sigma_j
};

inline TruncatedSvd gram_svd(const cdouble* s, std::size_t rows, int cols) {
    if (cols < 1 || rows < 1)
        throw std::invalid_argument("linalg: matrix must have positive dimensions");
    std::vector<cdouble> gram(static_cast<std::size_t>(cols) * cols, cdouble(0, 0));
    for (std::size_t r = 0; r < rows; ++r) {
        const cdouble* row = s + r * cols;
        for (int i = 0; i < cols; ++i)
            for (int j = i; j < cols; ++j)
                gram[static_cast<std::size_t>(i) * cols + j] += std::conj(row[i]) * row[j];
    }
    for (int i = 0; i < cols; ++i)
        for (int j = 0; j < i; ++j)
            gram[static_cast<std::size_t>(i) * cols + j] =
                std::conj(gram[static_cast<std::size_t>(j) * cols + i]);

    HermitianEigen eig = hermitian_eigen(std::move(gram), cols);
    TruncatedSvd out;
    out.singular_values.resize(cols);
    for (int i = 0; i < cols; ++i)
        out.singular_values[i] = std::sqrt(std::max(eig.values[i], 0.0));
    out.right_vectors = std::move(eig.vectors);
    return out;
}

// Projection of a tall matrix onto its leading `rank` right singular
// vectors: S V_r V_r^H. The result has rank at most `rank` by construction.
inline std::vector<cdouble> low_rank_project(const cdouble* s, std::size_t rows, int cols,
                                             int rank) {
    if (rank < 1 || rank > cols)
        throw std::invalid_argument("linalg: rank must lie in [1, cols]");
    TruncatedSvd svd = gram_svd(s, rows, cols);
    const std::vector<cdouble>& v = svd.right_vectors;
    std::vector<cdouble> out(rows * static_cast<std::size_t>(cols), cdouble(0, 0));
    std::vector<cdouble> w(rank);
    for (std::size_t r = 0; r < rows; ++r) {
        const cdouble* row = s + r * cols;
        for (int k = 0; k < rank; ++k) {
            cdouble acc = 0.0;
            for (int c = 0; c < cols; ++c)
                acc += row[c] * v[static_cast<std::size_t>(c) * cols + k];
            w[k] = acc;
        }
        cdouble* orow = out.data() + r * cols;
        for (int c = 0; c < cols; ++c) {
            cdouble acc = 0.0;
            for (int k = 0; k < rank; ++k)
                acc += w[k] * std::conj(v[static_cast<std::size_t>(c) * cols + k]);
            orow[c] = acc;
        }
    }
    return out;
}

}  // namespace xnucsens
