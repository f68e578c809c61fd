#pragma once

#include <infnet/error.hpp>

#include <algorithm>
#include <cmath>
#include <concepts>
#include <cstddef>
#include <numeric>
#include <span>
#include <string>
#include <vector>

namespace infnet {

template <std::floating_point T>
struct SymmetricEigen {
    std::size_t n = 0;
    std::vector<T> values;   ///< descending
    std::vector<T> vectors;  ///< row k is the unit eigenvector for values[k]
    std::size_t sweeps = 0;
    T off_norm = 0;          ///< off-diagonal Frobenius norm at exit

    std::span<const T> vector(std::size_t k) const { return {vectors.data() + k * n, n}; }
};

/// Cyclic Jacobi eigendecomposition of a symmetric matrix given row-major.
///
/// Sweeps all (p, q) pairs in order, zeroing each off-diagonal entry with a
/// plane rotation, until the off-diagonal norm is at most
/// tol * max(1, ||A||_F). Eigenvectors are sign-normalized so their largest
/// magnitude component is positive.
template <std::floating_point T>
SymmetricEigen<T> jacobi_eigen(std::span<const T> a_in, std::size_t n, T tol = T(1e-12),
                               std::size_t max_sweeps = 100) {
    if (a_in.size() != n * n) throw shape_error("jacobi_eigen: expected " + std::to_string(n * n) + " entries");
    std::vector<T> a(a_in.begin(), a_in.end());
    auto at = [&](std::size_t i, std::size_t j) -> T& { return a[i * n + j]; };

    T frob = 0;
    for (T v : a) {
        if (!std::isfinite(v)) throw domain_error("jacobi_eigen: matrix entries must be finite");
        frob += v * v;
    }
    frob = std::sqrt(frob);
    const T scale = std::max(T(1), frob);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j)
            if (std::abs(at(i, j) - at(j, i)) > T(1e-12) * scale) throw domain_error("jacobi_eigen: matrix is not symmetric");

    std::vector<T> v(n * n, T(0));
    for (std::size_t i = 0; i < n; ++i) v[i * n + i] = T(1);

    auto off_norm = [&] {
        T s = 0;
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < n; ++j)
                if (i != j) s += at(i, j) * at(i, j);
        return std::sqrt(s);
    };

    SymmetricEigen<T> out;
    out.n = n;
    T off = off_norm();
    while (off > tol * scale && out.sweeps < max_sweeps) {
        ++out.sweeps;
        for (std::size_t p = 0; p + 1 < n; ++p) {
            for (std::size_t q = p + 1; q < n; ++q) {
                const T apq = at(p, q);
                if (apq == T(0)) continue;
                const T theta = (at(q, q) - at(p, p)) / (T(2) * apq);
                const T t = (theta >= 0 ? T(1) : T(-1)) / (std::abs(theta) + std::sqrt(theta * theta + T(1)));
                const T c = T(1) / std::sqrt(t * t + T(1));
                const T s = t * c;
                for (std::size_t k = 0; k < n; ++k) {
                    const T akp = at(k, p), akq = at(k, q);
                    at(k, p) = c * akp - s * akq;
                    at(k, q) = s * akp + c * akq;
                }
                for (std::size_t k = 0; k < n; ++k) {
                    const T apk = at(p, k), aqk = at(q, k);
                    at(p, k) = c * apk - s * aqk;
                    at(q, k) = s * apk + c * aqk;
                }
                at(p, q) = at(q, p) = T(0);
                for (std::size_t k = 0; k < n; ++k) {
                    const T vkp = v[k * n + p], vkq = v[k * n + q];
                    v[k * n + p] = c * vkp - s * vkq;
                    v[k * n + q] = s * vkp + c * vkq;
                }
            }
        }
        off = off_norm();
    }
    out.off_norm = off;

    // columns of v are eigenvectors; sort by eigenvalue, descending
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y) { return at(x, x) > at(y, y); });

    out.values.resize(n);
    out.vectors.resize(n * n);
    for (std::size_t k = 0; k < n; ++k) {
        const std::size_t col = order[k];
        out.values[k] = at(col, col);
        std::size_t big = 0;
        for (std::size_t i = 1; i < n; ++i)
            if (std::abs(v[i * n + col]) > std::abs(v[big * n + col])) big = i;
        const T sign = v[big * n + col] < 0 ? T(-1) : T(1);
        for (std::size_t i = 0; i < n; ++i) out.vectors[k * n + i] = sign * v[i * n + col];
    }
    return out;
}

} // namespace infnet
