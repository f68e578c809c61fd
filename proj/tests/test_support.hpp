#pragma once

#include <infnet/infnet.hpp>

#include <Eigen/Dense>

#include <cmath>
#include <cstddef>
#include <random>
#include <vector>

namespace infnet::testing {

// Relationship strengths between the five subsystems, as published.
inline SquareMatrix table1() {
    return {{1.0, 0.9, 0.1, 0.3, 0.2},
            {0.3, 1.0, 0.0, 0.2, 0.4},
            {0.4, 0.6, 1.0, 0.0, 0.1},
            {0.0, 0.5, 0.2, 1.0, 0.0},
            {0.7, 0.6, 0.2, 0.0, 1.0}};
}

inline double rel_err(double got, double want) {
    const double d = std::abs(got - want);
    return want == 0.0 ? d : d / std::abs(want);
}

inline SquareMatrix random_influence(std::mt19937_64& rng, std::size_t n, double lo = 0.0, double hi = 1.0) {
    std::uniform_real_distribution<double> d(lo, hi);
    SquareMatrix m(n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) m(i, j) = i == j ? 1.0 : d(rng);
    return m;
}

inline std::vector<double> random_vector(std::mt19937_64& rng, std::size_t n, double lo = 0.0, double hi = 1.0) {
    std::uniform_real_distribution<double> d(lo, hi);
    std::vector<double> v(n);
    for (auto& x : v) x = d(rng);
    return v;
}

/// Independent minimum-norm oracle: stacks all rows into one n x n^2 system
/// A vec(U) = W and applies the Moore-Penrose pseudo-inverse via Eigen's
/// complete orthogonal decomposition.
inline SquareMatrix pinv_min_norm(const SquareMatrix& r, const std::vector<double>& w) {
    const auto n = static_cast<Eigen::Index>(r.size());
    Eigen::MatrixXd a = Eigen::MatrixXd::Zero(n, n * n);
    Eigen::VectorXd b(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = 0; j < n; ++j) a(i, i * n + j) = r(static_cast<std::size_t>(i), static_cast<std::size_t>(j));
        b(i) = w[static_cast<std::size_t>(i)];
    }
    const Eigen::VectorXd x = a.completeOrthogonalDecomposition().solve(b);
    SquareMatrix u(r.size());
    for (Eigen::Index k = 0; k < n * n; ++k) u(static_cast<std::size_t>(k / n), static_cast<std::size_t>(k % n)) = x(k);
    return u;
}

/// Trace whose column-sum features vary only in `column`.
inline SimulationTrace single_varying_column_trace(std::mt19937_64& rng, std::size_t n, std::size_t column,
                                                   std::size_t steps) {
    std::uniform_real_distribution<double> d(0.0, 1.0);
    const SquareMatrix base = random_influence(rng, n);
    SimulationTrace trace;
    trace.subsystems = SubsystemSet::defaults_for(n).names();
    const std::size_t row = column == 0 ? 1 : 0;  // an off-diagonal cell in that column
    for (std::size_t k = 0; k < steps; ++k) {
        SquareMatrix m = base;
        m(row, column) = d(rng);
        const Step t = static_cast<Step>(k + 2);
        trace.steps.push_back({PerformanceVector(std::vector<double>(n, 0.5), t), InfluenceMatrix(m, t), {}});
    }
    return trace;
}

} // namespace infnet::testing
