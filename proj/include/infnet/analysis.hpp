#pragma once

#include <infnet/error.hpp>
#include <infnet/jacobi.hpp>
#include <infnet/simulation.hpp>
#include <infnet/types.hpp>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <string>
#include <vector>

namespace infnet {

// ---------------------------------------------------------------------------
// Quality proportioning coefficient
// ---------------------------------------------------------------------------

/// Minimum coefficient for a satisfiable quality-of-life reading.
inline constexpr double kSatisfiableQc = 0.9;
inline constexpr double kDefaultSlopeEps = 1e-3;

struct QualityPoint {
    Step t = 0;
    double ihdi = 0.0;
    double mean_w = 0.0;
    double qc = 0.0;
    bool ihdi_above_one = false;  ///< warning: index values are defined on [0, 1]
};

/// qc * ihdi = mean(W).
inline QualityPoint quality_coefficient(const PerformanceVector& w, double ihdi) {
    if (!std::isfinite(ihdi) || ihdi <= 0.0)
        throw domain_error("IHDI must be finite and > 0, got " + std::to_string(ihdi));
    if (w.size() == 0) throw shape_error("performance vector is empty");
    QualityPoint p;
    p.t = w.timestamp();
    p.ihdi = ihdi;
    p.mean_w = w.mean();
    p.qc = p.mean_w / ihdi;
    p.ihdi_above_one = ihdi > 1.0;
    return p;
}

enum class TrendClass { increasing, stationary, decreasing };

inline const char* to_string(TrendClass c) {
    switch (c) {
    case TrendClass::increasing: return "increasing";
    case TrendClass::stationary: return "stationary";
    case TrendClass::decreasing: return "decreasing";
    }
    return "?";
}

inline TrendClass classify_slope(double slope, double slope_eps) {
    if (slope > slope_eps) return TrendClass::increasing;
    if (slope < -slope_eps) return TrendClass::decreasing;
    return TrendClass::stationary;
}

struct TrendReport {
    std::vector<QualityPoint> series;
    double slope = 0.0;
    TrendClass classification = TrendClass::stationary;
    bool satisfiable = false;
};

/// Least-squares slope of qc over t, classified against slope_eps. The
/// series is satisfiable when every qc is at least 0.9 and the trend is not
/// decreasing.
inline TrendReport trend(std::vector<QualityPoint> series, double slope_eps = kDefaultSlopeEps) {
    if (series.size() < 2) throw input_error("trend needs at least 2 quality points");
    if (!(slope_eps >= 0.0) || !std::isfinite(slope_eps)) throw domain_error("slope_eps must be finite and >= 0");
    for (std::size_t k = 1; k < series.size(); ++k)
        if (series[k].t <= series[k - 1].t) throw input_error("quality point timestamps must be strictly increasing");

    const double m = static_cast<double>(series.size());
    double t_mean = 0.0, q_mean = 0.0;
    for (const auto& p : series) {
        t_mean += static_cast<double>(p.t);
        q_mean += p.qc;
    }
    t_mean /= m;
    q_mean /= m;
    double sxy = 0.0, sxx = 0.0;
    for (const auto& p : series) {
        const double dt = static_cast<double>(p.t) - t_mean;
        sxy += dt * (p.qc - q_mean);
        sxx += dt * dt;
    }

    TrendReport r;
    r.slope = sxy / sxx;
    r.classification = classify_slope(r.slope, slope_eps);
    const bool above =
        std::all_of(series.begin(), series.end(), [](const QualityPoint& p) { return p.qc >= kSatisfiableQc; });
    r.satisfiable = above && r.classification != TrendClass::decreasing;
    r.series = std::move(series);
    return r;
}

// ---------------------------------------------------------------------------
// Influence ranking
// ---------------------------------------------------------------------------

enum class ObservationDesign {
    column_sums,  ///< one feature per subsystem: total influence it exerts
    flattened,    ///< every R_ij is a feature
};

inline const char* to_string(ObservationDesign d) {
    return d == ObservationDesign::column_sums ? "column-sums" : "flattened";
}

struct RankedSubsystem {
    std::size_t index = 0;
    std::string name;
    double loading = 0.0;  ///< magnitude on the first principal component
};

struct InfluenceRanking {
    ObservationDesign design = ObservationDesign::column_sums;
    std::vector<RankedSubsystem> ranked;       ///< descending loading
    std::vector<double> explained_variance;    ///< per component, sums to 1
    SymmetricEigen<double> eigen;              ///< of the feature covariance
};

/// Observation matrix (row per trace step) for the chosen design.
inline std::vector<std::vector<double>> observations(const SimulationTrace& trace, ObservationDesign design) {
    std::vector<std::vector<double>> x;
    x.reserve(trace.steps.size());
    for (const auto& s : trace.steps) {
        const std::size_t n = s.r.size();
        std::vector<double> row;
        if (design == ObservationDesign::column_sums) {
            row.assign(n, 0.0);
            for (std::size_t i = 0; i < n; ++i)
                for (std::size_t j = 0; j < n; ++j) row[j] += s.r(i, j);
        } else {
            const auto f = s.r.entries().flat();
            row.assign(f.begin(), f.end());
        }
        x.push_back(std::move(row));
    }
    return x;
}

/// Sample covariance (n - 1 denominator) of the columns of x, row-major.
/// Constant columns contribute exact zeros.
inline std::vector<double> covariance(const std::vector<std::vector<double>>& x) {
    const std::size_t m = x.size();
    const std::size_t p = m ? x.front().size() : 0;
    std::vector<std::vector<double>> centered(m, std::vector<double>(p, 0.0));
    for (std::size_t c = 0; c < p; ++c) {
        bool constant = true;
        double mean = 0.0;
        for (std::size_t r = 0; r < m; ++r) {
            mean += x[r][c];
            constant = constant && x[r][c] == x[0][c];
        }
        if (constant) continue;
        mean /= static_cast<double>(m);
        for (std::size_t r = 0; r < m; ++r) centered[r][c] = x[r][c] - mean;
    }
    std::vector<double> cov(p * p, 0.0);
    for (std::size_t a = 0; a < p; ++a) {
        for (std::size_t b = a; b < p; ++b) {
            double s = 0.0;
            for (std::size_t r = 0; r < m; ++r) s += centered[r][a] * centered[r][b];
            cov[a * p + b] = cov[b * p + a] = s / static_cast<double>(m - 1);
        }
    }
    return cov;
}

/// Ranks subsystems by their loading on the first principal component of the
/// influence-matrix time series.
inline InfluenceRanking influence_ranking(const SimulationTrace& trace,
                                          ObservationDesign design = ObservationDesign::column_sums) {
    if (trace.steps.size() < 2) throw input_error("influence ranking needs a trace of at least 2 steps");
    const std::size_t n = trace.steps.front().r.size();
    for (const auto& s : trace.steps)
        if (s.r.size() != n) throw shape_error("trace matrices differ in size");

    const auto x = observations(trace, design);
    const std::size_t p = x.front().size();
    const auto cov = covariance(x);
    if (std::all_of(cov.begin(), cov.end(), [](double v) { return v == 0.0; })) throw degenerate_ranking_error();

    InfluenceRanking out;
    out.design = design;
    out.eigen = jacobi_eigen<double>(cov, p);

    double total = 0.0;
    for (double l : out.eigen.values) total += std::max(l, 0.0);
    if (!(total > 0.0)) throw degenerate_ranking_error();
    for (double l : out.eigen.values) out.explained_variance.push_back(std::max(l, 0.0) / total);

    const auto pc1 = out.eigen.vector(0);
    std::vector<double> loading(n, 0.0);
    if (design == ObservationDesign::column_sums) {
        for (std::size_t j = 0; j < n; ++j) loading[j] = std::abs(pc1[j]);
    } else {
        // aggregate by source subsystem j over its column R_ij
        for (std::size_t j = 0; j < n; ++j) {
            double s = 0.0;
            for (std::size_t i = 0; i < n; ++i) s += pc1[i * n + j] * pc1[i * n + j];
            loading[j] = std::sqrt(s);
        }
    }

    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return loading[a] > loading[b]; });
    for (std::size_t j : order) {
        const std::string name = j < trace.subsystems.size() ? trace.subsystems[j] : "S" + std::to_string(j + 1);
        out.ranked.push_back({j, name, loading[j]});
    }
    return out;
}

struct Centrality {
    std::vector<double> exerted;   ///< column sums over off-diagonals
    std::vector<double> received;  ///< row sums over off-diagonals
};

inline Centrality influence_centrality(const InfluenceMatrix& r) {
    const std::size_t n = r.size();
    Centrality c{std::vector<double>(n, 0.0), std::vector<double>(n, 0.0)};
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            if (i == j) continue;
            c.exerted[j] += r(i, j);
            c.received[i] += r(i, j);
        }
    }
    return c;
}

} // namespace infnet
