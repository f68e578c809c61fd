#pragma once

#include <infnet/dynamics.hpp>
#include <infnet/error.hpp>
#include <infnet/types.hpp>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace infnet {

struct RowReport {
    std::size_t row = 0;
    double residual = 0.0;         ///< |predicted - target|
    std::size_t iterations = 0;    ///< coordinate adjustments performed
    std::size_t sweeps = 0;        ///< coordinate sweeps performed
    bool converged = false;        ///< residual <= tolerance
    std::vector<std::string> notes;
};

struct CalibrationReport {
    double tolerance = 0.0;
    std::vector<RowReport> rows;

    bool all_converged() const {
        return std::all_of(rows.begin(), rows.end(), [](const RowReport& r) { return r.converged; });
    }
    double max_residual() const {
        double m = 0.0;
        for (const auto& r : rows) m = std::max(m, r.residual);
        return m;
    }
};

inline constexpr double kConstraintTolerance = 1e-9;

struct UtilitySolution {
    UtilityMatrix utility;
    CalibrationReport report;
};

/// Minimum-norm U with sum_j R_ij U_ij = W_i for every row.
///
/// Each row is an independent equality constraint a . u = b with a = R row.
/// Stationarity of ||u||^2 / 2 - lambda (a . u - b) gives u = lambda a, and
/// substituting back yields lambda = b / ||a||^2.
///
/// Takes raw coefficients so that rows which a valid influence matrix cannot
/// hold (all zero) are still diagnosed: such a row with W_i != 0 is
/// infeasible, and with W_i == 0 yields a zero utility row.
inline UtilitySolution solve_utility_min_norm(const SquareMatrix& r, const PerformanceVector& w) {
    const std::size_t n = r.size();
    for (double v : r.flat())
        if (!std::isfinite(v)) throw domain_error("relationship strengths must be finite");
    if (w.size() != n)
        throw shape_error("performance vector has " + std::to_string(w.size()) + " entries for a " +
                          std::to_string(n) + "x" + std::to_string(n) + " influence matrix");

    SquareMatrix u(n);
    CalibrationReport report;
    report.tolerance = kConstraintTolerance;
    std::vector<std::size_t> infeasible;

    for (std::size_t i = 0; i < n; ++i) {
        RowReport rr;
        rr.row = i;
        double norm2 = 0.0;
        for (double a : r.row(i)) norm2 += a * a;

        if (norm2 == 0.0) {
            if (w[i] != 0.0) {
                infeasible.push_back(i);
                continue;
            }
            rr.notes.push_back("degenerate row: all strengths zero and target zero, utility row set to zero");
        } else {
            const double lambda = w[i] / norm2;
            for (std::size_t j = 0; j < n; ++j) u(i, j) = lambda * r(i, j);
        }

        double pred = 0.0;
        for (std::size_t j = 0; j < n; ++j) pred += r(i, j) * u(i, j);
        rr.residual = std::abs(pred - w[i]);
        rr.converged = rr.residual <= kConstraintTolerance;
        report.rows.push_back(std::move(rr));
    }
    if (!infeasible.empty()) throw infeasible_row_error(std::move(infeasible));
    return {UtilityMatrix(std::move(u)), std::move(report)};
}

inline UtilitySolution solve_utility_min_norm(const InfluenceMatrix& r, const PerformanceVector& w) {
    return solve_utility_min_norm(r.entries(), w);
}

/// Randomized certificate that each row of U is the minimum-norm point of its
/// constraint set: U satisfies the constraints, and no perturbation inside the
/// row's constraint null space shortens it.
inline bool verify_min_norm(const UtilityMatrix& u, const SquareMatrix& r, const PerformanceVector& w,
                            std::size_t trials, std::uint64_t seed = 0x5eed) {
    const std::size_t n = r.size();
    if (u.size() != n || w.size() != n) return false;

    std::mt19937_64 rng(seed);
    std::normal_distribution<double> gauss(0.0, 1.0);
    std::uniform_real_distribution<double> scale_dist(0.0, 1.0);
    std::vector<double> d(n), moved(n);

    for (std::size_t i = 0; i < n; ++i) {
        const auto a = r.row(i);
        const auto ui = u.row(i);
        double pred = 0.0, norm_a2 = 0.0, norm_u2 = 0.0;
        for (std::size_t j = 0; j < n; ++j) {
            pred += a[j] * ui[j];
            norm_a2 += a[j] * a[j];
            norm_u2 += ui[j] * ui[j];
        }
        if (std::abs(pred - w[i]) > kConstraintTolerance) return false;
        const double norm_u = std::sqrt(norm_u2);

        for (std::size_t k = 0; k < trials; ++k) {
            for (auto& v : d) v = gauss(rng);
            if (norm_a2 > 0.0) {
                double dot = 0.0;
                for (std::size_t j = 0; j < n; ++j) dot += a[j] * d[j];
                for (std::size_t j = 0; j < n; ++j) d[j] -= dot / norm_a2 * a[j];
            }
            double norm_d2 = 0.0;
            for (double v : d) norm_d2 += v * v;
            if (norm_d2 <= 1e-24) continue;  // null space is {0}

            const double target = 1e-3 * std::max(1.0, norm_u) * (1.0 - scale_dist(rng));
            const double s = target / std::sqrt(norm_d2);
            double moved2 = 0.0;
            for (std::size_t j = 0; j < n; ++j) {
                moved[j] = ui[j] + s * d[j];
                moved2 += moved[j] * moved[j];
            }
            if (std::sqrt(moved2) < norm_u - 1e-9) return false;
        }
    }
    return true;
}

inline bool verify_min_norm(const UtilityMatrix& u, const InfluenceMatrix& r, const PerformanceVector& w,
                            std::size_t trials, std::uint64_t seed = 0x5eed) {
    return verify_min_norm(u, r.entries(), w, trials, seed);
}

/// Predicts W_i from row i of R and row i of U.
struct PolicyFunction {
    std::string name;
    std::function<double(std::span<const double> r_row, std::span<const double> u_row)> evaluate;
    bool monotone = false;  ///< monotone in each R_ij; enables bisection

    static PolicyFunction eq1_forward() {
        return {"eq1-forward",
                [](std::span<const double> r, std::span<const double> u) {
                    double acc = 0.0;
                    for (std::size_t j = 0; j < r.size(); ++j) acc += r[j] * u[j];
                    return acc;
                },
                true};
    }
};

struct TuneOptions {
    double tol = 1e-6;
    std::size_t max_sweeps = 200;
    double bracket_lo = 0.0;
    double bracket_hi = 1.0;

    void validate() const {
        if (!(tol > 0.0) || !std::isfinite(tol)) throw domain_error("tune tolerance must be finite and > 0");
        if (max_sweeps < 1) throw domain_error("max_sweeps must be >= 1");
        if (!(bracket_lo >= 0.0 && bracket_hi <= 1.0 && bracket_lo < bracket_hi))
            throw domain_error("tuning bracket must lie within [0, 1] and be non-degenerate");
    }
};

struct TuneResult {
    InfluenceMatrix r_prev;  ///< tuned R(t-1)
    InfluenceMatrix r_curr;  ///< R(t) derived from R(t-1) by the strength update
    CalibrationReport report;
};

/// Unit diagonal, off-diagonals at the bracket midpoint.
inline SquareMatrix default_tuning_guess(std::size_t n, const TuneOptions& opts = {}) {
    SquareMatrix g(n, 0.5 * (opts.bracket_lo + opts.bracket_hi));
    for (std::size_t i = 0; i < n; ++i) g(i, i) = 1.0;
    return g;
}

namespace detail {

inline constexpr std::size_t kLineSearchIters = 200;

// Moves row[j] within [lo, hi] to bring f = P(row) - target toward zero.
// Returns the new |f|.
inline double adjust_coordinate(std::vector<double>& row, std::size_t j, std::span<const double> u_row,
                                const PolicyFunction& p, double target, const TuneOptions& opts) {
    auto f = [&](double x) {
        row[j] = x;
        return p.evaluate(row, u_row) - target;
    };
    const double x0 = row[j];
    const double f0 = f(x0);
    double best_x = x0, best_abs = std::abs(f0);
    auto consider = [&](double x, double fx) {
        if (std::abs(fx) < best_abs) {
            best_abs = std::abs(fx);
            best_x = x;
        }
    };

    double lo = opts.bracket_lo, hi = opts.bracket_hi;
    if (p.monotone) {
        double flo = f(lo), fhi = f(hi);
        consider(lo, flo);
        consider(hi, fhi);
        if ((flo < 0.0) != (fhi < 0.0)) {
            for (std::size_t k = 0; k < kLineSearchIters && best_abs > opts.tol; ++k) {
                const double mid = 0.5 * (lo + hi);
                if (mid <= lo || mid >= hi) break;
                const double fm = f(mid);
                consider(mid, fm);
                if ((fm < 0.0) == (flo < 0.0)) {
                    lo = mid;
                    flo = fm;
                } else {
                    hi = mid;
                }
            }
        }
    } else {
        // golden-section on |f|
        const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
        double a = lo, b = hi;
        double c = b - inv_phi * (b - a), d = a + inv_phi * (b - a);
        double fc = std::abs(f(c)), fd = std::abs(f(d));
        consider(c, fc);
        consider(d, fd);
        for (std::size_t k = 0; k < kLineSearchIters && best_abs > opts.tol && (b - a) > 1e-15; ++k) {
            if (fc < fd) {
                b = d;
                d = c;
                fd = fc;
                c = b - inv_phi * (b - a);
                fc = std::abs(f(c));
                consider(c, fc);
            } else {
                a = c;
                c = d;
                fc = fd;
                d = a + inv_phi * (b - a);
                fd = std::abs(f(d));
                consider(d, fd);
            }
        }
        consider(lo, f(lo));
        consider(hi, f(hi));
    }
    row[j] = best_x;
    return best_abs;
}

} // namespace detail

/// Tunes the initial strengths R(t-1) so the policy function reproduces W(t)
/// row by row, then derives R(t) from R(t-1) with the strength update driven
/// by W(t) - W(t-1).
///
/// Rows are swept coordinate-wise in ascending j with the diagonal pinned at
/// 1. Rows that do not reach the tolerance keep their best values and are
/// flagged in the report.
inline TuneResult tune_initial_r(const PerformanceVector& w_prev, const PerformanceVector& w_curr,
                                 const UtilityMatrix& u, const PolicyFunction& p, const TuneOptions& opts,
                                 std::optional<SquareMatrix> guess = std::nullopt,
                                 const ModelOptions& model = {}) {
    opts.validate();
    model.validate();
    const std::size_t n = u.size();
    if (w_prev.size() != n || w_curr.size() != n)
        throw shape_error("performance vectors and utility matrix disagree on subsystem count");
    if (w_prev.timestamp() + 1 != w_curr.timestamp())
        throw sequencing_error("tuning needs consecutive performance snapshots");
    if (!p.evaluate) throw domain_error("policy function '" + p.name + "' has no evaluator");

    SquareMatrix r = guess ? std::move(*guess) : default_tuning_guess(n, opts);
    if (r.size() != n) throw shape_error("initial guess does not match the subsystem count");
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j)
            r(i, j) = i == j ? 1.0 : std::clamp(r(i, j), opts.bracket_lo, opts.bracket_hi);

    CalibrationReport report;
    report.tolerance = opts.tol;

    for (std::size_t i = 0; i < n; ++i) {
        RowReport rr;
        rr.row = i;
        std::vector<double> row(r.row(i).begin(), r.row(i).end());
        const auto u_row = u.row(i);
        const double target = w_curr[i];
        double res = std::abs(p.evaluate(row, u_row) - target);

        while (res > opts.tol && rr.sweeps < opts.max_sweeps) {
            ++rr.sweeps;
            const double before = res;
            for (std::size_t j = 0; j < n && res > opts.tol; ++j) {
                if (j == i) continue;
                res = detail::adjust_coordinate(row, j, u_row, p, target, opts);
                ++rr.iterations;
            }
            if (!(res < before)) break;  // stalled
        }

        rr.residual = res;
        rr.converged = res <= opts.tol;
        if (!rr.converged) {
            bool unreachable = n > 1;
            for (std::size_t j = 0; j < n && unreachable; ++j) {
                if (j == i) continue;
                std::vector<double> probe = row;
                probe[j] = opts.bracket_lo;
                const double flo = p.evaluate(probe, u_row) - target;
                probe[j] = opts.bracket_hi;
                const double fhi = p.evaluate(probe, u_row) - target;
                unreachable = (flo > 0.0 && fhi > 0.0) || (flo < 0.0 && fhi < 0.0);
            }
            if (unreachable)
                rr.notes.push_back("unreachable target: no coordinate can cross W" + std::to_string(i + 1) +
                                   "(t) within the bracket");
            if (rr.sweeps >= opts.max_sweeps) rr.notes.push_back("max_sweeps reached");
        }
        std::copy(row.begin(), row.end(), r.row(i).begin());
        report.rows.push_back(std::move(rr));
    }

    InfluenceMatrix r_prev(std::move(r), w_prev.timestamp());
    const auto d = detail::deltas(w_prev, w_curr);
    auto upd = detail::apply_deltas(d, r_prev, w_curr.timestamp(), model);
    return {std::move(r_prev), std::move(upd.matrix), std::move(report)};
}

} // namespace infnet
