#pragma once

#include <infnet/error.hpp>
#include <infnet/types.hpp>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <span>
#include <string>
#include <vector>

namespace infnet {

/// Aggregate performance: W_i = sum_j R_ij * U_ij. No clamping.
inline PerformanceVector compute_weights(const InfluenceMatrix& r, const UtilityMatrix& u) {
    if (r.size() != u.size())
        throw shape_error("influence matrix is " + std::to_string(r.size()) + "x" + std::to_string(r.size()) +
                          " but utility matrix is " + std::to_string(u.size()) + "x" + std::to_string(u.size()));
    std::vector<double> w(r.size(), 0.0);
    for (std::size_t i = 0; i < r.size(); ++i) {
        double acc = 0.0;
        for (std::size_t j = 0; j < r.size(); ++j) acc += r(i, j) * u(i, j);
        w[i] = acc;
    }
    return {std::move(w), r.timestamp()};
}

/// Which case of the relationship-strength update fired.
enum class Branch : std::uint8_t {
    one_zero,  ///< exactly one of the two deltas is zero -> 0
    equal,     ///< deltas equal (including both zero) -> previous strength
    ratio,     ///< |x|^sgn(x), x = dW_i / (dW_j * r_prev)
};

inline const char* to_string(Branch b) {
    switch (b) {
    case Branch::one_zero: return "one_zero";
    case Branch::equal: return "equal";
    case Branch::ratio: return "ratio";
    }
    return "?";
}

struct RelationshipUpdate {
    double value = 0.0;
    Branch branch = Branch::equal;
    bool degenerate = false;  ///< ratio branch hit r_prev == 0 (or overflowed)
};

/// One entry of the relationship-strength update.
///
/// A delta with |d| <= eps_delta counts as zero, and two deltas whose
/// difference is within eps_delta count as equal. The one-zero test is
/// checked first, so the ratio case never divides by a zero dW_j. In the
/// ratio case a zero r_prev is absorbing: the result is 0 and the update is
/// flagged degenerate.
inline RelationshipUpdate update_relationship(double dw_i, double dw_j, double r_prev, const ModelOptions& opts) {
    if (!std::isfinite(dw_i) || !std::isfinite(dw_j))
        throw domain_error("performance deltas must be finite");
    if (!std::isfinite(r_prev) || r_prev < 0.0)
        throw domain_error("previous relationship strength must be finite and >= 0");

    const bool zero_i = std::abs(dw_i) <= opts.eps_delta;
    const bool zero_j = std::abs(dw_j) <= opts.eps_delta;
    if (zero_i != zero_j) return {0.0, Branch::one_zero, false};
    if (zero_i || std::abs(dw_i - dw_j) <= opts.eps_delta) return {r_prev, Branch::equal, false};

    if (r_prev == 0.0) return {0.0, Branch::ratio, true};

    const double x = dw_i / (dw_j * r_prev);
    // x != 0 here; sgn(x) is +1 or -1
    double value = x > 0.0 ? x : 1.0 / std::abs(x);
    bool degenerate = false;
    if (!std::isfinite(value)) {
        value = std::numeric_limits<double>::max();
        degenerate = true;
    }
    if (opts.clamp) value = std::min(value, 1.0);
    return {value, Branch::ratio, degenerate};
}

struct BranchCounts {
    std::size_t one_zero = 0;
    std::size_t equal = 0;
    std::size_t ratio = 0;
    std::size_t degenerate = 0;  ///< subset of ratio

    void record(const RelationshipUpdate& u) {
        switch (u.branch) {
        case Branch::one_zero: ++one_zero; break;
        case Branch::equal: ++equal; break;
        case Branch::ratio: ++ratio; break;
        }
        if (u.degenerate) ++degenerate;
    }

    std::size_t total() const noexcept { return one_zero + equal + ratio; }

    BranchCounts& operator+=(const BranchCounts& o) {
        one_zero += o.one_zero;
        equal += o.equal;
        ratio += o.ratio;
        degenerate += o.degenerate;
        return *this;
    }

    friend bool operator==(const BranchCounts&, const BranchCounts&) = default;
};

struct MatrixUpdate {
    InfluenceMatrix matrix;
    BranchCounts counts;
};

namespace detail {

// Applies the entrywise update given per-subsystem deltas; the diagonal stays 1.
inline MatrixUpdate apply_deltas(std::span<const double> deltas, const InfluenceMatrix& r, Step stamp,
                                 const ModelOptions& opts) {
    const std::size_t n = r.size();
    SquareMatrix next = SquareMatrix::identity(n);
    BranchCounts counts;
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            if (i == j) continue;
            const auto u = update_relationship(deltas[i], deltas[j], r(i, j), opts);
            counts.record(u);
            next(i, j) = u.value;
        }
    }
    return {InfluenceMatrix(std::move(next), stamp), counts};
}

inline std::vector<double> deltas(const PerformanceVector& prev, const PerformanceVector& curr) {
    std::vector<double> d(curr.size());
    for (std::size_t i = 0; i < d.size(); ++i) d[i] = curr[i] - prev[i];
    return d;
}

} // namespace detail

/// R(t+1) from R(t) and the change between W(t-1) and W(t).
inline MatrixUpdate update_matrix(const PerformanceVector& w_prev, const PerformanceVector& w_curr,
                                  const InfluenceMatrix& r_curr, const ModelOptions& opts) {
    opts.validate();
    if (w_prev.size() != r_curr.size() || w_curr.size() != r_curr.size())
        throw shape_error("performance vectors and influence matrix disagree on subsystem count");
    if (w_prev.timestamp() + 1 != w_curr.timestamp() || w_curr.timestamp() != r_curr.timestamp())
        throw sequencing_error("expected t(W_prev) + 1 == t(W_curr) == t(R), got " +
                               std::to_string(w_prev.timestamp()) + ", " + std::to_string(w_curr.timestamp()) +
                               ", " + std::to_string(r_curr.timestamp()));
    const auto d = detail::deltas(w_prev, w_curr);
    return detail::apply_deltas(d, r_curr, r_curr.timestamp() + 1, opts);
}

struct ModelState {
    PerformanceVector w_prev;  ///< W(t-1)
    PerformanceVector w_curr;  ///< W(t)
    InfluenceMatrix r_curr;    ///< R(t)
};

struct StepResult {
    PerformanceVector w_next;  ///< W(t+1)
    InfluenceMatrix r_next;    ///< R(t+1)
    BranchCounts counts;
};

/// One model step: update R, aggregate W through U, then add the policy
/// emphasis and (optionally) clip W into [0, 1].
inline StepResult step(const ModelState& state, const UtilityMatrix& u, const PolicyIntervention& policy,
                       const ModelOptions& opts) {
    if (u.size() != state.r_curr.size() || policy.size() != state.r_curr.size())
        throw shape_error("utility matrix and policy must match the subsystem count");
    if (policy.timestamp() != state.r_curr.timestamp() + 1)
        throw sequencing_error("policy timestamp " + std::to_string(policy.timestamp()) + " does not match step t+1 = " +
                               std::to_string(state.r_curr.timestamp() + 1));

    auto upd = update_matrix(state.w_prev, state.w_curr, state.r_curr, opts);
    const auto raw = compute_weights(upd.matrix, u);

    std::vector<double> w(raw.size());
    for (std::size_t i = 0; i < w.size(); ++i) {
        w[i] = raw[i] + policy[i];
        if (opts.normalize_w) w[i] = std::clamp(w[i], 0.0, 1.0);
    }
    return {PerformanceVector(std::move(w), upd.matrix.timestamp()), std::move(upd.matrix), upd.counts};
}

} // namespace infnet
