#pragma once

#include <infnet/error.hpp>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <initializer_list>
#include <set>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace infnet {

using Step = std::int64_t;

/// Dense n x n matrix, row-major.
class SquareMatrix {
public:
    SquareMatrix() = default;

    explicit SquareMatrix(std::size_t n, double fill = 0.0) : n_(n), data_(n * n, fill) {}

    SquareMatrix(std::initializer_list<std::initializer_list<double>> rows) {
        n_ = rows.size();
        data_.reserve(n_ * n_);
        for (const auto& r : rows) {
            if (r.size() != n_) throw shape_error("matrix rows must all have length " + std::to_string(n_));
            data_.insert(data_.end(), r.begin(), r.end());
        }
    }

    static SquareMatrix identity(std::size_t n) {
        SquareMatrix m(n);
        for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
        return m;
    }

    static SquareMatrix from_rows(const std::vector<std::vector<double>>& rows) {
        SquareMatrix m(rows.size());
        for (std::size_t i = 0; i < rows.size(); ++i) {
            if (rows[i].size() != rows.size())
                throw shape_error("row " + std::to_string(i + 1) + " has " + std::to_string(rows[i].size()) +
                                  " entries, expected " + std::to_string(rows.size()));
            std::copy(rows[i].begin(), rows[i].end(), m.data_.begin() + static_cast<std::ptrdiff_t>(i * m.n_));
        }
        return m;
    }

    std::size_t size() const noexcept { return n_; }

    double& operator()(std::size_t i, std::size_t j) { return data_[i * n_ + j]; }
    double operator()(std::size_t i, std::size_t j) const { return data_[i * n_ + j]; }

    std::span<const double> row(std::size_t i) const { return {data_.data() + i * n_, n_}; }
    std::span<double> row(std::size_t i) { return {data_.data() + i * n_, n_}; }

    std::span<const double> flat() const noexcept { return data_; }

    std::vector<std::vector<double>> to_rows() const {
        std::vector<std::vector<double>> out(n_);
        for (std::size_t i = 0; i < n_; ++i) out[i].assign(row(i).begin(), row(i).end());
        return out;
    }

    friend bool operator==(const SquareMatrix&, const SquareMatrix&) = default;

private:
    std::size_t n_ = 0;
    std::vector<double> data_;
};

/// Ordered, uniquely named principal subsystems.
class SubsystemSet {
public:
    explicit SubsystemSet(std::vector<std::string> names) : names_(std::move(names)) {
        if (names_.size() < 2) throw domain_error("a subsystem set needs at least 2 members");
        std::set<std::string> seen;
        for (const auto& n : names_) {
            if (n.empty()) throw domain_error("subsystem names must be non-empty");
            if (!seen.insert(n).second) throw domain_error("duplicate subsystem name '" + n + "'");
        }
    }

    static SubsystemSet standard() {
        return SubsystemSet({
            "Comprehensive Education",
            "Health-care and Nutrition Access",
            "Income Avenues, Public Insurance and Micro-financing",
            "Human Security and Legal Systems",
            "Technological and Demographic Growth/Transition Management",
        });
    }

    /// Standard names when n == 5, otherwise S1..Sn.
    static SubsystemSet defaults_for(std::size_t n) {
        if (n == 5) return standard();
        std::vector<std::string> names;
        for (std::size_t i = 0; i < n; ++i) names.push_back("S" + std::to_string(i + 1));
        return SubsystemSet(std::move(names));
    }

    std::size_t size() const noexcept { return names_.size(); }
    const std::vector<std::string>& names() const noexcept { return names_; }
    const std::string& operator[](std::size_t i) const { return names_[i]; }

    friend bool operator==(const SubsystemSet&, const SubsystemSet&) = default;

private:
    std::vector<std::string> names_;
};

/// Dynamic relationship strengths R_ij(t): how strongly subsystem j acts on
/// subsystem i at step t. Entries finite and non-negative, unit diagonal.
class InfluenceMatrix {
public:
    InfluenceMatrix(SquareMatrix entries, Step t) : m_(std::move(entries)), t_(t) {
        for (std::size_t i = 0; i < m_.size(); ++i) {
            for (std::size_t j = 0; j < m_.size(); ++j) {
                const double v = m_(i, j);
                if (!std::isfinite(v) || v < 0.0)
                    throw domain_error("R" + cell(i, j) + " must be finite and >= 0, got " + std::to_string(v));
                if (i == j && v != 1.0) throw domain_error("R" + cell(i, j) + " is a diagonal entry and must be 1");
            }
        }
    }

    std::size_t size() const noexcept { return m_.size(); }
    Step timestamp() const noexcept { return t_; }
    double operator()(std::size_t i, std::size_t j) const { return m_(i, j); }
    std::span<const double> row(std::size_t i) const { return m_.row(i); }
    const SquareMatrix& entries() const noexcept { return m_; }

    /// All entries within [0, 1], as required in clamped mode.
    bool within_unit() const {
        const auto f = m_.flat();
        return std::all_of(f.begin(), f.end(), [](double v) { return v <= 1.0; });
    }

    friend bool operator==(const InfluenceMatrix&, const InfluenceMatrix&) = default;

private:
    static std::string cell(std::size_t i, std::size_t j) {
        return "[" + std::to_string(i + 1) + "][" + std::to_string(j + 1) + "]";
    }

    SquareMatrix m_;
    Step t_ = 0;
};

/// Fixed utility weight factors U_ij. Time-invariant.
class UtilityMatrix {
public:
    explicit UtilityMatrix(SquareMatrix entries) : m_(std::move(entries)) {
        for (double v : m_.flat())
            if (!std::isfinite(v)) throw domain_error("utility weights must be finite");
    }

    std::size_t size() const noexcept { return m_.size(); }
    double operator()(std::size_t i, std::size_t j) const { return m_(i, j); }
    std::span<const double> row(std::size_t i) const { return m_.row(i); }
    const SquareMatrix& entries() const noexcept { return m_; }

    friend bool operator==(const UtilityMatrix&, const UtilityMatrix&) = default;

private:
    SquareMatrix m_;
};

/// Performance metrics W_Si(t), one per subsystem.
class PerformanceVector {
public:
    PerformanceVector(std::vector<double> values, Step t) : w_(std::move(values)), t_(t) {
        for (std::size_t i = 0; i < w_.size(); ++i)
            if (!std::isfinite(w_[i])) throw domain_error("W" + std::to_string(i + 1) + " must be finite");
    }

    std::size_t size() const noexcept { return w_.size(); }
    Step timestamp() const noexcept { return t_; }
    double operator[](std::size_t i) const { return w_[i]; }
    std::span<const double> values() const noexcept { return w_; }

    bool normalized() const {
        return std::all_of(w_.begin(), w_.end(), [](double v) { return v >= 0.0 && v <= 1.0; });
    }

    double mean() const {
        double s = 0.0;
        for (double v : w_) s += v;
        return w_.empty() ? 0.0 : s / static_cast<double>(w_.size());
    }

    friend bool operator==(const PerformanceVector&, const PerformanceVector&) = default;

private:
    std::vector<double> w_;
    Step t_ = 0;
};

/// Additive exogenous emphasis applied to a freshly computed W.
class PolicyIntervention {
public:
    PolicyIntervention(std::vector<double> emphasis, Step t) : e_(std::move(emphasis)), t_(t) {
        for (double v : e_)
            if (!std::isfinite(v)) throw domain_error("policy emphasis must be finite");
    }

    static PolicyIntervention none(std::size_t n, Step t) { return {std::vector<double>(n, 0.0), t}; }

    std::size_t size() const noexcept { return e_.size(); }
    Step timestamp() const noexcept { return t_; }
    double operator[](std::size_t i) const { return e_[i]; }
    std::span<const double> emphasis() const noexcept { return e_; }

    friend bool operator==(const PolicyIntervention&, const PolicyIntervention&) = default;

private:
    std::vector<double> e_;
    Step t_ = 0;
};

struct ModelOptions {
    bool clamp = true;        ///< clamp R into [0, 1] after each update
    double eps_delta = 1e-9;  ///< deltas (and delta differences) at or below this count as zero
    bool normalize_w = true;  ///< clip W into [0, 1] after each step

    void validate() const {
        if (!(eps_delta > 0.0) || !std::isfinite(eps_delta)) throw domain_error("eps_delta must be finite and > 0");
    }

    friend bool operator==(const ModelOptions&, const ModelOptions&) = default;
};

} // namespace infnet
