#pragma once

#include <infnet/calibration.hpp>
#include <infnet/error.hpp>
#include <infnet/types.hpp>

#include <cmath>
#include <cstddef>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

namespace infnet {

/// Everything a simulation run needs. Fields are stored raw so that a
/// scenario with several problems can be reported in one pass; see
/// validate().
///
/// Seeds are W(0), W(1) and R(1). A policy keyed by step s is added to the
/// W(s) produced by the step that reaches s, so valid keys are 2..horizon+1.
struct Scenario {
    std::vector<std::string> subsystems;
    std::vector<double> w0;
    std::vector<double> w1;
    SquareMatrix r1;
    std::optional<SquareMatrix> utility;  ///< nullopt: calibrate from (R(1), W(1))
    std::map<Step, std::vector<double>> policy;
    ModelOptions options;
    std::size_t horizon = 10;

    friend bool operator==(const Scenario&, const Scenario&) = default;
};

namespace detail {

inline std::string cell_name(const char* m, std::size_t i, std::size_t j) {
    return std::string(m) + "[" + std::to_string(i + 1) + "][" + std::to_string(j + 1) + "]";
}

inline void check_vector(const char* name, const std::vector<double>& v, std::size_t n, bool unit,
                         std::vector<std::string>& out) {
    if (v.size() != n) {
        out.push_back(std::string(name) + " has " + std::to_string(v.size()) + " entries, expected " +
                      std::to_string(n));
        return;
    }
    for (std::size_t i = 0; i < n; ++i) {
        if (!std::isfinite(v[i]))
            out.push_back(std::string(name) + "[" + std::to_string(i + 1) + "] is not finite");
        else if (unit && (v[i] < 0.0 || v[i] > 1.0))
            out.push_back(std::string(name) + "[" + std::to_string(i + 1) + "] = " + std::to_string(v[i]) +
                          " is outside [0, 1]");
    }
}

} // namespace detail

/// Every violated scenario invariant, in document order. Empty means valid.
inline std::vector<std::string> validate(const Scenario& s) {
    std::vector<std::string> out;
    const std::size_t n = s.subsystems.size();

    if (n < 2) out.push_back("subsystems: at least 2 subsystems are required");
    std::set<std::string> seen;
    for (const auto& name : s.subsystems) {
        if (name.empty()) out.push_back("subsystems: names must be non-empty");
        else if (!seen.insert(name).second) out.push_back("subsystems: duplicate name '" + name + "'");
    }

    if (!(s.options.eps_delta > 0.0) || !std::isfinite(s.options.eps_delta))
        out.push_back("options.eps_delta must be finite and > 0");
    if (s.horizon < 1) out.push_back("horizon must be >= 1");

    detail::check_vector("w0", s.w0, n, s.options.normalize_w, out);
    detail::check_vector("w1", s.w1, n, s.options.normalize_w, out);

    if (s.r1.size() != n) {
        out.push_back("r1 is " + std::to_string(s.r1.size()) + "x" + std::to_string(s.r1.size()) + ", expected " +
                      std::to_string(n) + "x" + std::to_string(n));
    } else {
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t j = 0; j < n; ++j) {
                const double v = s.r1(i, j);
                const auto name = detail::cell_name("r1", i, j);
                if (!std::isfinite(v)) out.push_back(name + " is not finite");
                else if (i == j && v != 1.0) out.push_back(name + " = " + std::to_string(v) + " must be 1 (diagonal)");
                else if (v < 0.0) out.push_back(name + " = " + std::to_string(v) + " is negative");
                else if (s.options.clamp && v > 1.0)
                    out.push_back(name + " = " + std::to_string(v) + " is outside [0, 1]");
            }
        }
    }

    if (s.utility) {
        if (s.utility->size() != n) {
            out.push_back("u is " + std::to_string(s.utility->size()) + "x" + std::to_string(s.utility->size()) +
                          ", expected " + std::to_string(n) + "x" + std::to_string(n));
        } else {
            for (std::size_t i = 0; i < n; ++i)
                for (std::size_t j = 0; j < n; ++j)
                    if (!std::isfinite((*s.utility)(i, j)))
                        out.push_back(detail::cell_name("u", i, j) + " is not finite");
        }
    } else if (s.r1.size() == n && s.w1.size() == n) {
        for (std::size_t i = 0; i < n; ++i) {
            bool zero_row = true;
            for (double v : s.r1.row(i)) zero_row = zero_row && v == 0.0;
            if (zero_row && s.w1[i] != 0.0)
                out.push_back("u: calibrate is infeasible, r1 row " + std::to_string(i + 1) +
                              " is all zero but w1 is not");
        }
    }

    for (const auto& [t, e] : s.policy) {
        const auto key = "policy[" + std::to_string(t) + "]";
        if (t < 2 || t > static_cast<Step>(s.horizon) + 1)
            out.push_back(key + ": step must be within 2.." + std::to_string(s.horizon + 1));
        detail::check_vector(key.c_str(), e, n, false, out);
    }
    return out;
}

inline void require_valid(const Scenario& s) {
    auto v = validate(s);
    if (!v.empty()) throw validation_error(std::move(v));
}

/// The scenario's utility matrix, calibrating from (R(1), W(1)) when none is given.
inline UtilityMatrix resolve_utility(const Scenario& s) {
    if (s.utility) return UtilityMatrix(*s.utility);
    return solve_utility_min_norm(InfluenceMatrix(s.r1, 1), PerformanceVector(s.w1, 1)).utility;
}

} // namespace infnet
