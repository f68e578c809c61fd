#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace infnet {

// Two families: input errors (bad shapes, bad documents, bad ranges) and
// numerical failures (infeasible rows, degenerate ranking). The CLI maps the
// first to exit code 1 and the second to exit code 2.
class input_error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class numerical_error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class shape_error : public input_error {
public:
    using input_error::input_error;
};

class domain_error : public input_error {
public:
    using input_error::input_error;
};

class sequencing_error : public input_error {
public:
    using input_error::input_error;
};

/// Carries every violation found, not just the first.
class validation_error : public input_error {
public:
    explicit validation_error(std::vector<std::string> violations)
        : input_error(join(violations)), violations_(std::move(violations)) {}

    const std::vector<std::string>& violations() const noexcept { return violations_; }

private:
    static std::string join(const std::vector<std::string>& v) {
        std::string msg = std::to_string(v.size()) + " validation error(s):";
        for (const auto& s : v) {
            msg += "\n  - ";
            msg += s;
        }
        return msg;
    }

    std::vector<std::string> violations_;
};

enum class ParseErrorKind {
    syntax,          ///< malformed document
    missing_header,  ///< table without its header line
    non_numeric,     ///< a cell that should be a number is not
    non_monotone,    ///< t column not strictly increasing
    out_of_range,    ///< numeric cell outside its allowed range
    shape,           ///< wrong number of cells or rows
};

class parse_error : public input_error {
public:
    parse_error(const std::string& what, std::size_t line, std::size_t column,
                ParseErrorKind kind = ParseErrorKind::syntax)
        : input_error("line " + std::to_string(line) + ", column " + std::to_string(column) + ": " + what),
          line_(line), column_(column), kind_(kind) {}

    std::size_t line() const noexcept { return line_; }
    std::size_t column() const noexcept { return column_; }
    ParseErrorKind kind() const noexcept { return kind_; }

private:
    std::size_t line_;
    std::size_t column_;
    ParseErrorKind kind_;
};

class infeasible_row_error : public numerical_error {
public:
    explicit infeasible_row_error(std::vector<std::size_t> rows)
        : numerical_error(message(rows)), rows_(std::move(rows)) {}

    /// Zero-based row indices.
    const std::vector<std::size_t>& rows() const noexcept { return rows_; }

private:
    static std::string message(const std::vector<std::size_t>& rows) {
        std::string msg = "infeasible row(s): all relationship strengths zero but target nonzero in";
        for (auto r : rows) msg += " S" + std::to_string(r + 1);
        return msg;
    }

    std::vector<std::size_t> rows_;
};

class degenerate_ranking_error : public numerical_error {
public:
    degenerate_ranking_error()
        : numerical_error("degenerate ranking: observation matrix has zero variance, all subsystems tied") {}
};

} // namespace infnet
