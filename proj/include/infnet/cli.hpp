#pragma once

// Command-line front end. Machine output goes to `out` (or --out), all
// diagnostics to `err`. Exit codes: 0 success, 1 input or validation error,
// 2 numerical failure (infeasible row, unconverged tuning, degenerate ranking).

#include <infnet/analysis.hpp>
#include <infnet/calibration.hpp>
#include <infnet/io.hpp>
#include <infnet/simulation.hpp>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include <algorithm>
#include <fstream>
#include <iterator>
#include <map>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

namespace infnet::cli {

inline constexpr int kOk = 0;
inline constexpr int kInputError = 1;
inline constexpr int kNumericalError = 2;

namespace detail {

inline std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw input_error("cannot read '" + path + "'");
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

inline void emit(const std::string& text, const std::string& out_path, std::ostream& out) {
    if (out_path.empty()) {
        out << text;
        return;
    }
    std::ofstream f(out_path, std::ios::binary);
    if (!f) throw input_error("cannot write '" + out_path + "'");
    f << text;
}

inline std::string join(std::span<const double> v) {
    std::string s = "(";
    for (std::size_t i = 0; i < v.size(); ++i) s += (i ? ", " : "") + format_double(v[i]);
    return s + ")";
}

inline std::string counts_text(const BranchCounts& c) {
    return "one_zero=" + std::to_string(c.one_zero) + " equal=" + std::to_string(c.equal) +
           " ratio=" + std::to_string(c.ratio) + " degenerate=" + std::to_string(c.degenerate);
}

struct SimulateArgs {
    std::string scenario;
    std::optional<long long> horizon;
    std::string out;
    std::string format = "table";
};

struct CalibrateArgs {
    std::string r;
    std::string w;
    std::string out;
};

struct TuneArgs {
    std::string series;
    std::string u = "auto";
    double tol = 1e-6;
    long long max_sweeps = 200;
    std::string out;
};

struct QcArgs {
    std::string series;
    double slope_eps = kDefaultSlopeEps;
    std::string out;
};

struct RankArgs {
    std::string trace;
    std::string design = "column-sums";
    std::string out;
};

inline int cmd_simulate(const SimulateArgs& a, std::ostream& out, std::ostream& err) {
    const Scenario scenario = parse_scenario(read_file(a.scenario));
    std::size_t horizon = scenario.horizon;
    if (a.horizon) {
        if (*a.horizon < 1) throw input_error("--horizon must be >= 1, got " + std::to_string(*a.horizon));
        horizon = static_cast<std::size_t>(*a.horizon);
    }
    const auto trace = simulate(scenario, horizon);
    emit(write_trace(trace, a.format == "structured" ? TraceFormat::structured : TraceFormat::table), a.out, out);
    err << "simulated " << horizon << " step(s)\n"
        << "final W = " << join(trace.steps.back().w.values()) << "\n"
        << "branches: " << counts_text(trace.total_counts()) << "\n";
    return kOk;
}

inline int cmd_calibrate(const CalibrateArgs& a, std::ostream& out, std::ostream& err) {
    const auto r = parse_matrix(read_file(a.r));
    const auto w = parse_vector(read_file(a.w));
    if (w.size() != r.size())
        throw shape_error("W has " + std::to_string(w.size()) + " entries but R is " + std::to_string(r.size()) + "x" +
                          std::to_string(r.size()));
    const auto sol = solve_utility_min_norm(r, PerformanceVector(w, 0));
    emit(write_matrix(sol.utility.entries()), a.out, out);
    for (const auto& row : sol.report.rows) {
        err << "S" << row.row + 1 << ": residual " << format_double(row.residual);
        for (const auto& n : row.notes) err << "; " << n;
        err << "\n";
    }
    return kOk;
}

inline int cmd_tune(const TuneArgs& a, std::ostream& out, std::ostream& err) {
    TuneOptions opts;
    opts.tol = a.tol;
    if (a.max_sweeps < 1) throw input_error("--max-sweeps must be >= 1");
    opts.max_sweeps = static_cast<std::size_t>(a.max_sweeps);
    opts.validate();

    const auto series = parse_series(read_file(a.series));
    if (series.rows.size() < 2) throw input_error("tuning needs at least 2 series rows");
    if (series.rows[1].t != series.rows[0].t + 1) throw input_error("the first two series rows must be consecutive steps");
    const auto w_prev = series.performance(0);
    const auto w_curr = series.performance(1);
    const std::size_t n = w_prev.size();

    const SquareMatrix guess = default_tuning_guess(n, opts);
    std::optional<UtilityMatrix> u;
    if (a.u == "auto") {
        u = solve_utility_min_norm(InfluenceMatrix(guess, w_prev.timestamp()), w_prev).utility;
    } else {
        u = UtilityMatrix(parse_matrix(read_file(a.u)));
        if (u->size() != n)
            throw shape_error("U is " + std::to_string(u->size()) + "x" + std::to_string(u->size()) + " but the series has " +
                              std::to_string(n) + " subsystems");
    }

    const auto res = tune_initial_r(w_prev, w_curr, *u, PolicyFunction::eq1_forward(), opts, guess);

    nlohmann::ordered_json doc;
    doc["t_prev"] = w_prev.timestamp();
    doc["t"] = w_curr.timestamp();
    doc["tol"] = opts.tol;
    doc["u"] = infnet::detail::matrix_json(u->entries());
    doc["r_prev"] = infnet::detail::matrix_json(res.r_prev.entries());
    doc["r_curr"] = infnet::detail::matrix_json(res.r_curr.entries());
    doc["converged"] = res.report.all_converged();
    doc["rows"] = nlohmann::ordered_json::array();
    for (const auto& row : res.report.rows) {
        doc["rows"].push_back({{"subsystem", series.names[row.row]},
                               {"residual", row.residual},
                               {"iterations", row.iterations},
                               {"sweeps", row.sweeps},
                               {"converged", row.converged},
                               {"notes", row.notes}});
    }
    emit(doc.dump(2) + "\n", a.out, out);

    for (const auto& row : res.report.rows) {
        err << series.names[row.row] << ": residual " << format_double(row.residual)
            << (row.converged ? " converged" : " NOT converged");
        for (const auto& note : row.notes) err << "; " << note;
        err << "\n";
    }
    return res.report.all_converged() ? kOk : kNumericalError;
}

inline int cmd_qc(const QcArgs& a, std::ostream& out, std::ostream& err) {
    const auto series = parse_series(read_file(a.series));
    if (!series.has_ihdi) throw input_error("series has no IHDI column; quality coefficients need 't,...,IHDI'");
    if (series.rows.size() < 2) throw input_error("trend needs at least 2 series rows");

    std::vector<QualityPoint> points;
    for (std::size_t k = 0; k < series.rows.size(); ++k)
        points.push_back(quality_coefficient(series.performance(k), *series.rows[k].ihdi));
    const auto report = trend(points, a.slope_eps);

    std::string text = "t,mean_w,ihdi,qc\n";
    for (const auto& p : report.series)
        text += std::to_string(p.t) + "," + format_double(p.mean_w) + "," + format_double(p.ihdi) + "," +
                format_double(p.qc) + "\n";
    emit(text, a.out, out);
    err << "trend: slope=" << format_double(report.slope) << " classification=" << to_string(report.classification)
        << " satisfiable=" << (report.satisfiable ? "true" : "false") << "\n";
    return kOk;
}

inline int cmd_rank(const RankArgs& a, std::ostream& out, std::ostream& err) {
    const auto trace = parse_trace(read_file(a.trace));
    const auto design = a.design == "flattened" ? ObservationDesign::flattened : ObservationDesign::column_sums;
    const auto ranking = influence_ranking(trace, design);

    std::string text = "rank,subsystem,loading,explained_variance\n";
    for (std::size_t k = 0; k < ranking.ranked.size(); ++k) {
        const auto& r = ranking.ranked[k];
        const double ev = k < ranking.explained_variance.size() ? ranking.explained_variance[k] : 0.0;
        text += std::to_string(k + 1) + ",S" + std::to_string(r.index + 1) + "," + format_double(r.loading) + "," +
                format_double(ev) + "\n";
    }
    emit(text, a.out, out);
    err << "design " << to_string(design) << "; most influential: " << ranking.ranked.front().name << "\n";
    return kOk;
}

} // namespace detail

/// Runs one command. `args` excludes the program name.
inline int run(std::vector<std::string> args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Influence-network simulation, calibration and audit"};
    app.require_subcommand(1);
    app.set_help_all_flag("--help-all");

    detail::SimulateArgs sim;
    auto* s = app.add_subcommand("simulate", "Run a scenario forward and write the trace");
    s->add_option("--scenario", sim.scenario, "Scenario document (JSON)")->required();
    s->add_option("--horizon", sim.horizon, "Number of steps (overrides the scenario)");
    s->add_option("--out", sim.out, "Write machine output here instead of stdout");
    s->add_option("--format", sim.format, "table or structured")
        ->check(CLI::IsMember({"table", "structured"}));

    detail::CalibrateArgs cal;
    auto* c = app.add_subcommand("calibrate", "Solve minimum-norm utility weights from R and W");
    c->add_option("--r", cal.r, "Influence matrix (CSV)")->required();
    c->add_option("--w", cal.w, "Performance vector (CSV, one row)")->required();
    c->add_option("--out", cal.out, "Write the U table here instead of stdout");

    detail::TuneArgs tun;
    auto* t = app.add_subcommand("tune", "Tune initial relationship strengths against a series");
    t->add_option("--series", tun.series, "Series table (CSV)")->required();
    t->add_option("--u", tun.u, "Utility matrix CSV, or 'auto'");
    t->add_option("--tol", tun.tol, "Residual tolerance");
    t->add_option("--max-sweeps", tun.max_sweeps, "Coordinate sweep cap");
    t->add_option("--out", tun.out, "Write the result document here instead of stdout");

    detail::QcArgs qc;
    auto* q = app.add_subcommand("qc", "Quality proportioning coefficient and its trend");
    q->add_option("--series", qc.series, "Series table with an IHDI column (CSV)")->required();
    q->add_option("--slope-eps", qc.slope_eps, "Slope threshold for a stationary trend");
    q->add_option("--out", qc.out, "Write the table here instead of stdout");

    detail::RankArgs rk;
    auto* r = app.add_subcommand("rank", "Rank subsystems by first-principal-component loading");
    r->add_option("--trace", rk.trace, "Trace file (table or structured)")->required();
    r->add_option("--design", rk.design, "column-sums or flattened")
        ->check(CLI::IsMember({"column-sums", "flattened"}));
    r->add_option("--out", rk.out, "Write the ranking here instead of stdout");

    try {
        std::reverse(args.begin(), args.end());
        app.parse(args);
    } catch (const CLI::Success&) {
        err << app.help();
        return kOk;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << "\n";
        return kInputError;
    }

    try {
        if (s->parsed()) return detail::cmd_simulate(sim, out, err);
        if (c->parsed()) return detail::cmd_calibrate(cal, out, err);
        if (t->parsed()) return detail::cmd_tune(tun, out, err);
        if (q->parsed()) return detail::cmd_qc(qc, out, err);
        if (r->parsed()) return detail::cmd_rank(rk, out, err);
    } catch (const numerical_error& e) {
        err << "error: " << e.what() << "\n";
        return kNumericalError;
    } catch (const input_error& e) {
        err << "error: " << e.what() << "\n";
        return kInputError;
    }
    return kInputError;
}

} // namespace infnet::cli
