// Acceptance suite: prints one PASS/FAIL line per criterion and exits nonzero
// if any criterion fails.

#include "test_support.hpp"

#include <infnet/cli.hpp>

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>
#include <string>

namespace {

using namespace infnet;
namespace fs = std::filesystem;

struct Outcome {
    bool pass = true;
    std::string detail;

    void fail(const std::string& why) {
        if (pass) detail = why;
        pass = false;
    }
};

// AC1: strength-update branch table.
Outcome branch_table() {
    struct Case {
        double dwi, dwj, r;
        bool clamp;
        double want;
        Branch branch;
        bool degenerate = false;
    };
    const std::vector<Case> cases{
        {0.1, 0.0, 0.5, true, 0.0, Branch::one_zero},
        {0.05, 0.05, 0.7, true, 0.7, Branch::equal},
        {0.2, 0.1, 0.5, true, 1.0, Branch::ratio},
        {0.2, 0.1, 0.5, false, 4.0, Branch::ratio},
        {-0.2, 0.1, 0.5, true, 0.25, Branch::ratio},
        {0.0, 0.0, 0.3, true, 0.3, Branch::equal},
        {0.0, -0.3, 0.9, true, 0.0, Branch::one_zero},
        {0.1, 0.2, 0.5, true, 1.0, Branch::ratio},
        {0.1, 0.4, 0.5, true, 0.5, Branch::ratio},
        {-0.1, -0.4, 0.5, true, 0.5, Branch::ratio},
        {0.3, -0.1, 0.6, true, 0.2, Branch::ratio},
        {0.2, 0.1, 0.0, true, 0.0, Branch::ratio, true},
        {5e-10, 0.1, 0.4, true, 0.0, Branch::one_zero},
        {0.1, 0.1000000005, 0.4, true, 0.4, Branch::equal},
        {1e-10, -1e-10, 0.8, true, 0.8, Branch::equal},
        {0.03, 0.07, 0.9, true, 0.47619047619047616, Branch::ratio},
        {-0.05, 0.02, 0.25, true, 0.1, Branch::ratio},
        {0.07, 0.03, 0.9, false, 2.5925925925925926, Branch::ratio},
    };
    Outcome o;
    for (std::size_t k = 0; k < cases.size(); ++k) {
        const auto& c = cases[k];
        ModelOptions opts;
        opts.clamp = c.clamp;
        const auto got = update_relationship(c.dwi, c.dwj, c.r, opts);
        const bool value_ok = c.branch == Branch::ratio ? testing::rel_err(got.value, c.want) <= 1e-12
                                                        : got.value == c.want;
        if (!value_ok || got.branch != c.branch || got.degenerate != c.degenerate)
            o.fail("case " + std::to_string(k) + ": got " + format_double(got.value) + " via " + to_string(got.branch));
    }
    o.detail = o.pass ? std::to_string(cases.size()) + " cases" : o.detail;
    return o;
}

// AC2: minimum-norm utility solver against the closed form and the null-space check.
Outcome min_norm_solver() {
    std::mt19937_64 rng(20240601);
    Outcome o;
    double worst = 0.0, worst_res = 0.0;
    for (int k = 0; k < 100; ++k) {
        const auto r = testing::random_influence(rng, 5);
        const auto w = testing::random_vector(rng, 5, 0.05, 1.0);
        const auto sol = solve_utility_min_norm(InfluenceMatrix(r, 1), PerformanceVector(w, 1));
        for (std::size_t i = 0; i < 5; ++i) {
            double norm2 = 0.0;
            for (std::size_t j = 0; j < 5; ++j) norm2 += r(i, j) * r(i, j);
            double residual = -w[i];
            for (std::size_t j = 0; j < 5; ++j) {
                worst = std::max(worst, std::abs(sol.utility(i, j) - r(i, j) * w[i] / norm2));
                residual += r(i, j) * sol.utility(i, j);
            }
            worst_res = std::max(worst_res, std::abs(residual));
        }
        if (!verify_min_norm(sol.utility, InfluenceMatrix(r, 1), PerformanceVector(w, 1), 100,
                             static_cast<std::uint64_t>(k)))
            o.fail("instance " + std::to_string(k) + " failed the null-space check");
    }
    if (worst > 1e-10) o.fail("closed-form deviation " + format_double(worst));
    if (worst_res > 1e-9) o.fail("constraint residual " + format_double(worst_res));
    if (o.pass) o.detail = "max deviation " + format_double(worst) + ", max residual " + format_double(worst_res);
    return o;
}

// AC3: aggregation on the published influence matrix with uniform utility.
Outcome table1_weights() {
    const auto w = compute_weights(InfluenceMatrix(testing::table1(), 1), UtilityMatrix(SquareMatrix(5, 0.2)));
    const double want[] = {2.5 * 0.2, 1.9 * 0.2, 2.1 * 0.2, 1.7 * 0.2, 2.5 * 0.2};
    Outcome o;
    for (std::size_t i = 0; i < 5; ++i)
        if (std::abs(w[i] - want[i]) > 1e-12) o.fail("W" + std::to_string(i + 1) + " = " + format_double(w[i]));
    if (o.pass) o.detail = "W = " + cli::detail::join(w.values());
    return o;
}

struct TempDir {
    fs::path path;
    TempDir() {
        path = fs::temp_directory_path() /
               ("infnet_acceptance_" + std::to_string(std::chrono::steady_clock::now().time_since_epoch().count()));
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
    std::string write(const std::string& name, const std::string& text) const {
        const auto p = path / name;
        std::ofstream(p, std::ios::binary) << text;
        return p.string();
    }
};

SquareMatrix matrix_from_json(const nlohmann::json& j) {
    std::vector<std::vector<double>> rows = j.get<std::vector<std::vector<double>>>();
    return SquareMatrix::from_rows(rows);
}

// AC4: tuning round-trip on series generated by the forward model.
Outcome tuning_round_trip() {
    std::mt19937_64 rng(4242);
    TempDir dir;
    Outcome o;
    std::size_t rows = 0, converged = 0;
    double worst_reproduction = 0.0;
    const TuneOptions defaults;
    for (int k = 0; k < 50; ++k) {
        const auto w_prev = testing::random_vector(rng, 5, 0.1, 0.6);
        // Utility as the tuner derives it, then a hidden R drives W(t) forward.
        const auto u = solve_utility_min_norm(InfluenceMatrix(default_tuning_guess(5, defaults), 0),
                                              PerformanceVector(w_prev, 0))
                           .utility;
        const auto hidden = testing::random_influence(rng, 5);
        const auto w_curr = compute_weights(InfluenceMatrix(hidden, 1), u);

        SeriesTable series;
        series.names = SubsystemSet::defaults_for(5).names();
        series.rows.push_back({0, w_prev, std::nullopt});
        series.rows.push_back({1, {w_curr.values().begin(), w_curr.values().end()}, std::nullopt});
        const auto path = dir.write("series_" + std::to_string(k) + ".csv", write_series(series));

        std::ostringstream out, err;
        const int code = cli::run({"tune", "--series", path}, out, err);
        if (out.str().empty()) {
            o.fail("series " + std::to_string(k) + " produced no result: " + err.str());
            continue;
        }
        const auto doc = nlohmann::json::parse(out.str());
        for (const auto& row : doc["rows"]) {
            ++rows;
            if (row["converged"].get<bool>() && row["residual"].get<double>() <= 1e-6) ++converged;
        }
        if (code != cli::kOk) o.fail("series " + std::to_string(k) + " exit " + std::to_string(code) + ": " + err.str());

        const auto r_prev = matrix_from_json(doc["r_prev"]);
        const auto tuned_u = UtilityMatrix(matrix_from_json(doc["u"]));
        const auto again = compute_weights(InfluenceMatrix(r_prev, 1), tuned_u);
        for (std::size_t i = 0; i < 5; ++i)
            worst_reproduction = std::max(worst_reproduction, std::abs(again[i] - w_curr[i]));
    }
    if (converged != rows) o.fail(std::to_string(converged) + "/" + std::to_string(rows) + " rows converged");
    if (worst_reproduction > 1e-6) o.fail("reproduction error " + format_double(worst_reproduction));
    if (o.pass)
        o.detail = std::to_string(converged) + "/" + std::to_string(rows) + " rows converged, max reproduction error " +
                   format_double(worst_reproduction);
    return o;
}

// AC5: quality coefficient identity.
Outcome quality_identity() {
    std::mt19937_64 rng(55);
    std::uniform_real_distribution<double> ihdi(0.05, 1.0);
    Outcome o;
    double worst = 0.0;
    for (int k = 0; k < 1000; ++k) {
        const auto w = PerformanceVector(testing::random_vector(rng, 5), k);
        const auto p = quality_coefficient(w, ihdi(rng));
        worst = std::max(worst, testing::rel_err(p.qc * p.ihdi, w.mean()));
    }
    if (worst > 1e-12) o.fail("identity error " + format_double(worst));
    const auto p = quality_coefficient(PerformanceVector({0.62, 0.82, 0.72, 0.7, 0.74}, 0), 0.8);
    if (std::abs(p.qc - 0.9) > 1e-12) o.fail("(0.72, 0.8) gives " + format_double(p.qc));
    if (o.pass) o.detail = "max relative error " + format_double(worst) + ", qc(0.72, 0.8) = " + format_double(p.qc);
    return o;
}

// AC6: eigen-decomposition and ranking.
Outcome pca_oracle() {
    Outcome o;
    const std::vector<double> c2{1.5, 0.5, 0.5, 1.5};
    const auto e2 = jacobi_eigen<double>(c2, 2);
    const double total = e2.values[0] + e2.values[1];
    if (std::abs(e2.values[0] - 2.0) > 1e-10 || std::abs(e2.values[1] - 1.0) > 1e-10 ||
        std::abs(e2.values[0] / total - 2.0 / 3.0) > 1e-10 || std::abs(e2.values[1] / total - 1.0 / 3.0) > 1e-10)
        o.fail("2x2 eigenvalues " + format_double(e2.values[0]) + ", " + format_double(e2.values[1]));

    std::mt19937_64 rng(66);
    double ortho = 0.0, recon = 0.0;
    for (int trial = 0; trial < 20; ++trial) {
        std::vector<std::vector<double>> x;
        for (int k = 0; k < 30; ++k) x.push_back(testing::random_vector(rng, 5, -1.0, 1.0));
        const auto c = covariance(x);
        const auto e = jacobi_eigen<double>(c, 5);
        for (std::size_t a = 0; a < 5; ++a)
            for (std::size_t b = 0; b < 5; ++b) {
                double dot = 0.0, rec = 0.0;
                for (std::size_t k = 0; k < 5; ++k) {
                    dot += e.vector(a)[k] * e.vector(b)[k];
                    rec += e.vector(k)[a] * e.values[k] * e.vector(k)[b];
                }
                ortho = std::max(ortho, std::abs(dot - (a == b ? 1.0 : 0.0)));
                const double d = rec - c[a * 5 + b];
                recon += d * d;
            }
    }
    recon = std::sqrt(recon);
    if (ortho > 1e-9) o.fail("orthonormality error " + format_double(ortho));
    if (recon > 1e-9) o.fail("reconstruction error " + format_double(recon));

    std::uniform_int_distribution<std::size_t> col(0, 4);
    int hits = 0;
    for (int trial = 0; trial < 100; ++trial) {
        const std::size_t j = col(rng);
        const auto ranking = influence_ranking(testing::single_varying_column_trace(rng, 5, j, 12));
        if (ranking.ranked.front().index == j) ++hits;
    }
    if (hits != 100) o.fail(std::to_string(hits) + "/100 single-column trials ranked first");
    if (o.pass)
        o.detail = "orthonormality " + format_double(ortho) + ", reconstruction " + format_double(recon) + ", " +
                   std::to_string(hits) + "/100 ranked first";
    return o;
}

// AC7: deterministic output and trace round-trips.
Outcome determinism() {
    Outcome o;
    const std::string scenario = std::string(INFNET_SCENARIO_DIR) + "/policy_push.json";
    for (const char* format : {"table", "structured"}) {
        std::ostringstream a, b, err;
        cli::detail::SimulateArgs args;
        args.scenario = scenario;
        args.format = format;
        cli::detail::cmd_simulate(args, a, err);
        cli::detail::cmd_simulate(args, b, err);
        if (a.str() != b.str() || a.str().empty()) o.fail(std::string(format) + " output differs between runs");
    }

    std::mt19937_64 rng(77);
    std::uniform_int_distribution<int> len(1, 15), n_dist(2, 6), cnt(0, 30);
    int equal = 0;
    for (int k = 0; k < 100; ++k) {
        const auto n = static_cast<std::size_t>(n_dist(rng));
        SimulationTrace t;
        t.subsystems = SubsystemSet::defaults_for(n).names();
        const int steps = len(rng);
        for (int s = 0; s < steps; ++s) {
            BranchCounts c;
            c.one_zero = static_cast<std::size_t>(cnt(rng));
            c.ratio = static_cast<std::size_t>(cnt(rng));
            t.steps.push_back({PerformanceVector(testing::random_vector(rng, n), 2 + s),
                               InfluenceMatrix(testing::random_influence(rng, n, 0.0, 1.5), 2 + s), c});
        }
        if (parse_trace(write_trace(t, TraceFormat::structured)) == t) ++equal;
    }
    if (equal != 100) o.fail(std::to_string(equal) + "/100 traces round-tripped");
    if (o.pass) o.detail = "byte-identical reruns, 100/100 traces round-tripped";
    return o;
}

// AC8: a calibrated scenario with W(0) = W(1) and no policy stays put.
Outcome quiescent() {
    Outcome o;
    const auto scenario =
        parse_scenario(cli::detail::read_file(std::string(INFNET_SCENARIO_DIR) + "/table1_calibrated.json"));
    const auto trace = simulate(scenario, 1000);
    if (trace.steps.size() != 1000) o.fail("trace has " + std::to_string(trace.steps.size()) + " steps");
    const auto& first = trace.steps.front();
    for (const auto& s : trace.steps)
        if (!std::ranges::equal(s.w.values(), first.w.values()) || s.r.entries() != first.r.entries()) {
            o.fail("state changed at t = " + std::to_string(s.timestamp()));
            break;
        }
    if (o.pass) o.detail = "1000 identical steps";
    return o;
}

} // namespace

int main() {
    const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria{
        {"strength-update branch table", branch_table},
        {"minimum-norm utility solver", min_norm_solver},
        {"published matrix aggregation", table1_weights},
        {"tuning round-trip", tuning_round_trip},
        {"quality coefficient identity", quality_identity},
        {"principal-component oracle", pca_oracle},
        {"determinism and trace round-trip", determinism},
        {"quiescent fixed point", quiescent},
    };
    int failures = 0;
    for (std::size_t k = 0; k < criteria.size(); ++k) {
        Outcome o;
        try {
            o = criteria[k].second();
        } catch (const std::exception& e) {
            o.fail(std::string("exception: ") + e.what());
        }
        std::cout << (o.pass ? "[PASS]" : "[FAIL]") << " AC" << k + 1 << " " << criteria[k].first << " - " << o.detail
                  << "\n";
        if (!o.pass) ++failures;
    }
    std::cout << criteria.size() - static_cast<std::size_t>(failures) << "/" << criteria.size()
              << " acceptance criteria passed\n";
    return failures == 0 ? 0 : 1;
}
