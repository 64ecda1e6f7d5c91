// Acceptance gate: one PASS/FAIL line per criterion, nonzero exit on any FAIL.
// Every experiment runs at the presets' master seed and writes its CSVs under
// ./acceptance_out so the determinism check can compare bytes.

#include "../oracles.hpp"
#include "sparsebwk/baselines.hpp"
#include "sparsebwk/bwk_primal_dual.hpp"
#include "sparsebwk/harness.hpp"
#include "sparsebwk/lp_solver.hpp"
#include "sparsebwk/online_ht.hpp"

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

using namespace sparsebwk;
namespace fs = std::filesystem;

namespace {

constexpr std::uint64_t kSeed = 20240601;
const fs::path kOut = "acceptance_out";

struct Outcome {
    bool pass = false;
    std::string detail;
};

std::string fmt(const char* f, double a) {
    char buf[64];
    std::snprintf(buf, sizeof buf, f, a);
    return buf;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::vector<double> grid_as_double(const std::vector<std::size_t>& g) { return {g.begin(), g.end()}; }

// Experiment specs reused by the determinism check.
ExperimentSpec estimation_spec(const std::string& propensity, const fs::path& dir, std::size_t threads) {
    ExperimentSpec s = preset("fig1-desk");
    s.estimation.propensity = propensity;
    s.output_dir = dir;
    s.threads = threads;
    return s;
}

ExperimentSpec bwk_spec(const fs::path& dir, std::size_t threads) {
    ExperimentSpec s = preset("fig3-desk");
    s.output_dir = dir;
    s.threads = threads;
    return s;
}

ExperimentSpec bandit_spec(const fs::path& dir, std::size_t threads) {
    ExperimentSpec s = preset("fig2-desk");
    s.t_grid = {3000};
    s.instance.T = 3000;
    s.bandit.etc_fractions = {0.5};
    s.bandit.etc_c = {5.0, 1.0, 0.1};
    s.output_dir = dir;
    s.threads = threads;
    return s;
}

// Budget-safety runs: one trajectory CSV per run, kept in memory.
struct BwkBatch {
    std::vector<std::string> csv;
    std::size_t violations = 0;
    std::size_t depleted_runs = 0;
    std::size_t bad_fallback = 0;
    double worst_simplex = 0.0;
    double worst_eta_min = 0.0;
};

BwkBatch run_bwk_batch() {
    BwkBatch out;
    InstanceConfig ic;
    ic.d = 50;
    ic.K = 5;
    ic.m = 5;
    ic.T = 2000;
    ic.s0 = 10;
    ic.budget_ratio = {0.25};
    BwkConfig cfg;
    cfg.compute_benchmark = false;
    for (std::size_t r = 0; r < 100; ++r) {
        const std::uint64_t seed = derive_seed(kSeed, 1000 + r);
        Rng inst_rng(derive_seed(seed, 1)), ctx(derive_seed(seed, 2)), pol(derive_seed(seed, 3));
        const Instance inst = generate_instance(ic, inst_rng);
        const BwkRunResult res = run_bwk(inst, cfg, ctx, pol);
        for (std::size_t t = 0; t < res.rounds.size(); ++t) {
            const auto& rd = res.rounds[t];
            if (((rd.cumulative_consumption - inst.capacities).array() > 0.0).any()) ++out.violations;
            if (res.tau > 0 && t + 1 >= res.tau && rd.arm != inst.null_arm()) ++out.bad_fallback;
            out.worst_simplex = std::max(out.worst_simplex, std::abs(rd.eta.sum() - 1.0));
            out.worst_eta_min = std::min(out.worst_eta_min, rd.eta.minCoeff());
        }
        if (res.tau > 0) ++out.depleted_runs;
        std::ostringstream ss;
        write_bwk_trajectory(ss, res);
        out.csv.push_back(ss.str());
    }
    return out;
}

// ---------------------------------------------------------------- criteria

Outcome c1_hard_threshold() {
    Rng rng(derive_seed(kSeed, 1));
    std::uniform_int_distribution<int> dim(1, 12), sp(1, 5), small(-3, 3);
    int mismatches = 0;
    for (int i = 0; i < 1000; ++i) {
        const auto d = static_cast<std::size_t>(dim(rng));
        const auto s = static_cast<std::size_t>(sp(rng));
        Vector v(static_cast<Eigen::Index>(d));
        const bool ties = i % 5 == 0; // integer entries force ties at the cut
        for (auto& x : v) x = ties ? small(rng) : standard_normal(rng);
        if (hard_threshold(v, s) != oracle::best_s_term(v, s)) ++mismatches;
    }
    return {mismatches == 0, std::to_string(mismatches) + " mismatches in 1000 vectors"};
}

Outcome rate_check(const std::string& propensity, double lo, double hi, bool check_recovery) {
    const ExperimentSpec spec = estimation_spec(propensity, kOut / ("estimation_" + propensity), 1);
    const auto agg = run_experiment(spec);
    const double slope = loglog_slope(grid_as_double(agg.t_grid), agg.at("ht_sq_error").mean);
    bool pass = slope >= lo && slope <= hi;
    std::string detail = "slope " + fmt("%.3f", slope) + " (window [" + fmt("%.2f", lo) + ", " + fmt("%.2f", hi) + "])";
    if (check_recovery) {
        const auto& rec = agg.at("ht_recovery").raw;
        std::size_t full = 0;
        for (const auto& row : rec)
            if (row.back() == 1.0) ++full;
        const double frac = static_cast<double>(full) / static_cast<double>(rec.size());
        pass = pass && frac >= 0.9;
        detail += ", full support recovery at T in " + std::to_string(full) + "/" + std::to_string(rec.size()) + " reps";
    }
    if (!spec.estimation.lasso_c.empty()) {
        double best = agg.at("ht_sq_error").mean.back() * 1e9;
        for (const auto& s : agg.series)
            if (s.name.rfind("lasso_c=", 0) == 0 && s.name.find("_sq_error") != std::string::npos)
                best = std::min(best, s.mean.back());
        detail += ", final error " + fmt("%.4g", agg.at("ht_sq_error").mean.back()) + " vs best lasso " + fmt("%.4g", best);
    }
    return {pass, detail};
}

Outcome c4_ipw() {
    InstanceConfig ic;
    ic.d = 20;
    ic.K = 1;
    ic.s0 = 5;
    Rng inst_rng(derive_seed(kSeed, 41)), rng(derive_seed(kSeed, 42));
    const Instance inst = generate_instance(ic, inst_rng);
    HtConfig hc;
    hc.dim = 20;
    hc.s0 = 5;
    OnlineHt ht(hc, 0);
    const std::size_t n = 50000;
    const double p = 0.3;
    Matrix sum2 = Matrix::Zero(20, 20);
    for (std::size_t t = 0; t < n; ++t) {
        const Round r = sample_round(inst, rng);
        const bool pulled = uniform01(rng) < p;
        ht.update(r.x, pulled, p, pulled ? std::optional<double>(reward(inst, 0, r)) : std::nullopt);
        if (pulled) sum2 += ((r.x * r.x.transpose()) / p).cwiseAbs2();
    }
    const Matrix mean = ht.sigma_hat();
    const double nd = static_cast<double>(n);
    double worst_ratio = 0.0, worst_abs = 0.0;
    for (Eigen::Index i = 0; i < 20; ++i)
        for (Eigen::Index j = 0; j < 20; ++j) {
            const double se = std::sqrt((sum2(i, j) / nd - mean(i, j) * mean(i, j)) / nd);
            const double dev = std::abs(mean(i, j) - inst.covariance(i, j));
            worst_ratio = std::max(worst_ratio, dev / se);
            worst_abs = std::max(worst_abs, dev);
        }
    return {worst_ratio < 5.0, "max |mean - Sigma| " + fmt("%.4f", worst_abs) + ", largest deviation " +
                                   fmt("%.2f", worst_ratio) + " standard errors"};
}

Outcome c5_lp() {
    Rng rng(derive_seed(kSeed, 5));
    int mismatches = 0, infeasible = 0;
    double worst = 0.0;
    for (int i = 0; i < 200; ++i) {
        const LpProblem lp = oracle::random_small_lp(rng);
        const auto ref = oracle::vertex_enumeration(lp);
        const auto sol = solve(lp);
        if (!ref.feasible) {
            ++infeasible;
            if (sol.status != LpStatus::infeasible) ++mismatches;
            continue;
        }
        if (sol.status != LpStatus::optimal) {
            ++mismatches;
            continue;
        }
        const double gap = std::abs(sol.objective_value - ref.value);
        worst = std::max(worst, gap);
        if (gap > 1e-7) ++mismatches;
    }
    // allocation constructions: zero budgets, negative rewards, tiny horizons
    int not_optimal = 0;
    Rng arng(derive_seed(kSeed, 55));
    for (int i = 0; i < 100; ++i) {
        InstanceConfig ic;
        ic.d = 10 + static_cast<std::size_t>(i % 20);
        ic.K = 1 + static_cast<std::size_t>(i % 5);
        ic.m = 1 + static_cast<std::size_t>(i % 4);
        ic.s0 = 3;
        ic.T = 50 + static_cast<std::size_t>(i);
        ic.budget_ratio = {i % 3 == 0 ? 0.0 : 0.1 * (i % 7)};
        const Instance inst = generate_instance(ic, arng);
        std::vector<Vector> xs;
        for (std::size_t t = 0; t < 1 + static_cast<std::size_t>(i % 30); ++t) xs.push_back(sample_round(inst, arng).x);
        std::vector<Vector> neg = inst.arms;
        for (auto& mu : neg) mu = -mu.cwiseAbs();
        for (const auto& mus : {inst.arms, neg}) {
            const auto sol = solve(build_vhat_lp(xs, mus, inst.weights, inst.capacities, ic.T, inst.consumption_bound));
            if (sol.status != LpStatus::optimal) ++not_optimal;
        }
    }
    return {mismatches == 0 && not_optimal == 0,
            std::to_string(mismatches) + " oracle mismatches (" + std::to_string(infeasible) +
                " infeasible instances), max gap " + fmt("%.2e", worst) + "; " + std::to_string(not_optimal) +
                " of 200 allocation LPs not optimal"};
}

Outcome c6_budget(const BwkBatch& b) {
    return {b.violations == 0 && b.bad_fallback == 0,
            std::to_string(b.violations) + " capacity violations over 100 runs x 2000 rounds; " +
                std::to_string(b.depleted_runs) + " runs hit tau, " + std::to_string(b.bad_fallback) +
                " non-null pulls after tau"};
}

Outcome c7_dual(const BwkBatch& b) {
    const std::size_t m = 10, T = 10000;
    const double logm = std::log(static_cast<double>(m));
    const double delta = std::sqrt(logm / static_cast<double>(T));
    const double bound = 2.0 * std::sqrt(static_cast<double>(T) * logm) + logm;
    Rng rng(derive_seed(kSeed, 7));
    double worst_regret = -1e300;
    double worst_simplex = b.worst_simplex;
    for (int pattern = 0; pattern < 5; ++pattern) {
        DualState dual = DualState::initial(m, delta);
        Vector total = Vector::Zero(m);
        double incurred = 0.0;
        for (std::size_t t = 0; t < T; ++t) {
            Vector g(m);
            for (std::size_t i = 0; i < m; ++i) {
                const auto ii = static_cast<Eigen::Index>(i);
                switch (pattern) {
                case 0: g[ii] = uniform01(rng); break;                                  // iid uniform
                case 1: g[ii] = (t / 1000 + i) % m == 0 ? 0.0 : 1.0; break;             // rotating best expert
                case 2: g[ii] = i == 3 ? 0.45 : (uniform01(rng) < 0.5 ? 0.0 : 1.0); break; // one steady expert
                case 3: g[ii] = i < 2 ? static_cast<double>((t + i) % 2) : 1.0; break;  // alternating pair
                default: g[ii] = t < T / 2 ? (i == 0 ? 0.0 : 1.0) : (i == 0 ? 1.0 : 0.2); break; // switch
                }
            }
            incurred += dual.eta.dot(g);
            total += g;
            dual = dual_update(dual, Vector::Ones(m) - g, Vector::Zero(m), false);
            worst_simplex = std::max(worst_simplex, std::abs(dual.eta.sum() - 1.0));
            if (dual.eta.minCoeff() < 0.0) worst_simplex = 1.0;
        }
        worst_regret = std::max(worst_regret, incurred - total.minCoeff());
    }
    const bool pass = worst_simplex <= 1e-12 && b.worst_eta_min >= 0.0 && worst_regret <= bound;
    return {pass, "max |sum eta - 1| " + fmt("%.1e", worst_simplex) + "; worst Hedge regret " +
                      fmt("%.1f", worst_regret) + " vs bound " + fmt("%.1f", bound)};
}

Outcome c8_bwk() {
    const auto agg = run_experiment(bwk_spec(kOut / "bwk", 1));
    const auto& reg = agg.at("regret").mean;
    const auto& rel = agg.at("relative_regret").mean;
    const double slope = loglog_slope(grid_as_double(agg.t_grid), reg);
    bool decreasing = true;
    for (std::size_t k = 1; k < rel.size(); ++k) decreasing = decreasing && rel[k] < rel[k - 1];
    std::string detail = "regret slope " + fmt("%.3f", slope) + ", relative regret";
    for (double r : rel) detail += " " + fmt("%.3f", r);
    return {slope >= 0.4 && slope <= 0.95 && decreasing, detail};
}

Outcome c9_bandit() {
    const auto agg = run_experiment(bandit_spec(kOut / "bandit", 1));
    const double eps = agg.at("ht_eps_regret").mean[0];
    const double greedy = agg.at("ht_greedy_regret").mean[0];
    double best_etc = 1e300;
    std::string best_name;
    for (const auto& s : agg.series)
        if (s.name.rfind("etc_", 0) == 0 && s.mean[0] < best_etc) {
            best_etc = s.mean[0];
            best_name = s.name;
        }
    return {eps < best_etc && greedy < eps, "eps-greedy " + fmt("%.1f", eps) + ", greedy " + fmt("%.1f", greedy) +
                                                ", best ETC " + fmt("%.1f", best_etc) + " (" + best_name + ")"};
}

Outcome c10_lasso() {
    Rng rng(derive_seed(kSeed, 10));
    std::size_t fits = 0, bad_kkt = 0, bad_kill = 0;
    double worst = 0.0;
    auto check = [&](const Matrix& X, const Vector& y, double lambda) {
        const auto fit = lasso_fit(X, y, lambda);
        ++fits;
        worst = std::max(worst, fit.kkt_residual);
        if (!(fit.kkt_residual <= 1e-6)) ++bad_kkt;
    };
    // random designs, wide and tall
    for (int i = 0; i < 300; ++i) {
        const Eigen::Index t = 5 + i % 60, d = 3 + (i * 7) % 80;
        Matrix X(t, d);
        for (auto& v : X.reshaped()) v = standard_normal(rng);
        Vector y(t);
        for (auto& v : y) v = standard_normal(rng);
        const double kill = 2.0 * (X.transpose() * y).cwiseAbs().maxCoeff() / static_cast<double>(t);
        for (double c : {5.0, 1.0, 0.1}) check(X, y, lasso_lambda(c, static_cast<std::size_t>(d), static_cast<std::size_t>(t)));
        if (lasso_fit(X, y, kill).beta != Vector::Zero(d)) ++bad_kill;
        if (count_nonzero(lasso_fit(X, y, 0.999 * kill).beta) == 0) ++bad_kill;
    }
    // the designs the baselines actually see: per-arm exploration data on the bandit instance
    InstanceConfig ic = preset("fig2-desk").instance;
    ic.T = 3000;
    for (int r = 0; r < 10; ++r) {
        Rng inst_rng(derive_seed(kSeed, 100 + static_cast<std::uint64_t>(r)));
        const Instance inst = generate_instance(ic, inst_rng);
        for (std::size_t n : {21, 42, 200}) {
            Matrix X(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(ic.d));
            Vector y(static_cast<Eigen::Index>(n));
            for (std::size_t i = 0; i < n; ++i) {
                const Round rd = sample_round(inst, inst_rng);
                X.row(static_cast<Eigen::Index>(i)) = rd.x.transpose();
                y[static_cast<Eigen::Index>(i)] = reward(inst, 0, rd);
            }
            for (double c : {5.0, 1.0, 0.1}) check(X, y, lasso_lambda(c, ic.d, n));
        }
    }
    return {bad_kkt == 0 && bad_kill == 0, std::to_string(fits) + " fits, max KKT residual " + fmt("%.2e", worst) +
                                               ", " + std::to_string(bad_kill) + " kill-condition failures"};
}

Outcome c11_determinism(const BwkBatch& first) {
    struct Pair {
        fs::path a, b;
    };
    std::vector<Pair> pairs;
    // reruns use a different worker count; results must not depend on it
    run_experiment(estimation_spec("full", kOut / "rerun_estimation_full", 3));
    pairs.push_back({kOut / "estimation_full", kOut / "rerun_estimation_full"});
    run_experiment(estimation_spec("decay", kOut / "rerun_estimation_decay", 3));
    pairs.push_back({kOut / "estimation_decay", kOut / "rerun_estimation_decay"});
    run_experiment(bwk_spec(kOut / "rerun_bwk", 4));
    pairs.push_back({kOut / "bwk", kOut / "rerun_bwk"});
    run_experiment(bandit_spec(kOut / "rerun_bandit", 2));
    pairs.push_back({kOut / "bandit", kOut / "rerun_bandit"});

    std::size_t compared = 0, differing = 0;
    for (const auto& p : pairs)
        for (const char* f : {"aggregate.csv", "raw.csv"}) {
            ++compared;
            const std::string a = slurp(p.a / f), b = slurp(p.b / f);
            if (a.empty() || a != b) ++differing;
        }
    const BwkBatch second = run_bwk_batch();
    for (std::size_t i = 0; i < first.csv.size(); ++i) {
        ++compared;
        if (first.csv[i] != second.csv[i]) ++differing;
    }
    return {differing == 0, std::to_string(compared) + " CSVs compared, " + std::to_string(differing) + " differ"};
}

} // namespace

int main() {
    fs::remove_all(kOut);
    fs::create_directories(kOut);
    int failures = 0;
    auto report = [&](int id, const std::string& name, const std::function<Outcome()>& f, double limit_s) {
        const auto start = std::chrono::steady_clock::now();
        Outcome o;
        try {
            o = f();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        if (limit_s > 0.0 && secs > limit_s) {
            o.pass = false;
            o.detail += "; runtime over " + fmt("%.0f", limit_s) + " s";
        }
        if (!o.pass) ++failures;
        std::cout << (o.pass ? "PASS" : "FAIL") << " [" << id << "] " << name << ": " << o.detail << " ("
                  << fmt("%.1f", secs) << " s)" << std::endl;
    };

    report(1, "hard thresholding vs brute force", c1_hard_threshold, 5.0);
    report(2, "estimation rate, full observation", [] { return rate_check("full", -1.25, -0.75, true); }, 180.0);
    report(3, "estimation rate, decaying propensities", [] { return rate_check("decay", -0.95, -0.45, false); }, 180.0);
    report(4, "inverse-propensity covariance unbiased", c4_ipw, 0.0);
    report(5, "LP solver vs vertex enumeration", c5_lp, 0.0);
    BwkBatch batch;
    report(6, "budget safety", [&] {
        batch = run_bwk_batch();
        return c6_budget(batch);
    }, 0.0);
    report(7, "dual simplex and Hedge regret", [&] { return c7_dual(batch); }, 0.0);
    report(8, "BwK sublinear regret", c8_bwk, 900.0);
    report(9, "bandit comparison", c9_bandit, 600.0);
    report(10, "LASSO KKT conditions", c10_lasso, 0.0);
    report(11, "determinism", [&] { return c11_determinism(batch); }, 0.0);

    std::cout << (failures == 0 ? "all criteria passed" : std::to_string(failures) + " criteria failed") << std::endl;
    return failures == 0 ? 0 : 1;
}
