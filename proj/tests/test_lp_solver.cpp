#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "oracles.hpp"
#include "sparsebwk/environment.hpp"
#include "sparsebwk/lp_solver.hpp"

#include <limits>
#include <sstream>
#include <stdexcept>

using namespace sparsebwk;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Random allocation inputs: T rounds, K arms, m resources.
struct AllocInputs {
    std::vector<Vector> features;
    std::vector<Vector> mus;
    std::vector<Matrix> weights;
    Vector capacities;
};

AllocInputs random_alloc(std::size_t T, std::size_t K, std::size_t m, std::size_t d, Rng& rng, double cap_scale) {
    AllocInputs in;
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (std::size_t t = 0; t < T; ++t) {
        Vector x(static_cast<Eigen::Index>(d));
        for (auto& v : x) v = standard_normal(rng);
        in.features.push_back(x);
    }
    for (std::size_t a = 0; a < K; ++a) {
        Vector mu(static_cast<Eigen::Index>(d));
        for (auto& v : mu) v = standard_normal(rng);
        in.mus.push_back(mu);
        Matrix w(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(d));
        for (auto& v : w.reshaped()) v = u(rng);
        in.weights.push_back(w);
    }
    in.capacities = Vector(static_cast<Eigen::Index>(m));
    for (auto& c : in.capacities) c = cap_scale * static_cast<double>(T) * u(rng);
    return in;
}

// Every round takes one option outright; returns the best feasible value.
double best_integral(const LpProblem& lp, std::size_t rounds, std::size_t options) {
    double best = -kInf;
    std::vector<std::size_t> pick(rounds, 0);
    while (true) {
        Vector x = Vector::Zero(lp.objective.size());
        for (std::size_t t = 0; t < rounds; ++t) x[static_cast<Eigen::Index>(t * options + pick[t])] = 1.0;
        if (max_violation(lp, x) <= 1e-12) best = std::max(best, lp.objective.dot(x));
        std::size_t t = 0;
        while (t < rounds && ++pick[t] == options) pick[t++] = 0;
        if (t == rounds) break;
    }
    return best;
}

// Exact optimum of a single-resource allocation LP. A basic optimum splits at
// most one round between two options, so enumerate the integral choices of the
// other rounds and the best feasible split for that round.
double single_resource_optimum(const LpProblem& lp, std::size_t rounds, std::size_t options) {
    const double C = lp.ineq_rhs[0];
    auto val = [&](std::size_t t, std::size_t a) { return lp.objective[static_cast<Eigen::Index>(t * options + a)]; };
    auto use = [&](std::size_t t, std::size_t a) { return lp.ineq(0, static_cast<Eigen::Index>(t * options + a)); };
    double best = -kInf;
    for (std::size_t r = 0; r < rounds; ++r) {
        std::vector<std::size_t> pick(rounds, 0);
        while (true) {
            double base_v = 0.0, base_u = 0.0;
            for (std::size_t t = 0; t < rounds; ++t)
                if (t != r) {
                    base_v += val(t, pick[t]);
                    base_u += use(t, pick[t]);
                }
            for (std::size_t a = 0; a < options; ++a)
                for (std::size_t b = 0; b < options; ++b) {
                    // theta on a, 1 - theta on b
                    std::vector<double> thetas{0.0, 1.0};
                    const double du = use(r, a) - use(r, b);
                    if (du != 0.0) thetas.push_back((C - base_u - use(r, b)) / du);
                    for (double th : thetas) {
                        if (th < 0.0 || th > 1.0) continue;
                        const double u_tot = base_u + th * use(r, a) + (1.0 - th) * use(r, b);
                        if (u_tot > C + 1e-12) continue;
                        best = std::max(best, base_v + th * val(r, a) + (1.0 - th) * val(r, b));
                    }
                }
            std::size_t t = 0;
            while (t < rounds && (t == r || ++pick[t] == options)) {
                if (t != r) pick[t] = 0;
                ++t;
            }
            if (t == rounds) break;
        }
    }
    return best;
}

} // namespace

TEST_CASE("trivial problems") {
    auto lp = LpProblem::with_vars(1);
    lp.objective[0] = 1.0;
    lp.ineq = Matrix::Ones(1, 1);
    lp.ineq_rhs = Vector::Ones(1);
    auto sol = solve(lp);
    CHECK(sol.status == LpStatus::optimal);
    CHECK(sol.objective_value == doctest::Approx(1.0));
    CHECK(sol.x[0] == doctest::Approx(1.0));
    CHECK(sol.ineq_duals[0] == doctest::Approx(1.0));

    lp.ineq_rhs[0] = -1.0;
    CHECK(solve(lp).status == LpStatus::infeasible);

    auto unb = LpProblem::with_vars(2);
    unb.objective << 1.0, 0.0;
    unb.ineq = Matrix(1, 2);
    unb.ineq << 0.0, 1.0;
    unb.ineq_rhs = Vector::Ones(1);
    CHECK(solve(unb).status == LpStatus::unbounded);

    auto bad = LpProblem::with_vars(2);
    bad.lower[0] = 2.0;
    bad.upper[0] = 1.0;
    CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
    CHECK(to_string(LpStatus::infeasible) == "infeasible");
}

TEST_CASE("random small LPs agree with vertex enumeration") {
    Rng rng(31);
    int infeasible = 0;
    for (int trial = 0; trial < 200; ++trial) {
        const LpProblem lp = oracle::random_small_lp(rng);
        const auto ref = oracle::vertex_enumeration(lp);
        const auto sol = solve(lp);
        CAPTURE(trial);
        if (!ref.feasible) {
            ++infeasible;
            CHECK(sol.status == LpStatus::infeasible);
            continue;
        }
        REQUIRE(sol.status == LpStatus::optimal);
        CHECK(std::abs(sol.objective_value - ref.value) <= 1e-7);
        CHECK(max_violation(lp, sol.x) <= 1e-9);
        CHECK(lagrangian_bound(lp, sol.ineq_duals, sol.eq_duals, sol.group_duals) == doctest::Approx(ref.value).epsilon(1e-7));
    }
    CHECK(infeasible > 5);
    CHECK(infeasible < 150);
}

TEST_CASE("column generation matches the dense simplex") {
    Rng rng(77);
    for (int trial = 0; trial < 30; ++trial) {
        const auto in = random_alloc(6, 2, 2, 4, rng, trial % 5 == 0 ? 0.0 : 0.6);
        const auto lp = build_hindsight_lp(in.features, in.mus, in.weights, in.capacities, 2.0);
        REQUIRE(lp.is_allocation());
        const auto a = solve_allocation(lp);
        const auto b = solve_dense(lp);
        REQUIRE(a.status == LpStatus::optimal);
        REQUIRE(b.status == LpStatus::optimal);
        CHECK(a.objective_value == doctest::Approx(b.objective_value).epsilon(1e-8));
        CHECK(max_violation(lp, a.x) <= 1e-7);
        CHECK(lagrangian_bound(lp, a.ineq_duals, a.eq_duals, a.group_duals) ==
              doctest::Approx(a.objective_value).epsilon(1e-7));
    }
}

TEST_CASE("weak duality for arbitrary multipliers") {
    Rng rng(12);
    std::uniform_real_distribution<double> u(0.0, 2.0);
    for (int trial = 0; trial < 50; ++trial) {
        const auto in = random_alloc(5, 3, 2, 3, rng, 0.5);
        const auto lp = build_hindsight_lp(in.features, in.mus, in.weights, in.capacities, 2.0);
        const double opt = solve(lp).objective_value;
        Vector y(2), z(0), w(5);
        for (auto& v : y) v = u(rng);
        for (auto& v : w) v = u(rng) - 1.0;
        CHECK(lagrangian_bound(lp, y, z, w) >= opt - 1e-9);
    }
}

TEST_CASE("single-resource allocation LPs match exhaustive search") {
    Rng rng(4);
    for (int trial = 0; trial < 40; ++trial) {
        const auto in = random_alloc(3, 2, 1, 3, rng, 0.4);
        const auto lp = build_vhat_lp(in.features, in.mus, in.weights, in.capacities, 3, 2.5);
        const auto sol = solve(lp);
        REQUIRE(sol.status == LpStatus::optimal);
        CHECK(sol.objective_value == doctest::Approx(single_resource_optimum(lp, 3, 3)).epsilon(1e-9));
    }
}

TEST_CASE("V-hat LP examples") {
    Rng rng(9);
    const auto in = random_alloc(4, 1, 1, 3, rng, 0.0);

    // generous capacity: every round takes the best nonnegative option
    auto big = build_vhat_lp(in.features, in.mus, in.weights, Vector::Constant(1, 1e9), 20, 10.0);
    double expect = 0.0;
    for (const auto& x : in.features) expect += std::max(0.0, in.mus[0].dot(x));
    CHECK(solve(big).objective_value == doctest::Approx(5.0 * expect));

    // zero capacity with positive use everywhere: only the null arm fits
    AllocInputs pos = in;
    for (auto& x : pos.features) x = x.cwiseAbs() + Vector::Constant(3, 0.1);
    pos.mus[0] = Vector::Ones(3);
    const auto zero = build_vhat_lp(pos.features, pos.mus, pos.weights, Vector::Zero(1), 20, 10.0);
    const auto sol = solve(zero);
    CHECK(sol.status == LpStatus::optimal);
    CHECK(sol.objective_value == doctest::Approx(0.0));

    CHECK_THROWS_AS(build_vhat_lp({}, in.mus, in.weights, in.capacities, 10, 1.0), std::invalid_argument);
}

TEST_CASE("hindsight LP examples") {
    Rng rng(10);
    const auto in = random_alloc(5, 2, 1, 3, rng, 0.3);

    const auto only_null = build_hindsight_lp(in.features, {}, {}, in.capacities, 1.0);
    CHECK(solve(only_null).objective_value == 0.0);

    const auto slack = build_hindsight_lp(in.features, in.mus, in.weights, Vector::Constant(1, 1e9), 3.0);
    double expect = 0.0;
    for (const auto& x : in.features) expect += std::max({0.0, in.mus[0].dot(x), in.mus[1].dot(x)});
    CHECK(solve(slack).objective_value == doctest::Approx(expect));
}

TEST_CASE("relaxation dominates every integral assignment") {
    Rng rng(15);
    for (int trial = 0; trial < 20; ++trial) {
        const std::size_t T = 4 + static_cast<std::size_t>(trial % 3);
        const std::size_t m = 1 + static_cast<std::size_t>(trial % 2);
        const auto in = random_alloc(T, 2, m, 3, rng, 0.4);
        const auto lp = build_hindsight_lp(in.features, in.mus, in.weights, in.capacities, 2.0);
        const double relaxed = solve(lp).objective_value;
        CHECK(relaxed >= best_integral(lp, T, 3) - 1e-9);
    }
}

TEST_CASE("larger instance solves feasibly and deterministically") {
    InstanceConfig cfg;
    cfg.d = 20;
    cfg.K = 4;
    cfg.m = 3;
    cfg.T = 1500;
    cfg.s0 = 4;
    cfg.seed = 8;
    const Instance inst = generate_instance(cfg);
    Rng rng(1);
    std::vector<Vector> xs;
    for (std::size_t t = 0; t < cfg.T; ++t) xs.push_back(sample_round(inst, rng).x);
    const auto lp = build_hindsight_lp(xs, inst.arms, inst.weights, inst.capacities, inst.consumption_bound);
    const auto a = solve(lp);
    const auto b = solve(lp);
    REQUIRE(a.status == LpStatus::optimal);
    CHECK(max_violation(lp, a.x) <= 1e-7);
    CHECK(lp.objective.dot(a.x) == doctest::Approx(a.objective_value).epsilon(1e-9));
    CHECK(a.x == b.x);
    CHECK(a.objective_value == b.objective_value);
    CHECK(lagrangian_bound(lp, a.ineq_duals, a.eq_duals, a.group_duals) ==
          doctest::Approx(a.objective_value).epsilon(1e-7));
}

TEST_CASE("text dump") {
    auto lp = LpProblem::with_vars(2);
    lp.objective << 1.0, 2.0;
    lp.ineq = Matrix::Ones(1, 2);
    lp.ineq_rhs = Vector::Ones(1);
    std::ostringstream out;
    write_lp_text(out, lp);
    CHECK(out.str().find("max") != std::string::npos);
}
