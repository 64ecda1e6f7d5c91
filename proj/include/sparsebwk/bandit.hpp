#pragma once

#include "sparsebwk/environment.hpp"
#include "sparsebwk/online_ht.hpp"

#include <cstddef>
#include <iosfwd>
#include <string>
#include <vector>

namespace sparsebwk {

enum class EpsMode { schedule, zero };

std::string to_string(EpsMode mode);
EpsMode eps_mode_from_string(const std::string& name);

/// scale * sigma^(2/3) D^(4/3) s0^(2/3) log(dK)^(1/3) t^(-1/3) / (r_max K)^(2/3), clipped to [0, 1/K].
double bandit_epsilon(std::size_t t, std::size_t s0, std::size_t d, std::size_t K, double sigma, double D,
                      double r_max, double scale);

/// eps-greedy pull probabilities over the K arms for context x; `greedy`
/// receives the argmax set of <estimate_a, x>.
Vector bandit_propensities(const std::vector<Vector>& estimates, const Vector& x, double eps,
                           std::vector<std::size_t>& greedy);

struct BanditConfig {
    EpsMode mode = EpsMode::schedule;
    double scale = 0.5;
    double r_max = -1.0; // D * s0 when not positive
    double rho = 0.25;
    StepRule step_rule = StepRule::lipschitz;
};

struct BanditRunResult {
    std::vector<std::size_t> arms;
    std::vector<double> cumulative_regret;
    std::vector<double> eps;
    std::vector<double> estimator_error;
    std::vector<std::size_t> pulls;
    /// Free-form remarks, e.g. arms a baseline never saw.
    std::vector<std::string> notes;

    double final_regret() const { return cumulative_regret.empty() ? 0.0 : cumulative_regret.back(); }
};

/// <x, mu*_opt(x)> - <x, mu*_arm>.
double pseudo_regret(const Instance& instance, std::size_t arm, const Vector& x);

/// Unconstrained eps-greedy bandit on Online HT estimates (budgets ignored).
/// `initial` optionally seeds each arm's iterate.
BanditRunResult run_bandit(const Instance& instance, const BanditConfig& config, Rng& context_rng, Rng& policy_rng,
                           const std::vector<Vector>& initial = {});

/// Columns: round, arm, pseudo_regret_cum, eps, est_error_max.
void write_bandit_trajectory(std::ostream& out, const BanditRunResult& result);

} // namespace sparsebwk
