#pragma once

#include "sparsebwk/environment.hpp"
#include "sparsebwk/online_ht.hpp"

#include <cstddef>
#include <iosfwd>
#include <string>
#include <vector>

namespace sparsebwk {

/// Resource prices. alpha > 0 holds the multiplicative weights, eta = alpha / sum(alpha).
struct DualState {
    Vector alpha;
    Vector eta;
    double delta = 0.0;

    /// alpha = 1, eta = 1/m.
    static DualState initial(std::size_t m, double delta);
};

/// One Hedge step: alpha_i *= (1 + delta)^((consumed_i - budget_i) * (1 - explored)).
/// With `normalize`, alpha is divided by its max afterwards (eta is unaffected).
/// Throws std::invalid_argument on negative delta or length mismatch.
DualState dual_update(const DualState& dual, const Vector& consumed, const Vector& per_round_budget, bool explored,
                      bool normalize = true);

struct ArmChoice {
    std::size_t arm = 0;
    /// Pull probability of every real arm plus the null arm (last).
    Vector propensities;
    bool explored = false;
};

/// Dual-adjusted eps-greedy choice.
/// score_a = <mu_a, x> - z <clamp(W_a x, 0, cap), eta> for the K real arms and 0
/// for the null arm (id K). With probability K eps a uniform real arm is drawn;
/// otherwise a uniform member of the argmax set G over all K + 1 options.
/// p_a = (1 - K eps) / |G| * [a in G] + eps [a real]. Requires eps in [0, 1/K].
ArmChoice select_arm(const std::vector<Vector>& mu_hats, const std::vector<Matrix>& weights, const Vector& x,
                     const Vector& eta, double z, double eps, double consumption_cap, Rng& rng);

/// scale * sigma^(2/3) D^(4/3) s0^(2/3) log(dK)^(1/3) t^(-1/3) / ((r_max + d_prime z)^(2/3) K^(2/3)),
/// clipped to [0, 1/K].
double epsilon_schedule(std::size_t t, std::size_t s0, std::size_t d, std::size_t K, double sigma, double D,
                        double r_max, double z, double d_prime, double scale);

enum class BwkMode { eps_greedy, greedy };

std::string to_string(BwkMode mode);
BwkMode bwk_mode_from_string(const std::string& name);

/// Zero or negative fields fall back to the defaults noted beside them.
struct BwkConfig {
    BwkMode mode = BwkMode::eps_greedy;
    double z = -1.0;         // estimated from the uniform phase
    double delta = -1.0;     // sqrt(log m / (T D'))
    std::size_t t0 = 0;      // max(K, ceil(T^(2/3)))
    double eps_scale = 1.0;
    double r_max = -1.0;     // D * s0
    double rho = 0.25;
    StepRule step_rule = StepRule::lipschitz;
    bool normalize_dual = true;
    /// Solve the hindsight LP at the end of the run.
    bool compute_benchmark = true;
};

struct ZEstimate {
    double z = 1.0;
    double vhat = 0.0;
    std::vector<OnlineHt> states;
    std::vector<Vector> features;
};

/// Uniform sampling for t0 rounds (p = 1/K for every arm), feeding every
/// arm's estimator, then z = V-hat / C_min + 1 from the V-hat LP over the
/// observed features. A zero C_min gives z = V-hat + 1.
ZEstimate estimate_z(const Instance& instance, std::size_t t0, const HtConfig& ht, Rng& context_rng,
                     Rng& policy_rng);

/// z from V-hat and the capacities.
double z_from_vhat(double vhat, double min_capacity);

struct BwkRound {
    std::size_t arm = 0;
    double reward = 0.0;          // realized
    double expected_reward = 0.0; // <mu*_arm, x>
    Vector cumulative_consumption;
    Vector eta;
    double eps = 0.0;
    double est_error_max = 0.0;
};

struct BwkRunResult {
    std::vector<BwkRound> rounds;
    /// First round whose pull would have exceeded a capacity; 0 if none.
    std::size_t tau = 0;
    /// Sum of expected rewards <mu*_{y_t}, x_t> over played rounds.
    double collected = 0.0;
    double realized_reward = 0.0;
    double hindsight_value = 0.0;
    /// hindsight_value - collected.
    double regret = 0.0;
    double z = 0.0;
    double vhat = 0.0;
    double delta = 0.0;
    std::size_t t0 = 0;
    Vector consumption;
};

/// Runs the primal-dual policy for T rounds. The uniform phase and the
/// one-pull-per-arm initialization both count toward T. Every pull is checked
/// against the remaining capacities first; the first infeasible pull sets tau
/// and the null arm is played from then on. Contexts come from `context_rng`,
/// all policy randomness from `policy_rng`.
BwkRunResult run_bwk(const Instance& instance, const BwkConfig& config, Rng& context_rng, Rng& policy_rng);

/// Columns: round, arm, reward, consumption_1..m (cumulative), eta_1..m, eps, est_error_max.
void write_bwk_trajectory(std::ostream& out, const BwkRunResult& result);

} // namespace sparsebwk
