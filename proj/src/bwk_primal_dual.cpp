#include "sparsebwk/bwk_primal_dual.hpp"

#include "sparsebwk/lp_solver.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <ostream>
#include <stdexcept>

namespace sparsebwk {

DualState DualState::initial(std::size_t m, double delta) {
    if (m == 0) throw std::invalid_argument("DualState: need m >= 1");
    if (!(delta >= 0.0)) throw std::invalid_argument("DualState: delta must be >= 0");
    const auto mm = static_cast<Eigen::Index>(m);
    return {Vector::Ones(mm), Vector::Constant(mm, 1.0 / static_cast<double>(m)), delta};
}

DualState dual_update(const DualState& dual, const Vector& consumed, const Vector& per_round_budget, bool explored,
                      bool normalize) {
    if (!(dual.delta >= 0.0)) throw std::invalid_argument("dual_update: delta must be >= 0");
    if (consumed.size() != dual.alpha.size() || per_round_budget.size() != dual.alpha.size())
        throw std::invalid_argument("dual_update: length mismatch");
    DualState next = dual;
    if (!explored) {
        const double base = std::log1p(dual.delta);
        for (Eigen::Index i = 0; i < next.alpha.size(); ++i)
            next.alpha[i] *= std::exp(base * (consumed[i] - per_round_budget[i]));
    }
    if (normalize) next.alpha /= next.alpha.maxCoeff();
    next.eta = next.alpha / next.alpha.sum();
    return next;
}

ArmChoice select_arm(const std::vector<Vector>& mu_hats, const std::vector<Matrix>& weights, const Vector& x,
                     const Vector& eta, double z, double eps, double consumption_cap, Rng& rng) {
    const std::size_t K = mu_hats.size();
    if (K == 0 || weights.size() != K) throw std::invalid_argument("select_arm: arm count mismatch");
    const double k = static_cast<double>(K);
    if (!(eps >= 0.0 && eps * k <= 1.0 + 1e-12)) throw std::invalid_argument("select_arm: eps outside [0, 1/K]");

    // the null arm competes in the greedy step with score 0
    std::vector<double> score(K + 1, 0.0);
    for (std::size_t a = 0; a < K; ++a)
        score[a] = mu_hats[a].dot(x) - z * clamped_consumption(weights[a], x, consumption_cap).dot(eta);
    const double top = *std::max_element(score.begin(), score.end());
    std::vector<std::size_t> greedy;
    for (std::size_t a = 0; a <= K; ++a)
        if (score[a] == top) greedy.push_back(a);

    ArmChoice choice;
    const double explore = std::min(1.0, k * eps);
    choice.propensities = Vector::Constant(static_cast<Eigen::Index>(K + 1), eps);
    choice.propensities[static_cast<Eigen::Index>(K)] = 0.0;
    for (auto a : greedy)
        choice.propensities[static_cast<Eigen::Index>(a)] += (1.0 - explore) / static_cast<double>(greedy.size());

    choice.explored = explore > 0.0 && uniform01(rng) < explore;
    if (choice.explored) {
        std::uniform_int_distribution<std::size_t> pick(0, K - 1);
        choice.arm = pick(rng);
    } else if (greedy.size() == 1) {
        choice.arm = greedy.front();
    } else {
        std::uniform_int_distribution<std::size_t> pick(0, greedy.size() - 1);
        choice.arm = greedy[pick(rng)];
    }
    return choice;
}

double epsilon_schedule(std::size_t t, std::size_t s0, std::size_t d, std::size_t K, double sigma, double D,
                        double r_max, double z, double d_prime, double scale) {
    if (t == 0) throw std::invalid_argument("epsilon_schedule: t must be >= 1");
    const double cap = 1.0 / static_cast<double>(K);
    if (scale <= 0.0) return 0.0;
    const double num = std::cbrt(sigma * sigma) * std::pow(D, 4.0 / 3.0) *
                       std::cbrt(static_cast<double>(s0 * s0)) *
                       std::cbrt(std::log(static_cast<double>(d * K))) / std::cbrt(static_cast<double>(t));
    const double base = r_max + d_prime * z;
    const double den = std::cbrt(base * base) * std::cbrt(static_cast<double>(K * K));
    const double eps = scale * num / den;
    if (!std::isfinite(eps)) return cap;
    return std::clamp(eps, 0.0, cap);
}

std::string to_string(BwkMode mode) { return mode == BwkMode::greedy ? "greedy" : "eps_greedy"; }

BwkMode bwk_mode_from_string(const std::string& name) {
    if (name == "eps_greedy") return BwkMode::eps_greedy;
    if (name == "greedy") return BwkMode::greedy;
    throw std::invalid_argument("unknown bwk mode: " + name);
}

double z_from_vhat(double vhat, double min_capacity) {
    if (min_capacity <= 0.0) return vhat + 1.0;
    return vhat / min_capacity + 1.0;
}

namespace {

std::vector<OnlineHt> fresh_states(const Instance& inst, const HtConfig& ht) {
    std::vector<OnlineHt> states;
    for (std::size_t a = 0; a < inst.num_arms(); ++a) states.emplace_back(ht, a);
    return states;
}

std::vector<Vector> estimates(const std::vector<OnlineHt>& states) {
    std::vector<Vector> out;
    out.reserve(states.size());
    for (const auto& s : states) out.push_back(s.estimate());
    return out;
}

double max_error(const Instance& inst, const std::vector<OnlineHt>& states) {
    double worst = 0.0;
    for (std::size_t a = 0; a < states.size(); ++a)
        worst = std::max(worst, (states[a].estimate() - inst.arms[a]).norm());
    return worst;
}

void feed(std::vector<OnlineHt>& states, const Vector& x, std::size_t arm, const Vector& p, double r) {
    for (std::size_t a = 0; a < states.size(); ++a) {
        const bool pulled = a == arm;
        states[a].update(x, pulled, p[static_cast<Eigen::Index>(a)], pulled ? std::optional<double>(r) : std::nullopt);
    }
}

double solve_value(const LpProblem& lp, const char* what) {
    const LpSolution sol = solve(lp);
    if (sol.status != LpStatus::optimal) throw std::runtime_error(std::string(what) + ": LP " + to_string(sol.status));
    return sol.objective_value;
}

double compute_vhat(const Instance& inst, const std::vector<Vector>& features, const std::vector<OnlineHt>& states) {
    if (features.empty()) return 0.0;
    const auto lp = build_vhat_lp(features, estimates(states), inst.weights, inst.capacities, inst.config.T,
                                  inst.consumption_bound);
    return solve_value(lp, "V-hat");
}

// Tracks budgets, totals and the trajectory across the phases of a run.
struct Ledger {
    const Instance& inst;
    BwkRunResult& result;
    bool depleted = false;

    // Returns true when the pull went through.
    bool play(std::size_t t, std::size_t arm, const Round& round, const Vector& eta, double eps) {
        BwkRound rec;
        rec.eta = eta;
        rec.eps = eps;
        bool played = false;
        if (!depleted && arm != inst.null_arm()) {
            const Vector use = consumption(inst, arm, round);
            if (((result.consumption + use).array() > inst.capacities.array()).any()) {
                depleted = true;
                result.tau = t;
            } else {
                result.consumption += use;
                rec.arm = arm;
                rec.expected_reward = expected_reward(inst, arm, round.x);
                rec.reward = reward(inst, arm, round);
                played = true;
            }
        }
        if (!played) rec.arm = inst.null_arm();
        result.collected += rec.expected_reward;
        result.realized_reward += rec.reward;
        rec.cumulative_consumption = result.consumption;
        result.rounds.push_back(std::move(rec));
        return played;
    }
};

} // namespace

ZEstimate estimate_z(const Instance& inst, std::size_t t0, const HtConfig& ht, Rng& context_rng, Rng& policy_rng) {
    const std::size_t K = inst.num_arms();
    if (t0 < K) throw std::invalid_argument("estimate_z: need t0 >= K");
    ZEstimate est;
    est.states = fresh_states(inst, ht);
    const Vector p = [&] {
        Vector v = Vector::Constant(static_cast<Eigen::Index>(K + 1), 1.0 / static_cast<double>(K));
        v[static_cast<Eigen::Index>(K)] = 0.0;
        return v;
    }();
    std::uniform_int_distribution<std::size_t> pick(0, K - 1);
    for (std::size_t t = 0; t < t0; ++t) {
        const Round round = sample_round(inst, context_rng);
        const std::size_t arm = pick(policy_rng);
        feed(est.states, round.x, arm, p, reward(inst, arm, round));
        est.features.push_back(round.x);
    }
    est.vhat = compute_vhat(inst, est.features, est.states);
    est.z = z_from_vhat(est.vhat, inst.min_capacity());
    return est;
}

BwkRunResult run_bwk(const Instance& inst, const BwkConfig& config, Rng& context_rng, Rng& policy_rng) {
    const auto& cfg = inst.config;
    const std::size_t T = cfg.T;
    const std::size_t K = inst.num_arms();
    const std::size_t m = inst.num_resources();
    const double Td = static_cast<double>(T);

    BwkRunResult result;
    result.t0 = config.t0 > 0 ? config.t0 : std::max<std::size_t>(K, static_cast<std::size_t>(std::ceil(std::cbrt(Td * Td) - 1e-9)));
    if (result.t0 + K > T) throw std::invalid_argument("run_bwk: t0 + K must not exceed T");
    result.delta = config.delta >= 0.0
                       ? config.delta
                       : std::sqrt(std::log(static_cast<double>(m)) / (Td * std::max(inst.consumption_bound, 1e-12)));
    const double r_max = config.r_max > 0.0 ? config.r_max : cfg.feature_bound * static_cast<double>(cfg.s0);
    const double eps_scale = config.mode == BwkMode::greedy ? 0.0 : config.eps_scale;

    const HtConfig ht = make_ht_config(inst.covariance, cfg.s0, config.rho, config.step_rule, true);
    std::vector<OnlineHt> states = fresh_states(inst, ht);
    result.consumption = Vector::Zero(static_cast<Eigen::Index>(m));
    result.rounds.reserve(T);
    Ledger ledger{inst, result, false};
    std::vector<Vector> features;
    features.reserve(T);

    DualState dual = DualState::initial(m, result.delta);
    const Vector per_round_budget = inst.capacities / Td;
    std::size_t t = 0;

    // uniform phase for z
    {
        Vector p = Vector::Constant(static_cast<Eigen::Index>(K + 1), 1.0 / static_cast<double>(K));
        p[static_cast<Eigen::Index>(K)] = 0.0;
        std::uniform_int_distribution<std::size_t> pick(0, K - 1);
        std::vector<Vector> phase_features;
        for (std::size_t i = 0; i < result.t0; ++i) {
            ++t;
            const Round round = sample_round(inst, context_rng);
            features.push_back(round.x);
            phase_features.push_back(round.x);
            const std::size_t arm = pick(policy_rng);
            if (ledger.play(t, arm, round, dual.eta, 1.0 / static_cast<double>(K)))
                feed(states, round.x, arm, p, result.rounds.back().reward);
            result.rounds.back().est_error_max = max_error(inst, states);
        }
        result.vhat = compute_vhat(inst, phase_features, states);
        result.z = config.z >= 0.0 ? config.z : z_from_vhat(result.vhat, inst.min_capacity());
    }

    // one pull per arm
    for (std::size_t a = 0; a < K; ++a) {
        ++t;
        const Round round = sample_round(inst, context_rng);
        features.push_back(round.x);
        Vector p = Vector::Zero(static_cast<Eigen::Index>(K + 1));
        p[static_cast<Eigen::Index>(a)] = 1.0;
        if (ledger.play(t, a, round, dual.eta, 0.0)) feed(states, round.x, a, p, result.rounds.back().reward);
        result.rounds.back().est_error_max = max_error(inst, states);
    }
    dual = DualState::initial(m, result.delta);

    for (; t < T;) {
        ++t;
        const Round round = sample_round(inst, context_rng);
        features.push_back(round.x);
        if (ledger.depleted) {
            const double err = result.rounds.back().est_error_max;
            ledger.play(t, inst.null_arm(), round, dual.eta, 0.0);
            result.rounds.back().est_error_max = err;
            continue;
        }
        const double eps = epsilon_schedule(t, cfg.s0, cfg.d, K, cfg.sigma, cfg.feature_bound, r_max, result.z,
                                            inst.consumption_bound, eps_scale);
        const ArmChoice choice = select_arm(estimates(states), inst.weights, round.x, dual.eta, result.z, eps,
                                            inst.consumption_bound, policy_rng);
        const Vector eta_used = dual.eta;
        const bool played = ledger.play(t, choice.arm, round, eta_used, eps);
        if (ledger.depleted) {
            result.rounds.back().est_error_max = max_error(inst, states);
            continue;
        }
        // a voluntary null pull still moves the duals and the estimators
        auto& rec = result.rounds.back();
        const Vector used = played ? consumption(inst, choice.arm, round) : Vector::Zero(static_cast<Eigen::Index>(m));
        dual = dual_update(dual, used, per_round_budget, choice.explored, config.normalize_dual);
        feed(states, round.x, choice.arm, choice.propensities, rec.reward);
        rec.est_error_max = max_error(inst, states);
    }

    if (config.compute_benchmark) {
        const auto lp = build_hindsight_lp(features, inst.arms, inst.weights, inst.capacities, inst.consumption_bound);
        result.hindsight_value = solve_value(lp, "hindsight");
    }
    result.regret = result.hindsight_value - result.collected;
    return result;
}

void write_bwk_trajectory(std::ostream& out, const BwkRunResult& result) {
    const auto m = result.consumption.size();
    out << "round,arm,reward";
    for (Eigen::Index i = 0; i < m; ++i) out << ",consumption_" << i + 1;
    for (Eigen::Index i = 0; i < m; ++i) out << ",eta_" << i + 1;
    out << ",eps,est_error_max\n";
    out << std::setprecision(17);
    for (std::size_t t = 0; t < result.rounds.size(); ++t) {
        const auto& r = result.rounds[t];
        out << t + 1 << ',' << r.arm << ',' << r.reward;
        for (Eigen::Index i = 0; i < m; ++i) out << ',' << r.cumulative_consumption[i];
        for (Eigen::Index i = 0; i < m; ++i) out << ',' << r.eta[i];
        out << ',' << r.eps << ',' << r.est_error_max << '\n';
    }
}

} // namespace sparsebwk
