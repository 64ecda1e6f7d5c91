#include "sparsebwk/bandit.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <limits>
#include <ostream>
#include <stdexcept>

namespace sparsebwk {

std::string to_string(EpsMode mode) { return mode == EpsMode::zero ? "zero" : "schedule"; }

EpsMode eps_mode_from_string(const std::string& name) {
    if (name == "schedule") return EpsMode::schedule;
    if (name == "zero") return EpsMode::zero;
    throw std::invalid_argument("unknown eps mode: " + name);
}

double bandit_epsilon(std::size_t t, std::size_t s0, std::size_t d, std::size_t K, double sigma, double D,
                      double r_max, double scale) {
    if (t == 0) throw std::invalid_argument("bandit_epsilon: t must be >= 1");
    const double cap = 1.0 / static_cast<double>(K);
    if (scale <= 0.0) return 0.0;
    const double num = std::cbrt(sigma * sigma) * std::pow(D, 4.0 / 3.0) *
                       std::cbrt(static_cast<double>(s0 * s0)) *
                       std::cbrt(std::log(static_cast<double>(d * K))) / std::cbrt(static_cast<double>(t));
    const double rk = r_max * static_cast<double>(K);
    const double eps = scale * num / std::cbrt(rk * rk);
    if (!std::isfinite(eps)) return cap;
    return std::clamp(eps, 0.0, cap);
}

namespace {

std::vector<Vector> estimates_of(const std::vector<OnlineHt>& states) {
    std::vector<Vector> out;
    out.reserve(states.size());
    for (const auto& s : states) out.push_back(s.estimate());
    return out;
}

} // namespace

Vector bandit_propensities(const std::vector<Vector>& estimates, const Vector& x, double eps,
                           std::vector<std::size_t>& greedy) {
    const std::size_t K = estimates.size();
    if (K == 0) throw std::invalid_argument("bandit_propensities: no arms");
    if (!(eps >= 0.0 && eps * static_cast<double>(K) <= 1.0 + 1e-12))
        throw std::invalid_argument("bandit_propensities: eps outside [0, 1/K]");
    greedy.clear();
    double top = -std::numeric_limits<double>::infinity();
    for (std::size_t a = 0; a < K; ++a) {
        const double v = estimates[a].dot(x);
        if (v > top) {
            top = v;
            greedy.assign(1, a);
        } else if (v == top) {
            greedy.push_back(a);
        }
    }
    const double explore = std::min(1.0, static_cast<double>(K) * eps);
    Vector p = Vector::Constant(static_cast<Eigen::Index>(K), eps);
    for (auto a : greedy) p[static_cast<Eigen::Index>(a)] += (1.0 - explore) / static_cast<double>(greedy.size());
    return p;
}

double pseudo_regret(const Instance& inst, std::size_t arm, const Vector& x) {
    const std::size_t best = optimal_arm(inst, x);
    return inst.arms[best].dot(x) - expected_reward(inst, arm, x);
}

BanditRunResult run_bandit(const Instance& inst, const BanditConfig& config, Rng& context_rng, Rng& policy_rng,
                           const std::vector<Vector>& initial) {
    const auto& cfg = inst.config;
    const std::size_t K = inst.num_arms();
    if (!initial.empty() && initial.size() != K) throw std::invalid_argument("run_bandit: need one initial vector per arm");
    const double r_max = config.r_max > 0.0 ? config.r_max : cfg.feature_bound * static_cast<double>(cfg.s0);
    const double scale = config.mode == EpsMode::zero ? 0.0 : config.scale;

    const HtConfig ht = make_ht_config(inst.covariance, cfg.s0, config.rho, config.step_rule, true);
    std::vector<OnlineHt> states;
    for (std::size_t a = 0; a < K; ++a)
        states.push_back(initial.empty() ? OnlineHt(ht, a) : OnlineHt::with_initial(ht, a, initial[a]));

    BanditRunResult result;
    result.pulls.assign(K, 0);
    double regret = 0.0;
    std::vector<std::size_t> greedy;
    for (std::size_t t = 1; t <= cfg.T; ++t) {
        const Round round = sample_round(inst, context_rng);
        const double eps = bandit_epsilon(t, cfg.s0, cfg.d, K, cfg.sigma, cfg.feature_bound, r_max, scale);

        const Vector p = bandit_propensities(estimates_of(states), round.x, eps, greedy);
        std::size_t arm;
        const double explore = std::min(1.0, static_cast<double>(K) * eps);
        if (explore > 0.0 && uniform01(policy_rng) < explore) {
            arm = std::uniform_int_distribution<std::size_t>(0, K - 1)(policy_rng);
        } else if (greedy.size() == 1) {
            arm = greedy.front();
        } else {
            arm = greedy[std::uniform_int_distribution<std::size_t>(0, greedy.size() - 1)(policy_rng)];
        }

        const double r = reward(inst, arm, round);
        double worst = 0.0;
        for (std::size_t a = 0; a < K; ++a) {
            const bool pulled = a == arm;
            states[a].update(round.x, pulled, p[static_cast<Eigen::Index>(a)], pulled ? std::optional<double>(r) : std::nullopt);
            worst = std::max(worst, (states[a].estimate() - inst.arms[a]).norm());
        }
        regret += pseudo_regret(inst, arm, round.x);
        ++result.pulls[arm];
        result.arms.push_back(arm);
        result.cumulative_regret.push_back(regret);
        result.eps.push_back(eps);
        result.estimator_error.push_back(worst);
    }
    return result;
}

void write_bandit_trajectory(std::ostream& out, const BanditRunResult& result) {
    out << "round,arm,pseudo_regret_cum,eps,est_error_max\n" << std::setprecision(17);
    for (std::size_t t = 0; t < result.arms.size(); ++t)
        out << t + 1 << ',' << result.arms[t] << ',' << result.cumulative_regret[t] << ',' << result.eps[t] << ','
            << result.estimator_error[t] << '\n';
}

} // namespace sparsebwk
