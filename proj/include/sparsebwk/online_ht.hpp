#pragma once

#include "sparsebwk/sparse_core.hpp"

#include <cstddef>
#include <iosfwd>
#include <optional>
#include <string>

namespace sparsebwk {

/// Step-size rules derived from a spectral profile.
enum class StepRule {
    theory,    ///< 1 / (4 kappa phi_max)
    lipschitz, ///< 1 / (2 phi_max), the inverse Lipschitz constant of the gradient
};

std::string to_string(StepRule rule);
StepRule step_rule_from_string(const std::string& name);

struct HtConfig {
    std::size_t dim = 1;
    std::size_t s0 = 1;
    /// Relative sparsity s0 / s.
    double rho = 0.25;
    double eta = 0.25;
    /// Linear step warm-up: eta_t = eta * min(1, t / warmup_rounds). Zero
    /// means a constant step.
    std::size_t warmup_rounds = 0;
    /// Halve the step within a round while the round's weighted least-squares
    /// loss would increase. Guards against heavy inverse-propensity spikes.
    bool backtrack = true;

    /// s = min(d, ceil(s0 / rho)).
    std::size_t working_sparsity() const;
    double step_at(std::size_t t) const;
    void validate() const;
};

double default_step_size(const SpectralProfile& profile);
double step_size(const SpectralProfile& profile, StepRule rule);

/// Config for a known covariance: eta from sparse_spectrum at level s under
/// `rule`, warm-up over the first 2s rounds when `warmup` is set.
HtConfig make_ht_config(const Matrix& covariance, std::size_t s0, double rho = 0.25,
                        StepRule rule = StepRule::lipschitz, bool warmup = true);

/// Streaming sparse estimator for one arm: hard-thresholded gradient steps on
/// the running inverse-propensity-weighted least-squares objective, followed
/// by an exact s0-sparse projection.
///
/// The covariance is stored as the unnormalized sum S_t = sum_j y_j x_j x_j^T / p_j
/// and the reward term as b_t = sum_j y_j x_j r_j / p_j, so the gradient at round t
/// is (2/t) (S_t mu_{t-1} - b_t). Memory is O(d^2) regardless of t.
class OnlineHt {
public:
    OnlineHt(const HtConfig& config, std::size_t arm);

    /// Starts from a given iterate instead of zero.
    static OnlineHt with_initial(const HtConfig& config, std::size_t arm, const Vector& mu0);

    /// Absorbs one round. `p` is the probability this arm was pulled; when it
    /// is 0 the y/p term is treated as 0. `reward` must be present iff
    /// `pulled`. Throws std::invalid_argument on p outside [0, 1], a pull with
    /// p == 0, a missing reward, or a dimension mismatch.
    void update(const Vector& x, bool pulled, double p, std::optional<double> reward);

    /// The s0-sparse output.
    const Vector& estimate() const { return mu_s_; }
    /// The s-sparse iterate.
    const Vector& iterate() const { return mu_; }

    Matrix sigma_hat() const;
    const Matrix& weighted_covariance_sum() const { return cov_sum_; }
    const Vector& reward_sum() const { return reward_sum_; }

    std::size_t arm() const { return arm_; }
    std::size_t rounds() const { return t_; }
    std::size_t s() const { return s_; }
    std::size_t s0() const { return config_.s0; }
    const HtConfig& config() const { return config_; }

    /// (mu^T S mu - 2 b^T mu) / t, the loss the gradient step descends.
    double empirical_loss(const Vector& mu) const;
    /// Halvings applied so far, summed over rounds.
    std::size_t backtracks() const { return backtracks_; }

    /// Text snapshot; doubles are written as hex floats so load(save(x)) is exact.
    void save(std::ostream& out) const;
    static OnlineHt load(std::istream& in);

    friend bool operator==(const OnlineHt& a, const OnlineHt& b);

private:
    HtConfig config_;
    std::size_t arm_ = 0;
    std::size_t s_ = 1;
    std::size_t t_ = 0;
    std::size_t backtracks_ = 0;
    Matrix cov_sum_;
    Vector reward_sum_;
    Vector mu_;
    Vector mu_s_;
};

} // namespace sparsebwk
