#pragma once

#include "sparsebwk/random.hpp"
#include "sparsebwk/sparse_core.hpp"

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

namespace sparsebwk {

/// Synthetic-problem parameters. `budget_ratio` holds one entry per resource
/// (a single entry is broadcast to all m resources); C_i = budget_ratio_i * T.
struct InstanceConfig {
    std::size_t d = 100;
    std::size_t K = 5;
    std::size_t m = 1;
    std::size_t T = 1000;
    std::size_t s0 = 10;
    double sigma = 0.5;
    double alpha = 0.5;
    double feature_bound = 3.0;
    std::vector<double> budget_ratio{0.25};
    double signal_low = 0.5;
    double signal_high = 1.0;
    std::uint64_t seed = 0;

    double ratio(std::size_t i) const;
    void validate() const;
};

/// One synthetic problem. Arm ids run 0..K-1; id K is the null arm (reward 0,
/// consumption 0).
struct Instance {
    InstanceConfig config;
    std::vector<Vector> arms;    // mu*_a, s0-sparse, |entries| <= 1
    std::vector<Matrix> weights; // W*_a, m x d, nonnegative, rows on supp(mu*_a)
    Matrix covariance;
    Matrix covariance_factor; // lower Cholesky factor
    Vector capacities;
    double consumption_bound = 0.0; // D' = max_a,i ||W*_a row i||_1 * D

    std::size_t num_arms() const { return arms.size(); }
    std::size_t null_arm() const { return arms.size(); }
    std::size_t dim() const { return static_cast<std::size_t>(covariance.rows()); }
    std::size_t num_resources() const { return static_cast<std::size_t>(capacities.size()); }
    double min_capacity() const { return capacities.minCoeff(); }
};

struct Round {
    Vector x;
    Vector noise; // one potential noise draw per arm
};

Instance generate_instance(const InstanceConfig& config, Rng& rng);
/// Convenience overload seeded from config.seed.
Instance generate_instance(const InstanceConfig& config);

/// Fills in covariance, Cholesky factor and D' from arms/weights/config.
void finalize_instance(Instance& instance);

Round sample_round(const Instance& instance, Rng& rng);

/// <mu*_a, x>; zero for the null arm.
double expected_reward(const Instance& instance, std::size_t arm, const Vector& x);
double reward(const Instance& instance, std::size_t arm, const Round& round);

/// clamp(W x, 0, cap) componentwise.
Vector clamped_consumption(const Matrix& weights, const Vector& x, double cap);
/// b(a, x); zero vector for the null arm.
Vector consumption(const Instance& instance, std::size_t arm, const Vector& x);
Vector consumption(const Instance& instance, std::size_t arm, const Round& round);

/// argmax_a <mu*_a, x> over the K real arms, ties to the lowest id.
std::size_t optimal_arm(const Instance& instance, const Vector& x);

/// Versioned JSON text. Doubles round-trip exactly.
void save_instance(std::ostream& out, const Instance& instance);
Instance load_instance(std::istream& in);

inline constexpr const char* kInstanceSchema = "sparsebwk.instance";
inline constexpr int kInstanceSchemaVersion = 1;

} // namespace sparsebwk
