#pragma once

#include "sparsebwk/bandit.hpp"
#include "sparsebwk/environment.hpp"

#include <cstddef>

namespace sparsebwk {

struct LassoFit {
    Vector beta;
    double lambda = 0.0;
    /// Largest violation of the subgradient optimality conditions.
    double kkt_residual = 0.0;
    std::size_t iterations = 0;
    bool converged = false;
};

/// Minimizes (1/t) ||y - X beta||^2 + lambda ||beta||_1 by cyclic coordinate
/// descent on the Gram matrix. Stops when the largest coordinate change in a
/// sweep drops below 1e-8 or after 10,000 sweeps. `warm_start` may be empty.
LassoFit lasso_fit(const Matrix& X, const Vector& y, double lambda, const Vector& warm_start = Vector());

/// Same objective from sufficient statistics G = X^T X / t and c = X^T y / t.
LassoFit lasso_fit_gram(const Matrix& gram, const Vector& xty, double lambda, const Vector& warm_start = Vector());

/// max_j of |(2/t) X_j^T (X beta - y) + lambda sign(beta_j)| for beta_j != 0 and
/// (|(2/t) X_j^T (X beta - y)| - lambda)^+ for beta_j == 0.
double lasso_kkt_residual(const Matrix& X, const Vector& y, const Vector& beta, double lambda);

double lasso_objective(const Matrix& X, const Vector& y, const Vector& beta, double lambda);

/// c * sqrt(log(d n) / n).
double lasso_lambda(double c, std::size_t d, std::size_t n);

/// Explore-then-commit: t1 uniform rounds, one LASSO per arm on its own pulls
/// (lambda from the arm's pull count), then greedy on the frozen fits.
BanditRunResult run_etc_lasso(const Instance& instance, std::size_t t1, double c_lambda, Rng& context_rng,
                              Rng& policy_rng);

} // namespace sparsebwk
