#include "sparsebwk/baselines.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace sparsebwk {

namespace {

constexpr double kChangeTol = 1e-8;
constexpr std::size_t kMaxSweeps = 10000;

double soft(double v, double k) {
    if (v > k) return v - k;
    if (v < -k) return v + k;
    return 0.0;
}

// residual from the half-gradient g = G beta - c
double kkt_from_gradient(const Vector& g, const Vector& beta, double lambda) {
    double worst = 0.0;
    for (Eigen::Index j = 0; j < beta.size(); ++j) {
        const double grad = 2.0 * g[j];
        const double v = beta[j] != 0.0 ? std::abs(grad + lambda * (beta[j] > 0.0 ? 1.0 : -1.0))
                                        : std::max(0.0, std::abs(grad) - lambda);
        worst = std::max(worst, v);
    }
    return worst;
}

} // namespace

LassoFit lasso_fit_gram(const Matrix& gram, const Vector& xty, double lambda, const Vector& warm_start) {
    const auto d = gram.rows();
    if (gram.cols() != d || xty.size() != d) throw std::invalid_argument("lasso_fit: dimension mismatch");
    if (!(lambda >= 0.0)) throw std::invalid_argument("lasso_fit: lambda must be >= 0");
    LassoFit fit;
    fit.lambda = lambda;
    fit.beta = warm_start.size() == d ? warm_start : Vector::Zero(d);
    Vector g = gram * fit.beta - xty;

    // zero-curvature coordinates are pinned at 0
    for (Eigen::Index j = 0; j < d; ++j)
        if (gram(j, j) <= 0.0 && fit.beta[j] != 0.0) {
            g -= gram.col(j) * fit.beta[j];
            fit.beta[j] = 0.0;
        }

    for (fit.iterations = 0; fit.iterations < kMaxSweeps;) {
        ++fit.iterations;
        double biggest = 0.0;
        for (Eigen::Index j = 0; j < d; ++j) {
            const double gjj = gram(j, j);
            if (gjj <= 0.0) continue;
            const double old = fit.beta[j];
            const double partial = -(g[j] - gjj * old); // c_j - sum_{k != j} G_jk beta_k
            const double next = soft(partial, lambda / 2.0) / gjj;
            const double change = next - old;
            if (change != 0.0) {
                fit.beta[j] = next;
                g.noalias() += gram.col(j) * change;
                biggest = std::max(biggest, std::abs(change));
            }
        }
        if (biggest < kChangeTol) {
            fit.converged = true;
            break;
        }
    }
    g = gram * fit.beta - xty;
    fit.kkt_residual = kkt_from_gradient(g, fit.beta, lambda);
    return fit;
}

LassoFit lasso_fit(const Matrix& X, const Vector& y, double lambda, const Vector& warm_start) {
    if (X.rows() == 0) throw std::invalid_argument("lasso_fit: need at least one row");
    if (X.rows() != y.size()) throw std::invalid_argument("lasso_fit: X and y disagree");
    const double t = static_cast<double>(X.rows());
    const Matrix gram = (X.transpose() * X) / t;
    const Vector xty = (X.transpose() * y) / t;
    LassoFit fit = lasso_fit_gram(gram, xty, lambda, warm_start);
    fit.kkt_residual = lasso_kkt_residual(X, y, fit.beta, lambda);
    return fit;
}

double lasso_kkt_residual(const Matrix& X, const Vector& y, const Vector& beta, double lambda) {
    const double t = static_cast<double>(X.rows());
    const Vector half_grad = X.transpose() * (X * beta - y) / t;
    return kkt_from_gradient(half_grad, beta, lambda);
}

double lasso_objective(const Matrix& X, const Vector& y, const Vector& beta, double lambda) {
    return (y - X * beta).squaredNorm() / static_cast<double>(X.rows()) + lambda * beta.lpNorm<1>();
}

double lasso_lambda(double c, std::size_t d, std::size_t n) {
    if (n == 0) throw std::invalid_argument("lasso_lambda: need n >= 1");
    const double nn = static_cast<double>(n);
    return c * std::sqrt(std::log(static_cast<double>(d) * nn) / nn);
}

BanditRunResult run_etc_lasso(const Instance& inst, std::size_t t1, double c_lambda, Rng& context_rng,
                              Rng& policy_rng) {
    const auto& cfg = inst.config;
    const std::size_t K = inst.num_arms();
    if (t1 >= cfg.T) throw std::invalid_argument("run_etc_lasso: need t1 < T");

    BanditRunResult result;
    result.pulls.assign(K, 0);
    std::vector<std::vector<Vector>> xs(K);
    std::vector<std::vector<double>> ys(K);
    std::vector<Vector> fits(K, Vector::Zero(static_cast<Eigen::Index>(cfg.d)));
    const double eps_explore = 1.0 / static_cast<double>(K);
    double regret = 0.0;
    double error = 0.0;
    for (const auto& mu : inst.arms) error = std::max(error, mu.norm());

    for (std::size_t t = 1; t <= cfg.T; ++t) {
        const Round round = sample_round(inst, context_rng);
        std::size_t arm = 0;
        if (t <= t1) {
            arm = std::uniform_int_distribution<std::size_t>(0, K - 1)(policy_rng);
            xs[arm].push_back(round.x);
            ys[arm].push_back(reward(inst, arm, round));
        } else {
            double top = -std::numeric_limits<double>::infinity();
            for (std::size_t a = 0; a < K; ++a) {
                const double v = fits[a].dot(round.x);
                if (v > top) {
                    top = v;
                    arm = a;
                }
            }
        }
        regret += pseudo_regret(inst, arm, round.x);
        ++result.pulls[arm];
        result.arms.push_back(arm);
        result.cumulative_regret.push_back(regret);
        result.eps.push_back(t <= t1 ? eps_explore : 0.0);

        if (t == t1) {
            error = 0.0;
            for (std::size_t a = 0; a < K; ++a) {
                const std::size_t n = xs[a].size();
                if (n == 0) {
                    result.notes.push_back("arm " + std::to_string(a) + " had no exploration pulls; zero fit");
                } else {
                    Matrix X(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(cfg.d));
                    Vector y(static_cast<Eigen::Index>(n));
                    for (std::size_t i = 0; i < n; ++i) {
                        X.row(static_cast<Eigen::Index>(i)) = xs[a][i].transpose();
                        y[static_cast<Eigen::Index>(i)] = ys[a][i];
                    }
                    const LassoFit fit = lasso_fit(X, y, lasso_lambda(c_lambda, cfg.d, n));
                    if (!fit.converged)
                        result.notes.push_back("arm " + std::to_string(a) + " lasso hit the sweep limit");
                    fits[a] = fit.beta;
                }
                error = std::max(error, (fits[a] - inst.arms[a]).norm());
            }
        }
        result.estimator_error.push_back(error);
    }
    return result;
}

} // namespace sparsebwk
