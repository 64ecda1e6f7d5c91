#pragma once

#include "sparsebwk/sparse_core.hpp"

#include <cstddef>
#include <iosfwd>
#include <string>
#include <vector>

namespace sparsebwk {

/// maximize  c^T x
/// s.t.      ineq x <= ineq_rhs
///           eq x    = eq_rhs
///           sum_{i in g} x_i = 1   for every g in simplex_groups
///           lower <= x <= upper    (infinite bounds allowed)
struct LpProblem {
    Vector objective;
    Matrix ineq;
    Vector ineq_rhs;
    Matrix eq;
    Vector eq_rhs;
    std::vector<std::vector<std::size_t>> simplex_groups;
    Vector lower;
    Vector upper;

    /// n variables, no rows, bounds [0, +inf).
    static LpProblem with_vars(std::size_t n);

    std::size_t num_vars() const { return static_cast<std::size_t>(objective.size()); }
    /// Throws std::invalid_argument on inconsistent dimensions or lo > hi.
    void validate() const;
    /// Every variable in exactly one group, bounds [0, 1], no general
    /// equality rows: the per-round allocation structure.
    bool is_allocation() const;
};

enum class LpStatus { optimal, infeasible, unbounded };

std::string to_string(LpStatus status);

struct LpSolution {
    LpStatus status = LpStatus::infeasible;
    double objective_value = 0.0;
    Vector x;
    /// Row multipliers at optimality (ineq duals are >= 0).
    Vector ineq_duals;
    Vector eq_duals;
    Vector group_duals;
    std::size_t iterations = 0;
};

/// Dispatches to solve_allocation for allocation-structured problems and to
/// solve_dense otherwise. Deterministic for identical input.
LpSolution solve(const LpProblem& problem);

/// Bounded-variable primal simplex (two phases, Bland's rule) on a dense
/// tableau. Group constraints are expanded into equality rows.
LpSolution solve_dense(const LpProblem& problem);

/// Column generation over per-group vertex assignments; the master problem
/// (resource rows plus a convexity row) is solved with solve_dense.
/// Requires problem.is_allocation().
LpSolution solve_allocation(const LpProblem& problem);

/// Lagrangian upper bound
///   b^T y + f^T z + sum_g w_g + sum_j max_{x_j in [lo_j, hi_j]} (c_j - A_j^T y - E_j^T z - w_g(j)) x_j
/// with negative ineq multipliers clipped to zero. Valid for any multipliers;
/// may be +inf.
double lagrangian_bound(const LpProblem& problem, const Vector& ineq_duals, const Vector& eq_duals,
                        const Vector& group_duals);

/// Largest violation of any constraint or bound by x.
double max_violation(const LpProblem& problem, const Vector& x);

/// Plain-text dump: one line per row, for debugging.
void write_lp_text(std::ostream& out, const LpProblem& problem);

/// Per-round allocation LP with the null arm as the last option of every
/// round. Variable (t, a) sits at index t * (K + 1) + a, a = K being null.
/// Objective scale * <mu_a, x_t>, resource rows scale * sum b(a, x_t) y <= C
/// where b = clamp(W_a x, 0, consumption_cap).
LpProblem build_allocation_lp(const std::vector<Vector>& features, const std::vector<Vector>& mus,
                              const std::vector<Matrix>& weights, const Vector& capacities,
                              double scale, double consumption_cap);

/// V-hat LP: scale T / T0 over the first T0 rounds with estimated arms.
LpProblem build_vhat_lp(const std::vector<Vector>& features, const std::vector<Vector>& mu_hats,
                        const std::vector<Matrix>& weights, const Vector& capacities, std::size_t horizon,
                        double consumption_cap);

/// Fractional hindsight benchmark on all T realized rounds with the true arms.
LpProblem build_hindsight_lp(const std::vector<Vector>& features, const std::vector<Vector>& true_mus,
                             const std::vector<Matrix>& weights, const Vector& capacities,
                             double consumption_cap);

} // namespace sparsebwk
