#include "sparsebwk/lp_solver.hpp"

#include "sparsebwk/environment.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <limits>
#include <map>
#include <ostream>
#include <stdexcept>

namespace sparsebwk {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kPivotTol = 1e-9;
constexpr double kCostTol = 1e-9;
constexpr std::size_t kMaxPivots = 200000;

} // namespace

LpProblem LpProblem::with_vars(std::size_t n) {
    const auto nn = static_cast<Eigen::Index>(n);
    LpProblem p;
    p.objective = Vector::Zero(nn);
    p.ineq = Matrix::Zero(0, nn);
    p.ineq_rhs = Vector::Zero(0);
    p.eq = Matrix::Zero(0, nn);
    p.eq_rhs = Vector::Zero(0);
    p.lower = Vector::Zero(nn);
    p.upper = Vector::Constant(nn, kInf);
    return p;
}

void LpProblem::validate() const {
    const auto n = objective.size();
    if (ineq.cols() != n || eq.cols() != n) throw std::invalid_argument("LpProblem: row width mismatch");
    if (ineq.rows() != ineq_rhs.size() || eq.rows() != eq_rhs.size())
        throw std::invalid_argument("LpProblem: rhs length mismatch");
    if (lower.size() != n || upper.size() != n) throw std::invalid_argument("LpProblem: bound length mismatch");
    for (Eigen::Index j = 0; j < n; ++j)
        if (!(lower[j] <= upper[j]) || lower[j] == kInf || upper[j] == -kInf)
            throw std::invalid_argument("LpProblem: bad bounds");
    for (const auto& g : simplex_groups)
        for (auto j : g)
            if (j >= static_cast<std::size_t>(n)) throw std::invalid_argument("LpProblem: group index out of range");
}

bool LpProblem::is_allocation() const {
    if (eq.rows() != 0 || simplex_groups.empty()) return false;
    std::vector<int> seen(num_vars(), 0);
    for (const auto& g : simplex_groups) {
        if (g.empty()) return false;
        for (auto j : g) ++seen[j];
    }
    for (std::size_t j = 0; j < num_vars(); ++j) {
        const auto jj = static_cast<Eigen::Index>(j);
        if (seen[j] != 1 || lower[jj] != 0.0 || upper[jj] != 1.0) return false;
    }
    return true;
}

std::string to_string(LpStatus status) {
    switch (status) {
    case LpStatus::optimal: return "optimal";
    case LpStatus::infeasible: return "infeasible";
    case LpStatus::unbounded: return "unbounded";
    }
    return "unknown";
}

namespace {

// max c^T z  s.t.  tab z = beta (tab = B^-1 A),  0 <= z <= upper.
struct Tableau {
    Matrix tab;
    Vector beta;
    Vector upper;
    std::vector<Eigen::Index> basis;
    std::vector<char> basic;
    std::vector<char> at_upper;
    std::size_t pivots = 0;

    double nonbasic_value(Eigen::Index j) const { return at_upper[static_cast<std::size_t>(j)] ? upper[j] : 0.0; }

    void pivot(Eigen::Index r, Eigen::Index j) {
        const double piv = tab(r, j);
        tab.row(r) /= piv;
        for (Eigen::Index i = 0; i < tab.rows(); ++i) {
            if (i == r) continue;
            const double f = tab(i, j);
            if (f != 0.0) tab.row(i) -= f * tab.row(r);
        }
        const auto leaving = basis[static_cast<std::size_t>(r)];
        basic[static_cast<std::size_t>(leaving)] = 0;
        basis[static_cast<std::size_t>(r)] = j;
        basic[static_cast<std::size_t>(j)] = 1;
        at_upper[static_cast<std::size_t>(j)] = 0;
    }

    enum class Outcome { optimal, unbounded };

    Outcome optimize(const Vector& cost) {
        const Eigen::Index rows = tab.rows();
        const Eigen::Index cols = tab.cols();
        Vector cb(rows);
        while (true) {
            if (++pivots > kMaxPivots) throw std::runtime_error("simplex: pivot limit exceeded");
            for (Eigen::Index i = 0; i < rows; ++i) cb[i] = cost[basis[static_cast<std::size_t>(i)]];
            const Vector reduced = cost - tab.transpose() * cb;

            // Bland: lowest eligible index enters
            Eigen::Index enter = -1;
            for (Eigen::Index j = 0; j < cols; ++j) {
                const auto ju = static_cast<std::size_t>(j);
                if (basic[ju]) continue;
                if (!at_upper[ju] && reduced[j] > kCostTol && upper[j] > 0.0) { enter = j; break; }
                if (at_upper[ju] && reduced[j] < -kCostTol) { enter = j; break; }
            }
            if (enter < 0) return Outcome::optimal;

            const double dir = at_upper[static_cast<std::size_t>(enter)] ? -1.0 : 1.0;
            double theta = upper[enter];
            Eigen::Index leave = -1;
            bool leave_to_upper = false;
            for (Eigen::Index i = 0; i < rows; ++i) {
                const double a = dir * tab(i, enter);
                const auto bvar = basis[static_cast<std::size_t>(i)];
                double limit;
                bool to_upper;
                if (a > kPivotTol) {
                    limit = std::max(beta[i], 0.0) / a;
                    to_upper = false;
                } else if (a < -kPivotTol && std::isfinite(upper[bvar])) {
                    limit = std::max(upper[bvar] - beta[i], 0.0) / -a;
                    to_upper = true;
                } else {
                    continue;
                }
                const bool better = limit < theta - 1e-12 ||
                                    (leave >= 0 && std::abs(limit - theta) <= 1e-12 &&
                                     bvar < basis[static_cast<std::size_t>(leave)]);
                if (better) {
                    theta = limit;
                    leave = i;
                    leave_to_upper = to_upper;
                }
            }
            if (leave < 0 && !std::isfinite(theta)) return Outcome::unbounded;

            const double entering_value = nonbasic_value(enter) + dir * theta;
            beta -= (dir * theta) * tab.col(enter);
            if (leave < 0) {
                at_upper[static_cast<std::size_t>(enter)] = !at_upper[static_cast<std::size_t>(enter)];
                continue;
            }
            const auto leaving = basis[static_cast<std::size_t>(leave)];
            pivot(leave, enter);
            at_upper[static_cast<std::size_t>(leaving)] = leave_to_upper ? 1 : 0;
            beta[leave] = entering_value;
        }
    }
};

// Original variable j is recovered as offset_j + sign_j * z_pos - (free ? z_neg : 0).
struct VarMap {
    double offset = 0.0;
    double sign = 1.0;
    Eigen::Index pos = -1;
    Eigen::Index neg = -1;
};

} // namespace

LpSolution solve_dense(const LpProblem& problem) {
    problem.validate();
    const auto n = static_cast<Eigen::Index>(problem.num_vars());

    // variable transform to z >= 0
    std::vector<VarMap> vars(static_cast<std::size_t>(n));
    std::vector<double> zu;
    for (Eigen::Index j = 0; j < n; ++j) {
        auto& v = vars[static_cast<std::size_t>(j)];
        const double lo = problem.lower[j];
        const double hi = problem.upper[j];
        if (std::isfinite(lo)) {
            v.offset = lo;
            v.pos = static_cast<Eigen::Index>(zu.size());
            zu.push_back(hi - lo);
        } else if (std::isfinite(hi)) {
            v.offset = hi;
            v.sign = -1.0;
            v.pos = static_cast<Eigen::Index>(zu.size());
            zu.push_back(kInf);
        } else {
            v.pos = static_cast<Eigen::Index>(zu.size());
            zu.push_back(kInf);
            v.neg = static_cast<Eigen::Index>(zu.size());
            zu.push_back(kInf);
        }
    }
    const auto nz = static_cast<Eigen::Index>(zu.size());

    // rows: ineq, eq, groups
    const Eigen::Index n_ineq = problem.ineq.rows();
    const Eigen::Index n_eq = problem.eq.rows();
    const auto n_grp = static_cast<Eigen::Index>(problem.simplex_groups.size());
    const Eigen::Index rows = n_ineq + n_eq + n_grp;

    Matrix orig_rows = Matrix::Zero(rows, n);
    Vector rhs(rows);
    orig_rows.topRows(n_ineq) = problem.ineq;
    rhs.head(n_ineq) = problem.ineq_rhs;
    orig_rows.middleRows(n_ineq, n_eq) = problem.eq;
    rhs.segment(n_ineq, n_eq) = problem.eq_rhs;
    for (Eigen::Index g = 0; g < n_grp; ++g) {
        for (auto j : problem.simplex_groups[static_cast<std::size_t>(g)])
            orig_rows(n_ineq + n_eq + g, static_cast<Eigen::Index>(j)) += 1.0;
        rhs[n_ineq + n_eq + g] = 1.0;
    }

    Matrix zrows = Matrix::Zero(rows, nz);
    for (Eigen::Index j = 0; j < n; ++j) {
        const auto& v = vars[static_cast<std::size_t>(j)];
        rhs -= orig_rows.col(j) * v.offset;
        zrows.col(v.pos) += v.sign * orig_rows.col(j);
        if (v.neg >= 0) zrows.col(v.neg) -= orig_rows.col(j);
    }

    std::vector<char> flipped(static_cast<std::size_t>(rows), 0);
    std::vector<Eigen::Index> identity_col(static_cast<std::size_t>(rows));
    Eigen::Index n_art = 0;
    for (Eigen::Index i = 0; i < rows; ++i) {
        flipped[static_cast<std::size_t>(i)] = rhs[i] < 0.0;
        if (!(i < n_ineq && !flipped[static_cast<std::size_t>(i)])) ++n_art;
    }
    const Eigen::Index slack0 = nz;
    const Eigen::Index art0 = nz + n_ineq;
    const Eigen::Index cols = art0 + n_art;

    Tableau tb;
    tb.tab = Matrix::Zero(rows, cols);
    tb.beta = Vector(rows);
    tb.upper = Vector::Constant(cols, kInf);
    for (Eigen::Index j = 0; j < nz; ++j) tb.upper[j] = zu[static_cast<std::size_t>(j)];
    tb.basis.resize(static_cast<std::size_t>(rows));
    tb.basic.assign(static_cast<std::size_t>(cols), 0);
    tb.at_upper.assign(static_cast<std::size_t>(cols), 0);

    Eigen::Index next_art = art0;
    for (Eigen::Index i = 0; i < rows; ++i) {
        const double s = flipped[static_cast<std::size_t>(i)] ? -1.0 : 1.0;
        tb.tab.row(i).head(nz) = s * zrows.row(i);
        tb.beta[i] = s * rhs[i];
        if (i < n_ineq) tb.tab(i, slack0 + i) = s;
        Eigen::Index id;
        if (i < n_ineq && !flipped[static_cast<std::size_t>(i)]) {
            id = slack0 + i;
        } else {
            id = next_art++;
            tb.tab(i, id) = 1.0;
        }
        identity_col[static_cast<std::size_t>(i)] = id;
        tb.basis[static_cast<std::size_t>(i)] = id;
        tb.basic[static_cast<std::size_t>(id)] = 1;
    }

    LpSolution sol;
    sol.x = Vector::Zero(n);
    const double scale = 1.0 + (rows > 0 ? tb.beta.cwiseAbs().maxCoeff() : 0.0);

    if (n_art > 0) {
        Vector phase1 = Vector::Zero(cols);
        phase1.tail(n_art).setConstant(-1.0);
        tb.optimize(phase1);
        double infeasibility = 0.0;
        for (Eigen::Index i = 0; i < rows; ++i)
            if (tb.basis[static_cast<std::size_t>(i)] >= art0) infeasibility += tb.beta[i];
        if (infeasibility > 1e-9 * scale) {
            sol.status = LpStatus::infeasible;
            sol.iterations = tb.pivots;
            return sol;
        }
        // drive zero-level artificials out where a structural/slack column allows
        for (Eigen::Index i = 0; i < rows; ++i) {
            if (tb.basis[static_cast<std::size_t>(i)] < art0) continue;
            for (Eigen::Index j = 0; j < art0; ++j) {
                if (tb.basic[static_cast<std::size_t>(j)] || std::abs(tb.tab(i, j)) <= 1e-7) continue;
                const double value = tb.nonbasic_value(j);
                tb.pivot(i, j);
                tb.beta[i] = value;
                break;
            }
        }
        for (Eigen::Index j = art0; j < cols; ++j) tb.upper[j] = 0.0;
    }

    Vector cost = Vector::Zero(cols);
    for (Eigen::Index j = 0; j < n; ++j) {
        const auto& v = vars[static_cast<std::size_t>(j)];
        cost[v.pos] += v.sign * problem.objective[j];
        if (v.neg >= 0) cost[v.neg] -= problem.objective[j];
    }
    if (tb.optimize(cost) == Tableau::Outcome::unbounded) {
        sol.status = LpStatus::unbounded;
        sol.objective_value = kInf;
        sol.iterations = tb.pivots;
        return sol;
    }

    Vector z(cols);
    for (Eigen::Index j = 0; j < cols; ++j) z[j] = tb.basic[static_cast<std::size_t>(j)] ? 0.0 : tb.nonbasic_value(j);
    for (Eigen::Index i = 0; i < rows; ++i) z[tb.basis[static_cast<std::size_t>(i)]] = tb.beta[i];
    for (Eigen::Index j = 0; j < n; ++j) {
        const auto& v = vars[static_cast<std::size_t>(j)];
        double value = v.offset + v.sign * z[v.pos];
        if (v.neg >= 0) value -= z[v.neg];
        // snap onto finite bounds to clear roundoff
        value = std::clamp(value, problem.lower[j], problem.upper[j]);
        sol.x[j] = value;
    }

    Vector cb(rows);
    for (Eigen::Index i = 0; i < rows; ++i) cb[i] = cost[tb.basis[static_cast<std::size_t>(i)]];
    Vector duals(rows);
    for (Eigen::Index i = 0; i < rows; ++i) {
        const double y = tb.tab.col(identity_col[static_cast<std::size_t>(i)]).dot(cb);
        duals[i] = flipped[static_cast<std::size_t>(i)] ? -y : y;
    }
    sol.ineq_duals = duals.head(n_ineq);
    sol.eq_duals = duals.segment(n_ineq, n_eq);
    sol.group_duals = duals.tail(n_grp);
    sol.status = LpStatus::optimal;
    sol.objective_value = problem.objective.dot(sol.x);
    sol.iterations = tb.pivots;
    return sol;
}

namespace {

// One vertex of the product of group simplices: a member index per group.
struct Column {
    std::vector<std::uint32_t> choice;
    double value = 0.0;
    Vector use;
};

} // namespace

LpSolution solve_allocation(const LpProblem& problem) {
    problem.validate();
    if (!problem.is_allocation()) throw std::invalid_argument("solve_allocation: problem is not allocation-structured");

    const Eigen::Index m = problem.ineq.rows();
    const auto& groups = problem.simplex_groups;
    const auto n = static_cast<Eigen::Index>(problem.num_vars());

    // row scaling keeps the master's coefficients O(1)
    double obj_scale = 1.0;
    for (const auto& g : groups) {
        double best = 0.0;
        for (auto j : g) best = std::max(best, std::abs(problem.objective[static_cast<Eigen::Index>(j)]));
        obj_scale += best;
    }
    Vector row_scale = Vector::Ones(m);
    for (Eigen::Index i = 0; i < m; ++i) {
        double total = std::abs(problem.ineq_rhs[i]);
        double worst = 0.0;
        for (const auto& g : groups) {
            double gmax = 0.0;
            for (auto j : g) gmax = std::max(gmax, std::abs(problem.ineq(i, static_cast<Eigen::Index>(j))));
            worst += gmax;
        }
        row_scale[i] = 1.0 / std::max({1.0, total, worst});
    }

    auto make_column = [&](const Vector& score) {
        Column c;
        c.choice.resize(groups.size());
        c.use = Vector::Zero(m);
        for (std::size_t g = 0; g < groups.size(); ++g) {
            std::uint32_t best = 0;
            double best_score = -kInf;
            for (std::uint32_t k = 0; k < groups[g].size(); ++k) {
                const double s = score[static_cast<Eigen::Index>(groups[g][k])];
                if (s > best_score) {
                    best_score = s;
                    best = k;
                }
            }
            c.choice[g] = best;
            const auto j = static_cast<Eigen::Index>(groups[g][best]);
            c.value += problem.objective[j];
            c.use += problem.ineq.col(j);
        }
        return c;
    };

    std::vector<Column> columns;
    std::map<std::vector<std::uint32_t>, std::size_t> seen;
    auto add_column = [&](Column c) {
        if (seen.count(c.choice)) return false;
        seen.emplace(c.choice, columns.size());
        columns.push_back(std::move(c));
        return true;
    };

    // start from the least-consuming and the greediest vertices
    {
        Vector frugal = -problem.ineq.colwise().sum().transpose();
        add_column(make_column(frugal));
        add_column(make_column(problem.objective));
    }

    LpSolution result;
    result.x = Vector::Zero(n);
    std::size_t total_pivots = 0;

    // phase 0 minimizes artificial excess; phase 1 maximizes the objective
    for (int phase = 0; phase < 2; ++phase) {
        for (std::size_t round = 0;; ++round) {
            if (round > 20000) throw std::runtime_error("solve_allocation: column generation did not converge");
            const auto k = static_cast<Eigen::Index>(columns.size());
            // master vars: theta_0..theta_{k-1}, excess_0..excess_{m-1}
            LpProblem master = LpProblem::with_vars(static_cast<std::size_t>(k + m));
            master.ineq = Matrix::Zero(m, k + m);
            master.ineq_rhs = problem.ineq_rhs.cwiseProduct(row_scale);
            master.eq = Matrix::Zero(1, k + m);
            master.eq_rhs = Vector::Ones(1);
            for (Eigen::Index c = 0; c < k; ++c) {
                const auto& col = columns[static_cast<std::size_t>(c)];
                master.ineq.col(c) = col.use.cwiseProduct(row_scale);
                master.eq(0, c) = 1.0;
                master.objective[c] = phase == 0 ? 0.0 : col.value / obj_scale;
            }
            for (Eigen::Index i = 0; i < m; ++i) {
                master.ineq(i, k + i) = -1.0;
                if (phase == 0) master.objective[k + i] = -1.0;
                else master.upper[k + i] = 0.0;
            }
            const LpSolution ms = solve_dense(master);
            total_pivots += ms.iterations;
            if (ms.status != LpStatus::optimal) throw std::runtime_error("solve_allocation: master LP not optimal");

            // price: per group argmax of (c_j - y^T A_j)
            const Vector y = ms.ineq_duals.cwiseMax(0.0).cwiseProduct(row_scale);
            const double pi = ms.eq_duals[0];
            Vector score = -(problem.ineq.transpose() * y);
            if (phase == 1) score += problem.objective / obj_scale;
            Column candidate = make_column(score);
            double priced = 0.0;
            for (std::size_t g = 0; g < groups.size(); ++g)
                priced += score[static_cast<Eigen::Index>(groups[g][candidate.choice[g]])];
            const double reduced = priced - pi;

            const bool converged = reduced <= 1e-10 * (1.0 + std::abs(pi));
            if (converged || !add_column(std::move(candidate))) {
                if (phase == 0) {
                    if (-ms.objective_value > 1e-9) {
                        result.status = LpStatus::infeasible;
                        result.iterations = total_pivots;
                        return result;
                    }
                    break;
                }
                // assemble primal point and multipliers
                for (Eigen::Index c = 0; c < k; ++c) {
                    const double theta = ms.x[c];
                    if (theta == 0.0) continue;
                    const auto& col = columns[static_cast<std::size_t>(c)];
                    for (std::size_t g = 0; g < groups.size(); ++g)
                        result.x[static_cast<Eigen::Index>(groups[g][col.choice[g]])] += theta;
                }
                result.x = result.x.cwiseMax(0.0).cwiseMin(1.0);
                result.ineq_duals = y * obj_scale;
                result.eq_duals = Vector::Zero(0);
                result.group_duals = Vector(static_cast<Eigen::Index>(groups.size()));
                const Vector unscaled = problem.objective - problem.ineq.transpose() * result.ineq_duals;
                for (std::size_t g = 0; g < groups.size(); ++g) {
                    double best = -kInf;
                    for (auto j : groups[g]) best = std::max(best, unscaled[static_cast<Eigen::Index>(j)]);
                    result.group_duals[static_cast<Eigen::Index>(g)] = best;
                }
                result.status = LpStatus::optimal;
                result.objective_value = problem.objective.dot(result.x);
                result.iterations = total_pivots;
                return result;
            }
        }
    }
    throw std::logic_error("solve_allocation: unreachable");
}

LpSolution solve(const LpProblem& problem) {
    if (problem.is_allocation()) return solve_allocation(problem);
    return solve_dense(problem);
}

double lagrangian_bound(const LpProblem& problem, const Vector& ineq_duals, const Vector& eq_duals,
                        const Vector& group_duals) {
    const Vector y = ineq_duals.cwiseMax(0.0);
    double bound = problem.ineq_rhs.dot(y) + problem.eq_rhs.dot(eq_duals) + group_duals.sum();
    Vector reduced = problem.objective - problem.ineq.transpose() * y - problem.eq.transpose() * eq_duals;
    for (std::size_t g = 0; g < problem.simplex_groups.size(); ++g)
        for (auto j : problem.simplex_groups[g]) reduced[static_cast<Eigen::Index>(j)] -= group_duals[static_cast<Eigen::Index>(g)];
    for (Eigen::Index j = 0; j < reduced.size(); ++j) {
        const double r = reduced[j];
        if (r > 0.0) bound += r * problem.upper[j];
        else if (r < 0.0) bound += r * problem.lower[j];
        if (std::isnan(bound)) return kInf;
    }
    return bound;
}

double max_violation(const LpProblem& problem, const Vector& x) {
    double worst = 0.0;
    if (problem.ineq.rows() > 0) worst = std::max(worst, (problem.ineq * x - problem.ineq_rhs).maxCoeff());
    if (problem.eq.rows() > 0) worst = std::max(worst, (problem.eq * x - problem.eq_rhs).cwiseAbs().maxCoeff());
    for (const auto& g : problem.simplex_groups) {
        double total = 0.0;
        for (auto j : g) total += x[static_cast<Eigen::Index>(j)];
        worst = std::max(worst, std::abs(total - 1.0));
    }
    for (Eigen::Index j = 0; j < x.size(); ++j) {
        worst = std::max(worst, problem.lower[j] - x[j]);
        worst = std::max(worst, x[j] - problem.upper[j]);
    }
    return worst;
}

void write_lp_text(std::ostream& out, const LpProblem& problem) {
    const auto n = problem.objective.size();
    out << "vars " << n << " ineq " << problem.ineq.rows() << " eq " << problem.eq.rows() << " groups "
        << problem.simplex_groups.size() << '\n';
    out << std::setprecision(17);
    auto row = [&out](const char* tag, const auto& coeffs, const char* sense, double rhs) {
        out << tag;
        for (Eigen::Index j = 0; j < coeffs.size(); ++j) out << ' ' << coeffs[j];
        out << ' ' << sense << ' ' << rhs << '\n';
    };
    out << "max";
    for (Eigen::Index j = 0; j < n; ++j) out << ' ' << problem.objective[j];
    out << '\n';
    for (Eigen::Index i = 0; i < problem.ineq.rows(); ++i)
        row("ineq", Vector(problem.ineq.row(i).transpose()), "<=", problem.ineq_rhs[i]);
    for (Eigen::Index i = 0; i < problem.eq.rows(); ++i)
        row("eq", Vector(problem.eq.row(i).transpose()), "=", problem.eq_rhs[i]);
    for (const auto& g : problem.simplex_groups) {
        out << "group";
        for (auto j : g) out << ' ' << j;
        out << " = 1\n";
    }
    out << "lower";
    for (Eigen::Index j = 0; j < n; ++j) out << ' ' << problem.lower[j];
    out << "\nupper";
    for (Eigen::Index j = 0; j < n; ++j) out << ' ' << problem.upper[j];
    out << '\n';
}

LpProblem build_allocation_lp(const std::vector<Vector>& features, const std::vector<Vector>& mus,
                              const std::vector<Matrix>& weights, const Vector& capacities, double scale,
                              double consumption_cap) {
    if (mus.size() != weights.size()) throw std::invalid_argument("build_allocation_lp: arm count mismatch");
    const std::size_t rounds = features.size();
    const std::size_t options = mus.size() + 1;
    const auto m = capacities.size();
    LpProblem p = LpProblem::with_vars(rounds * options);
    p.upper.setOnes();
    p.ineq = Matrix::Zero(m, static_cast<Eigen::Index>(rounds * options));
    p.ineq_rhs = capacities;
    p.simplex_groups.resize(rounds);
    for (std::size_t t = 0; t < rounds; ++t) {
        auto& group = p.simplex_groups[t];
        for (std::size_t a = 0; a < options; ++a) {
            const std::size_t j = t * options + a;
            group.push_back(j);
            if (a == mus.size()) continue; // null arm: zero reward and use
            const auto jj = static_cast<Eigen::Index>(j);
            p.objective[jj] = scale * mus[a].dot(features[t]);
            p.ineq.col(jj) = scale * clamped_consumption(weights[a], features[t], consumption_cap);
        }
    }
    return p;
}

LpProblem build_vhat_lp(const std::vector<Vector>& features, const std::vector<Vector>& mu_hats,
                        const std::vector<Matrix>& weights, const Vector& capacities, std::size_t horizon,
                        double consumption_cap) {
    if (features.empty()) throw std::invalid_argument("build_vhat_lp: need at least one round");
    const double scale = static_cast<double>(horizon) / static_cast<double>(features.size());
    return build_allocation_lp(features, mu_hats, weights, capacities, scale, consumption_cap);
}

LpProblem build_hindsight_lp(const std::vector<Vector>& features, const std::vector<Vector>& true_mus,
                             const std::vector<Matrix>& weights, const Vector& capacities,
                             double consumption_cap) {
    return build_allocation_lp(features, true_mus, weights, capacities, 1.0, consumption_cap);
}

} // namespace sparsebwk
