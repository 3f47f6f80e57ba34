#pragma once

// Dense two-phase primal simplex for small covering-type LPs:
//
//   min  c'x   s.t.  A x >= b,  x >= l,  x_j = 0 for j in fixed_zero.
//
// Dantzig pricing with a Bland fallback on degenerate runs. Every choice is
// index-ordered, so the returned vertex is a deterministic function of the
// input.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <string>
#include <vector>

#include "crop/errors.hpp"

namespace crop {

/// Feasibility tolerance for reported solutions.
inline constexpr double kTolLp = 1e-9;
/// Smallest pivot magnitude accepted by the ratio test.
inline constexpr double kTolPivot = 1e-10;

struct LinearProgram {
    std::vector<double> objective;                 // length m
    std::vector<std::vector<double>> constraints;  // p rows of length m, sense >=
    std::vector<double> rhs;                       // length p
    std::vector<double> lower_bounds;              // length m, or empty for all zeros
    std::vector<std::size_t> fixed_zero;

    [[nodiscard]] std::size_t variables() const { return objective.size(); }
    [[nodiscard]] double lower(std::size_t j) const {
        return lower_bounds.empty() ? 0.0 : lower_bounds[j];
    }

    void validate() const {
        const std::size_t m = objective.size();
        if (constraints.size() != rhs.size()) {
            throw ValidationError("LP: constraint/rhs count mismatch");
        }
        for (const auto& row : constraints) {
            if (row.size() != m) throw ValidationError("LP: constraint row has wrong width");
            for (double v : row) {
                if (!std::isfinite(v)) throw ValidationError("LP: non-finite coefficient");
            }
        }
        for (double v : objective) {
            if (!std::isfinite(v)) throw ValidationError("LP: non-finite objective");
        }
        for (double v : rhs) {
            if (!std::isfinite(v)) throw ValidationError("LP: non-finite rhs");
        }
        if (!lower_bounds.empty() && lower_bounds.size() != m) {
            throw ValidationError("LP: lower_bounds has wrong length");
        }
        for (double v : lower_bounds) {
            if (!std::isfinite(v) || v < 0.0) {
                throw ValidationError("LP: lower bounds must be finite and >= 0");
            }
        }
        for (std::size_t j : fixed_zero) {
            if (j >= m) throw ValidationError("LP: fixed_zero index out of range");
            if (lower(j) != 0.0) throw ValidationError("LP: fixed_zero variable has nonzero lower bound");
        }
    }
};

enum class LpStatus { Optimal, Infeasible, Unbounded };

inline const char* to_string(LpStatus s) {
    switch (s) {
        case LpStatus::Optimal: return "Optimal";
        case LpStatus::Infeasible: return "Infeasible";
        case LpStatus::Unbounded: return "Unbounded";
    }
    return "?";
}

struct LpSolution {
    LpStatus status = LpStatus::Infeasible;
    std::vector<double> x;  // empty unless Optimal
    double objective_value = std::numeric_limits<double>::quiet_NaN();
};

namespace detail {

class Tableau {
public:
    Tableau(std::size_t rows, std::size_t cols)
        : rows_(rows), cols_(cols), a_(rows * cols, 0.0), rhs_(rows, 0.0), basis_(rows, 0) {}

    double& at(std::size_t i, std::size_t j) { return a_[i * cols_ + j]; }
    [[nodiscard]] double at(std::size_t i, std::size_t j) const { return a_[i * cols_ + j]; }
    double& rhs(std::size_t i) { return rhs_[i]; }
    [[nodiscard]] double rhs(std::size_t i) const { return rhs_[i]; }
    std::size_t& basic(std::size_t i) { return basis_[i]; }
    [[nodiscard]] std::size_t basic(std::size_t i) const { return basis_[i]; }
    [[nodiscard]] std::size_t rows() const { return rows_; }
    [[nodiscard]] std::size_t cols() const { return cols_; }

    void pivot(std::size_t r, std::size_t c) {
        const double inv = 1.0 / at(r, c);
        double* prow = &a_[r * cols_];
        for (std::size_t j = 0; j < cols_; ++j) prow[j] *= inv;
        prow[c] = 1.0;
        rhs_[r] *= inv;
        for (std::size_t i = 0; i < rows_; ++i) {
            if (i == r) continue;
            double* row = &a_[i * cols_];
            const double f = row[c];
            if (f == 0.0) continue;
            for (std::size_t j = 0; j < cols_; ++j) row[j] -= f * prow[j];
            row[c] = 0.0;
            rhs_[i] -= f * rhs_[r];
        }
        basis_[r] = c;
    }

    void drop_row(std::size_t r) {
        a_.erase(a_.begin() + static_cast<std::ptrdiff_t>(r * cols_),
                 a_.begin() + static_cast<std::ptrdiff_t>((r + 1) * cols_));
        rhs_.erase(rhs_.begin() + static_cast<std::ptrdiff_t>(r));
        basis_.erase(basis_.begin() + static_cast<std::ptrdiff_t>(r));
        --rows_;
    }

private:
    std::size_t rows_;
    std::size_t cols_;
    std::vector<double> a_;
    std::vector<double> rhs_;
    std::vector<std::size_t> basis_;
};

enum class PhaseResult { Optimal, Unbounded };

// Minimises cost'x over the current basic feasible tableau. Columns with
// allowed[j] == false never enter.
inline PhaseResult run_simplex(Tableau& t, const std::vector<double>& cost,
                               const std::vector<bool>& allowed) {
    const std::size_t cols = t.cols();
    const std::size_t max_iter = 200 * (t.rows() + cols) + 1000;
    std::vector<double> reduced(cols);
    std::vector<bool> is_basic(cols);
    constexpr std::size_t kBlandAfter = 50;
    std::size_t degenerate_run = 0;
    for (std::size_t iter = 0; iter < max_iter; ++iter) {
        std::fill(is_basic.begin(), is_basic.end(), false);
        for (std::size_t i = 0; i < t.rows(); ++i) is_basic[t.basic(i)] = true;

        // Dantzig pricing (most negative reduced cost, lowest index on ties).
        // After a run of degenerate pivots switch to Bland's first-improving
        // rule, which cannot cycle, until the objective moves again.
        const bool bland = degenerate_run >= kBlandAfter;
        std::size_t enter = cols;
        double most_negative = 0.0;
        for (std::size_t j = 0; j < cols; ++j) {
            if (!allowed[j] || is_basic[j]) continue;
            double rc = cost[j];
            for (std::size_t i = 0; i < t.rows(); ++i) rc -= cost[t.basic(i)] * t.at(i, j);
            if (rc >= -1e-11 * (1.0 + std::abs(cost[j]))) continue;
            if (bland) {
                enter = j;
                break;
            }
            if (enter == cols || rc < most_negative) {
                enter = j;
                most_negative = rc;
            }
        }
        if (enter == cols) return PhaseResult::Optimal;

        // Ratio test; ties go to the smallest basic variable index.
        std::size_t leave = t.rows();
        double best_ratio = std::numeric_limits<double>::infinity();
        bool tiny_pivot = false;
        for (std::size_t i = 0; i < t.rows(); ++i) {
            const double v = t.at(i, enter);
            if (v <= kTolPivot) {
                if (v > 1e-14) tiny_pivot = true;
                continue;
            }
            const double ratio = std::max(t.rhs(i), 0.0) / v;
            const double slack = 1e-12 * (1.0 + std::abs(best_ratio));
            if (leave == t.rows() || ratio < best_ratio - slack) {
                best_ratio = ratio;
                leave = i;
            } else if (ratio <= best_ratio + slack && t.basic(i) < t.basic(leave)) {
                leave = i;
            }
        }
        if (leave == t.rows()) {
            if (tiny_pivot) {
                throw NumericalFailure("simplex: only sub-tolerance pivots in entering column");
            }
            return PhaseResult::Unbounded;
        }
        degenerate_run = best_ratio <= kTolPivot ? degenerate_run + 1 : 0;
        t.pivot(leave, enter);
    }
    throw NumericalFailure("simplex: iteration limit reached");
}

// Nonnegative costs make y = 0 feasible for the dual
//   max b'y  s.t.  A'y <= c,  y >= 0,
// so it needs no phase 1 and its tableau has one row per primal variable,
// which is far smaller than the primal for covering LPs with many rows.
// The primal x is read off the reduced costs of the dual slack columns.
inline LpSolution solve_via_dual(const std::vector<std::vector<double>>& a, const std::vector<double>& b,
                                 const std::vector<double>& c) {
    const std::size_t n = c.size();
    const std::size_t p = b.size();
    Tableau t(n, p + n);
    for (std::size_t k = 0; k < n; ++k) {
        for (std::size_t i = 0; i < p; ++i) t.at(k, i) = a[i][k];
        t.at(k, p + k) = 1.0;
        t.rhs(k) = c[k];
        t.basic(k) = p + k;
    }
    std::vector<double> cost(p + n, 0.0);
    for (std::size_t i = 0; i < p; ++i) cost[i] = -b[i];
    if (run_simplex(t, cost, std::vector<bool>(p + n, true)) == PhaseResult::Unbounded) {
        return {LpStatus::Infeasible, {}, {}};
    }
    LpSolution sol;
    sol.status = LpStatus::Optimal;
    sol.x.assign(n, 0.0);
    for (std::size_t k = 0; k < n; ++k) {
        double rc = 0.0;
        for (std::size_t r = 0; r < n; ++r) rc -= cost[t.basic(r)] * t.at(r, p + k);
        sol.x[k] = std::max(rc, 0.0);
    }
    return sol;
}

}  // namespace detail

/// Solves the LP. Lower bounds are removed by the shift x = l + y and
/// fixed-zero variables are dropped. Nonnegative costs go through the dual;
/// anything else uses a two-phase primal simplex.
inline LpSolution solve(const LinearProgram& lp) {
    lp.validate();
    const std::size_t m = lp.variables();
    const std::size_t p = lp.constraints.size();

    std::vector<bool> fixed(m, false);
    for (std::size_t j : lp.fixed_zero) fixed[j] = true;
    std::vector<std::size_t> free_vars;
    for (std::size_t j = 0; j < m; ++j) {
        if (!fixed[j]) free_vars.push_back(j);
    }
    const std::size_t n = free_vars.size();

    std::vector<double> shifted(p);
    double scale = 1.0;
    for (std::size_t i = 0; i < p; ++i) {
        double b = lp.rhs[i];
        for (std::size_t j = 0; j < m; ++j) b -= lp.constraints[i][j] * lp.lower(j);
        shifted[i] = b;
        scale = std::max(scale, std::abs(b));
    }

    const bool nonnegative_costs = std::all_of(free_vars.begin(), free_vars.end(),
                                               [&](std::size_t j) { return lp.objective[j] >= 0.0; });
    if (nonnegative_costs && p > 0) {
        std::vector<std::vector<double>> a(p, std::vector<double>(n));
        std::vector<double> c(n);
        for (std::size_t k = 0; k < n; ++k) {
            c[k] = lp.objective[free_vars[k]];
            for (std::size_t i = 0; i < p; ++i) a[i][k] = lp.constraints[i][free_vars[k]];
        }
        LpSolution dual = detail::solve_via_dual(a, shifted, c);
        if (dual.status != LpStatus::Optimal) return dual;
        LpSolution sol;
        sol.status = LpStatus::Optimal;
        sol.x.assign(m, 0.0);
        for (std::size_t j = 0; j < m; ++j) sol.x[j] = lp.lower(j);
        for (std::size_t k = 0; k < n; ++k) sol.x[free_vars[k]] += dual.x[k];
        sol.objective_value = 0.0;
        for (std::size_t j = 0; j < m; ++j) sol.objective_value += lp.objective[j] * sol.x[j];
        return sol;
    }

    // Columns: [y_0..y_{n-1}] [surplus_0..surplus_{p-1}] [artificials].
    std::size_t artificials = 0;
    for (double b : shifted) {
        if (b > 0.0) ++artificials;
    }
    const std::size_t cols = n + p + artificials;
    detail::Tableau t(p, cols);
    std::size_t next_art = n + p;
    for (std::size_t i = 0; i < p; ++i) {
        const double sign = shifted[i] > 0.0 ? 1.0 : -1.0;
        for (std::size_t k = 0; k < n; ++k) t.at(i, k) = sign * lp.constraints[i][free_vars[k]];
        t.at(i, n + i) = -sign;
        t.rhs(i) = sign * shifted[i];
        if (shifted[i] > 0.0) {
            t.at(i, next_art) = 1.0;
            t.basic(i) = next_art++;
        } else {
            t.basic(i) = n + i;
        }
    }

    std::vector<bool> allowed(cols, true);
    if (artificials > 0) {
        std::vector<double> phase1(cols, 0.0);
        for (std::size_t j = n + p; j < cols; ++j) phase1[j] = 1.0;
        detail::run_simplex(t, phase1, allowed);
        double infeasibility = 0.0;
        for (std::size_t i = 0; i < t.rows(); ++i) {
            if (t.basic(i) >= n + p) infeasibility += t.rhs(i);
        }
        if (infeasibility > kTolLp * scale) return {LpStatus::Infeasible, {}, {}};

        // Drive remaining (zero-valued) artificials out of the basis.
        for (std::size_t i = 0; i < t.rows();) {
            if (t.basic(i) < n + p) {
                ++i;
                continue;
            }
            std::size_t col = n + p;
            for (std::size_t j = 0; j < n + p; ++j) {
                if (std::abs(t.at(i, j)) > kTolPivot) {
                    col = j;
                    break;
                }
            }
            if (col == n + p) {
                t.drop_row(i);  // redundant constraint
            } else {
                t.pivot(i, col);
                ++i;
            }
        }
        for (std::size_t j = n + p; j < cols; ++j) allowed[j] = false;
    }

    std::vector<double> cost(cols, 0.0);
    for (std::size_t k = 0; k < n; ++k) cost[k] = lp.objective[free_vars[k]];
    if (detail::run_simplex(t, cost, allowed) == detail::PhaseResult::Unbounded) {
        return {LpStatus::Unbounded, {}, {}};
    }

    LpSolution sol;
    sol.status = LpStatus::Optimal;
    sol.x.assign(m, 0.0);
    for (std::size_t j = 0; j < m; ++j) sol.x[j] = lp.lower(j);
    for (std::size_t i = 0; i < t.rows(); ++i) {
        const std::size_t b = t.basic(i);
        if (b < n) sol.x[free_vars[b]] += std::max(t.rhs(i), 0.0);
    }
    sol.objective_value = 0.0;
    for (std::size_t j = 0; j < m; ++j) sol.objective_value += lp.objective[j] * sol.x[j];
    return sol;
}

}  // namespace crop
