#pragma once

// Brute-force reference solver for tiny LPs: enumerates every basic point
// (intersection of m active constraints, bounds included) and keeps the best
// feasible one. Shares only the LinearProgram/LpSolution types with the
// simplex, none of its numerics.

#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <vector>

#include "crop/lp.hpp"

namespace crop {

namespace oracle_detail {

// Solves the square system M x = r by Gaussian elimination with partial
// pivoting; nullopt when (numerically) singular.
inline std::optional<std::vector<double>> solve_square(std::vector<std::vector<double>> M,
                                                       std::vector<double> r) {
    const std::size_t n = r.size();
    for (std::size_t c = 0; c < n; ++c) {
        std::size_t piv = c;
        for (std::size_t i = c + 1; i < n; ++i) {
            if (std::abs(M[i][c]) > std::abs(M[piv][c])) piv = i;
        }
        if (std::abs(M[piv][c]) < 1e-12) return std::nullopt;
        std::swap(M[piv], M[c]);
        std::swap(r[piv], r[c]);
        for (std::size_t i = c + 1; i < n; ++i) {
            const double f = M[i][c] / M[c][c];
            for (std::size_t j = c; j < n; ++j) M[i][j] -= f * M[c][j];
            r[i] -= f * r[c];
        }
    }
    std::vector<double> x(n);
    for (std::size_t c = n; c-- > 0;) {
        double s = r[c];
        for (std::size_t j = c + 1; j < n; ++j) s -= M[c][j] * x[j];
        x[c] = s / M[c][c];
    }
    return x;
}

// Calls visit(indices) for every k-subset of {0..n-1} in lexicographic order.
template <typename Visit>
void for_each_subset(std::size_t n, std::size_t k, Visit&& visit) {
    if (k > n) return;
    std::vector<std::size_t> idx(k);
    for (std::size_t i = 0; i < k; ++i) idx[i] = i;
    while (true) {
        visit(idx);
        std::size_t i = k;
        while (i > 0 && idx[i - 1] == n - k + i - 1) --i;
        if (i == 0) return;
        ++idx[i - 1];
        for (std::size_t j = i; j < k; ++j) idx[j] = idx[j - 1] + 1;
    }
}

}  // namespace oracle_detail

inline constexpr std::size_t kOracleMaxVariables = 6;
inline constexpr std::size_t kOracleMaxConstraints = 10;

/// Reference solution by exhaustive vertex enumeration. Unboundedness is
/// decided by scanning the extreme rays of the recession cone
/// {d : A d >= 0, d >= 0} normalised to sum(d) = 1.
inline LpSolution vertex_enumeration_oracle(const LinearProgram& lp) {
    lp.validate();
    const std::size_t m_all = lp.variables();
    const std::size_t p = lp.constraints.size();
    if (m_all > kOracleMaxVariables || p > kOracleMaxConstraints) {
        throw DimensionTooLarge("vertex enumeration oracle supports m <= 6, p <= 10");
    }
    std::vector<bool> fixed(m_all, false);
    for (std::size_t j : lp.fixed_zero) fixed[j] = true;
    std::vector<std::size_t> vars;
    for (std::size_t j = 0; j < m_all; ++j) {
        if (!fixed[j]) vars.push_back(j);
    }
    const std::size_t m = vars.size();

    // Rows 0..p-1: original constraints; rows p..p+m-1: lower bounds.
    std::vector<std::vector<double>> G(p + m, std::vector<double>(m, 0.0));
    std::vector<double> h(p + m, 0.0);
    for (std::size_t i = 0; i < p; ++i) {
        for (std::size_t k = 0; k < m; ++k) G[i][k] = lp.constraints[i][vars[k]];
        h[i] = lp.rhs[i];
    }
    for (std::size_t k = 0; k < m; ++k) {
        G[p + k][k] = 1.0;
        h[p + k] = lp.lower(vars[k]);
    }
    std::vector<double> c(m);
    for (std::size_t k = 0; k < m; ++k) c[k] = lp.objective[vars[k]];

    auto feasible = [&](const std::vector<double>& x) {
        for (std::size_t i = 0; i < G.size(); ++i) {
            double lhs = 0.0;
            for (std::size_t k = 0; k < m; ++k) lhs += G[i][k] * x[k];
            if (lhs < h[i] - 1e-9 * (1.0 + std::abs(h[i]))) return false;
        }
        return true;
    };
    auto value = [&](const std::vector<double>& x) {
        double v = 0.0;
        for (std::size_t k = 0; k < m; ++k) v += c[k] * x[k];
        return v;
    };
    auto expand = [&](const std::vector<double>& x) {
        std::vector<double> full(m_all, 0.0);
        for (std::size_t k = 0; k < m; ++k) full[vars[k]] = x[k];
        return full;
    };

    if (m == 0) {
        const std::vector<double> empty;
        if (!feasible(empty)) return {LpStatus::Infeasible, {}, {}};
        return {LpStatus::Optimal, std::vector<double>(m_all, 0.0), 0.0};
    }

    std::optional<std::vector<double>> best;
    double best_value = std::numeric_limits<double>::infinity();
    oracle_detail::for_each_subset(G.size(), m, [&](const std::vector<std::size_t>& active) {
        std::vector<std::vector<double>> M;
        std::vector<double> r;
        for (std::size_t i : active) {
            M.push_back(G[i]);
            r.push_back(h[i]);
        }
        auto x = oracle_detail::solve_square(std::move(M), std::move(r));
        if (!x || !feasible(*x)) return;
        const double v = value(*x);
        if (!best || v < best_value - 1e-12) {
            best = std::move(x);
            best_value = v;
        }
    });
    if (!best) return {LpStatus::Infeasible, {}, {}};

    // Extreme rays: m-1 active homogeneous constraints plus sum(d) = 1.
    bool unbounded = false;
    oracle_detail::for_each_subset(G.size(), m - 1, [&](const std::vector<std::size_t>& active) {
        if (unbounded) return;
        std::vector<std::vector<double>> M;
        std::vector<double> r;
        for (std::size_t i : active) {
            M.push_back(G[i]);
            r.push_back(0.0);
        }
        M.emplace_back(m, 1.0);
        r.push_back(1.0);
        auto d = oracle_detail::solve_square(std::move(M), std::move(r));
        if (!d) return;
        for (std::size_t i = 0; i < G.size(); ++i) {
            double lhs = 0.0;
            for (std::size_t k = 0; k < m; ++k) lhs += G[i][k] * (*d)[k];
            if (lhs < -1e-9) return;
        }
        if (value(*d) < -1e-9) unbounded = true;
    });
    if (unbounded) return {LpStatus::Unbounded, {}, {}};

    return {LpStatus::Optimal, expand(*best), best_value};
}

}  // namespace crop
