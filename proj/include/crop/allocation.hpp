#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "crop/errors.hpp"
#include "crop/hypothesis.hpp"
#include "crop/lp.hpp"

namespace crop {

/// Entries below this are treated as exactly zero for support queries.
inline constexpr double kTolZero = 1e-8;
/// Relative tolerance for ratio equality in proportionality tests.
inline constexpr double kTolProp = 1e-6;

/// Nonnegative per-arm pull rates (expected pulls per unit of ln n).
class Allocation {
public:
    Allocation() = default;
    explicit Allocation(std::size_t arms) : rates_(arms, 0.0) {}
    explicit Allocation(std::vector<double> rates) : rates_(std::move(rates)) {
        for (double& r : rates_) {
            if (!(r > -kTolZero)) {
                throw ValidationError("allocation entries must be nonnegative");
            }
            if (r < kTolZero) r = 0.0;
        }
    }

    [[nodiscard]] std::size_t size() const { return rates_.size(); }
    [[nodiscard]] double operator[](ArmIndex a) const { return rates_[a]; }
    [[nodiscard]] std::span<const double> rates() const { return rates_; }
    [[nodiscard]] bool in_support(ArmIndex a) const { return rates_[a] >= kTolZero; }
    [[nodiscard]] bool is_zero() const {
        return std::none_of(rates_.begin(), rates_.end(), [](double r) { return r >= kTolZero; });
    }
    [[nodiscard]] std::size_t support_size() const {
        return static_cast<std::size_t>(
            std::count_if(rates_.begin(), rates_.end(), [](double r) { return r >= kTolZero; }));
    }
    [[nodiscard]] Allocation scaled(double lambda) const {
        std::vector<double> out(rates_);
        for (double& r : out) r *= lambda;
        return Allocation(std::move(out));
    }

private:
    std::vector<double> rates_;
};

/// IC(f, g, pi) = sum_a pi_a (f(a) - g(a))^2 / (2 sigma^2), the Gaussian
/// information collected against g by pulling according to pi under f.
inline double info_constraint(const Hypothesis& f, const Hypothesis& g, const Allocation& pi,
                              double sigma) {
    double total = 0.0;
    for (ArmIndex a = 0; a < f.arms(); ++a) {
        const double d = f[a] - g[a];
        total += pi[a] * d * d;
    }
    return total / (2.0 * sigma * sigma);
}

/// u ∝ v, with 0 ∝ 0. Same support and equal ratios up to kTolProp (relative).
inline bool proportional(const Allocation& u, const Allocation& v) {
    const bool uz = u.is_zero();
    const bool vz = v.is_zero();
    if (uz || vz) return uz && vz;
    double ref = std::numeric_limits<double>::quiet_NaN();
    for (ArmIndex a = 0; a < u.size(); ++a) {
        if (u.in_support(a) != v.in_support(a)) return false;
        if (!u.in_support(a)) continue;
        const double r = u[a] / v[a];
        if (std::isnan(ref)) {
            ref = r;
        } else if (std::abs(r - ref) > kTolProp * std::max(std::abs(r), std::abs(ref))) {
            return false;
        }
    }
    return true;
}

namespace alloc_detail {

inline std::vector<double> kl_row(const Hypothesis& f, const Hypothesis& g, double sigma) {
    std::vector<double> row(f.arms());
    for (ArmIndex a = 0; a < f.arms(); ++a) {
        const double d = f[a] - g[a];
        row[a] = d * d / (2.0 * sigma * sigma);
    }
    return row;
}

inline std::vector<double> gaps(const HypothesisClass& F, HypothesisId f) {
    std::vector<double> out(F.arms());
    for (ArmIndex a = 0; a < F.arms(); ++a) out[a] = F.gap(f, a);
    return out;
}

inline Allocation solve_or_throw(const LinearProgram& lp, const char* what, HypothesisId f) {
    const LpSolution sol = solve(lp);
    if (sol.status != LpStatus::Optimal) {
        throw Error(std::string("internal error: ") + what + " LP for hypothesis " +
                    std::to_string(f) + " is " + to_string(sol.status));
    }
    return Allocation(sol.x);
}

}  // namespace alloc_detail

struct GammaResult {
    Allocation allocation;
    double value = 0.0;  // c(f)
};

/// gamma(f) and c(f): cheapest allocation (cost = gaps, a*(f) excluded) that
/// collects unit information against every competing hypothesis.
inline GammaResult gamma(const HypothesisClass& F, HypothesisId f) {
    const ClassPartition part = partition(F, f);
    if (part.competing.empty()) return {Allocation(F.arms()), 0.0};
    LinearProgram lp;
    lp.objective = alloc_detail::gaps(F, f);
    for (HypothesisId g : part.competing) {
        lp.constraints.push_back(alloc_detail::kl_row(F[f], F[g], F.sigma()));
        lp.rhs.push_back(1.0);
    }
    lp.fixed_zero = {F.best(f).arm};
    Allocation a = alloc_detail::solve_or_throw(lp, "gamma", f);
    double c = 0.0;
    for (ArmIndex arm = 0; arm < F.arms(); ++arm) c += a[arm] * F.gap(f, arm);
    return {std::move(a), c};
}

/// phi(f): like gamma(f), but the constraints range over equivalent
/// hypotheses whose gamma is not proportional to gamma(f). `gammas` holds
/// gamma(g) for every g in the class.
inline Allocation phi(const HypothesisClass& F, HypothesisId f, std::span<const Allocation> gammas) {
    LinearProgram lp;
    for (HypothesisId g : partition(F, f).equivalent) {
        if (g == f || proportional(gammas[g], gammas[f])) continue;
        lp.constraints.push_back(alloc_detail::kl_row(F[f], F[g], F.sigma()));
        lp.rhs.push_back(1.0);
    }
    if (lp.constraints.empty()) return Allocation(F.arms());
    lp.objective = alloc_detail::gaps(F, f);
    lp.fixed_zero = {F.best(f).arm};
    return alloc_detail::solve_or_throw(lp, "phi", f);
}

/// Smallest nonzero gap of f (over arms other than its best arm).
inline double min_gap(const HypothesisClass& F, HypothesisId f) {
    double out = std::numeric_limits<double>::infinity();
    for (ArmIndex a = 0; a < F.arms(); ++a) {
        if (a != F.best(f).arm) out = std::min(out, F.gap(f, a));
    }
    return out;
}

/// psi(f): the fallback allocation. Constraints against every g in O(f)\E(f),
/// floored elementwise at max(phi(f), gamma(f)); the best arm may be pulled at
/// cost min_gap(f).
inline Allocation psi(const HypothesisClass& F, HypothesisId f, const Allocation& gamma_f,
                      const Allocation& phi_f) {
    LinearProgram lp;
    lp.objective = alloc_detail::gaps(F, f);
    lp.objective[F.best(f).arm] = min_gap(F, f);
    lp.lower_bounds.resize(F.arms());
    for (ArmIndex a = 0; a < F.arms(); ++a) lp.lower_bounds[a] = std::max(gamma_f[a], phi_f[a]);
    for (HypothesisId g : above_set(F, f)) {
        if (F.equivalent(f, g)) continue;
        lp.constraints.push_back(alloc_detail::kl_row(F[f], F[g], F.sigma()));
        lp.rhs.push_back(1.0);
    }
    if (lp.constraints.empty()) return Allocation(lp.lower_bounds);
    return alloc_detail::solve_or_throw(lp, "psi", f);
}

struct PsiUnion {
    Allocation rates;  // elementwise max of psi(f) over the class
    std::size_t k_psi = 0;
};

inline PsiUnion psi_union(std::span<const Allocation> psis) {
    if (psis.empty()) return {};
    std::vector<double> out(psis.front().size(), 0.0);
    for (const Allocation& p : psis) {
        for (ArmIndex a = 0; a < out.size(); ++a) out[a] = std::max(out[a], p[a]);
    }
    Allocation rates(std::move(out));
    const std::size_t k = rates.support_size();
    return {std::move(rates), k};
}

/// gamma, phi, psi and c(f) for every hypothesis of a class, solved once.
/// Depends only on the class, so one bundle is shared by all replications.
class AllocationBundle {
public:
    explicit AllocationBundle(const HypothesisClass& F) : size_(F.size()) {
        gamma_.reserve(size_);
        for (HypothesisId f = 0; f < size_; ++f) {
            GammaResult g = crop::gamma(F, f);
            gamma_.push_back(std::move(g.allocation));
            value_.push_back(g.value);
        }
        prop_.assign(size_ * size_, false);
        for (HypothesisId f = 0; f < size_; ++f) {
            for (HypothesisId g = f; g < size_; ++g) {
                const bool p = proportional(gamma_[f], gamma_[g]);
                prop_[f * size_ + g] = p;
                prop_[g * size_ + f] = p;
            }
        }
        for (HypothesisId f = 0; f < size_; ++f) phi_.push_back(crop::phi(F, f, gamma_));
        for (HypothesisId f = 0; f < size_; ++f) psi_.push_back(crop::psi(F, f, gamma_[f], phi_[f]));
        union_ = crop::psi_union(psi_);
    }

    [[nodiscard]] std::size_t size() const { return size_; }
    [[nodiscard]] const Allocation& gamma(HypothesisId f) const { return gamma_[f]; }
    [[nodiscard]] const Allocation& phi(HypothesisId f) const { return phi_[f]; }
    [[nodiscard]] const Allocation& psi(HypothesisId f) const { return psi_[f]; }
    [[nodiscard]] double value(HypothesisId f) const { return value_[f]; }
    [[nodiscard]] bool gammas_proportional(HypothesisId f, HypothesisId g) const {
        return prop_[f * size_ + g];
    }
    [[nodiscard]] const PsiUnion& psi_union() const { return union_; }

private:
    std::size_t size_;
    std::vector<Allocation> gamma_;
    std::vector<double> value_;
    std::vector<Allocation> phi_;
    std::vector<Allocation> psi_;
    std::vector<bool> prop_;
    PsiUnion union_;
};

}  // namespace crop
