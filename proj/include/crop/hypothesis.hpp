#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "crop/errors.hpp"

namespace crop {

using ArmIndex = std::size_t;
using HypothesisId = std::size_t;
using IdSet = std::vector<HypothesisId>;  // sorted ascending

/// Absolute tolerance for mean-reward equality in class-membership tests.
inline constexpr double kTolEq = 1e-9;

inline bool same_mean(double x, double y) { return std::abs(x - y) <= kTolEq; }

/// A candidate mean-reward function: one mean per arm.
class Hypothesis {
public:
    Hypothesis() = default;
    explicit Hypothesis(std::vector<double> means) : means_(std::move(means)) {
        for (double m : means_) {
            if (!std::isfinite(m)) throw ValidationError("hypothesis has a non-finite mean");
        }
    }

    [[nodiscard]] std::size_t arms() const { return means_.size(); }
    [[nodiscard]] double operator[](ArmIndex a) const { return means_[a]; }
    [[nodiscard]] std::span<const double> means() const { return means_; }

    friend bool operator==(const Hypothesis&, const Hypothesis&) = default;

private:
    std::vector<double> means_;
};

struct BestArm {
    ArmIndex arm;
    double mean;
};

/// Unique argmax arm and its mean. Entries within kTolEq of the maximum count
/// as ties and are rejected.
inline BestArm best_arm(const Hypothesis& f) {
    if (f.arms() == 0) throw ValidationError("hypothesis has no arms");
    ArmIndex best = 0;
    for (ArmIndex a = 1; a < f.arms(); ++a) {
        if (f[a] > f[best]) best = a;
    }
    for (ArmIndex a = 0; a < f.arms(); ++a) {
        if (a != best && same_mean(f[a], f[best])) {
            throw NonUniqueBestArm("best arm is not unique (arms " + std::to_string(best) + " and " +
                                   std::to_string(a) + ")");
        }
    }
    return {best, f[best]};
}

inline double gap(const Hypothesis& f, ArmIndex a) { return best_arm(f).mean - f[a]; }

/// f ~ g: same best arm and same best mean.
inline bool equivalent(const Hypothesis& f, const Hypothesis& g) {
    const BestArm bf = best_arm(f);
    const BestArm bg = best_arm(g);
    return bf.arm == bg.arm && same_mean(bf.mean, bg.mean);
}

inline bool nearly_equal(const Hypothesis& f, const Hypothesis& g) {
    if (f.arms() != g.arms()) return false;
    for (ArmIndex a = 0; a < f.arms(); ++a) {
        if (!same_mean(f[a], g[a])) return false;
    }
    return true;
}

/// Validated finite hypothesis class with a shared Gaussian noise scale.
/// Immutable after construction.
class HypothesisClass {
public:
    HypothesisClass(std::vector<Hypothesis> hypotheses, double sigma)
        : hypotheses_(std::move(hypotheses)), sigma_(sigma) {
        if (!(sigma_ > 0.0) || !std::isfinite(sigma_)) {
            throw ValidationError("sigma must be positive and finite");
        }
        if (hypotheses_.size() < 2) throw ValidationError("a class needs at least 2 hypotheses");
        const std::size_t k = hypotheses_.front().arms();
        if (k < 2) throw ValidationError("hypotheses must have at least 2 arms");
        best_.reserve(hypotheses_.size());
        for (std::size_t i = 0; i < hypotheses_.size(); ++i) {
            if (hypotheses_[i].arms() != k) {
                throw ValidationError("hypothesis " + std::to_string(i) + " has " +
                                      std::to_string(hypotheses_[i].arms()) + " arms, expected " +
                                      std::to_string(k));
            }
            try {
                best_.push_back(best_arm(hypotheses_[i]));
            } catch (const NonUniqueBestArm& e) {
                throw ValidationError("hypothesis " + std::to_string(i) + ": " + e.what());
            }
            for (std::size_t j = 0; j < i; ++j) {
                if (nearly_equal(hypotheses_[i], hypotheses_[j])) {
                    throw ValidationError("hypotheses " + std::to_string(j) + " and " +
                                          std::to_string(i) + " are duplicates");
                }
            }
        }
    }

    [[nodiscard]] std::size_t size() const { return hypotheses_.size(); }
    [[nodiscard]] std::size_t arms() const { return hypotheses_.front().arms(); }
    [[nodiscard]] double sigma() const { return sigma_; }
    [[nodiscard]] const Hypothesis& operator[](HypothesisId id) const { return hypotheses_[id]; }
    [[nodiscard]] const std::vector<Hypothesis>& hypotheses() const { return hypotheses_; }
    [[nodiscard]] BestArm best(HypothesisId id) const { return best_[id]; }
    [[nodiscard]] double gap(HypothesisId id, ArmIndex a) const {
        return best_[id].mean - hypotheses_[id][a];
    }
    [[nodiscard]] bool equivalent(HypothesisId f, HypothesisId g) const {
        return best_[f].arm == best_[g].arm && same_mean(best_[f].mean, best_[g].mean);
    }

private:
    std::vector<Hypothesis> hypotheses_;
    double sigma_;
    std::vector<BestArm> best_;
};

/// E(f), D(f), C(f) relative to a hypothesis f of the class.
struct ClassPartition {
    IdSet equivalent;
    IdSet docile;
    IdSet competing;
};

// D(f): disagrees with f at a*(f). C(f): agrees there but supports another arm.
// E(f): agrees there and supports the same arm (hence the same best mean).
inline ClassPartition partition(const HypothesisClass& F, HypothesisId f) {
    ClassPartition p;
    const BestArm bf = F.best(f);
    for (HypothesisId g = 0; g < F.size(); ++g) {
        if (!same_mean(F[g][bf.arm], bf.mean)) {
            p.docile.push_back(g);
        } else if (F.best(g).arm != bf.arm) {
            p.competing.push_back(g);
        } else {
            p.equivalent.push_back(g);
        }
    }
    return p;
}

/// O(f): hypotheses whose best mean is not lower than mu*(f).
inline IdSet above_set(const HypothesisClass& F, HypothesisId f) {
    IdSet out;
    const double mu = F.best(f).mean;
    for (HypothesisId g = 0; g < F.size(); ++g) {
        if (F.best(g).mean >= mu - kTolEq) out.push_back(g);
    }
    return out;
}

/// P(f): hypotheses whose best mean is not higher than mu*(f).
inline IdSet below_set(const HypothesisClass& F, HypothesisId f) {
    IdSet out;
    const double mu = F.best(f).mean;
    for (HypothesisId g = 0; g < F.size(); ++g) {
        if (F.best(g).mean <= mu + kTolEq) out.push_back(g);
    }
    return out;
}

/// Lambda_min(f) = min over g in D(f) of |g(a*(f)) - mu*(f)| / sigma, the
/// smallest information gap seen by exploiting f. Infinite when D(f) is empty.
inline double min_information_gap(const HypothesisClass& F, HypothesisId f) {
    const BestArm bf = F.best(f);
    double out = std::numeric_limits<double>::infinity();
    for (HypothesisId g : partition(F, f).docile) out = std::min(out, std::abs(F[g][bf.arm] - bf.mean));
    return out / F.sigma();
}

}  // namespace crop
