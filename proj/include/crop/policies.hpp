#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "crop/allocation.hpp"
#include "crop/errors.hpp"
#include "crop/hypothesis.hpp"

namespace crop {

enum class Branch { Exploit, Conflict, Feasible, Fallback, None };

inline const char* to_string(Branch b) {
    switch (b) {
        case Branch::Exploit: return "Exploit";
        case Branch::Conflict: return "Conflict";
        case Branch::Feasible: return "Feasible";
        case Branch::Fallback: return "Fallback";
        case Branch::None: return "none";
    }
    return "none";
}

using PullCounts = std::vector<std::uint64_t>;

/// What a policy chose for one round. Baselines only fill `arm` (and
/// `confidence_set` when they maintain one); CROP fills every field.
struct PolicyDecision {
    ArmIndex arm = 0;
    Branch branch = Branch::None;
    IdSet confidence_set;
    std::optional<Allocation> pi;  // present iff CROP took a non-Exploit branch
    IdSet optimistic_set;
    std::optional<HypothesisId> pessimism;
};

/// Cumulative squared loss L_{t-1}(f) of every hypothesis.
class LossTable {
public:
    explicit LossTable(std::size_t hypotheses) : loss_(hypotheses, 0.0) {}

    void update(const HypothesisClass& F, ArmIndex arm, double reward) {
        for (HypothesisId f = 0; f < loss_.size(); ++f) {
            const double d = F[f][arm] - reward;
            loss_[f] += d * d;
        }
    }

    [[nodiscard]] std::size_t size() const { return loss_.size(); }
    [[nodiscard]] double operator[](HypothesisId f) const { return loss_[f]; }
    [[nodiscard]] double& operator[](HypothesisId f) { return loss_[f]; }
    [[nodiscard]] double min() const { return *std::min_element(loss_.begin(), loss_.end()); }
    /// Empirical risk minimiser; lowest index on ties.
    [[nodiscard]] HypothesisId argmin() const {
        return static_cast<HypothesisId>(std::min_element(loss_.begin(), loss_.end()) - loss_.begin());
    }

private:
    std::vector<double> loss_;
};

/// beta_t = 4 sigma^2 ln(z t^alpha).
inline double confidence_threshold(double sigma, double alpha, double z, std::uint64_t t) {
    return 4.0 * sigma * sigma * (std::log(z) + alpha * std::log(static_cast<double>(t)));
}

/// Refined threshold 4 sigma^2 ln(z (log2 t)^alpha); infinite at t = 1.
inline double refined_threshold(double sigma, double alpha, double z, std::uint64_t t) {
    if (t <= 1) return std::numeric_limits<double>::infinity();
    return 4.0 * sigma * sigma *
           (std::log(z) + alpha * std::log(std::log2(static_cast<double>(t))));
}

/// {f : L(f) - min_g L(g) <= beta}. Never empty: the ERM always qualifies.
inline IdSet confidence_set(const LossTable& losses, double beta) {
    const double lo = losses.min();
    IdSet out;
    for (HypothesisId f = 0; f < losses.size(); ++f) {
        if (losses[f] - lo <= beta) out.push_back(f);
    }
    return out;
}

/// argmin_a T_a / pi_a with x/0 = +inf; lowest arm on ties.
inline ArmIndex track(std::span<const std::uint64_t> counts, const Allocation& pi) {
    ArmIndex best = counts.size();
    double best_ratio = std::numeric_limits<double>::infinity();
    for (ArmIndex a = 0; a < counts.size(); ++a) {
        if (!pi.in_support(a)) continue;
        const double ratio = static_cast<double>(counts[a]) / pi[a];
        if (best == counts.size() || ratio < best_ratio - 1e-12 * std::max(1.0, best_ratio)) {
            best = a;
            best_ratio = ratio;
        }
    }
    if (best == counts.size()) throw EmptyAllocation("tracking target allocation is zero");
    return best;
}

/// Common interface: decide() picks the arm for the next round, observe()
/// feeds back the realised reward of that arm.
class Policy {
public:
    virtual ~Policy() = default;
    virtual PolicyDecision decide() = 0;
    virtual void observe(ArmIndex arm, double reward) = 0;
    [[nodiscard]] virtual std::string_view name() const = 0;
};

// ---------------------------------------------------------------------------
// CROP

struct CropParams {
    double alpha = 2.0;
    double alpha_ring = 3.0;
    std::optional<double> z;       // defaults to |F|
    std::optional<double> z_ring;  // defaults to |F|

    void validate() const {
        if (!(alpha > 1.0) || !(alpha_ring > 1.0)) throw BadParams("CROP: alpha and alpha_ring must be > 1");
        if ((z && !(*z > 0.0)) || (z_ring && !(*z_ring > 0.0))) throw BadParams("CROP: z must be > 0");
    }
};

class CropPolicy final : public Policy {
public:
    CropPolicy(const HypothesisClass& F, const AllocationBundle& bundle, CropParams params = {})
        : F_(&F), bundle_(&bundle), params_(params), losses_(F.size()), counts_(F.arms(), 0) {
        params_.validate();
        z_ = params_.z.value_or(static_cast<double>(F.size()));
        z_ring_ = params_.z_ring.value_or(static_cast<double>(F.size()));
    }

    PolicyDecision decide() override {
        const HypothesisClass& F = *F_;
        const std::uint64_t t = rounds_ + 1;
        const double sigma = F.sigma();

        PolicyDecision d;
        d.confidence_set = confidence_set(losses_, confidence_threshold(sigma, params_.alpha, z_, t));
        const IdSet& Ft = d.confidence_set;

        const ArmIndex first_arm = F.best(Ft.front()).arm;
        if (std::all_of(Ft.begin(), Ft.end(), [&](HypothesisId f) { return F.best(f).arm == first_arm; })) {
            d.arm = first_arm;
            d.branch = Branch::Exploit;
            return d;
        }

        // Optimistic pair: highest supported mean (lowest arm on ties).
        BestArm opt = F.best(Ft.front());
        for (HypothesisId f : Ft) {
            const BestArm b = F.best(f);
            if (b.mean > opt.mean + kTolEq || (same_mean(b.mean, opt.mean) && b.arm < opt.arm)) opt = b;
        }
        // Pessimistic pair: lowest supported mean among the other arms.
        std::optional<BestArm> pes;
        for (HypothesisId f : Ft) {
            const BestArm b = F.best(f);
            if (b.arm == opt.arm) continue;
            if (!pes || b.mean < pes->mean - kTolEq || (same_mean(b.mean, pes->mean) && b.arm < pes->arm)) {
                pes = b;
            }
        }

        IdSet pessimistic_set;
        for (HypothesisId f : Ft) {
            const BestArm b = F.best(f);
            if (b.arm == opt.arm && same_mean(b.mean, opt.mean)) d.optimistic_set.push_back(f);
            if (b.arm == pes->arm && same_mean(b.mean, pes->mean)) pessimistic_set.push_back(f);
        }
        HypothesisId fbar = pessimistic_set.front();
        for (HypothesisId f : pessimistic_set) {
            if (losses_[f] < losses_[fbar]) fbar = f;
        }
        d.pessimism = fbar;

        const double ring_beta = refined_threshold(sigma, params_.alpha_ring, z_ring_, t);
        IdSet refined;
        for (HypothesisId f : pessimistic_set) {
            if (losses_[f] - losses_[fbar] <= ring_beta) refined.push_back(f);
        }

        if (has_conflict(refined)) {
            d.branch = Branch::Conflict;
            d.pi = bundle_->phi(fbar);
        } else if (gamma_is_feasible(fbar, d.optimistic_set)) {
            d.branch = Branch::Feasible;
            d.pi = bundle_->gamma(fbar);
        } else {
            d.branch = Branch::Fallback;
            d.pi = bundle_->psi(fbar);
        }
        d.arm = track(counts_, *d.pi);
        return d;
    }

    void observe(ArmIndex arm, double reward) override {
        losses_.update(*F_, arm, reward);
        ++counts_[arm];
        ++rounds_;
    }

    [[nodiscard]] std::string_view name() const override { return "crop"; }
    [[nodiscard]] const LossTable& losses() const { return losses_; }
    [[nodiscard]] LossTable& losses() { return losses_; }
    [[nodiscard]] const PullCounts& counts() const { return counts_; }
    [[nodiscard]] std::uint64_t rounds() const { return rounds_; }

private:
    bool has_conflict(const IdSet& refined) const {
        for (std::size_t i = 0; i < refined.size(); ++i) {
            for (std::size_t j = i + 1; j < refined.size(); ++j) {
                if (!bundle_->gammas_proportional(refined[i], refined[j])) return true;
            }
        }
        return false;
    }

    bool gamma_is_feasible(HypothesisId fbar, const IdSet& optimistic) const {
        const Allocation& g = bundle_->gamma(fbar);
        return std::all_of(optimistic.begin(), optimistic.end(), [&](HypothesisId f) {
            return info_constraint((*F_)[fbar], (*F_)[f], g, F_->sigma()) >= 1.0 - kTolLp;
        });
    }

    const HypothesisClass* F_;
    const AllocationBundle* bundle_;
    CropParams params_;
    double z_ = 0.0;
    double z_ring_ = 0.0;
    LossTable losses_;
    PullCounts counts_;
    std::uint64_t rounds_ = 0;
};

// ---------------------------------------------------------------------------
// Baselines

/// UCB1 with a round-robin warm start: index mean + c sigma sqrt(2 ln t / T_a).
inline ArmIndex ucb1_arm(std::span<const std::uint64_t> counts, std::span<const double> means,
                         std::uint64_t t, double sigma, double c = 1.0) {
    for (ArmIndex a = 0; a < counts.size(); ++a) {
        if (counts[a] == 0) return a;
    }
    const double log_t = std::log(static_cast<double>(t));
    ArmIndex best = 0;
    double best_index = -std::numeric_limits<double>::infinity();
    for (ArmIndex a = 0; a < counts.size(); ++a) {
        const double index =
            means[a] + c * sigma * std::sqrt(2.0 * log_t / static_cast<double>(counts[a]));
        if (index > best_index) {
            best_index = index;
            best = a;
        }
    }
    return best;
}

class Ucb1Policy final : public Policy {
public:
    Ucb1Policy(std::size_t arms, double sigma, double c = 1.0)
        : sigma_(sigma), c_(c), counts_(arms, 0), sums_(arms, 0.0), means_(arms, 0.0) {}

    PolicyDecision decide() override {
        PolicyDecision d;
        d.arm = ucb1_arm(counts_, means_, rounds_ + 1, sigma_, c_);
        return d;
    }

    void observe(ArmIndex arm, double reward) override {
        ++counts_[arm];
        sums_[arm] += reward;
        means_[arm] = sums_[arm] / static_cast<double>(counts_[arm]);
        ++rounds_;
    }

    [[nodiscard]] std::string_view name() const override { return "ucb1"; }

private:
    double sigma_;
    double c_;
    PullCounts counts_;
    std::vector<double> sums_;
    std::vector<double> means_;
    std::uint64_t rounds_ = 0;
};

/// argmax over (a, f in F_t) of f(a); lowest arm on ties.
inline ArmIndex optimistic_arm(const HypothesisClass& F, const IdSet& Ft) {
    ArmIndex best = F.best(Ft.front()).arm;
    double value = F.best(Ft.front()).mean;
    for (HypothesisId f : Ft) {
        const BestArm b = F.best(f);
        if (b.mean > value + kTolEq || (same_mean(b.mean, value) && b.arm < best)) {
            best = b.arm;
            value = b.mean;
        }
    }
    return best;
}

/// Structured optimism over the same confidence set CROP uses.
class OptimismPolicy final : public Policy {
public:
    OptimismPolicy(const HypothesisClass& F, CropParams params = {})
        : F_(&F), params_(params), losses_(F.size()) {
        params_.validate();
        z_ = params_.z.value_or(static_cast<double>(F.size()));
    }

    PolicyDecision decide() override {
        PolicyDecision d;
        d.confidence_set =
            confidence_set(losses_, confidence_threshold(F_->sigma(), params_.alpha, z_, rounds_ + 1));
        d.arm = optimistic_arm(*F_, d.confidence_set);
        return d;
    }

    void observe(ArmIndex arm, double reward) override {
        losses_.update(*F_, arm, reward);
        ++rounds_;
    }

    [[nodiscard]] std::string_view name() const override { return "optimism"; }

private:
    const HypothesisClass* F_;
    CropParams params_;
    double z_ = 0.0;
    LossTable losses_;
    std::uint64_t rounds_ = 0;
};

/// Clairvoyant oracle: the lowest informative arm with T_a(t-1) <= gamma*_a ln t,
/// otherwise the best arm. Arms outside the support of gamma* are never explored.
inline ArmIndex oracle_arm(ArmIndex best_arm, const Allocation& gamma_star,
                           std::span<const std::uint64_t> counts, std::uint64_t t) {
    const double log_t = std::log(static_cast<double>(t));
    for (ArmIndex a = 0; a < counts.size(); ++a) {
        if (gamma_star.in_support(a) && static_cast<double>(counts[a]) <= gamma_star[a] * log_t) return a;
    }
    return best_arm;
}

class OraclePolicy final : public Policy {
public:
    OraclePolicy(const HypothesisClass& F, const AllocationBundle& bundle, HypothesisId truth)
        : best_(F.best(truth).arm), gamma_(bundle.gamma(truth)), counts_(F.arms(), 0) {}

    PolicyDecision decide() override {
        PolicyDecision d;
        d.arm = oracle_arm(best_, gamma_, counts_, rounds_ + 1);
        return d;
    }

    void observe(ArmIndex arm, double) override {
        ++counts_[arm];
        ++rounds_;
    }

    [[nodiscard]] std::string_view name() const override { return "oracle"; }

private:
    ArmIndex best_;
    Allocation gamma_;
    PullCounts counts_;
    std::uint64_t rounds_ = 0;
};

struct ForcedSchedule {
    enum class Kind { LogLog, Log };
    Kind kind = Kind::LogLog;
    double c = 1.0;

    [[nodiscard]] double operator()(std::uint64_t t) const {
        const double x = static_cast<double>(t);
        if (kind == Kind::Log) return c * std::log(x);
        return c * std::log(std::log(std::max(x, 3.0)));
    }
};

/// ERM tracking with forced sampling: top up any arm below the schedule,
/// otherwise behave like the oracle with gamma(f_hat) in place of gamma*.
class ErmForcedPolicy final : public Policy {
public:
    ErmForcedPolicy(const HypothesisClass& F, const AllocationBundle& bundle, ForcedSchedule schedule = {})
        : F_(&F), bundle_(&bundle), schedule_(schedule), losses_(F.size()), counts_(F.arms(), 0) {}

    PolicyDecision decide() override {
        const std::uint64_t t = rounds_ + 1;
        PolicyDecision d;
        const double floor = schedule_(t);
        std::optional<ArmIndex> forced;
        for (ArmIndex a = 0; a < counts_.size(); ++a) {
            if (static_cast<double>(counts_[a]) < floor && (!forced || counts_[a] < counts_[*forced])) forced = a;
        }
        if (forced) {
            d.arm = *forced;
            return d;
        }
        const HypothesisId erm = losses_.argmin();
        const Allocation& g = bundle_->gamma(erm);
        const double log_t = std::log(static_cast<double>(t));
        bool explore = false;
        for (ArmIndex a = 0; a < counts_.size(); ++a) {
            if (g.in_support(a) && static_cast<double>(counts_[a]) < g[a] * log_t) explore = true;
        }
        d.arm = explore ? track(counts_, g) : F_->best(erm).arm;
        d.pessimism = erm;
        return d;
    }

    void observe(ArmIndex arm, double reward) override {
        losses_.update(*F_, arm, reward);
        ++counts_[arm];
        ++rounds_;
    }

    [[nodiscard]] std::string_view name() const override { return "erm-forced"; }
    [[nodiscard]] LossTable& losses() { return losses_; }

private:
    const HypothesisClass* F_;
    const AllocationBundle* bundle_;
    ForcedSchedule schedule_;
    LossTable losses_;
    PullCounts counts_;
    std::uint64_t rounds_ = 0;
};

/// Crossing time t0 of c2 (ln K / Lambda^2) ln t = eps t, the larger root.
/// Returns 0 when eps t stays above the logarithmic curve for all t >= 1.
inline double switch_time(double c2, std::size_t arms, double lambda, double eps) {
    if (!(c2 > 0.0) || !(lambda > 0.0) || !(eps > 0.0) || arms < 2) {
        throw BadParams("switch: c2, Lambda, eps must be > 0 and K >= 2");
    }
    const double slope = c2 * std::log(static_cast<double>(arms)) / (lambda * lambda);
    auto excess = [&](double t) { return eps * t - slope * std::log(t); };
    const double lo_start = std::max(1.0, slope / eps);
    if (excess(lo_start) >= 0.0) return 0.0;
    double lo = lo_start;
    double hi = 2.0 * lo_start;
    while (excess(hi) < 0.0) hi *= 2.0;
    for (int i = 0; i < 200 && hi - lo > 1e-9 * hi; ++i) {
        const double mid = 0.5 * (lo + hi);
        (excess(mid) < 0.0 ? lo : hi) = mid;
    }
    return hi;
}

/// UCB1 up to round t0, then a fresh oracle that ignores earlier samples.
class SwitchPolicy final : public Policy {
public:
    SwitchPolicy(const HypothesisClass& F, const AllocationBundle& bundle, HypothesisId truth, double t0,
                 double ucb_c = 1.0)
        : t0_(t0), ucb_(F.arms(), F.sigma(), ucb_c), oracle_(F, bundle, truth) {}

    PolicyDecision decide() override {
        return in_ucb_phase() ? ucb_.decide() : oracle_.decide();
    }

    void observe(ArmIndex arm, double reward) override {
        if (in_ucb_phase()) {
            ucb_.observe(arm, reward);
        } else {
            oracle_.observe(arm, reward);
        }
        ++rounds_;
    }

    [[nodiscard]] std::string_view name() const override { return "switch"; }
    [[nodiscard]] double t0() const { return t0_; }

private:
    [[nodiscard]] bool in_ucb_phase() const { return static_cast<double>(rounds_ + 1) <= t0_; }

    double t0_;
    Ucb1Policy ucb_;
    OraclePolicy oracle_;
    std::uint64_t rounds_ = 0;
};

// ---------------------------------------------------------------------------
// Selection by name

struct PolicyConfig {
    std::string name = "crop";
    CropParams crop;
    double ucb_c = 1.0;
    ForcedSchedule forced;
    std::optional<double> switch_t0;  // overrides the computed crossing time
    double switch_c2 = 1.0;
    std::optional<double> switch_eps;
    std::optional<double> switch_lambda;
};

inline constexpr std::string_view kPolicyNames[] = {"crop", "ucb1", "optimism", "oracle", "erm-forced", "switch"};

inline std::unique_ptr<Policy> make_policy(const PolicyConfig& cfg, const HypothesisClass& F,
                                           const AllocationBundle& bundle, HypothesisId truth) {
    if (cfg.name == "crop") return std::make_unique<CropPolicy>(F, bundle, cfg.crop);
    if (cfg.name == "ucb1") return std::make_unique<Ucb1Policy>(F.arms(), F.sigma(), cfg.ucb_c);
    if (cfg.name == "optimism") return std::make_unique<OptimismPolicy>(F, cfg.crop);
    if (cfg.name == "oracle") return std::make_unique<OraclePolicy>(F, bundle, truth);
    if (cfg.name == "erm-forced") return std::make_unique<ErmForcedPolicy>(F, bundle, cfg.forced);
    if (cfg.name == "switch") {
        double t0 = 0.0;
        if (cfg.switch_t0) {
            t0 = *cfg.switch_t0;
        } else {
            if (!cfg.switch_eps || !cfg.switch_lambda) {
                throw BadParams("switch: needs eps and Lambda (or an explicit t0)");
            }
            t0 = switch_time(cfg.switch_c2, F.arms(), *cfg.switch_lambda, *cfg.switch_eps);
        }
        return std::make_unique<SwitchPolicy>(F, bundle, truth, t0, cfg.ucb_c);
    }
    throw BadParams("unknown policy '" + cfg.name + "'");
}

}  // namespace crop
