#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <map>
#include <string>
#include <thread>
#include <vector>

#include "crop/allocation.hpp"
#include "crop/errors.hpp"
#include "crop/hypothesis.hpp"
#include "crop/policies.hpp"
#include "crop/rng.hpp"

namespace crop {

enum class Noise { Gaussian, Bernoulli };

/// The ground truth plus one replication's noise stream.
class Environment {
public:
    Environment(const HypothesisClass& F, HypothesisId truth, std::uint64_t seed,
                Noise noise = Noise::Gaussian)
        : F_(&F), truth_(truth), rng_(seed), noise_(noise) {
        if (truth >= F.size()) throw ValidationError("truth index out of range");
        if (noise_ == Noise::Bernoulli) {
            for (double m : F[truth].means()) {
                if (m < 0.0 || m > 1.0) {
                    throw InvalidBernoulliMean("Bernoulli rewards need means in [0, 1]");
                }
            }
        }
    }

    /// f*(a) + sigma * N(0, 1), or a Bernoulli(f*(a)) draw.
    double sample_reward(ArmIndex a) {
        const double mean = (*F_)[truth_][a];
        if (noise_ == Noise::Bernoulli) return rng_.uniform() < mean ? 1.0 : 0.0;
        return mean + F_->sigma() * rng_.normal();
    }

    [[nodiscard]] HypothesisId truth() const { return truth_; }
    [[nodiscard]] std::uint64_t draws() const { return rng_.draws(); }

private:
    const HypothesisClass* F_;
    HypothesisId truth_;
    RandomStream rng_;
    Noise noise_;
};

enum class SteadyState { NA, Plus, Zero, Minus };

inline const char* to_string(SteadyState s) {
    switch (s) {
        case SteadyState::NA: return "NA";
        case SteadyState::Plus: return "S_plus";
        case SteadyState::Zero: return "S_zero";
        case SteadyState::Minus: return "S_minus";
    }
    return "NA";
}

/// Analysis-only state of a CROP round: whether f* fell out of F_t, and which
/// of the steady/non-steady states the round is in.
struct HiddenState {
    bool bad = false;
    SteadyState tag = SteadyState::NA;

    friend bool operator==(const HiddenState&, const HiddenState&) = default;
};

inline std::string to_string(const HiddenState& h) {
    return h.bad ? std::string("B+") + to_string(h.tag) : std::string(to_string(h.tag));
}

/// Precomputed truth-relative sets used to classify hidden states.
class TruthView {
public:
    TruthView(const HypothesisClass& F, const AllocationBundle& bundle, HypothesisId truth)
        : F_(&F), bundle_(&bundle), truth_(truth), competing_(F.size(), false) {
        for (HypothesisId g : partition(F, truth).competing) competing_[g] = true;
    }

    [[nodiscard]] HiddenState classify(const PolicyDecision& d) const {
        HiddenState h;
        // Policies without a confidence set never report B.
        h.bad = !d.confidence_set.empty() && !std::binary_search(d.confidence_set.begin(), d.confidence_set.end(), truth_);
        if (d.branch == Branch::Exploit || d.branch == Branch::None || !d.pessimism) return h;
        const bool tilde_in_competing = std::all_of(d.optimistic_set.begin(), d.optimistic_set.end(),
                                                    [&](HypothesisId f) { return competing_[f]; });
        const bool bar_equivalent = F_->equivalent(*d.pessimism, truth_);
        if (!tilde_in_competing || !bar_equivalent) {
            h.tag = SteadyState::Minus;
        } else if (bundle_->gammas_proportional(*d.pessimism, truth_)) {
            h.tag = SteadyState::Plus;
        } else {
            h.tag = SteadyState::Zero;
        }
        return h;
    }

private:
    const HypothesisClass* F_;
    const AllocationBundle* bundle_;
    HypothesisId truth_;
    std::vector<bool> competing_;
};

inline HiddenState classify_hidden_state(const HypothesisClass& F, const AllocationBundle& bundle,
                                         HypothesisId truth, const PolicyDecision& d) {
    return TruthView(F, bundle, truth).classify(d);
}

struct RoundRecord {
    std::uint64_t t = 0;
    ArmIndex arm = 0;
    double reward = 0.0;
    Branch branch = Branch::None;
    HiddenState hidden;
    double inst_regret = 0.0;
    double cum_regret = 0.0;
};

struct RunTrace {
    std::vector<RoundRecord> rounds;
    PullCounts pulls;
    double regret = 0.0;
    std::uint64_t seed = 0;
    std::string rng = Philox4x32::kName;
};

/// Plays n rounds of `policy` against the truth. Regret is pseudo-regret:
/// it is computed from true means, never from realised rewards.
inline RunTrace run(const HypothesisClass& F, const AllocationBundle& bundle, HypothesisId truth,
                    Policy& policy, std::uint64_t n, std::uint64_t seed, Noise noise = Noise::Gaussian) {
    if (n < 1) throw BadParams("run: n must be >= 1");
    Environment env(F, truth, seed, noise);
    const TruthView view(F, bundle, truth);
    RunTrace trace;
    trace.seed = seed;
    trace.pulls.assign(F.arms(), 0);
    trace.rounds.reserve(n);
    double cum = 0.0;
    for (std::uint64_t t = 1; t <= n; ++t) {
        const PolicyDecision d = policy.decide();
        const double reward = env.sample_reward(d.arm);
        policy.observe(d.arm, reward);
        const double inst = F.gap(truth, d.arm);
        cum += inst;
        ++trace.pulls[d.arm];
        trace.rounds.push_back({t, d.arm, reward, d.branch, view.classify(d), inst, cum});
    }
    trace.regret = cum;
    return trace;
}

inline RunTrace run(const HypothesisClass& F, const AllocationBundle& bundle, HypothesisId truth,
                    const PolicyConfig& cfg, std::uint64_t n, std::uint64_t seed,
                    Noise noise = Noise::Gaussian) {
    auto policy = make_policy(cfg, F, bundle, truth);
    return run(F, bundle, truth, *policy, n, seed, noise);
}

/// Default geometric checkpoint grid.
inline std::vector<std::uint64_t> default_checkpoints() { return {100, 1000, 10000, 100000}; }

struct CheckpointStat {
    std::uint64_t n = 0;
    double mean_regret = 0.0;
    double std_regret = 0.0;
};

/// Per-replication reduction of a trace; what a batch keeps after a run.
struct RunDigest {
    std::uint64_t seed = 0;
    std::vector<double> regret_at;  // aligned with the batch checkpoints
    PullCounts pulls;
    std::array<std::uint64_t, 5> branch_counts{};
    std::array<std::uint64_t, 4> state_counts{};
    std::uint64_t bad_rounds = 0;
};

inline RunDigest digest(const RunTrace& trace, const std::vector<std::uint64_t>& checkpoints) {
    RunDigest d;
    d.seed = trace.seed;
    d.pulls = trace.pulls;
    for (std::uint64_t c : checkpoints) d.regret_at.push_back(trace.rounds[c - 1].cum_regret);
    for (const RoundRecord& r : trace.rounds) {
        ++d.branch_counts[static_cast<std::size_t>(r.branch)];
        ++d.state_counts[static_cast<std::size_t>(r.hidden.tag)];
        if (r.hidden.bad) ++d.bad_rounds;
    }
    return d;
}

struct BatchSummary {
    std::string policy;
    std::uint64_t n = 0;
    std::vector<std::uint64_t> seeds;  // ascending
    std::vector<CheckpointStat> checkpoints;
    std::vector<double> pulls_mean;
    std::map<std::string, double> branch_freq;       // fraction of all rounds
    std::map<std::string, double> hidden_state_freq;  // fraction of all rounds
    double bad_freq = 0.0;
    std::vector<RunDigest> runs;  // ascending by seed
};

/// Checkpoints clipped to n, with n itself always present as the last one.
inline std::vector<std::uint64_t> effective_checkpoints(std::vector<std::uint64_t> cps, std::uint64_t n) {
    std::erase_if(cps, [&](std::uint64_t c) { return c == 0 || c > n; });
    cps.push_back(n);
    std::sort(cps.begin(), cps.end());
    cps.erase(std::unique(cps.begin(), cps.end()), cps.end());
    return cps;
}

/// Independent replications, one per seed, optionally on `jobs` threads.
/// Aggregation runs over runs sorted by seed, so the result does not depend
/// on seed order or on scheduling.
inline BatchSummary run_batch(const HypothesisClass& F, const AllocationBundle& bundle, HypothesisId truth,
                              const PolicyConfig& cfg, std::uint64_t n, std::vector<std::uint64_t> seeds,
                              std::vector<std::uint64_t> checkpoints = default_checkpoints(),
                              unsigned jobs = 1, Noise noise = Noise::Gaussian) {
    if (seeds.empty()) throw BadParams("run_batch: at least one seed is required");
    std::sort(seeds.begin(), seeds.end());
    const auto cps = effective_checkpoints(std::move(checkpoints), n);

    std::vector<RunDigest> digests(seeds.size());
    auto work = [&](std::size_t first, std::size_t stride) {
        for (std::size_t i = first; i < seeds.size(); i += stride) {
            digests[i] = digest(run(F, bundle, truth, cfg, n, seeds[i], noise), cps);
        }
    };
    jobs = std::max(1U, std::min<unsigned>(jobs, static_cast<unsigned>(seeds.size())));
    if (jobs == 1) {
        work(0, 1);
    } else {
        std::vector<std::jthread> pool;
        for (unsigned j = 0; j < jobs; ++j) pool.emplace_back(work, j, jobs);
    }

    BatchSummary s;
    s.policy = cfg.name;
    s.n = n;
    s.seeds = seeds;
    const double reps = static_cast<double>(seeds.size());
    for (std::size_t c = 0; c < cps.size(); ++c) {
        double sum = 0.0;
        for (const RunDigest& d : digests) sum += d.regret_at[c];
        const double mean = sum / reps;
        double ss = 0.0;
        for (const RunDigest& d : digests) ss += (d.regret_at[c] - mean) * (d.regret_at[c] - mean);
        const double sd = seeds.size() > 1 ? std::sqrt(ss / (reps - 1.0)) : 0.0;
        s.checkpoints.push_back({cps[c], mean, sd});
    }
    s.pulls_mean.assign(F.arms(), 0.0);
    std::array<double, 5> branches{};
    std::array<double, 4> states{};
    double bad = 0.0;
    for (const RunDigest& d : digests) {
        for (ArmIndex a = 0; a < F.arms(); ++a) s.pulls_mean[a] += static_cast<double>(d.pulls[a]);
        for (std::size_t b = 0; b < branches.size(); ++b) branches[b] += static_cast<double>(d.branch_counts[b]);
        for (std::size_t k = 0; k < states.size(); ++k) states[k] += static_cast<double>(d.state_counts[k]);
        bad += static_cast<double>(d.bad_rounds);
    }
    for (double& p : s.pulls_mean) p /= reps;
    const double total = reps * static_cast<double>(n);
    for (std::size_t b = 0; b < branches.size(); ++b) {
        s.branch_freq[to_string(static_cast<Branch>(b))] = branches[b] / total;
    }
    for (std::size_t k = 0; k < states.size(); ++k) {
        s.hidden_state_freq[to_string(static_cast<SteadyState>(k))] = states[k] / total;
    }
    s.bad_freq = bad / total;
    s.runs = std::move(digests);
    return s;
}

}  // namespace crop
