#pragma once

#include <charconv>
#include <ostream>
#include <sstream>
#include <string>
#include <system_error>

#include <nlohmann/json.hpp>

#include "crop/allocation.hpp"
#include "crop/env.hpp"
#include "crop/instances.hpp"

namespace crop {

/// Locale-independent, 17 significant digits ('.' decimal separator).
inline std::string format_double(double x) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, x, std::chars_format::general, 17);
    if (res.ec != std::errc{}) return "nan";
    return std::string(buf, res.ptr);
}

inline void write_trace_csv(std::ostream& out, const RunTrace& trace, const nlohmann::json& config) {
    out << "# config: " << config.dump() << '\n';
    out << "# rng: " << trace.rng << " seed=" << trace.seed << '\n';
    out << "t,arm,reward,branch,hidden_state,inst_regret,cum_regret\n";
    for (const RoundRecord& r : trace.rounds) {
        out << r.t << ',' << r.arm << ',' << format_double(r.reward) << ',' << to_string(r.branch) << ','
            << to_string(r.hidden) << ',' << format_double(r.inst_regret) << ','
            << format_double(r.cum_regret) << '\n';
    }
}

inline nlohmann::json to_json(const Allocation& a) {
    return std::vector<double>(a.rates().begin(), a.rates().end());
}

inline nlohmann::json summary_to_json(const BatchSummary& s, const std::string& instance,
                                      HypothesisId truth, const nlohmann::json& config) {
    nlohmann::json j;
    j["policy"] = s.policy;
    j["instance"] = instance;
    j["truth"] = truth;
    j["n"] = s.n;
    j["seeds"] = s.seeds;
    nlohmann::json cps = nlohmann::json::array();
    for (const CheckpointStat& c : s.checkpoints) {
        cps.push_back({{"n", c.n}, {"mean_regret", c.mean_regret}, {"std_regret", c.std_regret}});
    }
    j["checkpoints"] = std::move(cps);
    j["pulls_mean"] = s.pulls_mean;
    j["branch_freq"] = s.branch_freq;
    j["hidden_state_freq"] = s.hidden_state_freq;
    j["bad_freq"] = s.bad_freq;
    j["rng"] = Philox4x32::kName;
    j["config"] = config;
    return j;
}

/// gamma, psi, phi, c(f) for every hypothesis plus the psi union and K_psi.
inline nlohmann::json allocations_to_json(const HypothesisClass& F, const AllocationBundle& b) {
    nlohmann::json rows = nlohmann::json::array();
    for (HypothesisId f = 0; f < F.size(); ++f) {
        rows.push_back({{"id", f},
                        {"best_arm", F.best(f).arm},
                        {"best_mean", F.best(f).mean},
                        {"gamma", to_json(b.gamma(f))},
                        {"psi", to_json(b.psi(f))},
                        {"phi", to_json(b.phi(f))},
                        {"c", b.value(f)}});
    }
    nlohmann::json j;
    j["hypotheses"] = std::move(rows);
    j["psi_union"] = to_json(b.psi_union().rates);
    j["K_psi"] = b.psi_union().k_psi;
    return j;
}

}  // namespace crop
