#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "crop/allocation.hpp"
#include "crop/errors.hpp"
#include "crop/hypothesis.hpp"

namespace crop {

enum class Family { CheatingCode, Staircase, StaircasePlus, Conflict, Custom };

inline const char* to_string(Family f) {
    switch (f) {
        case Family::CheatingCode: return "cheating_code";
        case Family::Staircase: return "staircase";
        case Family::StaircasePlus: return "staircase_plus";
        case Family::Conflict: return "conflict";
        case Family::Custom: return "custom";
    }
    return "custom";
}

inline Family parse_family(const std::string& s) {
    if (s == "cheating_code") return Family::CheatingCode;
    if (s == "staircase") return Family::Staircase;
    if (s == "staircase_plus") return Family::StaircasePlus;
    if (s == "conflict") return Family::Conflict;
    if (s == "custom") return Family::Custom;
    throw BadParams("unknown instance family '" + s + "'");
}

struct InstanceSpec {
    Family family = Family::Custom;
    std::size_t k0 = 4;
    double eps = 1.0 / 32.0;
    double lambda = 0.5;
    double r = 2.0;
    double sigma = 1.0;
    std::optional<HypothesisId> truth;
};

/// A hypothesis class plus the metadata that travels with it on disk.
struct Instance {
    HypothesisClass hypotheses;
    std::optional<HypothesisId> truth;
    InstanceSpec spec;
    std::vector<std::string> warnings;
};

/// Number of code bits appended by the cheating-code family.
inline std::size_t code_bits(std::size_t k0) {
    std::size_t k = 0;
    while ((std::size_t{1} << k) < k0) ++k;
    return k;
}

/// Informative arms of the optimal hypothesis are the code arms iff
/// 1/(2 eps) > 2 / Lambda^2.
inline bool cheating_code_precondition(double eps, double lambda) {
    return 1.0 / (2.0 * eps) > 2.0 / (lambda * lambda);
}

// Hypotheses are ordered by (i, j) with i the base index and j = 0 first,
// so hypothesis 0 is h(1, 0) = (1, 1-eps, ..., 1-eps, 0, ..., 0).
inline HypothesisClass gen_cheating_code(std::size_t k0, double eps, double lambda, double sigma) {
    if (k0 < 2) throw BadParams("cheating_code: K0 must be >= 2");
    if (!(eps > 0.0) || !std::isfinite(eps)) throw BadParams("cheating_code: eps must be > 0");
    if (!(lambda > 0.0) || lambda > 0.5) throw BadParams("cheating_code: Lambda must be in (0, 1/2]");
    if (!(sigma > 0.0) || !std::isfinite(sigma)) throw BadParams("cheating_code: sigma must be > 0");
    const std::size_t k = code_bits(k0);
    std::vector<Hypothesis> out;
    out.reserve(k0 * k0);
    for (std::size_t i = 0; i < k0; ++i) {
        for (std::size_t j = 0; j <= k0; ++j) {
            if (j == i + 1) continue;  // j indexes arms 1-based; j = 0 means "no raised arm"
            std::vector<double> m(k0 + k, 1.0 - eps);
            m[i] = 1.0;
            std::size_t best = i;
            if (j != 0) {
                m[j - 1] = 1.0 + eps;
                best = j - 1;
            }
            // The last arm carries the least significant bit of the best arm index.
            for (std::size_t bit = 0; bit < k; ++bit) {
                m[k0 + k - 1 - bit] = ((best >> bit) & 1U) ? lambda : 0.0;
            }
            out.emplace_back(std::move(m));
        }
    }
    return HypothesisClass(std::move(out), sigma);
}

inline HypothesisClass gen_staircase(bool plus) {
    std::vector<Hypothesis> h{
        Hypothesis({1.00, 0.99, 0.98, 0.00, 0.00}),
        Hypothesis({0.98, 0.99, 0.98, 0.25, 0.00}),
        Hypothesis({0.97, 0.97, 0.98, 0.25, 0.25}),
    };
    if (plus) h.emplace_back(std::vector<double>{0.98, 0.99, 0.98, 0.25, 0.50});
    return HypothesisClass(std::move(h), 1.0);
}

/// The three-hypothesis lower-bound instance. "eps small enough" is checked
/// operationally: gamma(f2) must be supported on arm 2 only and gamma(f3) on
/// arm 3 only (zero-based).
inline HypothesisClass gen_conflict(double eps, double lambda, double r, double sigma) {
    if (!(eps > 0.0) || !std::isfinite(eps)) throw BadParams("conflict: eps must be > 0");
    if (!(lambda > 0.0) || !std::isfinite(lambda)) throw BadParams("conflict: Lambda must be > 0");
    if (!(r > 1.0) || !std::isfinite(r)) throw BadParams("conflict: r must be > 1");
    if (!(sigma > 0.0) || !std::isfinite(sigma)) throw BadParams("conflict: sigma must be > 0");
    std::vector<Hypothesis> h{
        Hypothesis({1.0, 1.0 + eps, 0.0, 0.0}),
        Hypothesis({1.0, 1.0 - eps, lambda, 0.0}),
        Hypothesis({1.0, 1.0 - eps, lambda, r * lambda}),
    };
    std::optional<HypothesisClass> F;
    try {
        F.emplace(std::move(h), sigma);
    } catch (const ValidationError& e) {
        throw BadParams(std::string("conflict: ") + e.what());
    }
    auto only_arm = [](const Allocation& a, ArmIndex arm) {
        for (ArmIndex b = 0; b < a.size(); ++b) {
            if (a.in_support(b) != (b == arm)) return false;
        }
        return true;
    };
    if (!only_arm(gamma(*F, 1).allocation, 2)) {
        throw BadParams("conflict: support check failed, gamma(f2) is not supported on arm 2 only");
    }
    if (!only_arm(gamma(*F, 2).allocation, 3)) {
        throw BadParams("conflict: support check failed, gamma(f3) is not supported on arm 3 only");
    }
    return std::move(*F);
}

inline Instance make_instance(const InstanceSpec& spec) {
    switch (spec.family) {
        case Family::CheatingCode: {
            Instance inst{gen_cheating_code(spec.k0, spec.eps, spec.lambda, spec.sigma), spec.truth,
                          spec, {}};
            if (!cheating_code_precondition(spec.eps, spec.lambda)) {
                inst.warnings.push_back(
                    "1/(2 eps) <= 2/Lambda^2: the code arms are not the informative arms");
            }
            if (!inst.truth) inst.truth = 0;
            return inst;
        }
        case Family::Staircase: return {gen_staircase(false), spec.truth, spec, {}};
        case Family::StaircasePlus: return {gen_staircase(true), spec.truth, spec, {}};
        case Family::Conflict:
            return {gen_conflict(spec.eps, spec.lambda, spec.r, spec.sigma), spec.truth, spec, {}};
        case Family::Custom: break;
    }
    throw BadParams("custom instances must be loaded from a file");
}

inline nlohmann::json to_json(const Instance& inst) {
    nlohmann::json j;
    j["sigma"] = inst.hypotheses.sigma();
    nlohmann::json rows = nlohmann::json::array();
    for (const Hypothesis& h : inst.hypotheses.hypotheses()) {
        rows.push_back(std::vector<double>(h.means().begin(), h.means().end()));
    }
    j["hypotheses"] = std::move(rows);
    if (inst.truth) j["truth"] = *inst.truth;
    if (inst.spec.family != Family::Custom) {
        j["family"] = to_string(inst.spec.family);
        switch (inst.spec.family) {
            case Family::CheatingCode:
                j["params"] = {{"K0", inst.spec.k0}, {"eps", inst.spec.eps}, {"Lambda", inst.spec.lambda}};
                break;
            case Family::Conflict:
                j["params"] = {{"eps", inst.spec.eps}, {"Lambda", inst.spec.lambda}, {"r", inst.spec.r}};
                break;
            default: break;
        }
    }
    return j;
}

inline Instance from_json(const nlohmann::json& j) {
    if (!j.is_object()) throw ParseError("instance must be a JSON object");
    if (!j.contains("sigma") || !j["sigma"].is_number()) {
        throw ParseError("instance: missing numeric field 'sigma'");
    }
    if (!j.contains("hypotheses") || !j["hypotheses"].is_array()) {
        throw ParseError("instance: missing array field 'hypotheses'");
    }
    std::vector<Hypothesis> hs;
    for (const auto& row : j["hypotheses"]) {
        if (!row.is_array()) throw ParseError("instance: each hypothesis must be an array");
        std::vector<double> means;
        for (const auto& v : row) {
            if (!v.is_number()) throw ParseError("instance: hypothesis entries must be numbers");
            means.push_back(v.get<double>());
        }
        hs.emplace_back(std::move(means));
    }
    InstanceSpec spec;
    spec.sigma = j["sigma"].get<double>();
    if (j.contains("family")) {
        try {
            spec.family = parse_family(j["family"].get<std::string>());
        } catch (const BadParams& e) {
            throw ParseError(e.what());
        }
        const auto& p = j.value("params", nlohmann::json::object());
        spec.k0 = p.value("K0", spec.k0);
        spec.eps = p.value("eps", spec.eps);
        spec.lambda = p.value("Lambda", spec.lambda);
        spec.r = p.value("r", spec.r);
    }
    Instance inst{HypothesisClass(std::move(hs), spec.sigma), std::nullopt, spec, {}};
    if (j.contains("truth") && !j["truth"].is_null()) {
        if (!j["truth"].is_number_integer() || j["truth"].get<std::int64_t>() < 0) throw ParseError("instance: 'truth' must be an index");
        const auto t = j["truth"].get<std::size_t>();
        if (t >= inst.hypotheses.size()) throw ValidationError("instance: 'truth' out of range");
        inst.truth = t;
        inst.spec.truth = t;
    }
    if (spec.family == Family::CheatingCode && !cheating_code_precondition(spec.eps, spec.lambda)) {
        inst.warnings.push_back("1/(2 eps) <= 2/Lambda^2: the code arms are not the informative arms");
    }
    return inst;
}

inline Instance load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open instance file '" + path + "'");
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::parse_error& e) {
        throw ParseError("instance file '" + path + "': " + e.what());
    }
    return from_json(j);
}

inline void save(const Instance& inst, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw Error("cannot write instance file '" + path + "'");
    out << to_json(inst).dump(2) << '\n';
}

}  // namespace crop
