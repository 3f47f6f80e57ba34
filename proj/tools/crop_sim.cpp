// crop-sim: generate instances, solve allocations, run and sweep policies.
//
// Exit codes: 0 success, 1 runtime or validation failure, 2 bad usage or
// bad parameters. Verbosity comes from CROP_LOG (error, warn, info, debug).

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <limits>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "crop/crop.hpp"

namespace {

using nlohmann::json;
using namespace crop;

// ---------------------------------------------------------------------------
// Logging

enum class Level { Error = 0, Warn = 1, Info = 2, Debug = 3 };

Level log_level() {
    static const Level level = [] {
        const char* env = std::getenv("CROP_LOG");
        if (env == nullptr) return Level::Warn;
        const std::string v = env;
        if (v == "error" || v == "0") return Level::Error;
        if (v == "info" || v == "2") return Level::Info;
        if (v == "debug" || v == "3") return Level::Debug;
        return Level::Warn;
    }();
    return level;
}

void log(Level level, const std::string& msg) {
    static const char* names[] = {"error", "warn", "info", "debug"};
    if (level <= log_level()) std::cerr << "[" << names[static_cast<int>(level)] << "] " << msg << '\n';
}

// ---------------------------------------------------------------------------
// Options shared by the subcommands

struct InstanceArgs {
    std::string instance_path;
    std::string family;
    std::size_t k0 = 4;
    double eps = 1.0 / 32.0;
    double lambda = 0.5;
    double r = 2.0;
    double sigma = 1.0;
    std::optional<std::size_t> truth;
};

struct PolicyArgs {
    double alpha = 2.0;
    double alpha_ring = 3.0;
    std::optional<double> z;
    std::optional<double> z_ring;
    double ucb_c = 1.0;
    double forced_c = 1.0;
    std::string forced_kind = "lnln";
    std::optional<double> switch_t0;
    double switch_c2 = 1.0;
};

struct Options {
    InstanceArgs inst;
    PolicyArgs pol;
    std::string policy = "crop";
    std::vector<std::string> policies{"crop"};
    std::uint64_t n = 10000;
    std::uint64_t seed = 1;
    std::uint64_t seeds = 1;
    std::vector<std::uint64_t> checkpoints = default_checkpoints();
    unsigned jobs = 1;
    std::string noise = "gaussian";
    std::string out;
    std::string config;
};

void add_instance_options(CLI::App* cmd, InstanceArgs& a, bool allow_file) {
    if (allow_file) cmd->add_option("--instance", a.instance_path, "Instance JSON file");
    cmd->add_option("--family", a.family, "cheating_code | staircase | staircase_plus | conflict");
    cmd->add_option("--K0", a.k0, "Cheating code: number of base arms");
    cmd->add_option("--eps", a.eps, "Cheating code / conflict: epsilon");
    cmd->add_option("--Lambda", a.lambda, "Cheating code / conflict: Lambda");
    cmd->add_option("--r", a.r, "Conflict: ratio r");
    cmd->add_option("--sigma", a.sigma, "Noise standard deviation");
    cmd->add_option("--truth", a.truth, "Index of the true hypothesis");
}

void add_policy_options(CLI::App* cmd, PolicyArgs& p) {
    cmd->add_option("--alpha", p.alpha, "CROP/optimism confidence exponent");
    cmd->add_option("--alpha-ring", p.alpha_ring, "CROP refined confidence exponent");
    cmd->add_option("--z", p.z, "Confidence level constant (default |F|)");
    cmd->add_option("--z-ring", p.z_ring, "Refined confidence constant (default |F|)");
    cmd->add_option("--ucb-c", p.ucb_c, "UCB1 exploration constant");
    cmd->add_option("--forced-c", p.forced_c, "Forced-sampling schedule constant");
    cmd->add_option("--forced-kind", p.forced_kind, "Forced-sampling schedule: lnln | ln")
        ->check(CLI::IsMember({"lnln", "ln"}));
    cmd->add_option("--switch-t0", p.switch_t0, "Switch policy: explicit switch round");
    cmd->add_option("--switch-c2", p.switch_c2, "Switch policy: crossing constant");
}

void add_run_options(CLI::App* cmd, Options& o) {
    cmd->add_option("--n", o.n, "Horizon")->check(CLI::PositiveNumber);
    cmd->add_option("--seed", o.seed, "Seed (base seed for sweeps)");
    cmd->add_option("--noise", o.noise, "gaussian | bernoulli")->check(CLI::IsMember({"gaussian", "bernoulli"}));
}

// ---------------------------------------------------------------------------
// --config: JSON object whose keys are long flag names. Flags given on the
// command line win; config entries only fill in what is missing.

std::string config_value(const json& v) {
    if (v.is_string()) return v.get<std::string>();
    if (v.is_array()) {
        std::string out;
        for (const auto& e : v) {
            if (!out.empty()) out += ',';
            out += config_value(e);
        }
        return out;
    }
    if (v.is_number_float()) return format_double(v.get<double>());
    return v.dump();
}

std::vector<std::string> merge_config(std::vector<std::string> args) {
    std::optional<std::string> path;
    for (std::size_t i = 0; i < args.size(); ++i) {
        if (args[i] == "--config" && i + 1 < args.size()) path = args[i + 1];
        if (args[i].rfind("--config=", 0) == 0) path = args[i].substr(9);
    }
    if (!path) return args;
    std::ifstream in(*path);
    if (!in) throw ParseError("cannot open config file '" + *path + "'");
    json cfg;
    try {
        in >> cfg;
    } catch (const json::parse_error& e) {
        throw ParseError("config file '" + *path + "': " + e.what());
    }
    if (!cfg.is_object()) throw ParseError("config file must hold a JSON object");
    std::set<std::string> given;
    for (const std::string& a : args) {
        if (a.rfind("--", 0) == 0) given.insert(a.substr(2, a.find('=') == std::string::npos ? std::string::npos
                                                                                            : a.find('=') - 2));
    }
    for (const auto& [key, value] : cfg.items()) {
        if (key == "config" || given.contains(key)) continue;
        args.push_back("--" + key);
        args.push_back(config_value(value));
    }
    return args;
}

// ---------------------------------------------------------------------------
// Instance resolution

struct Resolved {
    Instance instance;
    std::string label;
};

Resolved resolve_instance(const InstanceArgs& a) {
    if (!a.instance_path.empty() && !a.family.empty()) {
        throw BadParams("give either --instance or --family, not both");
    }
    if (!a.instance_path.empty()) {
        Instance inst = load(a.instance_path);
        if (a.truth) {
            if (*a.truth >= inst.hypotheses.size()) throw BadParams("--truth out of range");
            inst.truth = a.truth;
        }
        return {std::move(inst), std::filesystem::path(a.instance_path).filename().string()};
    }
    if (a.family.empty()) throw BadParams("an instance is required: --instance FILE or --family NAME");
    InstanceSpec spec;
    spec.family = parse_family(a.family);
    if (spec.family == Family::Custom) throw BadParams("family 'custom' needs --instance");
    spec.k0 = a.k0;
    spec.eps = a.eps;
    spec.lambda = a.lambda;
    spec.r = a.r;
    spec.sigma = a.sigma;
    spec.truth = a.truth;
    Instance inst = make_instance(spec);
    if (inst.truth && *inst.truth >= inst.hypotheses.size()) throw BadParams("--truth out of range");
    return {std::move(inst), a.family};
}

HypothesisId require_truth(const Instance& inst) {
    if (!inst.truth) throw BadParams("a true hypothesis is required: --truth ID");
    return *inst.truth;
}

json instance_config(const InstanceArgs& a, const Resolved& r) {
    json j;
    if (!a.instance_path.empty()) {
        j["instance"] = r.label;
    } else {
        j["family"] = a.family;
        j["sigma"] = a.sigma;
        if (a.family == "cheating_code") j["K0"] = a.k0;
        if (a.family == "cheating_code" || a.family == "conflict") {
            j["eps"] = a.eps;
            j["Lambda"] = a.lambda;
        }
        if (a.family == "conflict") j["r"] = a.r;
    }
    if (r.instance.truth) j["truth"] = *r.instance.truth;
    return j;
}

PolicyConfig policy_config(const std::string& name, const PolicyArgs& p, const Instance& inst) {
    PolicyConfig cfg;
    cfg.name = name;
    cfg.crop.alpha = p.alpha;
    cfg.crop.alpha_ring = p.alpha_ring;
    cfg.crop.z = p.z;
    cfg.crop.z_ring = p.z_ring;
    cfg.ucb_c = p.ucb_c;
    cfg.forced.c = p.forced_c;
    cfg.forced.kind = p.forced_kind == "ln" ? ForcedSchedule::Kind::Log : ForcedSchedule::Kind::LogLog;
    cfg.switch_t0 = p.switch_t0;
    cfg.switch_c2 = p.switch_c2;
    if (inst.spec.family == Family::CheatingCode || inst.spec.family == Family::Conflict) {
        cfg.switch_eps = inst.spec.eps;
        cfg.switch_lambda = inst.spec.lambda;
    }
    if (std::find(std::begin(kPolicyNames), std::end(kPolicyNames), name) == std::end(kPolicyNames)) {
        throw BadParams("unknown policy '" + name + "'");
    }
    return cfg;
}

json policy_config_json(const PolicyConfig& c) {
    json j{{"name", c.name}};
    if (c.name == "crop" || c.name == "optimism") {
        j["alpha"] = c.crop.alpha;
        if (c.name == "crop") j["alpha_ring"] = c.crop.alpha_ring;
        j["z"] = c.crop.z ? json(*c.crop.z) : json("|F|");
        if (c.name == "crop") j["z_ring"] = c.crop.z_ring ? json(*c.crop.z_ring) : json("|F|");
    }
    if (c.name == "ucb1" || c.name == "switch") j["ucb_c"] = c.ucb_c;
    if (c.name == "erm-forced") {
        j["forced_c"] = c.forced.c;
        j["forced_kind"] = c.forced.kind == ForcedSchedule::Kind::Log ? "ln" : "lnln";
    }
    if (c.name == "switch") {
        if (c.switch_t0) j["t0"] = *c.switch_t0;
        j["c2"] = c.switch_c2;
    }
    return j;
}

Noise parse_noise(const std::string& s) { return s == "bernoulli" ? Noise::Bernoulli : Noise::Gaussian; }

// Writes to --out when given, stdout otherwise.
template <typename Fn>
void emit(const std::string& path, Fn&& write) {
    if (path.empty()) {
        write(std::cout);
        std::cout.flush();
        return;
    }
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot write '" + path + "'");
    write(out);
    log(Level::Info, "wrote " + path);
}

void report_warnings(const Instance& inst) {
    for (const std::string& w : inst.warnings) log(Level::Warn, w);
}

// ---------------------------------------------------------------------------
// Commands

int cmd_gen_instance(const Options& o) {
    const Resolved r = resolve_instance(o.inst);
    report_warnings(r.instance);
    emit(o.out, [&](std::ostream& out) { out << to_json(r.instance).dump(2) << '\n'; });
    return 0;
}

int cmd_solve_alloc(const Options& o) {
    const Resolved r = resolve_instance(o.inst);
    report_warnings(r.instance);
    const AllocationBundle bundle(r.instance.hypotheses);
    json j = allocations_to_json(r.instance.hypotheses, bundle);
    j["config"] = instance_config(o.inst, r);
    emit(o.out, [&](std::ostream& out) { out << j.dump(2) << '\n'; });
    return 0;
}

int cmd_run(const Options& o) {
    const Resolved r = resolve_instance(o.inst);
    report_warnings(r.instance);
    const HypothesisClass& F = r.instance.hypotheses;
    const HypothesisId truth = require_truth(r.instance);
    const PolicyConfig cfg = policy_config(o.policy, o.pol, r.instance);
    const AllocationBundle bundle(F);
    log(Level::Info, "running " + cfg.name + " for n=" + std::to_string(o.n));
    const RunTrace trace = run(F, bundle, truth, cfg, o.n, o.seed, parse_noise(o.noise));
    json config = instance_config(o.inst, r);
    config["policy"] = policy_config_json(cfg);
    config["n"] = o.n;
    config["seed"] = o.seed;
    config["noise"] = o.noise;
    emit(o.out, [&](std::ostream& out) { write_trace_csv(out, trace, config); });
    log(Level::Info, "pseudo-regret " + format_double(trace.regret));
    return 0;
}

int cmd_sweep(const Options& o) {
    const Resolved r = resolve_instance(o.inst);
    report_warnings(r.instance);
    const HypothesisClass& F = r.instance.hypotheses;
    const HypothesisId truth = require_truth(r.instance);
    if (o.seeds < 1) throw BadParams("--seeds must be >= 1");
    std::vector<std::uint64_t> seeds(o.seeds);
    for (std::uint64_t i = 0; i < o.seeds; ++i) seeds[i] = o.seed + i;
    const AllocationBundle bundle(F);
    const unsigned jobs = o.jobs == 0 ? std::max(1U, std::thread::hardware_concurrency()) : o.jobs;

    json base = instance_config(o.inst, r);
    base["n"] = o.n;
    base["seed"] = o.seed;
    base["seeds"] = o.seeds;
    base["checkpoints"] = o.checkpoints;
    base["noise"] = o.noise;

    json summaries = json::array();
    for (const std::string& name : o.policies) {
        const PolicyConfig cfg = policy_config(name, o.pol, r.instance);
        log(Level::Info, "sweeping " + name + " over " + std::to_string(seeds.size()) + " seeds");
        const BatchSummary s =
            run_batch(F, bundle, truth, cfg, o.n, seeds, o.checkpoints, jobs, parse_noise(o.noise));
        json config = base;
        config["policy"] = policy_config_json(cfg);
        summaries.push_back(summary_to_json(s, r.label, truth, config));
    }
    const json out_json{{"config", base}, {"summaries", summaries}};
    emit(o.out, [&](std::ostream& out) { out << out_json.dump(2) << '\n'; });
    return 0;
}

std::string ids(const IdSet& s) {
    std::string out = "{";
    for (std::size_t i = 0; i < s.size(); ++i) out += (i ? "," : "") + std::to_string(s[i]);
    return out + "}";
}

int cmd_validate(const Options& o) {
    std::optional<Resolved> r;
    try {
        r.emplace(resolve_instance(o.inst));
    } catch (const ValidationError& e) {
        std::cout << "Assumption 1 (unique best arm, distinct hypotheses): FAIL\n  " << e.what() << '\n';
        return 1;
    }
    const HypothesisClass& F = r->instance.hypotheses;
    std::ostringstream rep;
    rep << "instance: " << r->label << "  |F|=" << F.size() << "  K=" << F.arms() << "  sigma=" << F.sigma()
        << '\n';
    rep << "Assumption 1 (unique best arm, distinct hypotheses): PASS\n";
    if (r->instance.spec.family == Family::CheatingCode) {
        const bool ok = cheating_code_precondition(r->instance.spec.eps, r->instance.spec.lambda);
        rep << "cheating-code precondition 1/(2 eps) > 2/Lambda^2: " << (ok ? "holds" : "VIOLATED") << '\n';
    }
    for (const std::string& w : r->instance.warnings) rep << "warning: " << w << '\n';
    const AllocationBundle bundle(F);
    rep << "id  best_arm  best_mean  E(f)  D(f)  C(f)  Lambda_min  c(f)\n";
    for (HypothesisId f = 0; f < F.size(); ++f) {
        const ClassPartition p = partition(F, f);
        rep << f << "  " << F.best(f).arm << "  " << format_double(F.best(f).mean) << "  " << ids(p.equivalent)
            << "  " << ids(p.docile) << "  " << ids(p.competing) << "  "
            << format_double(min_information_gap(F, f)) << "  " << format_double(bundle.value(f)) << '\n';
    }
    rep << "K_psi=" << bundle.psi_union().k_psi << '\n';
    emit(o.out, [&](std::ostream& out) { out << rep.str(); });
    return 0;
}

std::vector<std::string> split_csv(const std::string& s) {
    std::vector<std::string> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ',')) {
        if (!item.empty()) out.push_back(item);
    }
    return out;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"crop-sim: structured bandit simulator"};
    app.require_subcommand(1);
    Options o;

    std::vector<std::string> args(argv + 1, argv + argc);

    auto* gen = app.add_subcommand("gen-instance", "Write an instance JSON");
    add_instance_options(gen, o.inst, false);

    auto* alloc = app.add_subcommand("solve-alloc", "Solve gamma, psi, phi and c(f) for every hypothesis");
    add_instance_options(alloc, o.inst, true);

    auto* run_cmd = app.add_subcommand("run", "Single run; per-round CSV trace");
    add_instance_options(run_cmd, o.inst, true);
    add_policy_options(run_cmd, o.pol);
    add_run_options(run_cmd, o);
    run_cmd->add_option("--policy", o.policy, "crop | ucb1 | optimism | oracle | erm-forced | switch");

    std::string policies_csv;
    std::string checkpoints_csv;
    auto* sweep = app.add_subcommand("sweep", "Batch of seeds per policy; JSON summary");
    add_instance_options(sweep, o.inst, true);
    add_policy_options(sweep, o.pol);
    add_run_options(sweep, o);
    sweep->add_option("--policies", policies_csv, "Comma-separated policy names");
    sweep->add_option("--seeds", o.seeds, "Number of seeds (seed, seed+1, ...)");
    sweep->add_option("--checkpoints", checkpoints_csv, "Comma-separated regret checkpoints");
    sweep->add_option("--jobs", o.jobs, "Worker threads (0 = hardware concurrency)");

    auto* validate = app.add_subcommand("validate", "Check an instance and print its partition table");
    add_instance_options(validate, o.inst, true);

    for (CLI::App* cmd : {gen, alloc, run_cmd, sweep, validate}) {
        cmd->add_option("--out", o.out, "Output file (default stdout)");
        cmd->add_option("--config", o.config, "JSON file of flag values; explicit flags take precedence");
    }

    try {
        args = merge_config(std::move(args));
        std::reverse(args.begin(), args.end());  // CLI11 consumes a reversed vector
        app.parse(args);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? 0 : 2;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    }

    try {
        if (!policies_csv.empty()) o.policies = split_csv(policies_csv);
        if (!checkpoints_csv.empty()) {
            o.checkpoints.clear();
            for (const std::string& c : split_csv(checkpoints_csv)) o.checkpoints.push_back(std::stoull(c));
        }
        if (gen->parsed()) return cmd_gen_instance(o);
        if (alloc->parsed()) return cmd_solve_alloc(o);
        if (run_cmd->parsed()) return cmd_run(o);
        if (sweep->parsed()) return cmd_sweep(o);
        if (validate->parsed()) return cmd_validate(o);
    } catch (const BadParams& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    } catch (const ParseError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: bad number in list: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 2;
}
