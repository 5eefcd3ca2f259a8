#include "commands.hpp"

#include <chrono>
#include <cmath>
#include <ctime>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "gibbsinv/errors.hpp"
#include "gibbsinv/expansion.hpp"
#include "gibbsinv/gcmc.hpp"
#include "gibbsinv/io.hpp"
#include "gibbsinv/packing.hpp"
#include "gibbsinv/rng.hpp"
#include "gibbsinv/solver.hpp"
#include "gibbsinv/ursell.hpp"

namespace gibbsinv::cli {
namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

namespace {

constexpr std::uint64_t kDefaultSeed = 20240607;

class UsageError : public Error {
public:
    using Error::Error;
};

std::string utc_now() {
    const std::time_t t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

json load_json(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw UsageError("cannot open " + path.string());
    try {
        return json::parse(in);
    } catch (const json::parse_error& e) {
        throw UsageError(path.string() + ": " + e.what());
    }
}

void save_json(const fs::path& path, const json& j) {
    std::ofstream out(path);
    if (!out) throw Error("cannot write " + path.string());
    out << j.dump(2) << "\n";
}

// Path from a config, relative to the config's directory.
fs::path config_path(const json& cfg, const char* key, const fs::path& base) {
    if (!cfg.contains(key)) throw UsageError(std::string("missing key '") + key + "'");
    fs::path p = cfg.at(key).get<std::string>();
    return p.is_absolute() ? p : base / p;
}

template <class T>
T get_or(const json& cfg, const char* key, T fallback) {
    return cfg.contains(key) ? cfg.at(key).get<T>() : fallback;
}

std::uint64_t base_seed(const json& cfg, const GlobalOptions& g) {
    if (g.seed) return *g.seed;
    return get_or<std::uint64_t>(cfg, "seed", kDefaultSeed);
}

QuadratureSpec quadrature_from(const json& cfg, std::uint64_t seed, int threads, json& resolved) {
    QuadratureSpec q;
    const json j = cfg.contains("quadrature") ? cfg.at("quadrature") : json::object();
    if (j.contains("scheme")) q.scheme = scheme_from_string(j.at("scheme").get<std::string>());
    q.box_radius = get_or(j, "box_radius", q.box_radius);
    q.spacing_a = get_or(j, "spacing_a", q.spacing_a);
    q.spacing_b = get_or(j, "spacing_b", q.spacing_b);
    q.tensor_max_order_a = get_or(j, "tensor_max_order_a", q.tensor_max_order_a);
    q.tensor_max_order_b = get_or(j, "tensor_max_order_b", q.tensor_max_order_b);
    q.mc_samples_a = get_or(j, "mc_samples_a", q.mc_samples_a);
    q.mc_samples_b = get_or(j, "mc_samples_b", q.mc_samples_b);
    q.underresolved_fraction = get_or(j, "underresolved_fraction", q.underresolved_fraction);
    q.seed = derive_seed(seed, {0x9a});
    q.threads = threads;
    resolved = {{"scheme", to_string(q.scheme)},
                {"box_radius", q.box_radius},
                {"spacing_a", q.spacing_a},
                {"spacing_b", q.spacing_b},
                {"tensor_max_order_a", q.tensor_max_order_a},
                {"tensor_max_order_b", q.tensor_max_order_b},
                {"mc_samples_a", q.mc_samples_a},
                {"mc_samples_b", q.mc_samples_b},
                {"underresolved_fraction", q.underresolved_fraction},
                {"seed", q.seed}};
    return q;
}

// Pure hard core on a grid read from the config (delta, r_max, d).
RadialFunction grid_hard_core(const json& cfg) {
    return HardCorePotential::pure(get_or(cfg, "d", 1), get_or(cfg, "delta", 0.05),
                                   get_or(cfg, "r_max", 8.0))
        .g();
}

// g from a potential CSV (Phi values) or the pure hard core.
RadialFunction bond_from(const json& cfg, const fs::path& base, std::vector<fs::path>& inputs) {
    if (cfg.contains("potential_csv")) {
        const fs::path p = config_path(cfg, "potential_csv", base);
        inputs.push_back(p);
        return phi_to_g(read_radial_csv(p, get_or(cfg, "d", 1)));
    }
    return grid_hard_core(cfg);
}

void write_columns(const fs::path& path, const std::vector<std::string>& header,
                   const std::vector<std::vector<double>>& columns) {
    std::ofstream out(path);
    if (!out) throw Error("cannot write " + path.string());
    for (std::size_t c = 0; c < header.size(); ++c) out << (c ? "," : "") << header[c];
    out << "\n";
    const std::size_t rows = columns.empty() ? 0 : columns.front().size();
    for (std::size_t r = 0; r < rows; ++r) {
        for (std::size_t c = 0; c < columns.size(); ++c) out << (c ? "," : "") << format_double(columns[c][r]);
        out << "\n";
    }
}

struct Manifest {
    std::string command;
    json config;
    std::vector<fs::path> inputs;
    std::vector<fs::path> outputs;
    json seeds = json::object();
    int threads = 1;
    bool force = false;
    std::string started = utc_now();

    void write(const fs::path& dir) const {
        json m;
        m["command"] = command;
        m["version"] = GIBBSINV_VERSION;
        m["config"] = config;
        m["seeds"] = seeds;
        m["threads"] = threads;
        m["force"] = force;
        json in = json::object();
        for (const auto& p : inputs) in[p.string()] = file_digest(p);
        json out = json::object();
        for (const auto& p : outputs) out[p.filename().string()] = file_digest(p);
        m["inputs"] = in;
        m["outputs"] = out;
        m["started"] = started;
        m["finished"] = utc_now();
        save_json(dir / "manifest.json", m);
    }
};

fs::path out_dir(const GlobalOptions& g, const fs::path& fallback) {
    const fs::path dir = g.out ? *g.out : fallback;
    fs::create_directories(dir);
    return dir;
}

json truncation_json(const TruncationReport& t) {
    return {{"magnitudes", t.magnitudes},
            {"ratio", t.ratio},
            {"estimate", format_double(t.estimate)},
            {"bounded", t.bounded},
            {"reliable", t.reliable},
            {"note", t.note}};
}

json domain_json(const DomainReport& d) {
    return {{"pass", d.pass()},         {"z_in_interval", d.z_in_interval},
            {"norm_within_c", d.norm_within_c}, {"in1a", d.in1a},
            {"in2a", d.in2a},           {"in3a", d.in3a},
            {"z_lo", d.z_lo},           {"z_hi", d.z_hi},
            {"norm_upper", d.norm_upper}, {"u1", d.u1},
            {"u2", d.u2}};
}

// Runs body; maps library errors to exit codes and prints the message.
template <class Body>
int guarded(std::ostream& log, Body&& body) {
    try {
        return body();
    } catch (const UsageError& e) {
        log << "usage error: " << e.what() << "\n";
        return kUsage;
    } catch (const Inadmissible& e) {
        log << "rejected: " << e.what() << "\n";
        return kInadmissible;
    } catch (const SmallnessGuard& e) {
        log << "rejected (smallness guard): " << e.what() << "\n";
        return kInadmissible;
    } catch (const NoConvergence& e) {
        log << "no convergence: " << e.what() << (e.left_domain() ? " (iterates left D)" : "") << "\n";
        return kNoConvergence;
    } catch (const NonPhysical& e) {
        log << "non-physical iterate: " << e.what() << "\n";
        return kNoConvergence;
    } catch (const json::exception& e) {
        log << "usage error: bad config: " << e.what() << "\n";
        return kUsage;
    } catch (const std::exception& e) {
        log << "error: " << e.what() << "\n";
        return kFailure;
    }
}

}  // namespace

int cmd_solve(const fs::path& config, const GlobalOptions& g, std::ostream& log) {
    return guarded(log, [&] {
        const json cfg = load_json(config);
        const fs::path base = config.parent_path();
        Manifest man;
        man.command = "solve";
        man.threads = g.threads;
        man.force = g.force;
        man.inputs.push_back(config);

        const int d = get_or(cfg, "d", 1);
        const double r = get_or(cfg, "r", 0.5);
        const std::uint64_t seed = base_seed(cfg, g);
        json qres;
        SolveOptions opts;
        opts.order = get_or(cfg, "N", 3);
        opts.tol = get_or(cfg, "tol", 1e-10);
        opts.max_iter = get_or(cfg, "max_iter", 30);
        opts.force = g.force;
        opts.quadrature = quadrature_from(cfg, seed, g.threads, qres);

        ClusterTargets targets;
        double rho1 = 0.0;
        if (cfg.contains("targets_csv")) {
            if (!cfg.contains("rho1")) throw UsageError("targets_csv needs rho1");
            const fs::path p = config_path(cfg, "targets_csv", base);
            man.inputs.push_back(p);
            rho1 = cfg.at("rho1").get<double>();
            targets = correlation_to_cluster(rho1, read_radial_csv(p, d), r);
        } else if (cfg.contains("omega2_csv")) {
            if (!cfg.contains("omega1")) throw UsageError("omega2_csv needs omega1");
            const fs::path p = config_path(cfg, "omega2_csv", base);
            man.inputs.push_back(p);
            targets = ClusterTargets{cfg.at("omega1").get<double>(), read_radial_csv(p, d), r};
            rho1 = targets.omega1;
        } else {
            throw UsageError("solve needs targets_csv + rho1 or omega2_csv + omega1");
        }

        man.config = {{"d", d},   {"r", r},           {"N", opts.order},
                      {"tol", opts.tol}, {"max_iter", opts.max_iter}, {"seed", seed},
                      {"quadrature", qres}};
        if (cfg.contains("targets_csv")) {
            man.config["targets_csv"] = cfg.at("targets_csv");
            man.config["rho1"] = rho1;
        } else {
            man.config["omega2_csv"] = cfg.at("omega2_csv");
            man.config["omega1"] = targets.omega1;
        }
        man.seeds = {{"base", seed}, {"quadrature", opts.quadrature.seed}};

        const fs::path dir = out_dir(g, ".");
        const AdmissibilityReport adm = check_admissible(targets, r);
        json adm_json = {{"pass", adm.pass},
                         {"reasons", adm.reasons},
                         {"norm_lower", adm.bracket.lower},
                         {"norm_upper", adm.bracket.upper},
                         {"bound", adm.bound}};
        if (!adm.pass) {
            save_json(dir / "admissibility.json", adm_json);
            man.outputs.push_back(dir / "admissibility.json");
            man.write(dir);
            for (const auto& reason : adm.reasons) log << "rejected: " << reason << "\n";
            return static_cast<int>(kInadmissible);
        }

        const SolveResult res = solve_inverse(targets, r, opts);
        const auto& k = res.constants;

        write_radial_csv(dir / "potential.csv", res.phi, "phi");
        const CorrelationPair corr = cluster_to_correlation(targets);
        write_radial_csv(dir / "targets.csv", corr.rho2, "rho2");

        const auto& last = res.trace.back();
        json activity = {{"z", res.z},
                         {"rho1", corr.rho1},
                         {"omega1", targets.omega1},
                         {"r", r},
                         {"d", d},
                         {"iterations", last.iteration},
                         {"final_distance", last.distance},
                         {"guard_value", last.guard_value},
                         {"all_iterates_in_domain", res.all_iterates_in_domain},
                         {"constants", {{"z0", k.z0}, {"c", k.c}, {"a1", k.a1}, {"a2", k.a2}, {"h", k.h}}},
                         {"admissibility", adm_json},
                         {"note", "unique small solution (fixed point of Q in D)"}};
        save_json(dir / "activity.json", activity);

        json trace = json::array();
        for (const auto& rec : res.trace) {
            trace.push_back({{"iteration", rec.iteration},
                             {"z", rec.z},
                             {"distance", rec.distance},
                             {"domain", domain_json(rec.domain)},
                             {"A", rec.a_value},
                             {"A_truncation", format_double(rec.a_truncation)},
                             {"B_truncation", format_double(rec.b_truncation)},
                             {"guard_value", rec.guard_value}});
        }
        save_json(dir / "trace.json", trace);

        for (const char* f : {"potential.csv", "potential.json", "targets.csv", "targets.json",
                              "activity.json", "trace.json"})
            man.outputs.push_back(dir / f);
        man.write(dir);
        log << "converged in " << last.iteration << " iterations: z = " << format_double(res.z) << "\n";
        return static_cast<int>(kOk);
    });
}

int cmd_forward(const fs::path& config, const GlobalOptions& g, std::ostream& log) {
    return guarded(log, [&] {
        const json cfg = load_json(config);
        Manifest man;
        man.command = "forward";
        man.threads = g.threads;
        man.force = g.force;
        man.inputs.push_back(config);
        if (!cfg.contains("z")) throw UsageError("forward needs z");
        const double z = cfg.at("z").get<double>();
        const int order = get_or(cfg, "N", 4);
        const std::uint64_t seed = base_seed(cfg, g);
        json qres;
        const QuadratureSpec q = quadrature_from(cfg, seed, g.threads, qres);
        const RadialFunction bond = bond_from(cfg, config.parent_path(), man.inputs);
        man.config = cfg;
        man.config["N"] = order;
        man.config["seed"] = seed;
        man.config["quadrature"] = qres;
        man.seeds = {{"base", seed}, {"quadrature", q.seed}};

        const fs::path dir = out_dir(g, ".");
        const ForwardResult f = forward_cluster(z, bond, order, q, g.force);

        std::vector<double> r{0.5}, w2{f.omega2.core_value()}, r2{f.rho2.core_value()};
        for (std::size_t i = 0; i < f.omega2.size(); ++i) {
            r.push_back(f.omega2.bin_center(i));
            w2.push_back(f.omega2[i]);
            r2.push_back(f.rho2[i]);
        }
        write_columns(dir / "forward.csv", {"r", "omega2", "rho2"}, {r, w2, r2});
        json rep = {{"z", z},
                    {"N", order},
                    {"omega1", f.omega1},
                    {"rho1", f.rho1},
                    {"A", f.a.value},
                    {"A_terms", f.a.terms},
                    {"A_truncation", truncation_json(f.a.truncation)},
                    {"B_truncation", truncation_json(f.b.truncation)},
                    {"omega1_error", format_double(f.omega1_error)},
                    {"omega2_error", format_double(f.omega2_error)},
                    {"guard_value", f.guard_value},
                    {"core_consistency", f.core_consistency}};
        save_json(dir / "forward.json", rep);
        man.outputs = {dir / "forward.csv", dir / "forward.json"};
        man.write(dir);
        log << "omega1 = " << format_double(f.omega1) << ", rho1 = " << format_double(f.rho1) << "\n";
        return static_cast<int>(kOk);
    });
}

namespace {

struct SolvedState {
    double z = 0.0;
    double rho1 = 0.0;
    RadialFunction phi;
    RadialFunction rho2;
    json manifest;
};

SolvedState load_solve_dir(const fs::path& dir) {
    if (!fs::exists(dir / "manifest.json")) throw UsageError("no manifest.json in " + dir.string());
    SolvedState s;
    s.manifest = load_json(dir / "manifest.json");
    if (s.manifest.value("command", "") != "solve") throw UsageError(dir.string() + " is not a solve output");
    const json act = load_json(dir / "activity.json");
    s.z = act.at("z").get<double>();
    s.rho1 = act.at("rho1").get<double>();
    s.phi = read_radial_csv(dir / "potential.csv");
    s.rho2 = read_radial_csv(dir / "targets.csv");
    return s;
}

SimulationConfig simulation_from(const json& cfg, json& resolved) {
    SimulationConfig sc;
    sc.dim = get_or(cfg, "d", 1);
    sc.box = get_or(cfg, "L", sc.box);
    if (cfg.contains("boundary")) sc.boundary = boundary_from_string(cfg.at("boundary").get<std::string>());
    sc.sweeps = get_or(cfg, "sweeps", sc.sweeps);
    sc.equilibration = get_or(cfg, "equilibration", sc.equilibration);
    sc.moves_per_sweep = get_or(cfg, "moves_per_sweep", sc.moves_per_sweep);
    sc.p_insert = get_or(cfg, "p_insert", sc.p_insert);
    sc.p_delete = get_or(cfg, "p_delete", sc.p_delete);
    sc.p_translate = get_or(cfg, "p_translate", sc.p_translate);
    sc.max_displacement = get_or(cfg, "max_displacement", sc.max_displacement);
    sc.n_chains = get_or(cfg, "n_chains", sc.n_chains);
    sc.blocks_per_chain = get_or(cfg, "blocks_per_chain", sc.blocks_per_chain);
    resolved = {{"d", sc.dim},
                {"L", sc.box},
                {"boundary", to_string(sc.boundary)},
                {"sweeps", sc.sweeps},
                {"equilibration", sc.equilibration},
                {"moves_per_sweep", sc.moves_per_sweep},
                {"p_insert", sc.p_insert},
                {"p_delete", sc.p_delete},
                {"p_translate", sc.p_translate},
                {"max_displacement", sc.max_displacement},
                {"n_chains", sc.n_chains},
                {"blocks_per_chain", sc.blocks_per_chain}};
    return sc;
}

void write_pairs(const fs::path& path, const PairHistogram& h) {
    std::vector<double> r, v, s;
    for (std::size_t k = 0; k < h.lo.size(); ++k) {
        r.push_back(0.5 * (h.lo[k] + h.hi[k]));
        v.push_back(h.rho2[k]);
        s.push_back(h.sigma[k]);
    }
    write_columns(path, {"r", "rho2", "sigma"}, {r, v, s});
}

json comparison_json(const ComparisonReport& c) {
    return {{"rho1_zscore", c.rho1_zscore},
            {"fraction_within_3sigma", c.fraction_within_3sigma},
            {"chi2", c.chi2},
            {"dof", c.dof},
            {"flagged_bins", c.flagged},
            {"caveat", c.caveat}};
}

json simulation_json(const SimulationResult& s) {
    return {{"rho1", s.rho1},
            {"rho1_sigma", s.rho1_sigma},
            {"mean_n", s.mean_n},
            {"samples", s.samples},
            {"blocks", s.blocks},
            {"acceptance", {{"insert", s.acceptance[0]}, {"delete", s.acceptance[1]}, {"translate", s.acceptance[2]}}},
            {"normalization", s.pairs.normalization}};
}

}  // namespace

int cmd_simulate(const fs::path& config, const GlobalOptions& g, std::ostream& log) {
    return guarded(log, [&] {
        const json cfg = load_json(config);
        const fs::path base = config.parent_path();
        Manifest man;
        man.command = "simulate";
        man.threads = g.threads;
        man.force = g.force;
        man.inputs.push_back(config);

        json resolved;
        SimulationConfig sc = simulation_from(cfg, resolved);
        std::optional<SolvedState> solved;
        if (cfg.contains("solve_dir")) {
            solved = load_solve_dir(config_path(cfg, "solve_dir", base));
            sc.z = solved->z;
            sc.g = phi_to_g(solved->phi);
            sc.dim = sc.g.dim();
            resolved["z"] = sc.z;
            resolved["solve_dir"] = cfg.at("solve_dir");
        } else {
            if (!cfg.contains("z")) throw UsageError("simulate needs z or solve_dir");
            sc.z = cfg.at("z").get<double>();
            sc.g = cfg.value("ideal_gas", false)
                       ? RadialFunction::zeros(sc.dim, get_or(cfg, "delta", 0.05), get_or(cfg, "r_max", 8.0), 0.0)
                       : bond_from(cfg, base, man.inputs);
            resolved["z"] = sc.z;
            if (cfg.contains("potential_csv")) resolved["potential_csv"] = cfg.at("potential_csv");
        }
        const std::uint64_t seed = base_seed(cfg, g);
        sc.seed = derive_seed(seed, {0x6c});
        sc.threads = g.threads;
        resolved["seed"] = seed;
        man.config = resolved;
        man.seeds = {{"base", seed}, {"gcmc", sc.seed}};
        sc.validate();

        // comparison targets: explicit, or the solve's own targets
        std::optional<std::pair<double, RadialFunction>> targets;
        if (cfg.contains("targets")) {
            const json& t = cfg.at("targets");
            const fs::path p = config_path(t, "rho2_csv", base);
            man.inputs.push_back(p);
            targets.emplace(t.at("rho1").get<double>(), read_radial_csv(p, sc.dim));
        } else if (solved) {
            targets.emplace(solved->rho1, solved->rho2);
        }

        const fs::path dir = out_dir(g, ".");
        const SimulationResult sim = simulate(sc);
        write_pairs(dir / "pairs.csv", sim.pairs);
        save_json(dir / "simulate.json", simulation_json(sim));
        man.outputs = {dir / "pairs.csv", dir / "simulate.json"};
        if (targets) {
            const ComparisonReport cmp = compare_to_targets(sim, targets->first, targets->second);
            save_json(dir / "comparison.json", comparison_json(cmp));
            man.outputs.push_back(dir / "comparison.json");
            log << "rho1 z-score " << cmp.rho1_zscore << ", " << 100.0 * cmp.fraction_within_3sigma
                << "% of bins within 3 sigma\n";
        }
        man.write(dir);
        log << "rho1 = " << format_double(sim.rho1) << " +- " << format_double(sim.rho1_sigma) << "\n";
        return static_cast<int>(kOk);
    });
}

int cmd_verify(const fs::path& target, const GlobalOptions& g, std::ostream& log) {
    return guarded(log, [&] {
        json cfg = json::object();
        fs::path solve_dir = target;
        if (!fs::is_directory(target)) {
            cfg = load_json(target);
            solve_dir = config_path(cfg, "solve_dir", target.parent_path());
        }
        const SolvedState s = load_solve_dir(solve_dir);
        Manifest man;
        man.command = "verify";
        man.threads = g.threads;
        man.force = g.force;
        man.inputs = {solve_dir / "manifest.json", solve_dir / "potential.csv", solve_dir / "targets.csv",
                      solve_dir / "activity.json"};
        if (!fs::is_directory(target)) man.inputs.push_back(target);

        const json& solve_cfg = s.manifest.at("config");
        const int order = get_or(cfg, "N", 4);
        const double rel_tol = get_or(cfg, "rho1_rel_tol", 1e-6);
        const double abs_tol = get_or(cfg, "rho2_abs_tol", 1e-6);  // in units of rho1^2
        const std::uint64_t seed = base_seed(solve_cfg, g);
        json qres;
        json qsrc = cfg.contains("quadrature") ? cfg : solve_cfg;
        QuadratureSpec q = quadrature_from(qsrc, seed, g.threads, qres);
        if (!cfg.contains("quadrature") && solve_cfg.contains("quadrature"))
            q.seed = solve_cfg.at("quadrature").at("seed").get<std::uint64_t>();
        qres["seed"] = q.seed;
        man.config = {{"solve_dir", solve_dir.string()}, {"N", order}, {"rho1_rel_tol", rel_tol},
                      {"rho2_abs_tol", abs_tol}, {"quadrature", qres}};
        man.seeds = {{"base", seed}, {"quadrature", q.seed}};

        // recorded digest of the potential vs the file on disk
        bool digest_ok = true;
        if (s.manifest.contains("outputs") && s.manifest.at("outputs").contains("potential.csv")) {
            digest_ok = s.manifest.at("outputs").at("potential.csv").get<std::string>() ==
                        file_digest(solve_dir / "potential.csv");
        }

        const fs::path dir = out_dir(g, solve_dir / "verify");
        const RadialFunction bond = phi_to_g(s.phi);
        const ForwardResult f = forward_cluster(s.z, bond, order, q, g.force);

        const double rho1_rel = std::abs(f.rho1 - s.rho1) / s.rho1;
        double worst = 0.0;
        std::size_t worst_bin = 0;
        std::vector<std::size_t> failing;
        const double limit = abs_tol * s.rho1 * s.rho1;
        for (std::size_t i = 0; i < s.rho2.size(); ++i) {
            const double err = std::abs(f.rho2[i] - s.rho2[i]);
            if (err > worst) {
                worst = err;
                worst_bin = i;
            }
            if (err > limit) failing.push_back(i);
        }
        const bool rho1_ok = rho1_rel <= rel_tol;
        const bool rho2_ok = failing.empty();

        json report = {{"z", s.z},
                       {"N", order},
                       {"rho1_target", s.rho1},
                       {"rho1_forward", f.rho1},
                       {"rho1_rel_error", rho1_rel},
                       {"rho1_pass", rho1_ok},
                       {"rho2_max_abs_error", worst},
                       {"rho2_max_abs_error_rho1sq", worst / (s.rho1 * s.rho1)},
                       {"rho2_worst_bin", worst_bin},
                       {"rho2_worst_radius", s.rho2.bin_center(worst_bin)},
                       {"rho2_failing_bins", failing},
                       {"rho2_pass", rho2_ok},
                       {"potential_digest_matches_manifest", digest_ok},
                       {"truncation_estimate_rho1", format_double(f.omega1_error)},
                       {"truncation_estimate_rho2", format_double(f.omega2_error)}};

        bool gcmc_ok = true;
        if (cfg.contains("gcmc")) {
            json resolved;
            SimulationConfig sc = simulation_from(cfg.at("gcmc"), resolved);
            sc.z = s.z;
            sc.g = bond;
            sc.dim = bond.dim();
            sc.seed = derive_seed(seed, {0x6c});
            sc.threads = g.threads;
            const SimulationResult sim = simulate(sc);
            const ComparisonReport cmp = compare_to_targets(sim, s.rho1, s.rho2);
            write_pairs(dir / "pairs.csv", sim.pairs);
            man.outputs.push_back(dir / "pairs.csv");
            gcmc_ok = std::abs(cmp.rho1_zscore) <= 3.0 && cmp.fraction_within_3sigma >= 0.95;
            report["gcmc"] = simulation_json(sim);
            report["gcmc_comparison"] = comparison_json(cmp);
            report["gcmc_pass"] = gcmc_ok;
            man.config["gcmc"] = resolved;
        }
        const bool pass = rho1_ok && rho2_ok && gcmc_ok;
        report["pass"] = pass;
        save_json(dir / "verify.json", report);
        man.outputs.push_back(dir / "verify.json");
        man.write(dir);

        if (!digest_ok) log << "warning: potential.csv differs from the digest recorded by solve\n";
        if (!rho1_ok) log << "FAIL rho1: relative error " << rho1_rel << " > " << rel_tol << "\n";
        if (!rho2_ok) {
            log << "FAIL rho2: " << failing.size() << " bin(s) off; worst bin " << worst_bin << " (r = "
                << s.rho2.bin_center(worst_bin) << ") error " << worst / (s.rho1 * s.rho1) << " rho1^2\n";
        }
        if (!gcmc_ok) log << "FAIL gcmc comparison\n";
        if (pass) log << "verify passed: rho1 rel " << rho1_rel << ", rho2 max " << worst / (s.rho1 * s.rho1) << " rho1^2\n";
        return static_cast<int>(pass ? kOk : kVerifyFailed);
    });
}

int cmd_ursell(const fs::path& config, const GlobalOptions& g, std::ostream& log) {
    return guarded(log, [&] {
        const json cfg = load_json(config);
        Manifest man;
        man.command = "ursell";
        man.threads = g.threads;
        man.inputs.push_back(config);
        const RadialFunction bond = bond_from(cfg, config.parent_path(), man.inputs);
        if (!cfg.contains("points")) throw UsageError("ursell needs points");
        Configuration pts;
        for (const auto& p : cfg.at("points")) {
            Point x{0.0, 0.0, 0.0};
            if (p.is_number()) {
                x[0] = p.get<double>();
            } else {
                for (std::size_t c = 0; c < p.size() && c < 3; ++c) x[c] = p[c].get<double>();
            }
            pts.push_back(x);
        }
        if (pts.empty() || pts.size() > static_cast<std::size_t>(kMaxRecurrencePoints))
            throw UsageError("ursell takes 1 to 8 points");
        const int direct_max = get_or(cfg, "direct_max", kDefaultDirectOrder);
        man.config = cfg;

        const fs::path dir = out_dir(g, ".");
        json table = json::array();
        RecurrenceContext ctx;
        for (std::size_t m = 1; m <= pts.size(); ++m) {
            const std::span<const Point> prefix(pts.data(), m);
            json row = {{"m", m}, {"recurrence", ctx.ursell(BondMatrix::from_points(bond, prefix))}};
            if (static_cast<int>(m) <= direct_max) row["direct"] = ursell_direct(bond, prefix, direct_max);
            row["boltzmann"] = boltzmann(bond, prefix);
            table.push_back(row);
        }
        save_json(dir / "ursell.json", {{"points", cfg.at("points")}, {"table", table}});
        man.outputs = {dir / "ursell.json"};
        man.write(dir);
        log << "phi_" << pts.size() << " = " << format_double(table.back().at("recurrence").get<double>()) << "\n";
        return static_cast<int>(kOk);
    });
}

int cmd_probe(const fs::path& config, const GlobalOptions& g, std::ostream& log) {
    return guarded(log, [&] {
        const json cfg = load_json(config);
        const fs::path base = config.parent_path();
        Manifest man;
        man.command = "probe";
        man.threads = g.threads;
        man.force = g.force;
        man.inputs.push_back(config);

        const double r = get_or(cfg, "r", 0.5);
        const double z0 = cfg.contains("rho1") ? cfg.at("rho1").get<double>() : get_or(cfg, "z0", 1e-3);
        const int order = get_or(cfg, "N", 3);
        const int pairs = get_or(cfg, "pairs", 50);
        const std::uint64_t seed = base_seed(cfg, g);
        json qres;
        const QuadratureSpec q = quadrature_from(cfg, seed, g.threads, qres);

        ClusterTargets targets;
        if (cfg.contains("targets_csv")) {
            const fs::path p = config_path(cfg, "targets_csv", base);
            man.inputs.push_back(p);
            targets = correlation_to_cluster(z0, read_radial_csv(p, get_or(cfg, "d", 1)), r);
        } else {
            // Poissonian tail: omega2 = 0 outside, -z0^2 inside
            const RadialFunction grid = grid_hard_core(cfg);
            targets = ClusterTargets{z0, grid.with_values(std::vector<double>(grid.size(), 0.0)).with_core(-z0 * z0), r};
        }
        if (z0 > kSolverZ0Limit && !g.force) {
            throw SmallnessGuard("z0 above the solver limit; pass --force to probe anyway");
        }
        man.config = {{"r", r}, {"z0", z0}, {"N", order}, {"pairs", pairs}, {"seed", seed}, {"quadrature", qres}};
        man.seeds = {{"base", seed}, {"quadrature", q.seed}, {"probe", derive_seed(seed, {0x9b})}};

        const fs::path dir = out_dir(g, ".");
        const DomainConstants k = DomainConstants::from(r, z0);
        const ProbeReport rep = contraction_probe(targets, k, order, q, pairs, derive_seed(seed, {0x9b}));
        save_json(dir / "probe.json", {{"z0", z0},
                                       {"r", r},
                                       {"pairs", rep.pairs},
                                       {"skipped", rep.skipped},
                                       {"max_ratio", rep.max_ratio},
                                       {"mean_ratio", rep.mean_ratio},
                                       {"ratios", rep.ratios},
                                       {"small_regime", rep.small_regime},
                                       {"note", rep.note}});
        man.outputs = {dir / "probe.json"};
        man.write(dir);
        log << "max contraction ratio " << rep.max_ratio << " over " << rep.pairs << " pairs (" << rep.note << ")\n";
        return static_cast<int>(kOk);
    });
}

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Inverse Gibbs problem for hard-core pair potentials"};
    app.require_subcommand(1);
    app.fallthrough();
    GlobalOptions g;
    std::string out_path;
    std::uint64_t seed = 0;
    auto* out_opt = app.add_option("--out", out_path, "Output directory");
    auto* seed_opt = app.add_option("--seed", seed, "Base seed (overrides the config)");
    app.add_option("--threads", g.threads, "Worker threads")->check(CLI::PositiveNumber);
    app.add_flag("--force", g.force, "Override smallness guards (logged in the manifest)");

    fs::path path;
    struct Sub {
        const char* name;
        const char* help;
        int (*fn)(const fs::path&, const GlobalOptions&, std::ostream&);
    };
    const Sub subs[] = {
        {"solve", "Solve for (z, Phi) from density and pair-correlation targets", cmd_solve},
        {"forward", "Cluster-expansion forward map for a given (z, Phi)", cmd_forward},
        {"simulate", "Grand-canonical Monte Carlo", cmd_simulate},
        {"verify", "Re-check a solve output (forward map, optional GCMC)", cmd_verify},
        {"ursell", "Ursell function table for a point configuration", cmd_ursell},
        {"probe", "Empirical contraction ratio of Q", cmd_probe},
    };
    std::vector<std::pair<CLI::App*, const Sub*>> handles;
    for (const auto& s : subs) {
        auto* sub = app.add_subcommand(s.name, s.help);
        sub->add_option("config", path, std::string(s.name) == "verify" ? "Solve output directory or JSON config"
                                                                         : "JSON config")
            ->required();
        handles.emplace_back(sub, &s);
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        out << app.help();
        return 0;
    } catch (const CLI::ParseError& e) {
        err << e.what() << "\n";
        return kUsage;
    }
    if (*out_opt) g.out = out_path;
    if (*seed_opt) g.seed = seed;

    for (const auto& [sub, s] : handles) {
        if (sub->parsed()) {
            if (!fs::exists(path)) {
                err << "usage error: " << path.string() << " does not exist\n";
                return kUsage;
            }
            return s->fn(path, g, err);
        }
    }
    return kUsage;
}

}  // namespace gibbsinv::cli
