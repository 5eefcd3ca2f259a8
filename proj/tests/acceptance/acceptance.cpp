#include <Eigen/Dense>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <random>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "../../tools/commands.hpp"
#include "gibbsinv/errors.hpp"
#include "gibbsinv/expansion.hpp"
#include "gibbsinv/gcmc.hpp"
#include "gibbsinv/io.hpp"
#include "gibbsinv/packing.hpp"
#include "gibbsinv/rng.hpp"
#include "gibbsinv/sequence.hpp"
#include "gibbsinv/solver.hpp"
#include "gibbsinv/ursell.hpp"

using namespace gibbsinv;
namespace fs = std::filesystem;
using json = nlohmann::json;

namespace {

struct Outcome {
    bool pass = false;
    std::string detail;
};

int threads() { return static_cast<int>(std::max(1u, std::thread::hardware_concurrency())); }

// ---------------------------------------------------------------- criterion 1

// phi~_X(Y) by brute force: Boltzmann factor of X times the sum over graphs
// with no X-X edge in which every component meets X.
double phi_tilde_oracle(const RadialFunction& g, const Configuration& x, const Configuration& y) {
    Configuration all = x;
    all.insert(all.end(), y.begin(), y.end());
    const int m = static_cast<int>(x.size()), n = static_cast<int>(all.size());
    std::vector<std::pair<int, int>> edges;
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j)
            if (j >= m) edges.emplace_back(i, j);
    double sum = 0.0;
    for (std::uint32_t mask = 0; mask < (1u << edges.size()); ++mask) {
        std::vector<int> parent(n);
        for (int i = 0; i < n; ++i) parent[i] = i < m ? 0 : i;  // X collapsed into one root
        std::function<int(int)> find = [&](int i) { return parent[i] == i ? i : parent[i] = find(parent[i]); };
        double prod = 1.0;
        for (std::size_t e = 0; e < edges.size(); ++e) {
            if (!((mask >> e) & 1u)) continue;
            const auto [a, b] = edges[e];
            Point d{all[a][0] - all[b][0], all[a][1] - all[b][1], all[a][2] - all[b][2]};
            prod *= evaluate(g, d);
            parent[find(a)] = find(b);
        }
        bool ok = true;
        for (int i = m; i < n && ok; ++i) ok = find(i) == find(0);
        if (ok) sum += prod;
    }
    return boltzmann(g, x) * sum;
}

Outcome criterion_1() {
    std::mt19937_64 rng(20240607);
    auto g = HardCorePotential::pure(1, 0.05, 4.0).g();
    std::vector<double> v(g.size());
    std::uniform_real_distribution<double> u(-0.6, 0.6);
    for (double& x : v) x = u(rng);
    g = g.with_values(v);

    std::uniform_real_distribution<double> pos(0.0, 6.0);
    std::uniform_int_distribution<int> total(1, 5);
    double worst = 0.0;
    int checked = 0;
    while (checked < 200) {
        const int size = total(rng);
        const int m = std::uniform_int_distribution<int>(1, size)(rng);
        Configuration pts(size);
        for (auto& p : pts) p = {pos(rng), 0.0, 0.0};
        bool ok = true;  // hard-core respecting
        for (int i = 0; i < size && ok; ++i)
            for (int j = i + 1; j < size && ok; ++j) ok = std::abs(pts[i][0] - pts[j][0]) >= 1.0;
        if (!ok) continue;
        const Configuration x(pts.begin(), pts.begin() + m), y(pts.begin() + m, pts.end());
        const double rec = ursell_recurrence(g, x, y);
        const double oracle = m == 1 ? ursell_direct(g, pts) : phi_tilde_oracle(g, x, y);
        const double scale = std::max(std::abs(oracle), 1e-300);
        worst = std::max(worst, std::abs(rec - oracle) / scale);
        ++checked;
    }
    std::ostringstream s;
    s << checked << " configurations, max relative deviation " << worst;
    return {worst <= 1e-12, s.str()};
}

// ---------------------------------------------------------------- criterion 2

Outcome criterion_2() {
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> u(-1.0, 1.0), pos(-3.0, 3.0);
    double worst = 0.0;
    for (int trial = 0; trial < 20; ++trial) {
        std::vector<double> a(6), b(6);
        for (int m = 1; m <= 5; ++m) {
            a[m] = u(rng);
            b[m] = u(rng);
        }
        const TruncatedSequence phi(5, [a, b](std::span<const Point> x) {
            if (x.empty()) return 0.0;
            double prod = 1.0, mean = 0.0;
            for (const auto& p : x) {
                prod *= std::cos(1.3 * p[0] + 0.2);
                mean += p[0] * p[0] / 9.0;
            }
            return a[x.size()] * prod + b[x.size()] * mean / static_cast<double>(x.size());
        });
        const auto back = gamma_inverse(gamma(phi));
        for (int m = 0; m <= 5; ++m) {
            Configuration x(m);
            for (auto& p : x) p = {pos(rng), 0.0, 0.0};
            worst = std::max(worst, std::abs(back(x) - phi(x)) / std::max(1.0, std::abs(phi(x))));
        }
    }
    std::ostringstream s;
    s << "20 sequences to order 5, max deviation " << worst;
    return {worst <= 1e-12, s.str()};
}

// ---------------------------------------------------------------- criterion 3

constexpr double kRho1 = 1e-3;
constexpr double kR = 0.6;

struct Tail {
    std::string name;
    ClusterTargets targets;
};

std::vector<Tail> tails() {
    const auto grid = RadialFunction::zeros(1, 0.05, 8.0, -kRho1 * kRho1);
    auto scaled = [&](const std::function<double(double)>& shape, double fraction) {
        std::vector<double> v(grid.size());
        for (std::size_t i = 0; i < v.size(); ++i) v[i] = shape(grid.bin_center(i));
        const double n = packing_upper(grid.with_values(v));
        for (double& x : v) x *= fraction * kRho1 * kRho1 / n;
        return grid.with_values(v);
    };
    return {
        {"zero", {kRho1, grid.with_values(std::vector<double>(grid.size(), 0.0)), kR}},
        {"bump", {kRho1, scaled([](double x) { return std::exp(-4.0 * (x - 2.0) * (x - 2.0)); }, 0.3), kR}},
        {"oscillatory",
         {kRho1, scaled([](double x) { return std::sin(3.0 * x) * std::exp(-(x - 1.0) / 1.5); }, 0.5), kR}},
    };
}

struct RoundTrip {
    std::string name;
    SolveResult res;
    double rho1_rel = 0.0;
    double rho2_abs = 0.0;  // in units of rho1^2
};

std::vector<RoundTrip> round_trips() {
    std::vector<RoundTrip> out;
    for (const auto& t : tails()) {
        SolveOptions opts;
        opts.quadrature.threads = threads();
        RoundTrip rt{t.name, solve_inverse(t.targets, kR, opts)};
        const auto f = forward_cluster(rt.res.z, rt.res.g, 4, opts.quadrature);
        const auto target = cluster_to_correlation(t.targets);
        rt.rho1_rel = std::abs(f.rho1 - target.rho1) / target.rho1;
        for (std::size_t i = 0; i < target.rho2.size(); ++i)
            rt.rho2_abs = std::max(rt.rho2_abs, std::abs(f.rho2[i] - target.rho2[i]) / (kRho1 * kRho1));
        out.push_back(std::move(rt));
    }
    return out;
}

Outcome criterion_3() {
    bool pass = true;
    std::ostringstream s;
    for (const auto& rt : round_trips()) {
        const int iterations = rt.res.trace.back().iteration;
        const bool ok = iterations <= 30 && rt.rho1_rel <= 1e-6 && rt.rho2_abs <= 1e-6;
        pass = pass && ok;
        s << rt.name << ": " << iterations << " it, rho1 rel " << rt.rho1_rel << ", rho2 " << rt.rho2_abs
          << " rho1^2; ";
    }
    return {pass, s.str()};
}

// ---------------------------------------------------------------- criterion 4

Outcome criterion_4() {
    const double z0 = 1e-3;
    const auto grid = RadialFunction::zeros(1, 0.05, 8.0, -z0 * z0);
    const ClusterTargets t{z0, grid.with_values(std::vector<double>(grid.size(), 0.0)), 0.5};
    QuadratureSpec q;
    q.threads = threads();
    const auto rep = contraction_probe(t, DomainConstants::from(0.5, z0), 3, q, 50, 20240607);
    std::ostringstream s;
    s << rep.pairs << " pairs (" << rep.skipped << " skipped), max ratio " << rep.max_ratio << ", mean "
      << rep.mean_ratio;
    return {rep.pairs == 50 && rep.max_ratio <= 0.5, s.str()};
}

// ---------------------------------------------------------------- criterion 5

Outcome criterion_5() {
    bool pass = true;
    int iterates = 0;
    std::ostringstream s;
    for (const auto& rt : round_trips()) {
        for (const auto& rec : rt.res.trace) {
            ++iterates;
            if (!rec.domain.pass()) {
                pass = false;
                s << rt.name << " iterate " << rec.iteration << " outside D; ";
            }
        }
    }
    s << iterates << " iterates checked";
    return {pass, s.str()};
}

// ---------------------------------------------------------------- criterion 6

Outcome criterion_6() {
    const double z = 1e-3;
    const auto f = forward_cluster(z, HardCorePotential::pure(1, 0.05, 8.0).g(), 4, QuadratureSpec{});
    // finite-L correction is O(1/L): Richardson extrapolation from L = 50, 100
    const double exact = 2.0 * exact_rod_density(z, 100.0) - exact_rod_density(z, 50.0);
    const double rel = std::abs(f.rho1 - exact) / exact;
    std::ostringstream s;
    s << "rho1 forward " << f.rho1 << " vs extrapolated exact " << exact << ", relative " << rel;
    return {rel <= 1e-4, s.str()};
}

// ---------------------------------------------------------------- criterion 7

Outcome criterion_7() {
    const auto t = tails().front();
    SolveOptions opts;
    opts.quadrature.threads = threads();
    const auto res = solve_inverse(t.targets, kR, opts);
    const auto target = cluster_to_correlation(t.targets);

    SimulationConfig sc;
    sc.dim = 1;
    sc.box = 100.0;
    sc.boundary = Boundary::periodic;
    sc.z = res.z;
    sc.g = res.g;
    sc.sweeps = 1000000;
    sc.n_chains = 4;
    sc.seed = derive_seed(20240607, {0x6c});
    sc.threads = threads();
    const auto sim = simulate(sc);
    const auto cmp = compare_to_targets(sim, target.rho1, target.rho2);
    std::ostringstream s;
    s << "rho1 " << sim.rho1 << " +- " << sim.rho1_sigma << " (z-score " << cmp.rho1_zscore << "), "
      << 100.0 * cmp.fraction_within_3sigma << "% of " << cmp.dof << " bins within 3 sigma";
    return {std::abs(cmp.rho1_zscore) <= 3.0 && cmp.fraction_within_3sigma >= 0.95, s.str()};
}

// ---------------------------------------------------------------- criterion 8

Outcome criterion_8() {
    // Sites 0, s, 2s, ... in a free box; hard core plus an attractive/repulsive tail.
    const int K = 12;
    const double spacing = 0.4;
    auto g = HardCorePotential::pure(1, 0.1, 3.0).g();
    std::vector<double> v(g.size());
    for (std::size_t i = 0; i < v.size(); ++i) v[i] = 0.5 * std::sin(2.0 * g.bin_center(i));
    g = g.with_values(v);
    auto pair_u = [&](int a, int b) {
        const double w = 1.0 + evaluate(g, Point{(a - b) * spacing, 0.0, 0.0});
        return w <= 0.0 ? kInf : -std::log(w);
    };
    auto energy = [&](const std::vector<int>& s) { return s.size() < 2 ? 0.0 : pair_u(s[0], s[1]); };

    const MoveKernel k{0.2, static_cast<double>(K), 0.3, 0.3};
    const double p_tr = 1.0 - k.p_insert - k.p_delete;
    std::vector<std::vector<int>> states{{}};
    for (int a = 0; a < K; ++a) states.push_back({a});
    for (int a = 0; a < K; ++a)
        for (int b = a + 1; b < K; ++b)
            if (std::isfinite(pair_u(a, b))) states.push_back({a, b});
    std::map<std::vector<int>, int> index;
    for (std::size_t s = 0; s < states.size(); ++s) index[states[s]] = static_cast<int>(s);

    const int S = static_cast<int>(states.size());
    Eigen::MatrixXd P = Eigen::MatrixXd::Zero(S, S);
    auto add = [&](int from, std::vector<int> to, double rate) {
        std::sort(to.begin(), to.end());
        const auto it = index.find(to);
        if (it != index.end()) P(from, it->second) += rate;
    };
    for (int s = 0; s < S; ++s) {
        const auto& x = states[s];
        const int n = static_cast<int>(x.size());
        const double u = energy(x);
        for (int site = 0; site < K && n < 2; ++site) {
            if (std::find(x.begin(), x.end(), site) != x.end()) continue;
            auto y = x;
            y.push_back(site);
            std::sort(y.begin(), y.end());
            add(s, y, k.p_insert / K * k.accept_insert(n, energy(y) - u));
        }
        for (int i = 0; i < n; ++i) {
            auto y = x;
            y.erase(y.begin() + i);
            add(s, y, k.p_delete / n * k.accept_delete(n, energy(y) - u));
        }
        for (int i = 0; i < n; ++i) {
            for (int step : {-1, 1}) {
                auto y = x;
                y[i] += step;
                if (y[i] < 0 || y[i] >= K || (n == 2 && y[0] == y[1])) continue;
                auto sorted = y;
                std::sort(sorted.begin(), sorted.end());
                add(s, y, p_tr / n * 0.5 * k.accept_translate(energy(sorted) - u));
            }
        }
        P(s, s) += 1.0 - P.row(s).sum();
    }
    Eigen::MatrixXd A = P.transpose() - Eigen::MatrixXd::Identity(S, S);
    A.row(S - 1).setOnes();
    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(S);
    rhs(S - 1) = 1.0;
    const Eigen::VectorXd pi = A.colPivHouseholderQr().solve(rhs);
    // nu on unordered sets: z^n exp(-U) (the 1/n! cancels the n! orderings)
    Eigen::VectorXd nu(S);
    for (int s = 0; s < S; ++s) nu(s) = std::pow(k.z, states[s].size()) * std::exp(-energy(states[s]));
    nu /= nu.sum();
    const double dev = (pi - nu).cwiseAbs().maxCoeff();
    std::ostringstream s;
    s << S << " states, max |pi - nu| " << dev;
    return {dev <= 1e-10, s.str()};
}

// ---------------------------------------------------------------- criterion 9

std::string bytes(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

int run_cli(const std::vector<std::string>& args, std::string& log) {
    std::vector<const char*> argv{"gibbsinv"};
    for (const auto& a : args) argv.push_back(a.c_str());
    std::ostringstream out, err;
    const int code = cli::run(static_cast<int>(argv.size()), argv.data(), out, err);
    log = err.str();
    return code;
}

Outcome criterion_9() {
    const fs::path root = fs::temp_directory_path() / "gibbsinv_acceptance_9";
    fs::remove_all(root);
    fs::create_directories(root);
    bool pass = true;
    std::ostringstream s;
    for (const auto& t : tails()) {
        const fs::path omega2 = root / (t.name + "_omega2.csv");
        write_radial_csv(omega2, t.targets.omega2, "omega2");
        const fs::path cfg = root / (t.name + ".json");
        std::ofstream(cfg) << json{{"omega2_csv", omega2.string()}, {"omega1", kRho1}, {"r", kR}, {"N", 3}}.dump(2);
        std::string log;
        const fs::path a = root / (t.name + "_a"), b = root / (t.name + "_b");
        if (run_cli({"--out", a.string(), "--threads", std::to_string(threads()), "solve", cfg.string()}, log) != 0) {
            s << t.name << ": first solve failed (" << log << "); ";
            pass = false;
            continue;
        }
        // rerun from the recorded manifest alone
        std::ifstream in(a / "manifest.json");
        const json man = json::parse(in);
        const fs::path replay = root / (t.name + "_replay.json");
        std::ofstream(replay) << man.at("config").dump(2);
        if (run_cli({"--out", b.string(), "--threads", "1", "solve", replay.string()}, log) != 0) {
            s << t.name << ": replay failed (" << log << "); ";
            pass = false;
            continue;
        }
        bool same = true;
        for (const char* f : {"potential.csv", "targets.csv"}) same = same && bytes(a / f) == bytes(b / f);
        pass = pass && same;
        s << t.name << (same ? " identical; " : " DIFFERENT; ");
    }
    return {pass, s.str()};
}

struct Criterion {
    const char* title;
    double limit_seconds;
    Outcome (*fn)();
};

const Criterion kCriteria[] = {
    {"Ursell recurrence vs direct enumeration", 10.0, criterion_1},
    {"Gamma-inverse identity", 5.0, criterion_2},
    {"round-trip closure", 300.0, criterion_3},
    {"contraction bound", 300.0, criterion_4},
    {"domain preservation", 300.0, criterion_5},
    {"exact hard-rod oracle", 60.0, criterion_6},
    {"GCMC end-to-end", 900.0, criterion_7},
    {"detailed balance", 60.0, criterion_8},
    {"determinism", 300.0, criterion_9},
};

bool run_criterion(int k) {
    const Criterion& c = kCriteria[k - 1];
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
        o = c.fn();
    } catch (const std::exception& e) {
        o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    const bool in_time = secs <= c.limit_seconds;
    const bool pass = o.pass && in_time;
    std::printf("%s criterion %d (%s): %s [%.2f s%s]\n", pass ? "PASS" : "FAIL", k, c.title, o.detail.c_str(),
                secs, in_time ? "" : ", over time limit");
    std::fflush(stdout);
    return pass;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Acceptance checks"};
    int only = 0;
    app.add_option("--criterion", only, "Run a single criterion (1-9)")->check(CLI::Range(1, 9));
    CLI11_PARSE(app, argc, argv);
    bool ok = true;
    for (int k = 1; k <= 9; ++k)
        if (only == 0 || only == k) ok = run_criterion(k) && ok;
    return ok ? 0 : 1;
}
