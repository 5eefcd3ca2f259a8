#include "gibbsinv/solver.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "gibbsinv/errors.hpp"
#include "gibbsinv/packing.hpp"
#include "gibbsinv/parallel.hpp"
#include "gibbsinv/rng.hpp"

namespace gibbsinv {

DomainConstants DomainConstants::from(double r, double z0) {
    if (!(r > 0.0 && r < 1.0)) throw Error("r must lie in (0, 1)");
    if (!(z0 > 0.0)) throw Error("z0 must be positive");
    DomainConstants k;
    k.r = r;
    k.z0 = z0;
    k.c = (r + 2.0) / 3.0;
    k.a1 = std::sqrt(2.0 * r / (r + 1.0));
    k.a2 = 2.0;
    k.h = 12.0 * k.a2 / std::pow(k.a1, 4);
    return k;
}

double metric_rho(const SolverPoint& p1, const SolverPoint& p2, const DomainConstants& k) {
    const RadialFunction diff = combine(1.0, p1.g, -1.0, p2.g);
    return k.h * std::abs(p1.z - p2.z) / k.z0 + packing_upper(diff);
}

QEvaluation evaluate_Q(const SolverPoint& p, const ClusterTargets& targets, int order,
                       const QuadratureSpec& q, bool force) {
    if (!p.g.same_grid(targets.omega2)) throw GridMismatch("iterate and targets use different grids");
    QEvaluation ev;
    ev.guard_value = smallness_guard_value(p.z, p.g);
    if (ev.guard_value > kSmallnessGuardLimit && !force) {
        std::ostringstream msg;
        msg << "iterate z = " << p.z << " fails the convergence guard (" << ev.guard_value << ")";
        throw SmallnessGuard(msg.str());
    }
    ev.a = series_a(p.z, p.g, order, q);
    ev.b = series_b(p.z, p.g, order, q);

    const double z = p.z;
    ev.next.z = targets.omega1 - z * z * ev.a.value;
    if (!(ev.next.z > 0.0)) {
        throw NonPhysical("Q produced a nonpositive activity", 0.0);
    }
    std::vector<double> g(p.g.size());
    for (std::size_t i = 0; i < g.size(); ++i) {
        g[i] = targets.omega2[i] / (z * z) - z * ev.b.value[i];
        if (!(g[i] > -1.0)) {
            std::ostringstream msg;
            msg << "Q produced g = " << g[i] << " <= -1 at r = " << p.g.bin_center(i);
            throw NonPhysical(msg.str(), p.g.bin_center(i));
        }
    }
    ev.next.g = p.g.with_values(std::move(g)).with_core(-1.0);
    return ev;
}

SolverPoint apply_Q(const SolverPoint& p, const ClusterTargets& targets, const DomainConstants&,
                    int order, const QuadratureSpec& q) {
    return evaluate_Q(p, targets, order, q).next;
}

DomainReport domain_check(const SolverPoint& p, const DomainConstants& k, double u1, double u2) {
    DomainReport rep;
    rep.z_lo = k.a1 * k.z0;
    rep.z_hi = k.a2 * k.z0;
    rep.z_in_interval = p.z >= rep.z_lo && p.z <= rep.z_hi;
    rep.norm_upper = packing_upper(p.g);
    rep.norm_within_c = rep.norm_upper <= k.c;
    rep.u1 = u1;
    rep.u2 = u2;
    const double z0 = k.z0;
    const double big = k.a2 * z0;
    rep.in1a = z0 + big * big * u1 <= big;
    rep.in2a = z0 - big * big * u1 >= k.a1 * z0;
    rep.in3a = k.r * z0 * z0 / ((k.a1 * z0) * (k.a1 * z0)) + big * u2 <= k.c;
    return rep;
}

SolveResult solve_inverse(const ClusterTargets& targets, double r, const SolveOptions& opts) {
    const AdmissibilityReport adm = check_admissible(targets, r);
    if (!adm.pass) {
        std::string what = "targets are not admissible";
        for (const auto& reason : adm.reasons) what += "; " + reason;
        throw Inadmissible(what, adm.reasons);
    }
    const double z0 = targets.omega1;
    if (z0 > kSolverZ0Limit && !opts.force) {
        std::ostringstream msg;
        msg << "z0 = " << z0 << " exceeds the solver limit " << kSolverZ0Limit << " (use force)";
        throw SmallnessGuard(msg.str());
    }

    SolveResult res;
    res.constants = DomainConstants::from(r, z0);
    const DomainConstants& k = res.constants;

    std::vector<double> g0(targets.omega2.size());
    for (std::size_t i = 0; i < g0.size(); ++i) g0[i] = targets.omega2[i] / (z0 * z0);
    SolverPoint p{z0, targets.omega2.with_values(std::move(g0)).with_core(-1.0)};

    double last = 0.0;
    for (int it = 1; it <= opts.max_iter; ++it) {
        QEvaluation ev = evaluate_Q(p, targets, opts.order, opts.quadrature, opts.force);
        const double u1 = std::abs(ev.a.value);
        const double u2 = packing_upper(ev.b.value);
        if (it == 1) {
            IterationRecord start;
            start.z = p.z;
            start.domain = domain_check(p, k, u1, u2);
            res.all_iterates_in_domain = start.domain.pass();
            res.trace.push_back(start);
        }
        IterationRecord rec;
        rec.iteration = it;
        rec.z = ev.next.z;
        rec.distance = metric_rho(ev.next, p, k);
        rec.domain = domain_check(ev.next, k, u1, u2);
        rec.a_value = ev.a.value;
        rec.a_truncation = ev.a.truncation_error_estimate;
        rec.b_truncation = ev.b.truncation_error_estimate;
        rec.guard_value = ev.guard_value;
        res.all_iterates_in_domain = res.all_iterates_in_domain && rec.domain.pass();
        res.trace.push_back(rec);
        last = rec.distance;
        p = std::move(ev.next);
        if (last <= opts.tol) {
            res.z = p.z;
            res.g = p.g;
            res.phi = g_to_phi(p.g);
            return res;
        }
    }
    std::ostringstream msg;
    msg << "no convergence after " << opts.max_iter << " iterations (last distance " << last << ")";
    throw NoConvergence(msg.str(), last, !res.all_iterates_in_domain);
}

namespace {

// Random radial g in G_c: smooth-ish random tail rescaled to norm u*c, core -1.
RadialFunction random_member(const RadialFunction& grid, double c, Rng& rng) {
    std::vector<double> v(grid.size());
    double walk = 0.0;
    for (double& x : v) {
        walk = 0.8 * walk + (2.0 * rng.uniform() - 1.0);
        x = walk;
    }
    RadialFunction g = grid.with_values(v).with_core(-1.0);
    const double n = packing_upper(g);
    if (n == 0.0) return g;
    const double target = c * (0.05 + 0.95 * rng.uniform());
    for (double& x : v) x *= target / n;
    return grid.with_values(std::move(v)).with_core(-1.0);
}

}  // namespace

ProbeReport contraction_probe(const ClusterTargets& targets, const DomainConstants& k, int order,
                              const QuadratureSpec& q, int n_pairs, std::uint64_t seed) {
    ProbeReport rep;
    rep.small_regime = k.z0 <= kSolverZ0Limit;
    rep.ratios.assign(static_cast<std::size_t>(std::max(0, n_pairs)), -1.0);

    QuadratureSpec inner = q;
    inner.threads = 1;
    parallel_for(rep.ratios.size(), q.threads, [&](std::size_t, std::size_t i) {
        Rng rng(derive_seed(seed, {0x9b0be, i}));
        SolverPoint p1{k.z0 * (k.a1 + (k.a2 - k.a1) * rng.uniform()),
                       random_member(targets.omega2, k.c, rng)};
        SolverPoint p2{k.z0 * (k.a1 + (k.a2 - k.a1) * rng.uniform()),
                       random_member(targets.omega2, k.c, rng)};
        const double before = metric_rho(p1, p2, k);
        if (before == 0.0) return;  // identical pair: 0/0
        const SolverPoint q1 = evaluate_Q(p1, targets, order, inner, true).next;
        const SolverPoint q2 = evaluate_Q(p2, targets, order, inner, true).next;
        rep.ratios[i] = metric_rho(q1, q2, k) / before;
    });

    double sum = 0.0;
    for (double ratio : rep.ratios) {
        if (ratio < 0.0) {
            ++rep.skipped;
            continue;
        }
        ++rep.pairs;
        sum += ratio;
        rep.max_ratio = std::max(rep.max_ratio, ratio);
    }
    std::erase_if(rep.ratios, [](double x) { return x < 0.0; });
    rep.mean_ratio = rep.pairs > 0 ? sum / rep.pairs : 0.0;
    if (!rep.small_regime) {
        rep.note = "z0 above the small-activity regime; ratios above 1/2 are not excluded";
    } else if (rep.max_ratio > 0.5) {
        rep.note = "max ratio exceeds 1/2";
    } else {
        rep.note = "contraction within 1/2";
    }
    return rep;
}

}  // namespace gibbsinv
