#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "gibbsinv/expansion.hpp"
#include "gibbsinv/radial_function.hpp"

namespace gibbsinv {

/// Constants of the domain D = [a1 z0, a2 z0] x {||g|| <= c}, all derived from r.
struct DomainConstants {
    double r = 0.5;
    double z0 = 0.0;
    double c = 0.0;
    double a1 = 0.0;
    double a2 = 2.0;
    double h = 0.0;

    static DomainConstants from(double r, double z0);
};

struct SolverPoint {
    double z = 0.0;
    RadialFunction g;  // core value -1
};

/// h |z1 - z2| / z0 + ||g1 - g2|| (packing-norm upper bracket).
double metric_rho(const SolverPoint& p1, const SolverPoint& p2, const DomainConstants& k);

/// One evaluation of Q together with the series it was built from.
struct QEvaluation {
    SolverPoint next;
    SeriesResult a;
    RadialSeriesResult b;
    double guard_value = 0.0;
};

/// z' = omega1 - z^2 A(z, g);  g' = omega2 / z^2 - z B(z, g) outside the core, -1 inside.
QEvaluation evaluate_Q(const SolverPoint& p, const ClusterTargets& targets, int order,
                       const QuadratureSpec& q, bool force = false);

SolverPoint apply_Q(const SolverPoint& p, const ClusterTargets& targets, const DomainConstants& k,
                    int order, const QuadratureSpec& q);

struct DomainReport {
    bool z_in_interval = false;
    bool norm_within_c = false;
    bool in1a = false;  // z0 + (a2 z0)^2 u1 <= a2 z0
    bool in2a = false;  // z0 - (a2 z0)^2 u1 >= a1 z0
    bool in3a = false;  // r z0^2 / (a1 z0)^2 + a2 z0 u2 <= c
    double z_lo = 0.0;
    double z_hi = 0.0;
    double norm_upper = 0.0;
    double u1 = 0.0;
    double u2 = 0.0;

    bool pass() const { return z_in_interval && norm_within_c && in1a && in2a && in3a; }
};

/// Membership of p in D; u1 = |A| and u2 = ||B|| are measured values (0 skips them).
DomainReport domain_check(const SolverPoint& p, const DomainConstants& k, double u1 = 0.0,
                          double u2 = 0.0);

struct IterationRecord {
    int iteration = 0;
    double z = 0.0;
    double distance = 0.0;
    DomainReport domain;
    double a_value = 0.0;
    double a_truncation = 0.0;
    double b_truncation = 0.0;
    double guard_value = 0.0;
};

using IterationTrace = std::vector<IterationRecord>;

struct SolveOptions {
    int order = 3;
    QuadratureSpec quadrature;
    double tol = 1e-10;
    int max_iter = 30;
    bool force = false;
};

struct SolveResult {
    double z = 0.0;
    RadialFunction g;
    RadialFunction phi;
    IterationTrace trace;
    DomainConstants constants;
    bool all_iterates_in_domain = true;
};

/// Largest z0 accepted without force.
inline constexpr double kSolverZ0Limit = 0.05;

/**
 * Fixed-point iteration p <- Q(p) from p0 = (z0, omega2 / z0^2 outside, -1 inside).
 * Throws Inadmissible before iterating, NoConvergence after max_iter, and
 * propagates NonPhysical.
 */
SolveResult solve_inverse(const ClusterTargets& targets, double r, const SolveOptions& opts);

struct ProbeReport {
    int pairs = 0;
    int skipped = 0;
    double max_ratio = 0.0;
    double mean_ratio = 0.0;
    std::vector<double> ratios;
    bool small_regime = true;  // false when z0 is above the solver limit
    std::string note;
};

/// Empirical sup of rho(Q p1, Q p2) / rho(p1, p2) over random pairs in D.
ProbeReport contraction_probe(const ClusterTargets& targets, const DomainConstants& k, int order,
                              const QuadratureSpec& q, int n_pairs, std::uint64_t seed);

}  // namespace gibbsinv
