#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "gibbsinv/radial_function.hpp"

namespace gibbsinv {

enum class QuadratureScheme { tensor_midpoint, monte_carlo };

std::string to_string(QuadratureScheme s);
QuadratureScheme scheme_from_string(const std::string& s);

/**
 * How the Ursell integrals are discretized.
 *
 * With `tensor_midpoint` and d = 1, orders up to the tensor limits use a lattice
 * rule: free points sit on the lattice h*Z and every bond between two
 * integrated points (or an integrated and a fixed point) is the tent-weighted
 * cell average of g, which makes tree-graph integrals exact. Higher orders and
 * d >= 2 use stratified Monte Carlo with seeds derived from `seed`.
 *
 * A spacing of 0 means delta/4 of the integrated function's grid. Orders past
 * the end of a spacing list reuse its last entry.
 */
struct QuadratureSpec {
    QuadratureScheme scheme = QuadratureScheme::tensor_midpoint;
    double box_radius = 0.0;  // lattice half-width; 0 = automatic n*(R_max + h)
    std::vector<double> spacing_a{0.0, 0.1, 0.25};
    std::vector<double> spacing_b{0.0, 0.25};
    int tensor_max_order_a = 3;
    int tensor_max_order_b = 2;
    std::uint64_t mc_samples_a = 20000;
    std::uint64_t mc_samples_b = 512;
    std::uint64_t seed = 20240607;
    int threads = 1;
    double underresolved_fraction = 0.25;

    double spacing_for(bool series_b, int order, double delta) const;
    bool uses_lattice(bool series_b, int order, int dim) const;
};

struct OrderEstimate {
    double value = 0.0;
    double error = 0.0;
};

/// Integral of phi_{1+n}(0, y_1..y_n) over R^{nd}.
OrderEstimate integrate_ursell_a(const RadialFunction& g, int n, const QuadratureSpec& q);

/// Integral of phi_{2+n}(0, x, y_1..y_n) over R^{nd}, with x = (radius, 0, 0).
OrderEstimate integrate_ursell_b(const RadialFunction& g, double radius, int n,
                                 const QuadratureSpec& q, std::uint64_t stream = 0);

/// Cached Ursell integrals per order (index n = 0..N).
struct UrsellTable {
    std::vector<OrderEstimate> a;               // a[0] = 1 exactly
    std::vector<double> radii;                  // B output radii
    std::vector<std::vector<OrderEstimate>> b;  // b[k][0] = g(radii[k]) exactly
};

struct TruncationReport {
    std::vector<double> magnitudes;
    double ratio = 0.0;
    double estimate = 0.0;
    bool bounded = true;
    bool reliable = true;
    std::string note;
};

/// Geometric tail estimate from the last two term magnitudes (ratio extrapolated
/// once more when the last three terms show it growing).
TruncationReport truncation_report(const std::vector<double>& magnitudes);

struct SeriesResult {
    double value = 0.0;
    std::vector<double> terms;              // z^{n-1}/n! * I_n for n = 1..N
    std::vector<OrderEstimate> integrals;   // I_n for n = 0..N
    double truncation_error_estimate = 0.0;
    double quadrature_error_estimate = 0.0;
    TruncationReport truncation;
};

struct RadialSeriesResult {
    RadialFunction value;                    // B on the grid of g; core = mean of core samples
    std::vector<std::vector<double>> terms;  // terms[n-1][bin]
    std::vector<double> core_radii;
    std::vector<double> core_values;
    std::vector<double> quadrature_error;    // per bin
    double truncation_error_estimate = 0.0;
    double quadrature_error_estimate = 0.0;  // max over bins
    TruncationReport truncation;
    UrsellTable table;
};

SeriesResult series_a(double z, const RadialFunction& g, int order, const QuadratureSpec& q);
RadialSeriesResult series_b(double z, const RadialFunction& g, int order, const QuadratureSpec& q);

/// Convergence guard z * (c0 + ||g||_upper); forward_cluster refuses values above 0.5.
double smallness_guard_value(double z, const RadialFunction& g);
inline constexpr double kSmallnessGuardLimit = 0.5;

struct ForwardResult {
    double omega1 = 0.0;
    RadialFunction omega2;
    double rho1 = 0.0;
    RadialFunction rho2;
    SeriesResult a;
    RadialSeriesResult b;
    double guard_value = 0.0;
    double core_consistency = 0.0;  // max |omega2(core sample) + omega1^2|
    double omega1_error = 0.0;      // z^2 * (truncation + quadrature of A)
    double omega2_error = 0.0;      // z^3 * (truncation + quadrature of B)
};

ForwardResult forward_cluster(double z, const RadialFunction& g, int order,
                              const QuadratureSpec& q, bool force = false);

}  // namespace gibbsinv
