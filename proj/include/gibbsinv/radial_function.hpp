#pragma once

#include <array>
#include <cstddef>
#include <limits>
#include <span>
#include <string>
#include <vector>

namespace gibbsinv {

using Point = std::array<double, 3>;

inline constexpr double kInf = std::numeric_limits<double>::infinity();

/// Number of bins covering [1, r_max) with spacing delta.
std::size_t bin_count(double delta, double r_max);

/**
 * Radially symmetric function on R^d with a unit core.
 *
 * The value is `core_value` on the open unit ball, a piecewise-constant
 * sample on each bin [1 + i*delta, 1 + (i+1)*delta) (the last bin is closed
 * at r_max), and 0 beyond r_max. Samples are nominally located at the bin
 * centers 1 + (i + 1/2)*delta.
 */
class RadialFunction {
public:
    RadialFunction() = default;
    RadialFunction(int dim, double delta, double r_max, std::vector<double> values,
                   double core_value);

    /// All-zero tail with the given core value.
    static RadialFunction zeros(int dim, double delta, double r_max, double core_value);

    int dim() const noexcept { return dim_; }
    double delta() const noexcept { return delta_; }
    double r_max() const noexcept { return r_max_; }
    double core_value() const noexcept { return core_value_; }
    std::size_t size() const noexcept { return values_.size(); }
    std::span<const double> values() const noexcept { return values_; }
    double operator[](std::size_t i) const { return values_[i]; }

    double bin_center(std::size_t i) const { return 1.0 + (static_cast<double>(i) + 0.5) * delta_; }
    double bin_lo(std::size_t i) const { return 1.0 + static_cast<double>(i) * delta_; }
    double bin_hi(std::size_t i) const;
    std::vector<double> bin_centers() const;

    /// Value at distance s from the origin.
    double at_radius(double s) const;

    bool same_grid(const RadialFunction& other) const noexcept;

    RadialFunction with_values(std::vector<double> values) const;
    RadialFunction with_core(double core_value) const;

private:
    int dim_ = 1;
    double delta_ = 0.05;
    double r_max_ = 8.0;
    std::vector<double> values_;
    double core_value_ = 0.0;
};

double norm(std::span<const double> x);

/// f(x); depends only on |x|.
double evaluate(const RadialFunction& f, const Point& x);

/// Pointwise a*f + b*g on a shared grid (core included). Throws GridMismatch.
RadialFunction combine(double a, const RadialFunction& f, double b, const RadialFunction& g);

/// Phi = -ln(1 + g); the core becomes the +inf sentinel. Throws NonPhysical.
RadialFunction g_to_phi(const RadialFunction& g);

/// g = exp(-Phi) - 1; a +inf core maps to -1.
RadialFunction phi_to_g(const RadialFunction& phi);

/// Mayer bond of a hard-core pair potential: core -1, samples > -1 outside.
class HardCorePotential {
public:
    explicit HardCorePotential(RadialFunction g);

    static HardCorePotential from_phi(const RadialFunction& phi);
    /// Pure hard core: g = -1 inside, 0 outside.
    static HardCorePotential pure(int dim, double delta, double r_max);

    const RadialFunction& g() const noexcept { return g_; }
    RadialFunction phi() const { return g_to_phi(g_); }
    /// Smallest a >= 0 with g >= -a outside the core.
    double lower_bound() const noexcept { return a_; }

private:
    RadialFunction g_;
    double a_ = 0.0;
};

/// First two cluster functions plus the smallness ratio they are checked against.
struct ClusterTargets {
    double omega1 = 0.0;
    RadialFunction omega2;
    double r = 0.5;
};

/// omega1 = rho1, omega2 = rho2 - rho1^2 (core included).
ClusterTargets correlation_to_cluster(double rho1, const RadialFunction& rho2, double r);

struct CorrelationPair {
    double rho1 = 0.0;
    RadialFunction rho2;
};
CorrelationPair cluster_to_correlation(const ClusterTargets& targets);

struct NormBracket {
    double lower = 0.0;
    double upper = 0.0;
};

struct AdmissibilityReport {
    bool pass = false;
    std::vector<std::string> reasons;
    NormBracket bracket;
    double bound = 0.0;  // r * omega1^2
};

/// Hypothesis check on targets; never throws.
AdmissibilityReport check_admissible(const ClusterTargets& targets, double r);

}  // namespace gibbsinv
