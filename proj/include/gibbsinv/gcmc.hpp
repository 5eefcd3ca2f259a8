#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "gibbsinv/radial_function.hpp"

namespace gibbsinv {

enum class Boundary { periodic, free };

std::string to_string(Boundary b);
Boundary boundary_from_string(const std::string& s);

struct SimulationConfig {
    int dim = 1;
    double box = 100.0;  // side length L
    Boundary boundary = Boundary::periodic;
    double z = 0.0;
    RadialFunction g;  // Mayer bond; core -1 means hard core, core 0 means no core
    std::uint64_t sweeps = 100000;  // per chain
    std::uint64_t equilibration = 1000;
    int moves_per_sweep = 20;
    double p_insert = 1.0 / 3.0;
    double p_delete = 1.0 / 3.0;
    double p_translate = 1.0 / 3.0;
    double max_displacement = 0.5;
    std::uint64_t seed = 1;
    int n_chains = 4;
    int blocks_per_chain = 64;
    int threads = 1;

    /// Throws Error naming the first violated constraint.
    void validate() const;
};

/**
 * Acceptance probabilities of the three moves for the grand-canonical measure
 * nu(x_1..x_n) = z^n / n! exp(-U(x_1..x_n)) on a region of volume V.
 */
struct MoveKernel {
    double z = 0.0;
    double volume = 0.0;
    double p_insert = 1.0 / 3.0;
    double p_delete = 1.0 / 3.0;

    /// n -> n+1 with a uniform new point; du = U(new) - U(old).
    double accept_insert(int n_before, double du) const;
    /// n -> n-1 removing a uniformly chosen particle; du = U(new) - U(old).
    double accept_delete(int n_before, double du) const;
    /// Symmetric displacement.
    double accept_translate(double du) const;
};

/// rho_2 estimate on the bins of a target grid, plus core bins covering [0, 1).
struct PairHistogram {
    std::vector<double> lo;
    std::vector<double> hi;
    std::vector<std::uint64_t> counts;  // unordered pairs
    std::vector<double> rho2;
    std::vector<double> sigma;
    std::size_t core_bins = 0;  // the first core_bins bins lie inside the core
    std::string normalization;
};

struct SimulationResult {
    double rho1 = 0.0;
    double rho1_sigma = 0.0;
    double mean_n = 0.0;
    PairHistogram pairs;
    std::uint64_t samples = 0;
    std::array<double, 3> acceptance{};  // insert, delete, translate
    int blocks = 0;
};

SimulationResult simulate(const SimulationConfig& cfg);

/// Free-boundary hard rods in [0, L]: rho_1 from the exact grand partition function.
double exact_rod_density(double z, double L);

/// Hard rods on a ring of circumference L (periodic boundary), exact.
double exact_ring_density(double z, double L);

struct ComparisonReport {
    double rho1_zscore = 0.0;
    std::vector<double> zscores;  // per histogram bin
    std::vector<std::size_t> flagged;
    double chi2 = 0.0;
    int dof = 0;
    double fraction_within_3sigma = 0.0;
    std::string caveat;
};

/// Per-bin z-scores of a simulation against (rho1, rho2) targets on the same grid;
/// core bins are compared with the core value of rho2.
ComparisonReport compare_to_targets(const SimulationResult& sim, double rho1,
                                    const RadialFunction& rho2);

}  // namespace gibbsinv
