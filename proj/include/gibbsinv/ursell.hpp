#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <vector>

#include "gibbsinv/radial_function.hpp"
#include "gibbsinv/sequence.hpp"

namespace gibbsinv {

inline constexpr int kMaxRecurrencePoints = 8;
inline constexpr int kDefaultDirectOrder = 6;

/// Symmetric table of Mayer bonds g_ij among at most eight points.
class BondMatrix {
public:
    explicit BondMatrix(int m = 0) : m_(m) { g_.fill(0.0); }

    static BondMatrix from_points(const RadialFunction& g, std::span<const Point> pts);

    int size() const noexcept { return m_; }
    double operator()(int i, int j) const { return g_[i * kMaxRecurrencePoints + j]; }
    void set(int i, int j, double v) {
        g_[i * kMaxRecurrencePoints + j] = v;
        g_[j * kMaxRecurrencePoints + i] = v;
    }

private:
    int m_;
    std::array<double, kMaxRecurrencePoints * kMaxRecurrencePoints> g_;
};

/// prod_{i<j} (1 + g(x_i - x_j)); 0 as soon as a pair sits inside the core.
double boltzmann(const RadialFunction& g, std::span<const Point> x);

/// Edge subsets (bitmask over pairs i<j in lexicographic order) that connect m vertices.
const std::vector<std::uint32_t>& connected_edge_sets(int m);

/// Sum over connected graphs on the m points of prod g_ij.
double connected_graph_sum(const BondMatrix& bonds);

/// Ursell function by connected-graph enumeration. Throws OrderTooLarge if |x| > m_max.
double ursell_direct(const RadialFunction& g, std::span<const Point> x,
                     int m_max = kDefaultDirectOrder);

/**
 * Memoized evaluation of phi~_X(Y) over index subsets of one ambient point set.
 * One context per thread; reuse it across samples to avoid reallocating memo tables.
 */
class RecurrenceContext {
public:
    RecurrenceContext();

    /// phi~_X(Y) with X, Y disjoint index masks into the ambient bond matrix.
    double phi_tilde(const BondMatrix& bonds, std::uint32_t x_mask, std::uint32_t y_mask);

    /// phi_m(x_0, x_1, ..., x_{m-1}) = phi~_{x_0}(x_1, ..., x_{m-1}).
    double ursell(const BondMatrix& bonds);

private:
    double eval(std::uint32_t x_mask, std::uint32_t y_mask);

    const BondMatrix* bonds_ = nullptr;
    std::vector<double> memo_;
    std::vector<std::uint32_t> stamp_;
    std::uint32_t generation_ = 0;
};

/// phi~_X(Y) from coordinates; X and Y are concatenated into one ambient sequence.
double ursell_recurrence(const RadialFunction& g, std::span<const Point> x,
                         std::span<const Point> y);

/// (psi_m)_{m <= order} with psi_m the Boltzmann factor.
TruncatedSequence boltzmann_sequence(const RadialFunction& g, int order);

}  // namespace gibbsinv
