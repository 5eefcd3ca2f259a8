#pragma once

#include "gibbsinv/radial_function.hpp"

namespace gibbsinv {

/**
 * Bracket for the packing-sup of |f| over unit-separated point sets outside
 * the open unit ball. In d = 1 the exact dynamic program is used; otherwise
 * lower = max(greedy, integral bound) and upper = min(cube cells, half balls).
 */
NormBracket packing_norm(const RadialFunction& f);

/// Upper end of packing_norm without the (slow) greedy lower search.
double packing_upper(const RadialFunction& f);

/// Greedy unit-separated selection by descending |f|. Lower bound.
double packing_greedy_lower(const RadialFunction& f);

/// Integral of |f| outside B_1 divided by Vol(B_1). Lower bound.
double packing_integral_lower(const RadialFunction& f);

/// Sum of max |f| over half-open cells of diameter 1. Upper bound.
double packing_cell_upper(const RadialFunction& f);

/// Disjoint half-ball bound. Upper bound; only used for d >= 2.
double packing_halfball_upper(const RadialFunction& f);

/// d = 1 only: sup over packings restricted to bin edges (exact when 1/delta is
/// an integer, in which case lower == upper).
NormBracket packing_dp_1d(const RadialFunction& f);

/// Largest number of unit-separated points inside the open unit ball.
int unit_ball_capacity(int dim);

double unit_ball_volume(int dim);

}  // namespace gibbsinv
