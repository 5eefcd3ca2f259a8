#pragma once

#include <functional>
#include <span>

#include "gibbsinv/radial_function.hpp"

namespace gibbsinv {

using Configuration = std::vector<Point>;

/**
 * Sequence (psi_m)_{0 <= m <= order} of functions of finite point sequences.
 * Components are evaluated lazily: the callable receives the whole sequence X
 * and returns psi_{|X|}(X). Evaluation beyond the truncation order gives 0.
 */
class TruncatedSequence {
public:
    using Component = std::function<double(std::span<const Point>)>;

    TruncatedSequence(int order, Component component);

    /// The unit element: 1 on the empty sequence, 0 elsewhere.
    static TruncatedSequence unit(int order);

    int order() const noexcept { return order_; }
    double operator()(std::span<const Point> x) const;

private:
    int order_;
    Component component_;
};

/// (a * b)(X) = sum over subsequences Y of X of a(Y) b(X \ Y). Orders must agree.
TruncatedSequence star(const TruncatedSequence& a, const TruncatedSequence& b);

TruncatedSequence operator+(const TruncatedSequence& a, const TruncatedSequence& b);
TruncatedSequence operator*(double s, const TruncatedSequence& a);

/// 1 + phi + phi*phi/2! + ...; requires phi_0 = 0.
TruncatedSequence gamma(const TruncatedSequence& phi);

/// phi' - phi'*phi'/2 + phi'*phi'*phi'/3 - ... with phi' = psi - 1; requires psi_0 = 1.
TruncatedSequence gamma_inverse(const TruncatedSequence& psi);

}  // namespace gibbsinv
