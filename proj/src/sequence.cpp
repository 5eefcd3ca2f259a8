#include "gibbsinv/sequence.hpp"

#include <memory>

#include "gibbsinv/errors.hpp"

namespace gibbsinv {

TruncatedSequence::TruncatedSequence(int order, Component component)
    : order_(order), component_(std::move(component)) {
    if (order < 0) throw Error("truncation order must be >= 0");
    if (order > 20) throw OrderTooLarge("truncation order above 20 is not supported");
}

TruncatedSequence TruncatedSequence::unit(int order) {
    return TruncatedSequence(order, [](std::span<const Point> x) { return x.empty() ? 1.0 : 0.0; });
}

double TruncatedSequence::operator()(std::span<const Point> x) const {
    if (static_cast<int>(x.size()) > order_) return 0.0;
    return component_(x);
}

TruncatedSequence star(const TruncatedSequence& a, const TruncatedSequence& b) {
    if (a.order() != b.order()) throw Error("star product needs equal truncation orders");
    return TruncatedSequence(a.order(), [a, b](std::span<const Point> x) {
        const std::size_t m = x.size();
        Configuration left, right;
        left.reserve(m);
        right.reserve(m);
        double sum = 0.0;
        for (std::uint32_t mask = 0; mask < (1u << m); ++mask) {
            left.clear();
            right.clear();
            for (std::size_t i = 0; i < m; ++i) ((mask >> i) & 1u ? left : right).push_back(x[i]);
            const double av = a(left);
            if (av == 0.0) continue;
            sum += av * b(right);
        }
        return sum;
    });
}

TruncatedSequence operator+(const TruncatedSequence& a, const TruncatedSequence& b) {
    if (a.order() != b.order()) throw Error("sum needs equal truncation orders");
    return TruncatedSequence(a.order(), [a, b](std::span<const Point> x) { return a(x) + b(x); });
}

TruncatedSequence operator*(double s, const TruncatedSequence& a) {
    return TruncatedSequence(a.order(), [s, a](std::span<const Point> x) { return s * a(x); });
}

TruncatedSequence gamma(const TruncatedSequence& phi) {
    const int order = phi.order();
    auto checked = TruncatedSequence(order, [phi](std::span<const Point> x) {
        if (x.empty() && phi(x) != 0.0) throw Error("gamma requires phi_0 = 0");
        return phi(x);
    });
    // phi^{*k} vanishes on sequences shorter than k, so k <= order suffices.
    TruncatedSequence power = TruncatedSequence::unit(order);
    TruncatedSequence total = power;
    double factorial = 1.0;
    for (int k = 1; k <= order; ++k) {
        power = star(checked, power);
        factorial *= k;
        total = total + (1.0 / factorial) * power;
    }
    return total;
}

TruncatedSequence gamma_inverse(const TruncatedSequence& psi) {
    const int order = psi.order();
    auto shifted = TruncatedSequence(order, [psi](std::span<const Point> x) {
        if (x.empty()) {
            if (psi(x) != 1.0) throw Error("gamma_inverse requires psi_0 = 1");
            return 0.0;
        }
        return psi(x);
    });
    TruncatedSequence power = shifted;
    TruncatedSequence total = shifted;
    for (int k = 2; k <= order; ++k) {
        power = star(shifted, power);
        const double sign = (k % 2 == 0) ? -1.0 : 1.0;
        total = total + (sign / k) * power;
    }
    return total;
}

}  // namespace gibbsinv
