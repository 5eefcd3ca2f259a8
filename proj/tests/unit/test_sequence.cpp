#include <doctest.h>

#include <cmath>
#include <random>

#include "gibbsinv/errors.hpp"
#include "gibbsinv/sequence.hpp"

using namespace gibbsinv;

namespace {

// Symmetric test function with random per-order coefficients.
TruncatedSequence random_sequence(int order, std::uint64_t seed, double c0) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    std::vector<double> a(order + 1), b(order + 1);
    for (int m = 0; m <= order; ++m) {
        a[m] = u(rng);
        b[m] = u(rng);
    }
    a[0] = c0;
    b[0] = 0.0;
    return TruncatedSequence(order, [a, b](std::span<const Point> x) {
        const std::size_t m = x.size();
        double prod = 1.0, mean = 0.0;
        for (const auto& p : x) {
            prod *= std::cos(1.3 * p[0] + 0.2);
            mean += p[0] * p[0] / 9.0;
        }
        return a[m] * prod + b[m] * (m ? mean / static_cast<double>(m) : 0.0);
    });
}

Configuration random_points(int m, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> u(-3.0, 3.0);
    Configuration x(m);
    for (auto& p : x) p = {u(rng), 0.0, 0.0};
    return x;
}

// Gamma by the partition formula: sum over set partitions of prod phi(block).
double gamma_by_partitions(const TruncatedSequence& phi, const Configuration& x) {
    const std::size_t m = x.size();
    if (m == 0) return 1.0;
    // blocks containing x[0]: subsets of the rest
    double sum = 0.0;
    for (std::uint32_t mask = 0; mask < (1u << (m - 1)); ++mask) {
        Configuration block{x[0]}, rest;
        for (std::size_t i = 1; i < m; ++i) ((mask >> (i - 1)) & 1u ? block : rest).push_back(x[i]);
        sum += phi(block) * gamma_by_partitions(phi, rest);
    }
    return sum;
}

}  // namespace

TEST_CASE("star product") {
    std::mt19937_64 rng(1);
    const auto psi = random_sequence(4, 11, 1.0);
    const auto unit = TruncatedSequence::unit(4);
    const auto phi = random_sequence(4, 12, 0.0);
    for (int m = 0; m <= 4; ++m) {
        const auto x = random_points(m, rng);
        CHECK(star(unit, psi)(x) == doctest::Approx(psi(x)).epsilon(1e-14));
        CHECK(star(phi, psi)(x) == doctest::Approx(star(psi, phi)(x)).epsilon(1e-13));
    }
    // phi_1 = 1, phi_2 = 0 -> (phi * phi)_2 = 2
    const TruncatedSequence ones(2, [](std::span<const Point> x) { return x.size() == 1 ? 1.0 : 0.0; });
    const Configuration two{{0, 0, 0}, {1, 0, 0}};
    CHECK(star(ones, ones)(two) == 2.0);
    CHECK_THROWS_AS(star(TruncatedSequence::unit(2), TruncatedSequence::unit(3)), Error);
}

TEST_CASE("gamma") {
    std::mt19937_64 rng(2);
    const auto phi = random_sequence(5, 21, 0.0);
    const auto g = gamma(phi);
    const Configuration x2 = random_points(2, rng);
    const Configuration a{x2[0]}, b{x2[1]};
    CHECK(g(x2) == doctest::Approx(phi(x2) + phi(a) * phi(b)).epsilon(1e-14));
    CHECK(g(Configuration{}) == 1.0);
    for (int m = 1; m <= 5; ++m) {
        const auto x = random_points(m, rng);
        CHECK(g(x) == doctest::Approx(gamma_by_partitions(phi, x)).epsilon(1e-12));
    }
}

TEST_CASE("gamma_inverse is the inverse of gamma") {
    std::mt19937_64 rng(3);
    for (int trial = 0; trial < 10; ++trial) {
        const auto phi = random_sequence(5, 100 + trial, 0.0);
        const auto back = gamma_inverse(gamma(phi));
        const auto psi = random_sequence(5, 200 + trial, 1.0);
        const auto there = gamma(gamma_inverse(psi));
        for (int m = 0; m <= 5; ++m) {
            const auto x = random_points(m, rng);
            CHECK(std::abs(back(x) - phi(x)) <= 1e-12 * std::max(1.0, std::abs(phi(x))));
            CHECK(std::abs(there(x) - psi(x)) <= 1e-12 * std::max(1.0, std::abs(psi(x))));
        }
    }
}

TEST_CASE("omega2 from rho: second cluster function") {
    // rho = Gamma(omega) at order 2: rho2(x1, x2) = omega2 + omega1(x1) omega1(x2)
    const double w1 = 0.3;
    const TruncatedSequence omega(2, [w1](std::span<const Point> x) {
        if (x.size() == 1) return w1;
        if (x.size() == 2) return -0.05 * std::exp(-std::abs(x[0][0] - x[1][0]));
        return 0.0;
    });
    const auto rho = gamma(omega);
    const Configuration x{{0, 0, 0}, {0.7, 0, 0}};
    CHECK(rho(x) - w1 * w1 == doctest::Approx(omega(x)).epsilon(1e-14));
}

TEST_CASE("preconditions") {
    const auto bad = random_sequence(3, 1, 0.5);  // phi_0 != 0
    CHECK_THROWS_AS(gamma(bad)(Configuration{}), Error);
    const auto bad_psi = random_sequence(3, 1, 0.5);  // psi_0 != 1
    CHECK_THROWS_AS(gamma_inverse(bad_psi)(Configuration{{0, 0, 0}}), Error);
    CHECK_THROWS_AS(TruncatedSequence(21, [](std::span<const Point>) { return 0.0; }), OrderTooLarge);
}
