#include <doctest.h>

#include <cmath>
#include <functional>
#include <random>

#include "gibbsinv/packing.hpp"

using namespace gibbsinv;

namespace {

RadialFunction step(int d, double c, double lo, double hi, double delta = 0.05, double r_max = 8.0) {
    RadialFunction f = RadialFunction::zeros(d, delta, r_max, 0.0);
    std::vector<double> v(f.size(), 0.0);
    for (std::size_t i = 0; i < v.size(); ++i)
        if (f.bin_lo(i) >= lo - 1e-12 && f.bin_hi(i) <= hi + 1e-12) v[i] = c;
    return f.with_values(v);
}

// Every unit-separated packing on one half-line, grid spacing h; both halves
// are independent (points on opposite sides are >= 2 apart).
double exhaustive_half_line(const RadialFunction& f, double h) {
    std::vector<double> xs;
    for (double x = 1.0; x <= f.r_max() + 1e-12; x += h) xs.push_back(x);
    std::function<double(std::size_t)> best = [&](std::size_t start) {
        double b = 0.0;
        for (std::size_t i = start; i < xs.size(); ++i) {
            std::size_t next = i + 1;
            while (next < xs.size() && xs[next] - xs[i] < 1.0 - 1e-9) ++next;
            b = std::max(b, std::abs(f.at_radius(xs[i])) + best(next));
        }
        return b;
    };
    return best(0);
}

// Randomized repulsion search for n points in the open unit ball, pairwise >= 1.
bool find_ball_packing(int d, int n, int restarts, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal;
    const double radius = 0.9999;
    for (int attempt = 0; attempt < restarts; ++attempt) {
        std::vector<std::array<double, 3>> x(static_cast<std::size_t>(n));
        for (auto& p : x) {
            p = {0, 0, 0};
            for (int c = 0; c < d; ++c) p[c] = 0.5 * normal(rng);
        }
        for (int it = 0; it < 4000; ++it) {
            double worst = 0.0;
            std::vector<std::array<double, 3>> grad(x.size(), {0, 0, 0});
            for (std::size_t i = 0; i < x.size(); ++i) {
                for (std::size_t j = i + 1; j < x.size(); ++j) {
                    double r2 = 0;
                    for (int c = 0; c < d; ++c) r2 += (x[i][c] - x[j][c]) * (x[i][c] - x[j][c]);
                    const double r = std::sqrt(r2) + 1e-15;
                    if (r < 1.0) {
                        worst = std::max(worst, 1.0 - r);
                        for (int c = 0; c < d; ++c) {
                            const double push = (1.0 - r) * (x[i][c] - x[j][c]) / r;
                            grad[i][c] += push;
                            grad[j][c] -= push;
                        }
                    }
                }
            }
            for (std::size_t i = 0; i < x.size(); ++i) {
                for (int c = 0; c < d; ++c) x[i][c] += 0.5 * grad[i][c];
                double r2 = 0;
                for (int c = 0; c < d; ++c) r2 += x[i][c] * x[i][c];
                const double r = std::sqrt(r2);
                if (r > radius)
                    for (int c = 0; c < d; ++c) x[i][c] *= radius / r;
            }
            if (worst < 1e-12 && it > 0) return true;
        }
    }
    return false;
}

}  // namespace

TEST_CASE("packing norm examples, d = 1") {
    const double c = 0.7;
    auto b = packing_norm(step(1, c, 1.0, 1.5));
    CHECK(b.lower <= 2 * c + 1e-12);
    CHECK(b.upper >= 2 * c - 1e-12);
    CHECK(b.upper == doctest::Approx(2 * c));

    // closed at 3: the last bin of a grid ending at r_max = 3 includes x = 3
    b = packing_norm(step(1, c, 1.0, 3.0, 0.05, 3.0));
    CHECK(b.lower == doctest::Approx(6 * c));
    CHECK(b.upper == doctest::Approx(6 * c));

    b = packing_norm(RadialFunction::zeros(1, 0.05, 8.0, -1.0));
    CHECK(b.lower == 0.0);
    CHECK(b.upper == 0.0);
}

TEST_CASE("1-d DP matches exhaustive packing search") {
    std::mt19937_64 rng(17);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    for (int trial = 0; trial < 20; ++trial) {
        RadialFunction f = RadialFunction::zeros(1, 0.25, 3.5, 0.0);
        std::vector<double> v(f.size());
        for (double& x : v) x = u(rng);
        f = f.with_values(v);
        const double oracle = 2.0 * exhaustive_half_line(f, 0.0625);
        const auto b = packing_dp_1d(f);
        CHECK(b.lower == doctest::Approx(oracle).epsilon(1e-12));
        CHECK(b.upper == doctest::Approx(oracle).epsilon(1e-12));
        CHECK(packing_greedy_lower(f) <= b.upper + 1e-12);
        CHECK(packing_integral_lower(f) <= b.upper + 1e-12);
        CHECK(packing_cell_upper(f) >= b.lower - 1e-12);
    }
}

TEST_CASE("bracket ordering, d = 2, 3") {
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    for (int d : {2, 3}) {
        RadialFunction f = RadialFunction::zeros(d, 0.25, 2.5, 0.0);
        std::vector<double> v(f.size());
        for (double& x : v) x = u(rng);
        f = f.with_values(v);
        const auto b = packing_norm(f);
        CHECK(b.lower > 0.0);
        CHECK(b.lower <= b.upper);
        CHECK(packing_greedy_lower(f) <= packing_cell_upper(f));
        CHECK(packing_integral_lower(f) <= packing_halfball_upper(f));
        CHECK(packing_upper(f) == doctest::Approx(b.upper));
    }
    // a single bin [1, 1.25): in d = 2 the shell holds at most 6 unit-separated points
    RadialFunction f = RadialFunction::zeros(2, 0.25, 1.25, 0.0).with_values({1.0});
    const auto b = packing_norm(f);
    CHECK(b.lower >= 5.0);
    CHECK(b.upper >= 6.0);
}

TEST_CASE("unit-ball capacity c0 (randomized search oracle)") {
    CHECK(unit_ball_capacity(1) == 2);
    CHECK(unit_ball_capacity(2) == 5);
    CHECK(unit_ball_capacity(3) == 12);
    CHECK(find_ball_packing(2, 5, 50, 1));
    CHECK_FALSE(find_ball_packing(2, 6, 50, 2));
    CHECK(find_ball_packing(3, 12, 50, 3));
    CHECK_FALSE(find_ball_packing(3, 13, 30, 4));
}

TEST_CASE("unit ball volumes") {
    CHECK(unit_ball_volume(1) == doctest::Approx(2.0));
    CHECK(unit_ball_volume(2) == doctest::Approx(M_PI));
    CHECK(unit_ball_volume(3) == doctest::Approx(4.0 * M_PI / 3.0));
}
