#include "gibbsinv/ursell.hpp"

#include <algorithm>
#include <mutex>
#include <numeric>

#include "gibbsinv/errors.hpp"

namespace gibbsinv {
namespace {

double pair_bond(const RadialFunction& g, const Point& a, const Point& b) {
    const Point diff{a[0] - b[0], a[1] - b[1], a[2] - b[2]};
    return evaluate(g, diff);
}

int find(std::array<int, kMaxRecurrencePoints>& parent, int v) {
    while (parent[v] != v) {
        parent[v] = parent[parent[v]];
        v = parent[v];
    }
    return v;
}

std::vector<std::uint32_t> build_connected_sets(int m) {
    std::vector<std::pair<int, int>> edges;
    for (int i = 0; i < m; ++i)
        for (int j = i + 1; j < m; ++j) edges.emplace_back(i, j);
    const std::uint32_t n_sets = 1u << edges.size();
    std::vector<std::uint32_t> out;
    for (std::uint32_t mask = 0; mask < n_sets; ++mask) {
        std::array<int, kMaxRecurrencePoints> parent{};
        std::iota(parent.begin(), parent.begin() + m, 0);
        int components = m;
        for (std::size_t e = 0; e < edges.size(); ++e) {
            if (!((mask >> e) & 1u)) continue;
            const int a = find(parent, edges[e].first);
            const int b = find(parent, edges[e].second);
            if (a != b) {
                parent[a] = b;
                --components;
            }
        }
        if (components <= 1) out.push_back(mask);
    }
    return out;
}

}  // namespace

BondMatrix BondMatrix::from_points(const RadialFunction& g, std::span<const Point> pts) {
    const int m = static_cast<int>(pts.size());
    if (m > kMaxRecurrencePoints) throw OrderTooLarge("bond matrix holds at most 8 points");
    BondMatrix b(m);
    for (int i = 0; i < m; ++i)
        for (int j = i + 1; j < m; ++j) b.set(i, j, pair_bond(g, pts[i], pts[j]));
    return b;
}

double boltzmann(const RadialFunction& g, std::span<const Point> x) {
    double w = 1.0;
    for (std::size_t i = 0; i < x.size(); ++i)
        for (std::size_t j = i + 1; j < x.size(); ++j) {
            w *= 1.0 + pair_bond(g, x[i], x[j]);
            if (w == 0.0) return 0.0;
        }
    return w;
}

const std::vector<std::uint32_t>& connected_edge_sets(int m) {
    constexpr int kTableMax = 7;
    if (m < 0 || m > kTableMax) throw OrderTooLarge("connected-graph tables stop at 7 vertices");
    static std::array<std::vector<std::uint32_t>, kTableMax + 1> tables;
    static std::array<std::once_flag, kTableMax + 1> flags;
    std::call_once(flags[m], [m] { tables[m] = build_connected_sets(m); });
    return tables[m];
}

double connected_graph_sum(const BondMatrix& bonds) {
    const int m = bonds.size();
    if (m <= 1) return m == 1 ? 1.0 : 0.0;
    std::vector<double> w;
    for (int i = 0; i < m; ++i)
        for (int j = i + 1; j < m; ++j) w.push_back(bonds(i, j));
    double sum = 0.0;
    for (std::uint32_t mask : connected_edge_sets(m)) {
        double prod = 1.0;
        for (std::uint32_t bits = mask; bits != 0; bits &= bits - 1) {
            prod *= w[static_cast<std::size_t>(__builtin_ctz(bits))];
        }
        sum += prod;
    }
    return sum;
}

double ursell_direct(const RadialFunction& g, std::span<const Point> x, int m_max) {
    if (static_cast<int>(x.size()) > m_max) {
        throw OrderTooLarge("ursell_direct: configuration longer than m_max");
    }
    return connected_graph_sum(BondMatrix::from_points(g, x));
}

RecurrenceContext::RecurrenceContext()
    : memo_(1u << (2 * kMaxRecurrencePoints), 0.0), stamp_(1u << (2 * kMaxRecurrencePoints), 0) {}

double RecurrenceContext::phi_tilde(const BondMatrix& bonds, std::uint32_t x_mask,
                                    std::uint32_t y_mask) {
    if ((x_mask & y_mask) != 0) throw Error("phi_tilde: X and Y overlap");
    bonds_ = &bonds;
    if (++generation_ == 0) {
        std::fill(stamp_.begin(), stamp_.end(), 0);
        generation_ = 1;
    }
    return eval(x_mask, y_mask);
}

double RecurrenceContext::ursell(const BondMatrix& bonds) {
    const int m = bonds.size();
    if (m == 0) return 0.0;
    const std::uint32_t all = (1u << m) - 1u;
    return phi_tilde(bonds, 1u, all & ~1u);
}

double RecurrenceContext::eval(std::uint32_t x_mask, std::uint32_t y_mask) {
    // phi~_{empty} is the unit sequence.
    if (x_mask == 0) return y_mask == 0 ? 1.0 : 0.0;
    const std::uint32_t key = (x_mask << kMaxRecurrencePoints) | y_mask;
    if (stamp_[key] == generation_) return memo_[key];

    const BondMatrix& b = *bonds_;
    // phi~_X is symmetric in X, so the lowest index plays the role of x_1.
    const int first = __builtin_ctz(x_mask);
    const std::uint32_t rest = x_mask & (x_mask - 1u);

    double prefactor = 1.0;
    for (std::uint32_t bits = rest; bits != 0 && prefactor != 0.0; bits &= bits - 1) {
        prefactor *= 1.0 + b(__builtin_ctz(bits), first);
    }

    double sum = 0.0;
    if (prefactor != 0.0) {
        // Z runs over all subsets of Y (including empty and Y itself).
        std::uint32_t z = y_mask;
        while (true) {
            double weight = 1.0;
            for (std::uint32_t bits = z; bits != 0 && weight != 0.0; bits &= bits - 1) {
                weight *= b(__builtin_ctz(bits), first);
            }
            if (weight != 0.0) sum += weight * eval(z | rest, y_mask & ~z);
            if (z == 0) break;
            z = (z - 1u) & y_mask;
        }
    }
    const double value = prefactor * sum;
    stamp_[key] = generation_;
    memo_[key] = value;
    return value;
}

double ursell_recurrence(const RadialFunction& g, std::span<const Point> x,
                         std::span<const Point> y) {
    Configuration all(x.begin(), x.end());
    all.insert(all.end(), y.begin(), y.end());
    if (all.size() > static_cast<std::size_t>(kMaxRecurrencePoints)) {
        throw OrderTooLarge("ursell_recurrence holds at most 8 points");
    }
    const BondMatrix bonds = BondMatrix::from_points(g, all);
    const std::uint32_t x_mask = (1u << x.size()) - 1u;
    const std::uint32_t y_mask = ((1u << all.size()) - 1u) & ~x_mask;
    RecurrenceContext ctx;
    return ctx.phi_tilde(bonds, x_mask, y_mask);
}

TruncatedSequence boltzmann_sequence(const RadialFunction& g, int order) {
    return TruncatedSequence(order, [g](std::span<const Point> x) { return boltzmann(g, x); });
}

}  // namespace gibbsinv
