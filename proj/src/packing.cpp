#include "gibbsinv/packing.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <unordered_map>

#include "gibbsinv/errors.hpp"

namespace gibbsinv {
namespace {

constexpr double kSepTol = 1e-9;

struct Item {
    double t;      // offset from radius 1 along the positive axis
    double right;  // supremum of offsets reachable inside the same bin
    double value;
};

// Bin left edges plus the closed endpoint r_max, with |f| attached.
std::vector<Item> line_items(const RadialFunction& f) {
    std::vector<Item> items;
    const std::size_t n = f.size();
    items.reserve(n + 1);
    for (std::size_t i = 0; i < n; ++i) {
        items.push_back({f.bin_lo(i) - 1.0, f.bin_hi(i) - 1.0, std::abs(f[i])});
    }
    if (n > 0) items.push_back({f.r_max() - 1.0, f.r_max() - 1.0, std::abs(f[n - 1])});
    return items;
}

// Max-weight chain where item j may follow item i iff compatible(i, j).
template <class Compat>
double chain_dp(const std::vector<Item>& items, Compat compatible) {
    std::vector<double> best(items.size(), 0.0);
    double overall = 0.0;
    for (std::size_t j = 0; j < items.size(); ++j) {
        double prev = 0.0;
        for (std::size_t i = 0; i < j; ++i) {
            if (compatible(items[i], items[j])) prev = std::max(prev, best[i]);
        }
        best[j] = prev + items[j].value;
        overall = std::max(overall, best[j]);
    }
    return overall;
}

// Candidate points on the sphere of radius s: quasi-uniform with spacing ~h.
void sphere_points(int d, double s, double h, std::vector<Point>& out) {
    if (d == 1) {
        out.push_back({s, 0.0, 0.0});
        out.push_back({-s, 0.0, 0.0});
        return;
    }
    if (d == 2) {
        const int k = std::max(6, static_cast<int>(std::ceil(2.0 * std::numbers::pi * s / h)));
        for (int i = 0; i < k; ++i) {
            const double a = 2.0 * std::numbers::pi * i / k;
            out.push_back({s * std::cos(a), s * std::sin(a), 0.0});
        }
        return;
    }
    const int k = std::max(12, static_cast<int>(std::ceil(4.0 * std::numbers::pi * s * s / (h * h))));
    const double golden = std::numbers::pi * (3.0 - std::sqrt(5.0));
    for (int i = 0; i < k; ++i) {
        const double y = 1.0 - 2.0 * (i + 0.5) / k;
        const double rad = std::sqrt(std::max(0.0, 1.0 - y * y));
        const double a = golden * i;
        out.push_back({s * rad * std::cos(a), s * y, s * rad * std::sin(a)});
    }
}

double max_abs_over_radii(const RadialFunction& f, double lo, double hi) {
    lo = std::max(lo, 1.0);
    hi = std::min(hi, f.r_max());
    if (lo > hi || f.size() == 0) return 0.0;
    auto index = [&](double s) {
        auto i = static_cast<std::size_t>(std::max(0.0, (s - 1.0) / f.delta()));
        return std::min(i, f.size() - 1);
    };
    double m = 0.0;
    for (std::size_t i = index(lo); i <= index(hi); ++i) m = std::max(m, std::abs(f[i]));
    return m;
}

}  // namespace

double unit_ball_volume(int dim) {
    switch (dim) {
        case 1: return 2.0;
        case 2: return std::numbers::pi;
        case 3: return 4.0 * std::numbers::pi / 3.0;
        default: throw Error("dimension must be 1, 2 or 3");
    }
}

int unit_ball_capacity(int dim) {
    // Two points of the open ball at distance >= 1 subtend an angle > 60 deg,
    // so the count is the strict-60-degree spherical code size.
    switch (dim) {
        case 1: return 2;
        case 2: return 5;
        case 3: return 12;
        default: throw Error("dimension must be 1, 2 or 3");
    }
}

NormBracket packing_dp_1d(const RadialFunction& f) {
    if (f.dim() != 1) throw Error("packing_dp_1d requires d = 1");
    const auto items = line_items(f);
    const double lower = chain_dp(items, [](const Item& a, const Item& b) {
        return b.t - a.t >= 1.0 - kSepTol;
    });
    const double k = 1.0 / f.delta();
    if (std::abs(k - std::round(k)) < 1e-9) return {2.0 * lower, 2.0 * lower};
    // Relaxation: the later point may sit anywhere up to its bin's right edge.
    const double upper = chain_dp(items, [](const Item& a, const Item& b) {
        return b.right - a.t > 1.0 - kSepTol;
    });
    return {2.0 * lower, 2.0 * std::max(lower, upper)};
}

double packing_greedy_lower(const RadialFunction& f) {
    const int d = f.dim();
    std::vector<Point> pts;
    std::vector<double> vals;
    for (std::size_t i = 0; i < f.size(); ++i) {
        if (f[i] == 0.0) continue;
        sphere_points(d, f.bin_lo(i), 0.25, pts);
        vals.resize(pts.size(), std::abs(f[i]));
    }
    if (d == 1 && f.size() > 0 && f[f.size() - 1] != 0.0) {
        sphere_points(1, f.r_max(), 0.25, pts);
        vals.resize(pts.size(), std::abs(f[f.size() - 1]));
    }
    std::vector<std::size_t> order(pts.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return vals[a] > vals[b]; });

    // Unit cells keyed by integer coordinates; neighbours live in adjacent cells.
    auto key = [](long ix, long iy, long iz) {
        return (ix * 73856093L) ^ (iy * 19349663L) ^ (iz * 83492791L);
    };
    std::unordered_map<long, std::vector<Point>> grid;
    double total = 0.0;
    for (std::size_t idx : order) {
        const Point& p = pts[idx];
        const long cx = static_cast<long>(std::floor(p[0]));
        const long cy = static_cast<long>(std::floor(p[1]));
        const long cz = static_cast<long>(std::floor(p[2]));
        bool ok = true;
        for (long dx = -1; dx <= 1 && ok; ++dx)
            for (long dy = -1; dy <= 1 && ok; ++dy)
                for (long dz = -1; dz <= 1 && ok; ++dz) {
                    auto it = grid.find(key(cx + dx, cy + dy, cz + dz));
                    if (it == grid.end()) continue;
                    for (const Point& q : it->second) {
                        const double dd = (p[0] - q[0]) * (p[0] - q[0]) +
                                          (p[1] - q[1]) * (p[1] - q[1]) +
                                          (p[2] - q[2]) * (p[2] - q[2]);
                        if (dd < (1.0 - kSepTol) * (1.0 - kSepTol)) {
                            ok = false;
                            break;
                        }
                    }
                }
        if (!ok) continue;
        grid[key(cx, cy, cz)].push_back(p);
        total += vals[idx];
    }
    return total;
}

double packing_integral_lower(const RadialFunction& f) {
    const int d = f.dim();
    double s = 0.0;
    for (std::size_t i = 0; i < f.size(); ++i) {
        s += std::abs(f[i]) * (std::pow(f.bin_hi(i), d) - std::pow(f.bin_lo(i), d));
    }
    return s;  // Vol(B1) cancels against the shell volume prefactor
}

double packing_cell_upper(const RadialFunction& f) {
    const int d = f.dim();
    if (d == 1) {
        // Half-open unit intervals [1+j, 2+j) hold at most one point each.
        double side = 0.0;
        const auto cells = static_cast<long>(std::floor(f.r_max() - 1.0 + 1e-12)) + 1;
        for (long j = 0; j < cells; ++j) {
            const double lo = 1.0 + static_cast<double>(j);
            double hi = lo + 1.0 - 1e-12;
            side += max_abs_over_radii(f, lo, hi);
        }
        return 2.0 * side;
    }
    // Half-open cubes of side 1/sqrt(d) have diameter 1 and hold at most one point.
    const double s = 1.0 / std::sqrt(static_cast<double>(d));
    const long n = static_cast<long>(std::ceil(f.r_max() / s));
    double orthant = 0.0;
    const long nz = d == 3 ? n : 1;
    for (long i = 0; i < n; ++i)
        for (long j = 0; j < n; ++j)
            for (long k = 0; k < nz; ++k) {
                const double lo2 = (i * s) * (i * s) + (j * s) * (j * s) + (d == 3 ? (k * s) * (k * s) : 0.0);
                const double hi2 = ((i + 1) * s) * ((i + 1) * s) + ((j + 1) * s) * ((j + 1) * s) +
                                   (d == 3 ? ((k + 1) * s) * ((k + 1) * s) : 0.0);
                orthant += max_abs_over_radii(f, std::sqrt(lo2), std::sqrt(hi2));
            }
    return orthant * std::pow(2.0, d);
}

double packing_halfball_upper(const RadialFunction& f) {
    const int d = f.dim();
    std::vector<double> br;
    for (std::size_t i = 0; i <= f.size(); ++i) {
        const double e = i < f.size() ? f.bin_lo(i) : f.r_max();
        br.push_back(e - 0.5);
        br.push_back(e + 0.5);
    }
    br.push_back(0.5);
    std::sort(br.begin(), br.end());
    br.erase(std::unique(br.begin(), br.end()), br.end());
    double total = 0.0;
    for (std::size_t k = 0; k + 1 < br.size(); ++k) {
        const double a = std::max(br[k], 0.5);
        const double b = br[k + 1];
        if (b <= a) continue;
        const double mid = 0.5 * (a + b);
        const double m = max_abs_over_radii(f, mid - 0.5, mid + 0.5);
        total += m * (std::pow(b, d) - std::pow(a, d));
    }
    return total * std::pow(2.0, d);
}

double packing_upper(const RadialFunction& f) {
    bool all_zero = true;
    for (double v : f.values()) all_zero = all_zero && v == 0.0;
    if (all_zero) return 0.0;
    if (f.dim() == 1) return packing_dp_1d(f).upper;
    return std::min(packing_cell_upper(f), packing_halfball_upper(f));
}

NormBracket packing_norm(const RadialFunction& f) {
    bool all_zero = true;
    for (double v : f.values()) all_zero = all_zero && v == 0.0;
    if (all_zero) return {0.0, 0.0};
    if (f.dim() == 1) return packing_dp_1d(f);
    const double lower = std::max(packing_greedy_lower(f), packing_integral_lower(f));
    const double upper = std::min(packing_cell_upper(f), packing_halfball_upper(f));
    return {lower, std::max(lower, upper)};
}

}  // namespace gibbsinv
