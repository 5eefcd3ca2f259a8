#include "gibbsinv/expansion.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

#include "gibbsinv/errors.hpp"
#include "gibbsinv/packing.hpp"
#include "gibbsinv/parallel.hpp"
#include "gibbsinv/rng.hpp"
#include "gibbsinv/ursell.hpp"

namespace gibbsinv {
namespace {

constexpr std::array<double, 4> kCoreRadii{0.125, 0.375, 0.625, 0.875};
constexpr std::uint64_t kTagA = 0xA;
constexpr std::uint64_t kTagB = 0xB;

// Mass of the tent (1 - |t - c|/h)/h on [a, b], where [a, b] does not straddle c.
double tent_mass(double a, double b, double c, double h) {
    const double mid = 0.5 * (a + b);
    return (b - a) / h * (1.0 - std::abs(mid - c) / h);
}

// Tent-weighted average of g around the signed coordinate c (d = 1).
double tent_average(const RadialFunction& g, double c, double h) {
    const double lo = c - h;
    const double hi = c + h;
    std::vector<double> cuts{lo, c, hi};
    auto add = [&](double r) {
        if (r > lo && r < hi) cuts.push_back(r);
        if (-r > lo && -r < hi) cuts.push_back(-r);
    };
    add(1.0);
    add(g.r_max());
    const double rmin = (lo < 0.0 && hi > 0.0) ? 0.0 : std::min(std::abs(lo), std::abs(hi));
    const double rmax = std::max(std::abs(lo), std::abs(hi));
    if (g.size() > 1 && rmax > 1.0) {
        const auto first = static_cast<long>(std::max(1.0, std::ceil((rmin - 1.0) / g.delta())));
        const auto last = std::min(static_cast<long>(g.size()) - 1,
                                   static_cast<long>(std::floor((rmax - 1.0) / g.delta())));
        for (long i = first; i <= last; ++i) add(g.bin_lo(static_cast<std::size_t>(i)));
    }
    std::sort(cuts.begin(), cuts.end());
    double sum = 0.0;
    for (std::size_t k = 0; k + 1 < cuts.size(); ++k) {
        const double a = cuts[k];
        const double b = cuts[k + 1];
        if (b <= a) continue;
        const double v = g.at_radius(std::abs(0.5 * (a + b)));
        if (v != 0.0) sum += v * tent_mass(a, b, c, h);
    }
    return sum;
}

struct LatticeBonds {
    double h = 0.0;
    std::vector<double> pair;  // pair[|k|]
    long reach = -1;           // largest |k| with a nonzero bond

    double at(long k) const {
        const auto a = static_cast<std::size_t>(k < 0 ? -k : k);
        return a < pair.size() ? pair[a] : 0.0;
    }
};

LatticeBonds make_lattice_bonds(const RadialFunction& g, double h) {
    LatticeBonds lb;
    lb.h = h;
    const auto kmax = static_cast<long>(std::ceil(g.r_max() / h)) + 1;
    lb.pair.resize(static_cast<std::size_t>(kmax) + 1);
    for (long k = 0; k <= kmax; ++k) {
        lb.pair[static_cast<std::size_t>(k)] = tent_average(g, static_cast<double>(k) * h, h);
        if (lb.pair[static_cast<std::size_t>(k)] != 0.0) lb.reach = k;
    }
    return lb;
}

// Bonds between lattice sites k*h and a fixed coordinate x.
struct OffsetBonds {
    long k0 = 0;
    std::vector<double> values;  // values[k - k0]
    long first_nonzero = 0;
    long last_nonzero = -1;

    double at(long k) const {
        const long i = k - k0;
        return (i >= 0 && i < static_cast<long>(values.size())) ? values[static_cast<std::size_t>(i)] : 0.0;
    }
};

OffsetBonds make_offset_bonds(const RadialFunction& g, double x, double h) {
    OffsetBonds ob;
    const double span = g.r_max() + h;
    ob.k0 = static_cast<long>(std::floor((x - span) / h)) - 1;
    const long k1 = static_cast<long>(std::ceil((x + span) / h)) + 1;
    ob.values.resize(static_cast<std::size_t>(k1 - ob.k0 + 1));
    bool seen = false;
    for (long k = ob.k0; k <= k1; ++k) {
        const double v = tent_average(g, static_cast<double>(k) * h - x, h);
        ob.values[static_cast<std::size_t>(k - ob.k0)] = v;
        if (v != 0.0) {
            if (!seen) ob.first_nonzero = k;
            seen = true;
            ob.last_nonzero = k;
        }
    }
    if (!seen) {
        ob.first_nonzero = 0;
        ob.last_nonzero = -1;
    }
    return ob;
}

// Largest distance at which g can be nonzero.
double support_radius(const RadialFunction& g) {
    for (std::size_t i = g.size(); i-- > 0;)
        if (g[i] != 0.0) return g.bin_hi(i);
    return g.core_value() != 0.0 ? 1.0 : 0.0;
}

bool connected(const std::array<std::uint32_t, kMaxRecurrencePoints>& adj, int m) {
    std::uint32_t seen = 1u;
    std::uint32_t frontier = 1u;
    while (frontier != 0) {
        std::uint32_t next = 0;
        for (std::uint32_t bits = frontier; bits != 0; bits &= bits - 1) {
            next |= adj[static_cast<std::size_t>(__builtin_ctz(bits))];
        }
        frontier = next & ~seen;
        seen |= next;
    }
    return seen == (1u << m) - 1u;
}

struct LatticeSum {
    double value = 0.0;
    double abs_sum = 0.0;
};

// Multiset lattice sum over n free points with `fixed` fixed points in front.
// bond(i, j) gives the bond between ambient indices; free point j has lattice
// index keys[j - fixed].
template <class BondFn>
LatticeSum lattice_sum(int fixed, int n, long kmin, long kmax, double h, BondFn bond,
                       RecurrenceContext& ctx) {
    LatticeSum out;
    const int m = fixed + n;
    std::array<long, kMaxRecurrencePoints> keys{};
    double factorial_n = 1.0;
    for (int i = 2; i <= n; ++i) factorial_n *= i;
    const double cell = std::pow(h, n);

    BondMatrix bonds(m);
    std::array<std::uint32_t, kMaxRecurrencePoints> adj{};

    auto leaf = [&] {
        adj.fill(0);
        for (int i = 0; i < m; ++i)
            for (int j = i + 1; j < m; ++j) {
                const double b = bond(i, j, keys);
                bonds.set(i, j, b);
                if (b != 0.0) {
                    adj[static_cast<std::size_t>(i)] |= 1u << j;
                    adj[static_cast<std::size_t>(j)] |= 1u << i;
                }
            }
        if (!connected(adj, m)) return;
        // multiplicity n! / prod(run lengths!)
        double mult = factorial_n;
        int run = 1;
        for (int j = 1; j < n; ++j) {
            if (keys[static_cast<std::size_t>(j)] == keys[static_cast<std::size_t>(j - 1)]) {
                ++run;
                mult /= run;
            } else {
                run = 1;
            }
        }
        const double phi = ctx.ursell(bonds);
        out.value += mult * phi;
        out.abs_sum += mult * std::abs(phi);
    };

    // Iterative nested loops with keys non-decreasing.
    if (n == 0) {
        leaf();
    } else {
        int depth = 0;
        keys[0] = kmin;
        while (depth >= 0) {
            if (keys[static_cast<std::size_t>(depth)] > kmax) {
                --depth;
                if (depth >= 0) ++keys[static_cast<std::size_t>(depth)];
                continue;
            }
            if (depth == n - 1) {
                leaf();
                ++keys[static_cast<std::size_t>(depth)];
            } else {
                keys[static_cast<std::size_t>(depth + 1)] = keys[static_cast<std::size_t>(depth)];
                ++depth;
            }
        }
    }
    out.value *= cell;
    out.abs_sum *= cell;
    return out;
}

double checked_box(const QuadratureSpec& q, double required) {
    if (q.box_radius > 0.0) {
        if (q.box_radius + 1e-12 < required) {
            std::ostringstream msg;
            msg << "box_radius " << q.box_radius << " is smaller than the connected support "
                << required;
            throw Error(msg.str());
        }
        return q.box_radius;
    }
    return required;
}

LatticeSum lattice_a(const RadialFunction& g, int n, double h, const QuadratureSpec& q,
                     RecurrenceContext& ctx) {
    const LatticeBonds lb = make_lattice_bonds(g, h);
    if (lb.reach < 0) return {};
    const double box = checked_box(q, n * (static_cast<double>(lb.reach) * h));
    const long kb = static_cast<long>(std::floor(box / h + 1e-9));
    auto bond = [&](int i, int j, const std::array<long, kMaxRecurrencePoints>& keys) {
        const long ki = i == 0 ? 0 : keys[static_cast<std::size_t>(i - 1)];
        const long kj = j == 0 ? 0 : keys[static_cast<std::size_t>(j - 1)];
        return lb.at(kj - ki);
    };
    return lattice_sum(1, n, -kb, kb, h, bond, ctx);
}

LatticeSum lattice_b(const RadialFunction& g, double x, int n, double h, const QuadratureSpec& q,
                     RecurrenceContext& ctx) {
    const LatticeBonds lb = make_lattice_bonds(g, h);
    const OffsetBonds ob = make_offset_bonds(g, x, h);
    const double gx = g.at_radius(std::abs(x));
    const long reach = std::max<long>(lb.reach, 0);
    long lo = -reach;
    long hi = reach;
    if (ob.last_nonzero >= ob.first_nonzero) {
        lo = std::min(lo, ob.first_nonzero);
        hi = std::max(hi, ob.last_nonzero);
    }
    lo -= (n - 1) * reach;
    hi += (n - 1) * reach;
    if (q.box_radius > 0.0) {
        const double required = std::max(std::abs(lo * h), std::abs(hi * h));
        const double box = checked_box(q, required);
        const long kb = static_cast<long>(std::floor(box / h + 1e-9));
        lo = -kb;
        hi = kb;
    }
    auto bond = [&](int i, int j, const std::array<long, kMaxRecurrencePoints>& keys) {
        // ambient order: 0 = origin, 1 = x, 2.. = free points
        if (i == 0 && j == 1) return gx;
        const long kj = keys[static_cast<std::size_t>(j - 2)];
        if (i == 0) return lb.at(kj);
        if (i == 1) return ob.at(kj);
        return lb.at(kj - keys[static_cast<std::size_t>(i - 2)]);
    };
    return lattice_sum(2, n, lo, hi, h, bond, ctx);
}

OrderEstimate lattice_estimate(const LatticeSum& fine, const LatticeSum& coarse) {
    const double floor = 64.0 * std::numeric_limits<double>::epsilon() * fine.abs_sum;
    return {fine.value, std::abs(fine.value - coarse.value) + floor};
}

// Stratified Monte Carlo with a symmetrized sequential-anchor proposal: each
// free point is an anchor (uniform among earlier points) plus a uniform offset
// in [-R, R]^d with R the support radius of g. Every connected configuration
// has positive proposal density.
OrderEstimate mc_integral(const RadialFunction& g, std::span<const Point> fixed, int n,
                          std::uint64_t samples, std::uint64_t seed, RecurrenceContext& ctx) {
    if (n == 0 || samples == 0) return {};
    const int d = g.dim();
    const double reach = support_radius(g);
    if (reach == 0.0) return {};
    const int nf = static_cast<int>(fixed.size());
    const int m = nf + n;
    const double cube = std::pow(2.0 * reach, d);

    Rng rng(seed);
    std::array<Point, kMaxRecurrencePoints> pts{};
    for (int i = 0; i < nf; ++i) pts[static_cast<std::size_t>(i)] = fixed[static_cast<std::size_t>(i)];
    std::array<int, kMaxRecurrencePoints> perm{};
    double n_factorial = 1.0;
    for (int i = 2; i <= n; ++i) n_factorial *= i;

    auto within = [&](const Point& a, const Point& b) {
        for (int c = 0; c < d; ++c)
            if (std::abs(a[static_cast<std::size_t>(c)] - b[static_cast<std::size_t>(c)]) > reach) return false;
        return true;
    };

    double sum = 0.0;
    double sum_sq = 0.0;
    for (std::uint64_t s = 0; s < samples; ++s) {
        for (int j = 0; j < n; ++j) {
            const auto anchor = static_cast<std::size_t>(rng.below(static_cast<std::uint64_t>(nf + j)));
            Point y{0.0, 0.0, 0.0};
            for (int c = 0; c < d; ++c) {
                double u = rng.uniform();
                if (j == 0 && c == 0) u = (static_cast<double>(s) + u) / static_cast<double>(samples);
                y[static_cast<std::size_t>(c)] = pts[anchor][static_cast<std::size_t>(c)] + (2.0 * u - 1.0) * reach;
            }
            pts[static_cast<std::size_t>(nf + j)] = y;
        }
        // Symmetrized proposal density over orderings of the free points.
        std::iota(perm.begin(), perm.begin() + n, nf);
        double density = 0.0;
        do {
            double qseq = 1.0;
            for (int j = 0; j < n && qseq != 0.0; ++j) {
                const Point& y = pts[static_cast<std::size_t>(perm[static_cast<std::size_t>(j)])];
                int count = 0;
                for (int a = 0; a < nf; ++a) count += within(y, pts[static_cast<std::size_t>(a)]) ? 1 : 0;
                for (int a = 0; a < j; ++a)
                    count += within(y, pts[static_cast<std::size_t>(perm[static_cast<std::size_t>(a)])]) ? 1 : 0;
                qseq *= static_cast<double>(count) / (static_cast<double>(nf + j) * cube);
            }
            density += qseq;
        } while (std::next_permutation(perm.begin(), perm.begin() + n));
        density /= n_factorial;

        const BondMatrix bonds =
            BondMatrix::from_points(g, std::span<const Point>(pts.data(), static_cast<std::size_t>(m)));
        const double f = ctx.ursell(bonds);
        const double w = f / density;
        sum += w;
        sum_sq += w * w;
    }
    const auto ns = static_cast<double>(samples);
    const double mean = sum / ns;
    const double var = std::max(0.0, sum_sq / ns - mean * mean);
    return {mean, std::sqrt(var / ns)};
}

OrderEstimate integrate_a_with(const RadialFunction& g, int n, const QuadratureSpec& q,
                               RecurrenceContext& ctx) {
    if (n == 0) return {1.0, 0.0};
    if (q.uses_lattice(false, n, g.dim())) {
        const double h = q.spacing_for(false, n, g.delta());
        return lattice_estimate(lattice_a(g, n, h, q, ctx), lattice_a(g, n, 2.0 * h, q, ctx));
    }
    const Point origin{0.0, 0.0, 0.0};
    return mc_integral(g, std::span<const Point>(&origin, 1), n, q.mc_samples_a,
                       derive_seed(q.seed, {kTagA, static_cast<std::uint64_t>(n)}), ctx);
}

OrderEstimate integrate_b_with(const RadialFunction& g, double radius, int n, const QuadratureSpec& q,
                               std::uint64_t stream, RecurrenceContext& ctx) {
    if (n == 0) return {g.at_radius(std::abs(radius)), 0.0};
    if (q.uses_lattice(true, n, g.dim())) {
        const double h = q.spacing_for(true, n, g.delta());
        return lattice_estimate(lattice_b(g, radius, n, h, q, ctx),
                                lattice_b(g, radius, n, 2.0 * h, q, ctx));
    }
    const std::array<Point, 2> fixed{Point{0.0, 0.0, 0.0}, Point{radius, 0.0, 0.0}};
    return mc_integral(g, fixed, n, q.mc_samples_b,
                       derive_seed(q.seed, {kTagB, static_cast<std::uint64_t>(n), stream}), ctx);
}

}  // namespace

std::string to_string(QuadratureScheme s) {
    return s == QuadratureScheme::tensor_midpoint ? "tensor_midpoint" : "monte_carlo";
}

QuadratureScheme scheme_from_string(const std::string& s) {
    if (s == "tensor_midpoint") return QuadratureScheme::tensor_midpoint;
    if (s == "monte_carlo") return QuadratureScheme::monte_carlo;
    throw Error("unknown quadrature scheme: " + s);
}

double QuadratureSpec::spacing_for(bool series_b, int order, double delta) const {
    const auto& list = series_b ? spacing_b : spacing_a;
    double h = 0.0;
    if (!list.empty()) {
        const auto idx = std::min(static_cast<std::size_t>(std::max(order, 1) - 1), list.size() - 1);
        h = list[idx];
    }
    return h > 0.0 ? h : 0.25 * delta;
}

bool QuadratureSpec::uses_lattice(bool series_b, int order, int dim) const {
    if (scheme != QuadratureScheme::tensor_midpoint || dim != 1) return false;
    return order <= (series_b ? tensor_max_order_b : tensor_max_order_a);
}

OrderEstimate integrate_ursell_a(const RadialFunction& g, int n, const QuadratureSpec& q) {
    RecurrenceContext ctx;
    return integrate_a_with(g, n, q, ctx);
}

OrderEstimate integrate_ursell_b(const RadialFunction& g, double radius, int n,
                                 const QuadratureSpec& q, std::uint64_t stream) {
    RecurrenceContext ctx;
    return integrate_b_with(g, radius, n, q, stream, ctx);
}

TruncationReport truncation_report(const std::vector<double>& magnitudes) {
    TruncationReport rep;
    rep.magnitudes = magnitudes;
    for (double& m : rep.magnitudes) m = std::abs(m);
    const std::size_t n = rep.magnitudes.size();
    if (n == 0) {
        rep.note = "no terms";
        return rep;
    }
    if (n == 1) {
        rep.bounded = false;
        rep.reliable = false;
        rep.estimate = std::numeric_limits<double>::infinity();
        rep.note = "unbounded: N too small";
        return rep;
    }
    const double last = rep.magnitudes[n - 1];
    const double prev = rep.magnitudes[n - 2];
    if (last == 0.0) {
        rep.ratio = 0.0;
        rep.estimate = 0.0;
        rep.note = "last term vanishes";
        return rep;
    }
    if (prev == 0.0) {
        rep.bounded = false;
        rep.reliable = false;
        rep.ratio = std::numeric_limits<double>::infinity();
        rep.estimate = std::numeric_limits<double>::infinity();
        rep.note = "unbounded: previous term vanishes";
        return rep;
    }
    rep.ratio = last / prev;
    if (rep.ratio >= 1.0) {
        rep.bounded = false;
        rep.reliable = false;
        rep.estimate = std::numeric_limits<double>::infinity();
        rep.note = "unbounded: terms do not decrease";
        return rep;
    }
    // Growing ratios (e.g. hard rods) are extrapolated one step further; for a
    // geometric series this is the plain tail.
    double q = rep.ratio;
    if (n >= 3 && rep.magnitudes[n - 3] > 0.0) {
        const double q_prev = prev / rep.magnitudes[n - 3];
        if (q > q_prev) q = std::min(q * q / q_prev, 0.999);
    }
    rep.estimate = last * q / (1.0 - q);
    rep.reliable = rep.ratio <= 0.5;
    rep.note = rep.reliable ? "geometric tail" : "geometric tail (unreliable: ratio > 0.5)";
    return rep;
}

SeriesResult series_a(double z, const RadialFunction& g, int order, const QuadratureSpec& q) {
    if (!(z > 0.0)) throw Error("series_a requires z > 0");
    if (order < 1) throw Error("series order must be >= 1");
    SeriesResult res;
    RecurrenceContext ctx;
    res.integrals.push_back({1.0, 0.0});
    double scale = 1.0;  // z^{n-1} / n!
    for (int n = 1; n <= order; ++n) {
        if (n > 1) scale *= z / n;
        const OrderEstimate est = integrate_a_with(g, n, q, ctx);
        res.integrals.push_back(est);
        res.terms.push_back(scale * est.value);
        res.value += scale * est.value;
        res.quadrature_error_estimate += scale * est.error;
    }
    res.truncation = truncation_report(res.terms);
    res.truncation_error_estimate = res.truncation.estimate;
    if (res.quadrature_error_estimate > q.underresolved_fraction * std::abs(res.value)) {
        std::ostringstream msg;
        msg << "series A under-resolved: quadrature error " << res.quadrature_error_estimate
            << " vs |A| = " << std::abs(res.value);
        throw QuadratureUnderResolved(msg.str());
    }
    return res;
}

RadialSeriesResult series_b(double z, const RadialFunction& g, int order, const QuadratureSpec& q) {
    if (!(z > 0.0)) throw Error("series_b requires z > 0");
    if (order < 1) throw Error("series order must be >= 1");
    RadialSeriesResult res;
    const std::size_t nb = g.size();
    auto& table = res.table;
    table.radii = g.bin_centers();
    table.radii.insert(table.radii.end(), kCoreRadii.begin(), kCoreRadii.end());
    table.b.assign(table.radii.size(), {});

    const int threads = std::max(1, q.threads);
    std::vector<RecurrenceContext> contexts(static_cast<std::size_t>(threads));
    parallel_for(table.radii.size(), threads, [&](std::size_t worker, std::size_t k) {
        auto& row = table.b[k];
        row.reserve(static_cast<std::size_t>(order) + 1);
        for (int n = 0; n <= order; ++n) {
            row.push_back(integrate_b_with(g, table.radii[k], n, q, k, contexts[worker]));
        }
    });

    std::vector<double> scale(static_cast<std::size_t>(order) + 1, 1.0);
    for (int n = 2; n <= order; ++n) scale[static_cast<std::size_t>(n)] = scale[static_cast<std::size_t>(n - 1)] * z / n;

    res.terms.assign(static_cast<std::size_t>(order), std::vector<double>(nb, 0.0));
    res.quadrature_error.assign(nb, 0.0);
    std::vector<double> values(nb, 0.0);
    for (std::size_t k = 0; k < nb; ++k) {
        for (int n = 1; n <= order; ++n) {
            const auto& est = table.b[k][static_cast<std::size_t>(n)];
            const double t = scale[static_cast<std::size_t>(n)] * est.value;
            res.terms[static_cast<std::size_t>(n - 1)][k] = t;
            values[k] += t;
            res.quadrature_error[k] += scale[static_cast<std::size_t>(n)] * est.error;
        }
    }
    double core_sum = 0.0;
    for (std::size_t c = 0; c < kCoreRadii.size(); ++c) {
        double v = 0.0;
        for (int n = 1; n <= order; ++n) {
            v += scale[static_cast<std::size_t>(n)] * table.b[nb + c][static_cast<std::size_t>(n)].value;
        }
        res.core_radii.push_back(kCoreRadii[c]);
        res.core_values.push_back(v);
        core_sum += v;
    }
    res.value = RadialFunction(g.dim(), g.delta(), g.r_max(), values,
                               core_sum / static_cast<double>(kCoreRadii.size()));

    std::vector<double> magnitudes;
    for (const auto& term : res.terms) {
        double m = 0.0;
        for (double t : term) m = std::max(m, std::abs(t));
        magnitudes.push_back(m);
    }
    res.truncation = truncation_report(magnitudes);
    res.truncation_error_estimate = res.truncation.estimate;

    double max_value = 0.0;
    for (std::size_t k = 0; k < nb; ++k) {
        res.quadrature_error_estimate = std::max(res.quadrature_error_estimate, res.quadrature_error[k]);
        max_value = std::max(max_value, std::abs(values[k]));
    }
    if (res.quadrature_error_estimate > q.underresolved_fraction * max_value) {
        std::ostringstream msg;
        msg << "series B under-resolved: quadrature error " << res.quadrature_error_estimate
            << " vs max |B| = " << max_value;
        throw QuadratureUnderResolved(msg.str());
    }
    return res;
}

double smallness_guard_value(double z, const RadialFunction& g) {
    return z * (unit_ball_capacity(g.dim()) + packing_upper(g));
}

ForwardResult forward_cluster(double z, const RadialFunction& g, int order, const QuadratureSpec& q,
                              bool force) {
    ForwardResult out;
    out.guard_value = smallness_guard_value(z, g);
    if (out.guard_value > kSmallnessGuardLimit && !force) {
        std::ostringstream msg;
        msg << "activity " << z << " fails the convergence guard: z*(c0+||g||) = " << out.guard_value
            << " > " << kSmallnessGuardLimit;
        throw SmallnessGuard(msg.str());
    }
    out.a = series_a(z, g, order, q);
    out.b = series_b(z, g, order, q);

    const double z2 = z * z;
    const double z3 = z2 * z;
    out.omega1 = z + z2 * out.a.value;
    std::vector<double> w2(g.size());
    for (std::size_t i = 0; i < w2.size(); ++i) w2[i] = z2 * g[i] + z3 * out.b.value[i];
    out.omega2 = RadialFunction(g.dim(), g.delta(), g.r_max(), std::move(w2),
                                z2 * g.core_value() + z3 * out.b.value.core_value());
    for (double core_b : out.b.core_values) {
        out.core_consistency = std::max(
            out.core_consistency, std::abs(z2 * g.core_value() + z3 * core_b + out.omega1 * out.omega1));
    }
    const auto corr = cluster_to_correlation(ClusterTargets{out.omega1, out.omega2, 0.5});
    out.rho1 = corr.rho1;
    out.rho2 = corr.rho2;
    out.omega1_error = z2 * (out.a.truncation_error_estimate + out.a.quadrature_error_estimate);
    out.omega2_error = z3 * (out.b.truncation_error_estimate + out.b.quadrature_error_estimate);
    return out;
}

}  // namespace gibbsinv
